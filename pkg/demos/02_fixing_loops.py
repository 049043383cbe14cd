"""Watch the two fixing loops react to good and bad predictions.

An oracle predictor (exact labels) lets the loops fix everything at once.
A random predictor forces them to back off until the restricted model is
feasible again.  The rolling-horizon and adaptive-fixing heuristics give a
baseline without any learning.

    python demos/02_fixing_loops.py
"""
from predopt.heuristics import run_heuristic
from predopt.instances import GenConfig, generate
from predopt.milp import build_model
from predopt.pipeline import OraclePredictor, PredOptConfig, RandomPredictor, predopt_solve
from predopt.solver import HighsSolver

solver = HighsSolver()
cases = [generate(GenConfig("mclsp", 3, 12, seed=11)), generate(GenConfig("msmk", 4, 8, resources=2, seed=11))]

for inst in cases:
    model = build_model(inst)
    exact = solver.solve(model)
    print(f"\n{inst.family} I={inst.n_items} T={inst.n_periods}: optimum {exact.objective:,.2f}")
    for label, predictor, level in (("oracle", OraclePredictor(solver), 1.0),
                                    ("random", RandomPredictor(seed=0), None)):
        kw = {} if level is None else {"init_pred_level": level}
        res = predopt_solve(inst, predictor, PredOptConfig.for_family(inst.family, **kw), solver)
        ok = model.is_feasible(res.solution.values)
        print(f"  {label:6s}: objective {res.solution.objective:,.2f} feasible={ok} "
              f"final level {res.final_pred_level:.2f} loops {res.feasibility_iterations}/{res.resolution_iterations}")
    heur = run_heuristic(inst, solver)
    print(f"  heuristic: {heur.status} objective {heur.objective:,.2f} in {heur.iterations} solves")
