"""Generate a small lot-sizing instance, look at its model, and solve it three ways.

The bundled branch-and-bound, SciPy's HiGHS and exhaustive enumeration
should agree on the optimum.  The incumbent trace shows how the bundled
solver closes in on it.

    python demos/01_exact_solving.py
"""
from predopt.instances import GenConfig, generate
from predopt.milp import build_model
from predopt.solver import HighsSolver, brute_force, solve_mip

inst = generate(GenConfig("mclsp", items=2, periods=4, seed=3))
model = build_model(inst)
print(f"{model.n_vars} variables, {len(model.constraints)} constraints ({model.sense})")
print("\n".join(model.to_lp_text().splitlines()[:8]), "\n...")

bnb = solve_mip(model)
print(f"\nbundled B&B : {bnb.status.value:8s} objective {bnb.objective:,.2f} after {bnb.nodes} nodes")
for elapsed, z in bnb.trace:
    print(f"    incumbent {z:,.2f} at {elapsed * 1000:.1f} ms")

hs = HighsSolver().solve(model)
print(f"HiGHS       : {hs.status.value:8s} objective {hs.objective:,.2f}")
bf = brute_force(model)
print(f"enumeration : {bf.status.value:8s} objective {bf.objective:,.2f}")
