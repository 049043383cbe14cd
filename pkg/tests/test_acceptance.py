"""Acceptance criteria, one test each, at their stated tolerances.

Criteria 4-6 share one trained model.  Set ``PREDOPT_ACCEPT_CACHE`` to a
directory to keep the labelled dataset and checkpoint between runs.
"""
import itertools
import json
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import rankdata

from predopt.evaluation import ExperimentConfig, run_experiment, wilcoxon_one_sided
from predopt.heuristics import FEASIBLE, adaptive_fixing, relax_and_fix
from predopt.instances import GenConfig, generate, generate_many, to_dict
from predopt.milp import Status, build_model
from predopt.nn import Seq2SeqConfig, Seq2SeqModel, grad_check
from predopt.pipeline import (FeatureScaler, NetworkPredictor, OraclePredictor, PredOptConfig, RandomPredictor,
                              build_dataset, fit_predictor, itemwise_predict, load_dataset, predopt_solve,
                              save_dataset)
from predopt.solver import HighsSolver, brute_force, solve_mip

HIGHS = HighsSolver()

# criterion 4 training recipe
TRAIN_COUNT, TRAIN_SEED, TEST_SEED = 5000, 1000, 500000
HIDDEN, WINDOW = 32, 5


def _rel_close(a, b, tol=1e-6):
    return abs(a - b) <= tol * max(1.0, abs(b))


# ---- 1 ----

MCLSP_SIZES = [(i, t) for i in (1, 2, 3) for t in range(2, 7) if i * t <= 10]
MSMK_SIZES = [(i, t, j) for i in (1, 2, 3, 4) for t in (2, 3, 4) for j in (1, 2) if i * t + i * (t - 1) <= 21]


def test_c1_solver_matches_enumeration(acceptance):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst, mismatches = 0.0, 0
    for k in range(200):
        if k % 2 == 0:
            I, T = MCLSP_SIZES[rng.integers(len(MCLSP_SIZES))]
            inst = generate(GenConfig("mclsp", I, T, seed=k))
        else:
            I, T, J = MSMK_SIZES[rng.integers(len(MSMK_SIZES))]
            inst = generate(GenConfig("msmk", I, T, resources=J, seed=k))
        model = build_model(inst)
        exact, got = brute_force(model), solve_mip(model)
        if exact.status != Status.OPTIMAL or got.status != Status.OPTIMAL:
            mismatches += exact.status != got.status
            continue
        err = abs(got.objective - exact.objective) / max(1.0, abs(exact.objective))
        worst = max(worst, err)
        mismatches += err > 1e-6
    elapsed = time.perf_counter() - t0
    ok = acceptance(1, mismatches == 0 and elapsed < 300,
                    f"mismatches={mismatches} worst_rel={worst:.2e} runtime={elapsed:.1f}s")
    assert ok


# ---- 2 ----

def test_c2_gradients(acceptance):
    rng = np.random.default_rng(7)
    errors = []
    for k in range(5):
        cfg = Seq2SeqConfig(int(rng.integers(1, 5)), int(rng.integers(1, 4)), encoder_hidden=int(rng.integers(1, 4)),
                            layers=int(rng.integers(1, 3)), window=int(rng.integers(0, 3)),
                            dropout=0.0, label_smoothing=float(rng.choice([0.0, 0.1])))
        err, _ = grad_check(cfg, seed=k, T=int(rng.integers(2, 6)), tol=1.0)
        errors.append(err)
    ok = acceptance(2, max(errors) < 1e-3, f"max_rel_err={max(errors):.2e}")
    assert ok


# ---- 3 ----

def _feasibility_instances():
    out = []
    for k in range(50):
        out.append(generate(GenConfig("mclsp", 2 + k % 2, 4 + k % 5, seed=3000 + k)))
        out.append(generate(GenConfig("msmk", 3 + k % 2, 3 + k % 3, resources=1 + k % 2, seed=3000 + k)))
    return out


def test_c3_predopt_feasibility_and_oracle(acceptance):
    insts = _feasibility_instances()
    rnd = RandomPredictor(seed=3)
    oracle = OraclePredictor(HIGHS)
    infeasible = wrong = 0
    for inst in insts:
        model = build_model(inst)
        res = predopt_solve(inst, rnd, PredOptConfig.for_family(inst.family), HIGHS)
        infeasible += res.solution.values is None or not model.is_feasible(res.solution.values)
        opt = solve_mip(model)
        res = predopt_solve(inst, oracle, PredOptConfig.for_family(inst.family, init_pred_level=1.0), HIGHS)
        wrong += res.solution.values is None or not _rel_close(res.solution.objective, opt.objective)
    ok = acceptance(3, infeasible == 0 and wrong == 0,
                    f"instances={len(insts)} random_infeasible={infeasible} oracle_not_optimal={wrong}")
    assert ok


# ---- 4, 5, 6 ----

@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    cache = os.environ.get("PREDOPT_ACCEPT_CACHE")
    root = tmp_path_factory.mktemp("accept") if not cache else Path(cache)
    root.mkdir(parents=True, exist_ok=True)
    data, ckpt = root / "train.jsonl", root / "model.npz"
    t0 = time.perf_counter()
    if not ckpt.is_file():
        if data.is_file():
            samples, header = load_dataset(data)
        else:
            samples, header = build_dataset(GenConfig("mclsp", 2, 10, seed=TRAIN_SEED, cap_ratio=10), TRAIN_COUNT,
                                            HIGHS)
            save_dataset(samples, header, data)
        model, _, meta = fit_predictor(samples, header, hidden=HIDDEN, window=WINDOW, log_every=10)
        model.save(ckpt, meta)
    return ckpt, time.perf_counter() - t0


def _experiment(ckpt, **kw):
    cfg = ExperimentConfig(family="mclsp", checkpoint=str(ckpt), count=20, seed=TEST_SEED, heuristics=False,
                           time_limit=None, **kw)
    return run_experiment(cfg)


def test_c4_scaled_learning(acceptance, trained):
    ckpt, train_time = trained
    t0 = time.perf_counter()
    agg = _experiment(ckpt, items=2, periods=10).aggregates
    total = train_time + time.perf_counter() - t0
    acc, gap, bad = agg["accuracy(%)"], agg["optGapPredOpt(%)"], agg["infeasiblePredOpt"]
    ok = acceptance(4, acc >= 90 and gap is not None and gap <= 2 and bad == 0 and total <= 7200,
                    f"accuracy={acc:.2f}% optGap={gap}% infeasible={bad} end_to_end={total:.0f}s")
    assert ok


def test_c5_longer_horizon(acceptance, trained):
    agg = _experiment(trained[0], items=2, periods=30).aggregates
    gap, bad = agg["optGapPredOpt(%)"], agg["infeasiblePredOpt"]
    ok = acceptance(5, gap is not None and gap <= 3 and bad == 0,
                    f"T=30 optGap={gap}% infeasible={bad} accuracy={agg['accuracy(%)']:.2f}%")
    assert ok


def test_c6_itemwise(acceptance, trained):
    net, meta = Seq2SeqModel.load(trained[0])
    predictor = NetworkPredictor(net, FeatureScaler.from_dict(meta["scaler"]))
    delta = 10
    min_gamma = min(int(itemwise_predict(predictor, inst, 2, delta, seed=k, return_counts=True)[1].min())
                    for k, inst in enumerate(generate_many(GenConfig("mclsp", 4, 10, seed=TEST_SEED), 20)))
    agg = _experiment(trained[0], items=4, periods=10, itemwise_delta=delta).aggregates
    same = all(np.array_equal(itemwise_predict(predictor, inst, 2, delta, seed=3).probs, predictor.predict(inst).probs)
               for inst in generate_many(GenConfig("mclsp", 2, 10, seed=77), 5))
    gap = agg["optGapPredOpt(%)"]
    ok = acceptance(6, min_gamma >= delta and gap is not None and gap <= 5 and same,
                    f"min_gamma={min_gamma} optGap={gap}% infeasible={agg['infeasiblePredOpt']} bit_identical={same}")
    assert ok


# ---- 7 ----

def _enumerated_p(d):
    d = d[d != 0]
    if d.size == 0:
        return 1.0
    r = rankdata(np.abs(d))
    w = r[d > 0].sum()
    hits = sum(r[np.array(s, dtype=bool)].sum() >= w - 1e-9 for s in itertools.product((0, 1), repeat=d.size))
    return hits / 2 ** d.size


def test_c7_wilcoxon_exact(acceptance):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        d = rng.integers(-4, 5, size=n).astype(float) if rng.random() < 0.5 else rng.normal(size=n)
        res = wilcoxon_one_sided(d)
        worst = max(worst, abs(res.p_value - _enumerated_p(d)))
    ok = acceptance(7, worst < 1e-12, f"vectors=1000 max_abs_diff={worst:.1e}")
    assert ok


# ---- 8 ----

def test_c8_heuristics(acceptance):
    failures = beats = checked = 0
    for family, run, small, large in (("mclsp", relax_and_fix, (2, 4, 1), (3, 10, 1)),
                                      ("msmk", adaptive_fixing, (3, 3, 2), (5, 10, 2))):
        for k in range(100):
            I, T, J = small if k < 20 else large
            inst = generate(GenConfig(family, I, T, resources=J, seed=8000 + k))
            model = build_model(inst)
            res = run(inst, HIGHS)
            if res.status != FEASIBLE or not model.is_feasible(res.solution.values):
                failures += 1
                continue
            if k < 20:
                checked += 1
                z = brute_force(model).objective
                better = res.objective < z if model.sense == "min" else res.objective > z
                beats += better and not _rel_close(res.objective, z)
    ok = acceptance(8, failures == 0 and beats == 0,
                    f"runs=200 not_feasible={failures} oracle_checked={checked} beat_optimum={beats}")
    assert ok


# ---- 9 ----

def _strip_times(doc):
    return {k: v for k, v in doc.items() if not k.endswith("_time")}


def test_c9_determinism(acceptance, tmp_path):
    checks = {}
    gen = GenConfig("mclsp", 2, 6, seed=90)
    a, b = generate_many(gen, 5), generate_many(gen, 5)
    checks["generation"] = json.dumps([to_dict(x) for x in a]) == json.dumps([to_dict(x) for x in b])

    for run in range(2):
        samples, header = build_dataset(gen, 30, HIGHS)
        header.pop("gen_seconds")
        save_dataset(samples, header, tmp_path / f"d{run}.jsonl")
        model, _, meta = fit_predictor(samples, header, hidden=4, window=2, epochs=2, seed=5)
        model.save(tmp_path / f"m{run}.npz", meta)
    checks["dataset"] = (tmp_path / "d0.jsonl").read_bytes() == (tmp_path / "d1.jsonl").read_bytes()
    checks["training"] = (tmp_path / "m0.npz").read_bytes() == (tmp_path / "m1.npz").read_bytes()

    net, meta = Seq2SeqModel.load(tmp_path / "m0.npz")
    predictor = NetworkPredictor(net, FeatureScaler.from_dict(meta["scaler"]))
    inst = generate(GenConfig("mclsp", 2, 6, seed=91))
    runs = [_strip_times(predopt_solve(inst, predictor, PredOptConfig.for_family("mclsp"), HIGHS).to_dict())
            for _ in range(2)]
    checks["prediction"] = runs[0] == runs[1]

    views = []
    for run in range(2):
        cfg = ExperimentConfig(family="mclsp", items=2, periods=6, checkpoint=str(tmp_path / "m0.npz"), count=3,
                               seed=92, out_dir=str(tmp_path / f"e{run}"))
        views.append(run_experiment(cfg).deterministic_view())
    checks["evaluation"] = views[0] == views[1]
    ok = acceptance(9, all(checks.values()), " ".join(f"{k}={'ok' if v else 'DIFF'}" for k, v in checks.items()))
    assert ok
