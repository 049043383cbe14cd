import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predopt.heuristics import FAILURE, FEASIBLE, adaptive_fixing, relax_and_fix, rf_window, run_heuristic
from predopt.instances import GenConfig, KnapsackInstance, LotSizingInstance, generate
from predopt.milp import build_model
from predopt.solver import BranchAndBound, HighsSolver, brute_force

BNB = BranchAndBound()


def test_window_sizes():
    assert rf_window(20) == (2, 1)
    assert rf_window(2) == (1, 1)
    assert rf_window(45) == (5, 3)


def test_rf_tiny_never_beats_optimum(tiny_mclsp):
    res = relax_and_fix(tiny_mclsp, BNB)
    assert res.status == FEASIBLE
    assert res.objective >= 13 - 1e-9
    assert build_model(tiny_mclsp).is_feasible(res.solution.values)


def test_rf_zero_demand():
    z = np.zeros((2, 4), dtype=int)
    inst = LotSizingInstance(z, z + 2, z + 9, z + 1, np.full(4, 10))
    res = relax_and_fix(inst, BNB)
    assert res.status == FEASIBLE and res.objective == 0


def test_rf_failure_is_reported():
    # demand in period 0 exceeds capacity: every window is infeasible
    inst = LotSizingInstance.__new__(LotSizingInstance)
    object.__setattr__(inst, "demand", np.array([[5, 0]]))
    for k, v in (("prod_cost", [[1, 1]]), ("setup_cost", [[1, 1]]), ("hold_cost", [[1, 1]])):
        object.__setattr__(inst, k, np.array(v))
    object.__setattr__(inst, "capacity", np.array([1, 10]))
    object.__setattr__(inst, "seed", None)
    res = relax_and_fix(inst, BNB)
    assert res.status == FAILURE and res.solution.values is None
    assert json.loads(json.dumps(res.to_dict()))["status"] == FAILURE


def test_af_integral_lp_one_iteration():
    inst = KnapsackInstance(np.array([[5, 5]]), np.array([[3]]), np.array([[[1, 1]]]), np.array([[2, 2]]))
    res = adaptive_fixing(inst, BNB)
    assert res.iterations == 1 and res.objective == pytest.approx(13)


def test_af_item_never_fits():
    inst = KnapsackInstance(np.array([[9, 9, 9]]), np.array([[4, 6]]), np.array([[[5, 5, 5]]]),
                            np.array([[3, 3, 3]]))
    res = adaptive_fixing(inst, BNB)
    m = build_model(inst)
    assert np.all(res.solution.values[m.groups["x"]] == 0)
    assert res.objective == pytest.approx(10)


def test_type_checks():
    with pytest.raises(TypeError):
        relax_and_fix(generate(GenConfig("msmk", 1, 2, seed=0)), BNB)
    with pytest.raises(TypeError):
        adaptive_fixing(generate(GenConfig("mclsp", 1, 2, seed=0)), BNB)


def test_run_heuristic_dispatch():
    assert run_heuristic(generate(GenConfig("mclsp", 1, 3, seed=0)), BNB).status == FEASIBLE
    assert run_heuristic(generate(GenConfig("msmk", 2, 2, seed=0)), BNB).status == FEASIBLE


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), I=st.integers(1, 6), T=st.integers(1, 4))
def test_af_vs_oracle(seed, I, T):
    inst = generate(GenConfig("msmk", I, T, resources=2, seed=seed))
    m = build_model(inst)
    res = adaptive_fixing(inst, BNB)
    assert res.status == FEASIBLE and m.is_feasible(res.solution.values)
    ref = brute_force(m).objective if I * T + I * (T - 1) <= 22 else HighsSolver().solve(m).objective
    assert res.objective <= ref + 1e-6 * (1 + abs(ref))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), I=st.integers(1, 3), T=st.integers(2, 6))
def test_rf_vs_exact(seed, I, T):
    inst = generate(GenConfig("mclsp", I, T, seed=seed))
    m = build_model(inst)
    res = relax_and_fix(inst, HighsSolver())
    assert res.status == FEASIBLE and m.is_feasible(res.solution.values)
    assert res.objective >= HighsSolver().solve(m).objective - 1e-6
