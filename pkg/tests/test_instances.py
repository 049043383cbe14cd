import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predopt.instances import (DEMAND_RANGE, HOLD_COST_RANGE, MSMK_VALUE_RANGE, PROD_COST_RANGE, GenConfig,
                               GenerationError, InstanceError, KnapsackInstance, LotSizingInstance, from_dict,
                               gen_mclsp, gen_msmk, generate, generate_many, load_instance, save_instance, to_dict)


def test_mclsp_ranges_seed1_large():
    inst = gen_mclsp(GenConfig("mclsp", 8, 40, seed=1, cap_ratio=10, setup_to_hold=1000))
    assert inst.demand.shape == (8, 40)
    assert inst.demand.min() >= 500 and inst.demand.max() <= 1500
    assert inst.prod_cost.min() >= 1 and inst.prod_cost.max() <= 200


def test_mclsp_capacity_and_setup_follow_means():
    inst = gen_mclsp(GenConfig("mclsp", 3, 12, seed=5))
    d_bar, h_bar = inst.demand.mean(), inst.hold_cost.mean()
    assert np.all(inst.capacity >= np.ceil(8 * d_bar)) and np.all(inst.capacity <= np.floor(12 * d_bar))
    assert np.all(inst.setup_cost >= np.ceil(900 * h_bar)) and np.all(inst.setup_cost <= np.floor(1100 * h_bar))


def test_identical_config_identical_instance():
    cfg = GenConfig("mclsp", 4, 6, seed=11)
    a, b = generate(cfg), generate(cfg)
    assert a == b
    assert json.dumps(to_dict(a)) == json.dumps(to_dict(b))
    k = GenConfig("msmk", 3, 4, resources=2, seed=3)
    assert generate(k) == generate(k)


def test_cumulative_capacity_invariant_over_1000():
    insts = generate_many(GenConfig("mclsp", 2, 5, seed=0, cap_ratio=10), 1000)
    assert all(i.cumulative_capacity_ok() for i in insts)


def test_unsatisfiable_cap_ratio_raises():
    with pytest.raises(GenerationError, match="cap_ratio"):
        gen_mclsp(GenConfig("mclsp", 8, 5, seed=0, cap_ratio=0.01))


def test_msmk_ranges_seed7():
    inst = gen_msmk(GenConfig("msmk", 8, 30, resources=5, seed=7))
    assert inst.weight.min() >= 1 and inst.weight.max() <= 1000
    col = inst.weight.sum(axis=0)
    assert np.all(inst.capacity >= 0.5 * col) and np.all(inst.capacity <= 0.8 * col)
    assert inst.bonus.shape == (8, 29)


def test_msmk_single_item_cannot_fit():
    inst = gen_msmk(GenConfig("msmk", 1, 6, resources=1, seed=2))
    assert np.all(inst.capacity < inst.weight[0])


def test_field_ranges_over_many_samples():
    insts = generate_many(GenConfig("mclsp", 10, 100, seed=100), 10)
    d = np.concatenate([i.demand.ravel() for i in insts])
    assert d.size >= 10_000
    assert d.min() >= DEMAND_RANGE[0] and d.max() <= DEMAND_RANGE[1]
    for attr, (lo, hi) in (("prod_cost", PROD_COST_RANGE), ("hold_cost", HOLD_COST_RANGE)):
        v = np.concatenate([getattr(i, attr).ravel() for i in insts])
        assert v.min() >= lo and v.max() <= hi
    ks = generate_many(GenConfig("msmk", 10, 50, resources=3, seed=9), 25)
    for attr in ("profit", "bonus", "weight"):
        v = np.concatenate([getattr(i, attr).ravel() for i in ks])
        assert v.size >= 10_000 and v.min() >= MSMK_VALUE_RANGE[0] and v.max() <= MSMK_VALUE_RANGE[1]


def test_all_sampled_values_are_integers():
    inst = gen_mclsp(GenConfig("mclsp", 2, 4, seed=0))
    for a in (inst.demand, inst.prod_cost, inst.setup_cost, inst.hold_cost, inst.capacity):
        assert a.dtype.kind == "i"


@settings(max_examples=30, deadline=None)
@given(fam=st.sampled_from(["mclsp", "msmk"]), I=st.integers(1, 4), T=st.integers(1, 5), J=st.integers(1, 3),
       seed=st.integers(0, 2**32))
def test_roundtrip_property(tmp_path_factory, fam, I, T, J, seed):
    inst = generate(GenConfig(fam, I, T, resources=J, seed=seed))
    path = save_instance(inst, tmp_path_factory.mktemp("rt") / "x.json")
    assert load_instance(path) == inst


def test_roundtrip_generated_mclsp(tmp_path):
    inst = gen_mclsp(GenConfig("mclsp", 3, 7, seed=4))
    assert load_instance(save_instance(inst, tmp_path / "a.json")) == inst


def test_negative_demand_rejected(tmp_path):
    doc = to_dict(gen_mclsp(GenConfig("mclsp", 1, 2, seed=0)))
    doc["demand"][0][1] = -5
    p = tmp_path / "neg.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(InstanceError, match="demand"):
        load_instance(p)


def test_zero_periods_rejected(tmp_path):
    p = tmp_path / "t0.json"
    p.write_text(json.dumps({"family": "mclsp", "I": 1, "T": 0, "demand": [[]], "prod_cost": [[]],
                             "setup_cost": [[]], "hold_cost": [[]], "capacity": []}))
    with pytest.raises(InstanceError, match="T=0"):
        load_instance(p)


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"family": "mclsp",\n "I": }')
    with pytest.raises(InstanceError, match="line 2 column"):
        load_instance(p)


def test_dimension_mismatch_reports_field():
    doc = to_dict(gen_msmk(GenConfig("msmk", 2, 3, resources=2, seed=0)))
    doc["weight"] = doc["weight"][:1]
    with pytest.raises(InstanceError, match="weight"):
        from_dict(doc)


def test_direct_construction_validates():
    with pytest.raises(InstanceError):
        LotSizingInstance(np.ones((2, 3)), np.ones((2, 3)), np.ones((2, 3)), np.ones((2, 2)), np.ones(3))
    with pytest.raises(InstanceError):
        KnapsackInstance(np.ones((1, 3)), np.ones((1, 3)), np.ones((1, 1, 3)), np.ones((1, 3)))


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        GenConfig("tsp", 1, 1)
    with pytest.raises(ValueError):
        GenConfig("mclsp", 1, 1, cap_ratio=0)
