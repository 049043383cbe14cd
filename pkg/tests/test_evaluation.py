import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import rankdata

from predopt.evaluation import (ConfigError, ExperimentConfig, MetricError, accuracy, aggregate, format_table,
                                opt_gap, read_instance_csv, report_from_csv, run_experiment, time_improvement,
                                wilcoxon_one_sided)
from predopt.instances import GenConfig
from predopt.nn import Seq2SeqConfig, Seq2SeqModel
from predopt.pipeline import FeatureScaler, feature_dim, label_dim


def test_opt_gap_examples():
    assert opt_gap(100, 100.02) == pytest.approx(0.02)
    assert opt_gap(5, 5) == 0
    assert opt_gap(100, 99) == pytest.approx(1.0)
    with pytest.raises(MetricError):
        opt_gap(0, 1)


@given(st.floats(-1e6, 1e6).filter(lambda v: abs(v) > 1e-3), st.floats(-1e6, 1e6))
def test_opt_gap_nonnegative(z_ref, z_hat):
    g = opt_gap(z_ref, z_hat)
    assert g >= 0 and (g == 0) == (z_ref == z_hat)


def test_time_improvement():
    assert time_improvement(659.2, 3.4)[0] == pytest.approx(193.88, abs=0.01)
    assert time_improvement(2.0, 2.0) == (1.0, False)
    f, clamped = time_improvement(1.0, 0.0)
    assert clamped and f == pytest.approx(1000)


def test_per_instance_mean_exceeds_ratio_of_means():
    base, new = np.array([2.0, 2.6]), np.array([0.1, 0.5])
    per = np.mean([time_improvement(b, n)[0] for b, n in zip(base, new)])
    assert per > base.mean() / new.mean()


def test_accuracy():
    assert accuracy([0.9, 0.1], [1, 0]) == 100
    assert accuracy([0.9, 0.9], [1, 0]) == 50
    with pytest.raises(MetricError):
        accuracy([0.9], [1, 0])


def test_wilcoxon_examples():
    assert wilcoxon_one_sided([1, 2, 3, 4, 5]).p_value == pytest.approx(1 / 32)
    r = wilcoxon_one_sided([2, -1])
    assert r.statistic == 2 and r.p_value == pytest.approx(0.5)
    # W+ = 0: P(W+ >= 0) = 1
    assert wilcoxon_one_sided([-1, -2, -3]).p_value == pytest.approx(1.0)
    d = wilcoxon_one_sided([0, 0, 0])
    assert d.degenerate and d.p_value == 1.0


def _enumerate(diffs):
    d = np.asarray([x for x in diffs if x != 0], dtype=float)
    ranks = rankdata(np.abs(d))
    w = ranks[d > 0].sum()
    hits = 0
    for signs in itertools.product([0, 1], repeat=len(d)):
        if ranks[np.array(signs, dtype=bool)].sum() >= w - 1e-9:
            hits += 1
    return hits / 2 ** len(d)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=10).filter(lambda v: any(v)))
def test_wilcoxon_matches_enumeration(diffs):
    assert wilcoxon_one_sided(diffs).p_value == pytest.approx(_enumerate(diffs), abs=1e-12)


def test_wilcoxon_normal_branch_against_scipy():
    from scipy.stats import wilcoxon
    d = np.random.default_rng(0).normal(0.2, 1, 60)
    r = wilcoxon_one_sided(d)
    assert r.method == "normal"
    assert r.p_value == pytest.approx(wilcoxon(d, alternative="greater", method="approx",
                                               correction=True).pvalue, rel=1e-9)


def _checkpoint(tmp_path, family="mclsp", items=2, J=1, periods=3):
    net = Seq2SeqModel(Seq2SeqConfig(feature_dim(family, items, J), label_dim(family, items, J),
                                     encoder_hidden=4), seed=0)
    scaler = FeatureScaler.from_config(GenConfig(family, items, periods, resources=J))
    return net.save(tmp_path / "m.npz", {"scaler": scaler.to_dict(), "items": items, "family": family})


def _cfg(tmp_path, **kw):
    base = dict(family="mclsp", items=2, periods=3, checkpoint=str(_checkpoint(tmp_path)), count=3, seed=5,
                solver="highs", out_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_experiment_outputs_and_self_consistency(tmp_path):
    cfg = _cfg(tmp_path)
    rep = run_experiment(cfg)
    out = tmp_path / "out"
    header = (out / "instances.csv").read_text().splitlines()[0].split(",")
    assert header[:11] == ["instanceId", "timeCPX", "timePredOpt", "timeRF_or_AF", "objCPX", "objPredOpt",
                           "objHeur", "accuracy", "finalPredLevel", "loop1Iters", "loop2Iters"]
    assert len(list((out / "traces").glob("*.csv"))) == 3
    assert (out / "report.txt").read_text().startswith("experiment")
    again = report_from_csv(out / "instances.csv")
    for k, v in rep.aggregates.items():
        if isinstance(v, float):
            assert again.aggregates[k] == pytest.approx(v, rel=1e-12)
        else:
            assert again.aggregates[k] == v
    assert rep.aggregates["infeasiblePredOpt"] == 0
    assert all(r.statusCPX == "Optimal" for r in rep.records)
    assert "timeImpPredOpt_ratioOfMeans" in rep.aggregates and "pValue" in rep.aggregates


def test_experiment_deterministic(tmp_path):
    a = run_experiment(_cfg(tmp_path, out_dir=None))
    b = run_experiment(_cfg(tmp_path, out_dir=None))
    assert a.deterministic_view() == b.deterministic_view()


def test_experiment_msmk_itemwise(tmp_path):
    ck = _checkpoint(tmp_path, family="msmk", items=2, J=1)
    cfg = ExperimentConfig(family="msmk", items=3, periods=3, checkpoint=str(ck), count=2, solver="highs",
                           itemwise_delta=2)
    rep = run_experiment(cfg)
    assert rep.provenance["model_items"] == 2 and len(rep.records) == 2


def test_experiment_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="empty"):
        run_experiment(_cfg(tmp_path, count=0))
    with pytest.raises(ConfigError, match="does not exist"):
        run_experiment(_cfg(tmp_path, checkpoint=str(tmp_path / "nope.npz")))
    with pytest.raises(ConfigError, match="dims"):
        run_experiment(_cfg(tmp_path, family="mclsp", items=2, checkpoint=str(
            Seq2SeqModel(Seq2SeqConfig(3, 3, encoder_hidden=2)).save(tmp_path / "x.npz", {
                "scaler": FeatureScaler.from_config(GenConfig("mclsp", 2, 3)).to_dict(), "items": 2}))))


def test_config_file(tmp_path):
    p = tmp_path / "e.json"
    p.write_text('{"family": "mclsp", "items": 2, "periods": 3, "checkpoint": "m.npz"}')
    assert ExperimentConfig.from_file(p).count == 20
    p.write_text('{"family": "mclsp", "items": 2, "periods": 3, "checkpoint": "m.npz", "bogus": 1}')
    with pytest.raises(ConfigError, match="bogus"):
        ExperimentConfig.from_file(p)


def test_format_table_aligned():
    text = format_table({"timeCPX": 1.5, "n": 20, "pValue": None})
    lines = text.splitlines()
    assert len({len(line) for line in lines}) == 1
    assert lines[2].endswith("-")


def test_aggregate_handles_missing_gaps(tmp_path):
    rep = run_experiment(_cfg(tmp_path, heuristics=False, out_dir=None))
    agg = aggregate(rep.records, heuristics=False)
    assert "pValue" not in agg and agg["n"] == 3
    assert not math.isnan(agg["accuracy(%)"])
