"""Experiment orchestration: baseline, PredOpt and heuristic runs on a generated test set, plus reporting."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..heuristics import FEASIBLE, run_heuristic
from ..instances import GenConfig, generate_many
from ..milp import build_model
from ..nn import Seq2SeqModel
from ..pipeline import (FeatureScaler, NetworkPredictor, PredOptConfig, feature_dim, itemwise_predict, label_dim,
                        predopt_solve)
from ..solver import SolverOptions, get_solver, write_trace_csv
from .metrics import MetricError, accuracy, opt_gap, time_improvement
from .stats import wilcoxon_one_sided

INSTANCE_COLUMNS = ["instanceId", "timeCPX", "timePredOpt", "timeRF_or_AF", "objCPX", "objPredOpt", "objHeur",
                    "accuracy", "finalPredLevel", "loop1Iters", "loop2Iters"]
EXTRA_COLUMNS = ["statusCPX", "statusPredOpt", "feasiblePredOpt", "statusHeur", "timeImpPredOpt", "timeImpHeur",
                 "optGapPredOpt", "optGapHeur", "timeClamped"]
WALL_CLOCK = {"timeCPX", "timePredOpt", "timeRF_or_AF", "timeImpPredOpt", "timeImpHeur", "timeClamped"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: str
    items: int
    periods: int
    checkpoint: str
    count: int = 20
    seed: int = 0
    resources: int = 1
    cap_ratio: float = 10.0
    setup_to_hold: float = 1000.0
    solver: str = "highs"
    time_limit: Optional[float] = 7200.0
    init_pred_level: Optional[float] = None
    reduce_level: float = 0.05
    eta: float = 0.95
    tight_threshold: float = 0.5
    heuristics: bool = True
    itemwise_delta: int = 10
    itemwise_seed: int = 0
    out_dir: Optional[str] = None
    name: str = "experiment"

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        doc = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}: unknown experiment keys {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def gen_config(self) -> GenConfig:
        return GenConfig(self.family, self.items, self.periods, resources=self.resources, seed=self.seed,
                         cap_ratio=self.cap_ratio, setup_to_hold=self.setup_to_hold)

    def predopt_config(self) -> PredOptConfig:
        kw = dict(reduce_level=self.reduce_level, eta=self.eta, tight_threshold=self.tight_threshold,
                  feasibility_opts=SolverOptions(time_limit=self.time_limit, feasibility_only=True),
                  resolve_opts=SolverOptions(time_limit=self.time_limit))
        if self.init_pred_level is not None:
            kw["init_pred_level"] = self.init_pred_level
        return PredOptConfig.for_family(self.family, **kw)


@dataclass
class InstanceRecord:
    instanceId: str
    timeCPX: float
    timePredOpt: float
    timeRF_or_AF: Optional[float]
    objCPX: float
    objPredOpt: float
    objHeur: Optional[float]
    accuracy: float
    finalPredLevel: float
    loop1Iters: int
    loop2Iters: int
    statusCPX: str
    statusPredOpt: str
    feasiblePredOpt: bool
    statusHeur: Optional[str]
    timeImpPredOpt: float
    timeImpHeur: Optional[float]
    optGapPredOpt: Optional[float]
    optGapHeur: Optional[float]
    timeClamped: bool


@dataclass
class ExperimentReport:
    name: str
    records: List[InstanceRecord]
    aggregates: dict
    provenance: dict = field(default_factory=dict)

    def deterministic_view(self) -> dict:
        """Everything except wall-clock dependent fields."""
        recs = [{k: v for k, v in asdict(r).items() if k not in WALL_CLOCK} for r in self.records]
        agg = {k: v for k, v in self.aggregates.items() if not k.startswith(("time", "pValue"))}
        return {"records": recs, "aggregates": agg}


def _mean(values):
    vals = [v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))]
    return float(np.mean(vals)) if vals else None


def aggregate(records: List[InstanceRecord], heuristics: bool) -> dict:
    """Test-set summary; recomputable from the per-instance CSV."""
    agg = {
        "n": len(records),
        "timeCPX": _mean(r.timeCPX for r in records),
        "timePredOpt": _mean(r.timePredOpt for r in records),
        "timeImpPredOpt": _mean(r.timeImpPredOpt for r in records),
        "timeImpPredOpt_ratioOfMeans": None,
        "accuracy(%)": _mean(r.accuracy for r in records),
        "optGapPredOpt(%)": _mean(r.optGapPredOpt for r in records),
        "infeasiblePredOpt": sum(not r.feasiblePredOpt for r in records),
        "finalPredLevel": _mean(r.finalPredLevel for r in records),
    }
    if agg["timePredOpt"]:
        agg["timeImpPredOpt_ratioOfMeans"] = agg["timeCPX"] / max(agg["timePredOpt"], 1e-3)
    if heuristics:
        agg["timeHeur"] = _mean(r.timeRF_or_AF for r in records)
        agg["timeImpHeur"] = _mean(r.timeImpHeur for r in records)
        agg["optGapHeur(%)"] = _mean(r.optGapHeur for r in records)
        agg["failedHeur"] = sum(r.statusHeur != FEASIBLE for r in records)
        diffs = [r.timeRF_or_AF - r.timePredOpt for r in records if r.timeRF_or_AF is not None]
        w = wilcoxon_one_sided(diffs)
        agg["pValue"] = w.p_value
        agg["pValueMethod"] = w.method
    return agg


def _load_checkpoint(cfg: ExperimentConfig):
    path = Path(cfg.checkpoint)
    if not path.is_file():
        raise ConfigError(f"checkpoint {path} does not exist")
    net, meta = Seq2SeqModel.load(path)
    if "scaler" not in meta:
        raise ConfigError(f"checkpoint {path} carries no feature scaler")
    scaler = FeatureScaler.from_dict(meta["scaler"])
    if scaler.family != cfg.family:
        raise ConfigError(f"checkpoint family {scaler.family} differs from experiment family {cfg.family}")
    J = cfg.resources if cfg.family == "msmk" else 1
    model_items = int(meta.get("items", cfg.items))
    if model_items > cfg.items:
        raise ConfigError(f"checkpoint was trained with {model_items} items, test instances have {cfg.items}")
    want_in, want_out = feature_dim(cfg.family, model_items, J), label_dim(cfg.family, model_items, J)
    if (net.config.input_dim, net.config.output_dim) != (want_in, want_out):
        raise ConfigError(f"checkpoint dims {net.config.input_dim}/{net.config.output_dim} do not fit "
                          f"{cfg.family} with I={model_items}, J={J} ({want_in}/{want_out})")
    return NetworkPredictor(net, scaler), model_items


def _gap(z_ref, z):
    if z is None or not np.isfinite(z) or not np.isfinite(z_ref):
        return None
    try:
        return opt_gap(z_ref, z)
    except MetricError:
        return None


def run_experiment(cfg: ExperimentConfig, instances=None, log=None) -> ExperimentReport:
    """Evaluate a checkpoint on a generated (or supplied) test set and write CSV artifacts to ``out_dir``."""
    if cfg.count < 1 and instances is None:
        raise ConfigError("empty test set")
    predictor, model_items = _load_checkpoint(cfg)
    insts = instances if instances is not None else generate_many(cfg.gen_config(), cfg.count)
    if not insts:
        raise ConfigError("empty test set")
    solver = get_solver(cfg.solver)
    pcfg = cfg.predopt_config()
    base_opts = SolverOptions(time_limit=cfg.time_limit)
    out = Path(cfg.out_dir) if cfg.out_dir else None
    if out:
        (out / "traces").mkdir(parents=True, exist_ok=True)

    records = []
    for k, inst in enumerate(insts):
        iid = f"{cfg.name}-{k:04d}-seed{inst.seed}"
        model = build_model(inst)
        base = solver.solve(model, base_opts)
        if out:
            write_trace_csv(base.trace, out / "traces" / f"{iid}.csv")

        t0 = time.perf_counter()
        if model_items < inst.n_items:
            preds = itemwise_predict(predictor, inst, model_items, cfg.itemwise_delta, cfg.itemwise_seed + k)
        else:
            preds = predictor.predict(inst)
        t_pred = time.perf_counter() - t0
        res = predopt_solve(inst, predictor, pcfg, solver, predictions=preds)
        t_po = res.feasibility_time + res.resolve_time + t_pred
        sol = res.solution
        feasible = sol.values is not None and model.is_feasible(sol.values)

        ref_dec = base.solution.values[model.decision_ids] if base.solution.values is not None else None
        acc = accuracy(preds.decision_probs, ref_dec) if ref_dec is not None else math.nan
        imp, clamped = time_improvement(base.wall_time, t_po)

        heur = None
        if cfg.heuristics:
            heur = run_heuristic(inst, solver, base_opts)
        h_obj = heur.objective if heur and heur.status == FEASIBLE else None
        h_imp = time_improvement(heur.wall_time, t_po)[0] if heur else None
        rec = InstanceRecord(
            instanceId=iid, timeCPX=base.wall_time, timePredOpt=t_po,
            timeRF_or_AF=heur.wall_time if heur else None,
            objCPX=base.objective, objPredOpt=sol.objective, objHeur=h_obj,
            accuracy=acc, finalPredLevel=res.final_pred_level,
            loop1Iters=res.feasibility_iterations, loop2Iters=res.resolution_iterations,
            statusCPX=base.status.value, statusPredOpt=sol.status.value, feasiblePredOpt=bool(feasible),
            statusHeur=heur.status if heur else None, timeImpPredOpt=imp, timeImpHeur=h_imp,
            optGapPredOpt=_gap(base.objective, sol.objective) if feasible else None,
            optGapHeur=_gap(base.objective, h_obj), timeClamped=clamped,
        )
        records.append(rec)
        if log:
            log(f"{iid}: objCPX={rec.objCPX:.6g} objPredOpt={rec.objPredOpt:.6g} "
                f"acc={rec.accuracy:.1f}% gap={rec.optGapPredOpt}")

    report = ExperimentReport(cfg.name, records, aggregate(records, cfg.heuristics), {
        "config": asdict(cfg),
        "solver": getattr(solver, "name", cfg.solver),
        "model_items": model_items,
    })
    if out:
        write_instance_csv(records, out / "instances.csv")
        write_report(report, out)
    return report


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_instance_csv(records: List[InstanceRecord], path) -> Path:
    path = Path(path)
    cols = INSTANCE_COLUMNS + EXTRA_COLUMNS
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            d = asdict(r)
            w.writerow([_fmt(d[c]) for c in cols])
    return path


def read_instance_csv(path) -> List[InstanceRecord]:
    types = {f.name: f.type for f in fields(InstanceRecord)}
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for name, raw in row.items():
                t = types[name]
                if raw == "":
                    kw[name] = None
                elif "bool" in t:
                    kw[name] = raw == "True"
                elif "int" in t:
                    kw[name] = int(raw)
                elif "float" in t:
                    kw[name] = float(raw)
                else:
                    kw[name] = raw
            out.append(InstanceRecord(**kw))
    return out


def format_table(aggregates: dict) -> str:
    rows = [(k, "-" if v is None else (f"{v:.4f}" if isinstance(v, float) else str(v))) for k, v in aggregates.items()]
    width = max(len(k) for k, _ in rows)
    vwidth = max(len(v) for _, v in rows)
    return "\n".join(f"{k:<{width}}  {v:>{vwidth}}" for k, v in rows) + "\n"


def write_report(report: ExperimentReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "report.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "value"])
        for k, v in report.aggregates.items():
            w.writerow([k, _fmt(v)])
    (out / "report.txt").write_text(f"{report.name}\n" + format_table(report.aggregates))
    (out / "provenance.json").write_text(json.dumps(report.provenance, indent=2, sort_keys=True, default=str))
    return out / "report.csv"


def report_from_csv(path, name: str = "report", heuristics: Optional[bool] = None) -> ExperimentReport:
    """Rebuild a report from a per-instance CSV."""
    records = read_instance_csv(path)
    if heuristics is None:
        heuristics = any(r.timeRF_or_AF is not None for r in records)
    return ExperimentReport(name, records, aggregate(records, heuristics))
