"""JSON-lines datasets of (feature rows, label rows) pairs with a leading dims header."""
from __future__ import annotations

import json
import time
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from ..instances import GenConfig, KnapsackInstance, generate_many
from ..milp import Status, build_model
from ..solver import SolverOptions
from .features import FeatureScaler, encode_features, extract_labels, feature_dim, label_dim

FORMAT = "predopt-dataset"


class DatasetError(ValueError):
    pass


def build_dataset(config: GenConfig, count: int, solver, eta: float = 0.95,
                  scaler: Optional[FeatureScaler] = None, opts: SolverOptions = SolverOptions()):
    """Generate ``count`` instances, solve them and return ``(samples, header)``.

    Instances whose solve is not proven optimal are skipped and counted.
    """
    scaler = scaler or FeatureScaler.from_config(config)
    samples: List[Tuple[np.ndarray, np.ndarray]] = []
    skipped = 0
    t0 = time.perf_counter()
    for inst in generate_many(config, count):
        model = build_model(inst)
        res = solver.solve(model, opts)
        if res.status != Status.OPTIMAL:
            skipped += 1
            continue
        samples.append((encode_features(inst, scaler).rows, extract_labels(inst, res.solution, eta, model)))
    J = config.resources if config.family == "msmk" else 1
    header = {
        "format": FORMAT,
        "family": config.family,
        "items": config.items,
        "periods": config.periods,
        "resources": J,
        "feature_dim": feature_dim(config.family, config.items, J),
        "label_dim": label_dim(config.family, config.items, J),
        "eta": eta,
        "seed": config.seed,
        "count": len(samples),
        "skipped": skipped,
        "solver": getattr(solver, "name", type(solver).__name__),
        "scaler": scaler.to_dict(),
        "gen_seconds": time.perf_counter() - t0,
    }
    return samples, header


def save_dataset(samples, header: dict, path) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(json.dumps(header) + "\n")
        for X, Y in samples:
            fh.write(json.dumps({"features": np.asarray(X).tolist(),
                                 "labels": np.asarray(Y).astype(int).tolist()}) + "\n")
    return path


def load_dataset(path):
    """Return ``(samples, header)``; raises :class:`DatasetError` with the offending line."""
    path = Path(path)
    samples = []
    with path.open() as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}:1: bad header: {exc.msg}") from exc
        if header.get("format") != FORMAT:
            raise DatasetError(f"{path}:1: not a {FORMAT} file")
        fd, ld = header["feature_dim"], header["label_dim"]
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                X = np.asarray(rec["features"], dtype=np.float64)
                Y = np.asarray(rec["labels"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError) as exc:
                raise DatasetError(f"{path}:{lineno}: malformed record ({exc})") from exc
            if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != fd or Y.shape[1] != ld or X.shape[0] != Y.shape[0]:
                raise DatasetError(f"{path}:{lineno}: shapes {X.shape}/{Y.shape} do not match header dims {fd}/{ld}")
            samples.append((X, Y))
    return samples, header


def scaler_for(inst) -> FeatureScaler:
    """Generator-bound scaler matching an instance's family and size."""
    fam = "msmk" if isinstance(inst, KnapsackInstance) else "mclsp"
    J = inst.n_resources if fam == "msmk" else 1
    return FeatureScaler.from_config(GenConfig(fam, inst.n_items, inst.n_periods, resources=J))
