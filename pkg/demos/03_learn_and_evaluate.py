"""Train a small sequence model end to end and evaluate it against exact solving.

This is a shrunken version of the full experiment (1,500 training
instances, short horizon) so it finishes in a couple of minutes.  The
printed table is the same summary ``predopt report`` produces.  Exact
solving takes milliseconds at this size, so expect a time factor below 1;
the point here is accuracy and gap.

    python demos/03_learn_and_evaluate.py [out_dir]
"""
import sys
import tempfile
from pathlib import Path

from predopt.evaluation import ExperimentConfig, format_table, run_experiment
from predopt.instances import GenConfig
from predopt.pipeline import build_dataset, decision_accuracy, fit_predictor
from predopt.solver import HighsSolver

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="predopt-demo-"))
out.mkdir(parents=True, exist_ok=True)

samples, header = build_dataset(GenConfig("mclsp", 2, 6, seed=100), 1500, HighsSolver())
print(f"labelled {len(samples)} instances in {header['gen_seconds']:.1f}s")

model, losses, meta = fit_predictor(samples, header, hidden=32, epochs=40, log_every=0)
print(f"loss {losses[0]:.3f} -> {losses[-1]:.3f}, training accuracy {decision_accuracy(model, samples, 2):.1f}%")
ckpt = model.save(out / "model.npz", meta)

cfg = ExperimentConfig(family="mclsp", items=2, periods=6, checkpoint=str(ckpt), count=10, seed=9000,
                       out_dir=str(out / "eval"), name="demo")
report = run_experiment(cfg)
print(format_table(report.aggregates), end="")
print(f"artifacts in {out}")
