"""Command-line entry point: ``python -m predopt {gen,solve,train,predict,eval,report}``.

Every verb accepts ``--experiment FILE``: a JSON document whose section named
after the verb supplies defaults (keys are the long option names with dashes
or underscores).  Explicit flags override the file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .instances import GenConfig, generate_many, load_instance, save_instance

log = logging.getLogger("predopt")


class UsageError(Exception):
    pass


def _gen_args(p, count_default=20):
    p.add_argument("--family", choices=["mclsp", "msmk"])
    p.add_argument("--items", type=int)
    p.add_argument("--periods", type=int)
    p.add_argument("--resources", type=int, default=1)
    p.add_argument("--cap-ratio", type=float, default=10.0)
    p.add_argument("--setup-to-hold", type=float, default=1000.0)
    p.add_argument("--count", type=int, default=count_default)
    p.add_argument("--seed", type=int, default=0)


def _gen_config(a) -> GenConfig:
    for name in ("family", "items", "periods"):
        if getattr(a, name) is None:
            raise UsageError(f"--{name} is required")
    return GenConfig(a.family, a.items, a.periods, resources=a.resources, seed=a.seed, cap_ratio=a.cap_ratio,
                     setup_to_hold=a.setup_to_hold)


def cmd_gen(a):
    if not a.out:
        raise UsageError("--out is required")
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _gen_config(a)
    for inst in generate_many(cfg, a.count):
        path = save_instance(inst, out / f"{cfg.family}_I{cfg.items}_T{cfg.periods}_s{inst.seed}.json")
        print(path)


def cmd_solve(a):
    from .milp import build_model
    from .solver import SolverOptions, get_solver, write_trace_csv

    if not a.instance:
        raise UsageError("an instance file is required")
    model = build_model(load_instance(a.instance))
    if a.lp:
        Path(a.lp).write_text(model.to_lp_text())
    res = get_solver(a.solver).solve(model, SolverOptions(time_limit=a.time_limit, node_limit=a.node_limit))
    if a.trace:
        write_trace_csv(res.trace, a.trace)
    doc = {"status": res.status.value, "objective": res.objective if res.found_solution else None,
           "best_bound": res.best_bound, "nodes": res.nodes, "wall_time": res.wall_time,
           "values": res.solution.values.tolist() if res.found_solution else None}
    _emit(doc, a.json)


def cmd_train(a):
    from .pipeline import build_dataset, fit_predictor, load_dataset, save_dataset
    from .solver import get_solver

    if not a.out:
        raise UsageError("--out is required")
    if a.dataset and Path(a.dataset).is_file():
        samples, header = load_dataset(a.dataset)
        log.info("loaded %d samples from %s", len(samples), a.dataset)
    else:
        samples, header = build_dataset(_gen_config(a), a.count, get_solver(a.solver), eta=a.eta)
        log.info("labelled %d instances (%d skipped)", len(samples), header["skipped"])
        if a.dataset:
            save_dataset(samples, header, a.dataset)
    model, losses, meta = fit_predictor(samples, header, hidden=a.hidden, window=a.window, layers=a.layers,
                                        epochs=a.epochs, lr=a.lr, batch_size=a.batch_size, dropout=a.dropout,
                                        lr_decay=a.lr_decay, stitch=a.stitch, seed=a.train_seed,
                                        log_every=1)
    model.save(a.out, meta)
    print(json.dumps({"checkpoint": str(a.out), "losses": losses}))


def cmd_predict(a):
    from .milp import build_model
    from .nn import Seq2SeqModel
    from .pipeline import FeatureScaler, NetworkPredictor, PredOptConfig, itemwise_predict, predopt_solve
    from .solver import SolverOptions, get_solver

    if not a.checkpoint or not a.instance:
        raise UsageError("--checkpoint and an instance file are required")
    net, meta = Seq2SeqModel.load(a.checkpoint)
    predictor = NetworkPredictor(net, FeatureScaler.from_dict(meta["scaler"]))
    inst = load_instance(a.instance)
    model_items = int(meta.get("items", inst.n_items))
    preds = None
    if model_items < inst.n_items:
        preds = itemwise_predict(predictor, inst, model_items, a.delta, a.seed)
    kw = dict(reduce_level=a.reduce_level, eta=a.eta,
              feasibility_opts=SolverOptions(time_limit=a.time_limit, feasibility_only=True),
              resolve_opts=SolverOptions(time_limit=a.time_limit))
    if a.pred_level is not None:
        kw["init_pred_level"] = a.pred_level
    res = predopt_solve(inst, predictor, PredOptConfig.for_family(inst.family, **kw), get_solver(a.solver),
                        predictions=preds)
    doc = res.to_dict()
    doc["feasible"] = res.solution.values is not None and build_model(inst).is_feasible(res.solution.values)
    _emit(doc, a.json)


def cmd_eval(a):
    from dataclasses import fields

    from .evaluation import ExperimentConfig, format_table, run_experiment

    section = getattr(a, "_section", {})
    names = {f.name for f in fields(ExperimentConfig)}
    kw = {k: v for k, v in section.items() if k in names}
    for k in names:
        v = getattr(a, k, None)
        if v is not None:
            kw[k] = v
    try:
        cfg = ExperimentConfig(**kw)
    except TypeError as exc:
        raise UsageError(f"incomplete experiment configuration: {exc}") from exc
    report = run_experiment(cfg, log=log.info)
    print(format_table(report.aggregates), end="")


def cmd_report(a):
    from .evaluation import format_table, report_from_csv, write_report

    if not a.csv:
        raise UsageError("--csv is required")
    report = report_from_csv(a.csv, name=Path(a.csv).stem)
    if a.out:
        write_report(report, a.out)
    print(format_table(report.aggregates), end="")


def _emit(doc, path):
    text = json.dumps(doc, indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="predopt",
                                     description="Prediction-guided variable fixing for lot-sizing and knapsack MILPs.")
    parser.add_argument("--experiment", help="JSON file with one section of defaults per verb")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="generate instance files")
    _gen_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve one instance exactly")
    p.add_argument("instance", nargs="?")
    p.add_argument("--solver", default="bundled", choices=["bundled", "highs"])
    p.add_argument("--time-limit", type=float)
    p.add_argument("--node-limit", type=int)
    p.add_argument("--trace", help="write the incumbent trace CSV here")
    p.add_argument("--lp", help="write the model in LP text form here")
    p.add_argument("--json", help="write the result JSON here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("train", help="label generated instances and train a model")
    _gen_args(p, count_default=5000)
    p.add_argument("--solver", default="highs", choices=["bundled", "highs"])
    p.add_argument("--eta", type=float, default=0.95)
    p.add_argument("--dataset", help="JSONL dataset to reuse if present, else written here")
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--lr-decay", type=float, default=0.97)
    p.add_argument("--stitch", type=float, default=0.3, help="share of batches glued from period slices")
    p.add_argument("--train-seed", type=int, default=0)
    p.add_argument("--out", help="checkpoint path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="run PredOpt on one instance with a trained model")
    p.add_argument("instance", nargs="?")
    p.add_argument("--checkpoint")
    p.add_argument("--solver", default="highs", choices=["bundled", "highs"])
    p.add_argument("--pred-level", type=float)
    p.add_argument("--reduce-level", type=float, default=0.05)
    p.add_argument("--eta", type=float, default=0.95)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--delta", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="run a full experiment on a generated test set")
    p.add_argument("--family", choices=["mclsp", "msmk"])
    p.add_argument("--items", type=int)
    p.add_argument("--periods", type=int)
    p.add_argument("--resources", type=int)
    p.add_argument("--cap-ratio", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint")
    p.add_argument("--solver", choices=["bundled", "highs"])
    p.add_argument("--time-limit", type=float)
    p.add_argument("--init-pred-level", type=float)
    p.add_argument("--no-heuristics", dest="heuristics", action="store_false", default=None)
    p.add_argument("--out-dir")
    p.add_argument("--name")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="rebuild the summary table from a per-instance CSV")
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def _apply_experiment(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--experiment")
    known, _ = pre.parse_known_args(argv)
    if not known.experiment:
        return {}
    try:
        doc = json.loads(Path(known.experiment).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read experiment file {known.experiment}: {exc}") from exc
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sections = {}
    for verb, sp in subparsers.choices.items():
        section = {k.replace("-", "_"): v for k, v in doc.get(verb, {}).items()}
        sections[verb] = section
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in section.items() if k in dests})
    return sections


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        sections = _apply_experiment(parser, argv)
        args = parser.parse_args(argv)
        args._section = sections.get(args.verb, {})
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError) as exc:
        print(f"predopt: error: {exc}", file=sys.stderr)
        return 1
    return 0
