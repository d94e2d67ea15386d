"""Batch command line: train / predict / eval / calibrate over CSV data.

Exit codes: 0 success, 1 runtime or model-file error, 2 usage or validation
error.  Every subcommand is deterministic given its inputs and --seed;
repeated runs produce byte-identical outputs.

The --cost flag selects exactly one source:

    file:PATH          K x K CSV of costs
    zero-one[:SCALE]   constant off-diagonal (default scale 1)
    detection:BETA     background row 1, false negatives cost BETA
    circular:A:B:G     circular-view detection costs with weights A, B, G
    imbalance-auto     derive per run from a constant-cost baseline
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .boosting import train
from .cascade import calibrate, predict_pruned, trace_matrix
from .costs import (
    CostMatrix,
    load_cost_csv,
    make_01_cost,
    make_circular_view_cost,
    make_detection_cost,
)
from .dataset import load_csv, load_features_csv
from .errors import DimensionMismatch, ValidationError
from .evaluation import AUTO_IMBALANCE, cross_validate, derive_imbalance_cost
from .model_io import ModelFormatError, load_model, save_model
from .solvers import SolverError


class UsageError(ValidationError):
    pass


class _CostAction(argparse.Action):
    """--cost accepts exactly one source; a repeat is a usage error."""

    def __call__(self, parser, namespace, values, option_string=None):
        if getattr(namespace, self.dest, None) is not None:
            parser.error("exactly one cost source may be given (--cost repeated)")
        setattr(namespace, self.dest, values)


def _add_train_flags(p):
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--shrinkage", type=float, default=1.0)
    p.add_argument("--feature-fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="costboost",
        description="Multi-class cost-sensitive boosting over CSV data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model and write it to a file")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--cost", action=_CostAction, default=None)
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--out", help="optional per-round report CSV")
    p.add_argument("--k", type=int, help="label count; inferred when absent")
    _add_train_flags(p)

    p = sub.add_parser("predict", help="label rows of a CSV with a saved model")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default="label", help="column to drop if present")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="prediction CSV (default stdout)")
    p.add_argument("--pruned", action="store_true", help="use calibrated early exits")
    p.add_argument("--trace", help="write per-member score traces to this CSV")
    p.add_argument("--background", type=int, default=1)

    p = sub.add_parser("eval", help="stratified cross-validation report")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--cost", action=_CostAction, default=None)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--compare", choices=["samme"], help="also run a constant-cost model")
    p.add_argument("--scale", type=float, default=1.0, help="report costs divided by this")
    p.add_argument("--out", help="report CSV (default stdout)")
    p.add_argument("--k", type=int)
    _add_train_flags(p)

    p = sub.add_parser("calibrate", help="write cascade thresholds into a model file")
    p.add_argument("--data", required=True, help="CSV of calibration positives")
    p.add_argument("--label-col", default="label")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=["single", "per-stage"], default="single")
    p.add_argument("--background", type=int, default=1)
    p.add_argument("--out", help="output model file (default: in place)")

    return parser


def _check_train_flags(args) -> None:
    if args.rounds < 1:
        raise UsageError("--rounds must be >= 1")
    if args.depth < 1:
        raise UsageError("--depth must be >= 1")
    if not 0.0 < args.shrinkage <= 1.0:
        raise UsageError("--shrinkage must be in (0, 1]")
    if not 0.0 < args.feature_fraction <= 1.0:
        raise UsageError("--feature-fraction must be in (0, 1]")


def _resolve_cost(source: str | None, k: int):
    """Turn a --cost value into a CostMatrix or the auto-imbalance marker."""
    if source is None:
        source = "zero-one"
    head, _, rest = source.partition(":")
    if head == "file":
        if not rest:
            raise UsageError("--cost file: needs a path")
        cost = load_cost_csv(rest)
        if cost.k != k:
            raise UsageError(f"cost file is {cost.k}x{cost.k} but data has {k} classes")
        return cost
    if head == "zero-one":
        scale = float(rest) if rest else 1.0
        return make_01_cost(k, scale)
    if head == "detection":
        if not rest:
            raise UsageError("--cost detection: needs a false-negative weight")
        return make_detection_cost(k - 1, float(rest))
    if head == "circular":
        parts = rest.split(":") if rest else []
        if len(parts) != 3:
            raise UsageError("--cost circular: needs alpha:beta:gamma")
        a, b, g = (float(v) for v in parts)
        return make_circular_view_cost(k - 1, a, b, g)
    if head == AUTO_IMBALANCE:
        return AUTO_IMBALANCE
    raise UsageError(f"unknown cost source {source!r}")


def _align_features(model, names: list[str]) -> None:
    expected = model.feature_names
    if expected is not None and names != list(expected):
        raise DimensionMismatch(
            f"model expects feature columns {list(expected)}, data has {names}"
        )
    if len(names) != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} feature columns, data has {len(names)}"
        )


def cmd_train(args) -> int:
    _check_train_flags(args)
    data = load_csv(args.data, args.label_col, k=args.k)
    cost = _resolve_cost(args.cost, data.k)
    note = ""
    if cost == AUTO_IMBALANCE:
        cost, note = derive_imbalance_cost(
            data, args.rounds, args.depth, args.shrinkage, args.feature_fraction,
            seed=args.seed,
        )
    ensemble, report = train(
        data, cost, args.rounds, args.depth, args.shrinkage,
        args.feature_fraction, args.seed,
    )
    if len(ensemble.members) == 0:
        raise SolverError(
            f"training stopped in round 1 ({report.stop_reason}); no model to save"
        )
    save_model(ensemble, args.model)
    if args.out:
        report.to_csv(args.out)
    last = report.records[-1]
    print(
        f"trained {len(ensemble.members)} members"
        + (f" (stopped: {report.stop_reason})" if report.stop_reason else "")
        + (f" [{note}]" if note else "")
    )
    print(f"final train cost {last.train_cost!r}, loss {last.cmel!r}")
    print(f"model written to {args.model}")
    return 0


def cmd_predict(args) -> int:
    ensemble, thresholds = load_model(args.model)
    names, x = load_features_csv(args.data, drop_column=args.label_col)
    _align_features(ensemble, names)
    if args.pruned and thresholds is None:
        raise UsageError("--pruned needs a calibrated model (run calibrate first)")

    traces = trace_matrix(ensemble, x, background_label=args.background)
    rows = []
    if args.pruned:
        for i in range(x.shape[0]):
            label, used = predict_pruned(ensemble, thresholds, x[i])
            score = traces[i, used - 1] if used > 0 else 0.0
            rows.append((i + 1, label, float(score), used))
    else:
        labels = ensemble.predict_batch(x)
        m = len(ensemble.members)
        for i in range(x.shape[0]):
            rows.append((i + 1, int(labels[i]), float(traces[i, -1]), m))

    lines = ["row,label,score,members_evaluated"]
    lines += [f"{r},{lab},{sc!r},{used}" for r, lab, sc, used in rows]
    _write_lines(args.out, lines)
    if args.trace:
        tlines = ["row,member,score"]
        for i in range(traces.shape[0]):
            tlines += [
                f"{i + 1},{m + 1},{traces[i, m]!r}" for m in range(traces.shape[1])
            ]
        _write_lines(args.trace, tlines)
    return 0


def cmd_eval(args) -> int:
    _check_train_flags(args)
    if args.folds < 2:
        raise UsageError("--folds must be >= 2")
    if args.scale <= 0:
        raise UsageError("--scale must be positive")
    data = load_csv(args.data, args.label_col, k=args.k)
    cost = _resolve_cost(args.cost, data.k)
    report = cross_validate(
        data,
        cost,
        args.folds,
        rounds=args.rounds,
        depth_limit=args.depth,
        shrinkage=args.shrinkage,
        feature_fraction=args.feature_fraction,
        seed=args.seed,
        compare_baseline=args.compare == "samme",
    )
    if args.out:
        report.to_csv(args.out, scale=args.scale)
    summary = f"avg cost {report.mean / args.scale!r} (std {report.std / args.scale!r})"
    if report.mean_baseline is not None:
        summary += (
            f" vs zero-one {report.mean_baseline / args.scale!r}"
            f" (std {report.std_baseline / args.scale!r})"
        )
    print(summary)
    if not args.out:
        lines = _report_lines(report, args.scale)
        print("\n".join(lines))
    return 0


def _report_lines(report, scale):
    with_base = report.mean_baseline is not None
    header = "fold,avg_cost" + (",avg_cost_zero_one" if with_base else "")
    lines = [header]
    for r in report.folds:
        line = f"{r.fold},{r.avg_cost / scale!r}"
        if with_base:
            line += f",{r.avg_cost_baseline / scale!r}"
        lines.append(line)
    return lines


def cmd_calibrate(args) -> int:
    ensemble, _ = load_model(args.model)
    positives = load_csv(args.data, args.label_col, k=ensemble.k)
    mode = "per_stage" if args.mode == "per-stage" else "single"
    thresholds = calibrate(ensemble, positives, mode=mode, background_label=args.background)
    out = args.out or args.model
    save_model(ensemble, out, thresholds)
    print(
        f"calibrated {thresholds.n_calibration} positives"
        f" ({thresholds.n_excluded} excluded); thresholds written to {out}"
    )
    return 0


def _write_lines(path, lines) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "calibrate": cmd_calibrate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelFormatError, SolverError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
