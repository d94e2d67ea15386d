"""Metrics, confusion-derived cost matrices, and stratified cross-validation.

The imbalance recipe turns a baseline confusion matrix into costs: divide
each row by its class count, zero the diagonal, scale so the largest entry
is 1 (or by a caller-supplied factor).  Rows the baseline classifies
perfectly would otherwise be all-zero, so they are filled with one phantom
error spread over the wrong labels at the row's resolution limit; a fully
perfect baseline raises PerfectBaseline so the caller can fall back to a
constant off-diagonal matrix.

Cross-validation assigns folds per class round-robin after a seeded shuffle
and, in auto-imbalance mode, derives each fold's cost matrix from a
constant-cost baseline trained on an internal 80/20 split of the training
fold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import train
from .costs import CostMatrix, make_01_cost
from .dataset import Dataset
from .errors import ValidationError
from .seeding import FOLD_STREAM, child_rng, child_seed

AUTO_IMBALANCE = "imbalance-auto"


class PerfectBaseline(RuntimeError):
    """Baseline confusion has no errors at all; derive nothing from it and
    fall back to a constant off-diagonal matrix."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = samples of true class i+1 predicted as j+1."""

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.int64).copy()
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError("confusion matrix must be square")
        if np.any(arr < 0):
            raise ValidationError("confusion counts must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def confusion(predictions, truths, k: int) -> ConfusionMatrix:
    preds = np.asarray(predictions, dtype=np.int64)
    labs = np.asarray(truths, dtype=np.int64)
    if preds.shape != labs.shape or preds.ndim != 1:
        raise ValidationError("predictions and truths must be equal-length vectors")
    for name, arr in (("prediction", preds), ("truth", labs)):
        if arr.size and (arr.min() < 1 or arr.max() > k):
            raise ValidationError(f"{name} labels outside 1..{k}")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (labs - 1, preds - 1), 1)
    return ConfusionMatrix(counts)


def average_cost(predictions, truths, cost: CostMatrix) -> float:
    """Mean of C(truth, prediction); with a constant off-diagonal matrix of
    scale 1 this is exactly the misclassification rate."""
    preds = np.asarray(predictions, dtype=np.int64)
    labs = np.asarray(truths, dtype=np.int64)
    if preds.shape != labs.shape or preds.ndim != 1 or preds.size == 0:
        raise ValidationError("predictions and truths must be equal-length nonempty vectors")
    k = cost.k
    if preds.min() < 1 or preds.max() > k or labs.min() < 1 or labs.max() > k:
        raise ValidationError(f"labels outside 1..{k}")
    return float(cost.entries[labs - 1, preds - 1].mean())


def imbalance_cost_matrix(conf: ConfusionMatrix, lam="auto") -> CostMatrix:
    """Cost matrix from a baseline confusion: row-normalize, zero the
    diagonal, scale by lam ("auto" puts the largest entry at 1)."""
    row_sums = conf.row_sums()
    if np.any(row_sums <= 0):
        bad = [i + 1 for i in np.nonzero(row_sums <= 0)[0]]
        raise ValidationError(f"classes {bad} never seen by the baseline")
    fstar = conf.counts / row_sums[:, None]
    np.fill_diagonal(fstar, 0.0)
    if not np.any(fstar > 0):
        raise PerfectBaseline(
            "baseline classifier makes no errors; use a constant off-diagonal "
            "cost matrix instead"
        )
    k = conf.k
    perfect_rows = fstar.sum(axis=1) == 0
    for i in np.nonzero(perfect_rows)[0]:
        # below one error in row_sums[i] samples; spread the resolution limit
        fstar[i, :] = (1.0 / row_sums[i]) / (k - 1)
        fstar[i, i] = 0.0
    if lam == "auto":
        lam = 1.0 / float(fstar.max())
    elif not (isinstance(lam, (int, float)) and lam > 0):
        raise ValidationError("lam must be 'auto' or a positive number")
    return CostMatrix(lam * fstar)


def stratified_folds(data: Dataset, folds: int, seed: int) -> np.ndarray:
    """Fold index per sample: per-class round-robin after a seeded shuffle,
    so per-fold class proportions track the global ones."""
    if folds < 2:
        raise ValidationError("need at least 2 folds")
    counts = data.class_counts()
    too_small = [c + 1 for c in range(data.k) if counts[c] < folds]
    if too_small:
        raise ValidationError(
            f"classes {too_small} have fewer than {folds} samples; cannot stratify"
        )
    rng = child_rng(seed, FOLD_STREAM)
    assignment = np.empty(data.n_samples, dtype=np.int64)
    for c in range(1, data.k + 1):
        idx = np.nonzero(data.labels == c)[0]
        idx = rng.permutation(idx)
        assignment[idx] = np.arange(idx.size) % folds
    return assignment


@dataclass
class FoldResult:
    fold: int
    avg_cost: float
    confusion: ConfusionMatrix
    avg_cost_baseline: float | None = None
    cost_note: str = ""


@dataclass
class CrossValReport:
    folds: list
    mean: float
    std: float
    mean_baseline: float | None = None
    std_baseline: float | None = None

    def to_csv(self, path, scale: float = 1.0) -> None:
        with_baseline = self.mean_baseline is not None
        with open(path, "w", encoding="utf-8") as fh:
            header = "fold,avg_cost"
            if with_baseline:
                header += ",avg_cost_zero_one"
            fh.write(header + "\n")
            for r in self.folds:
                line = f"{r.fold},{r.avg_cost / scale!r}"
                if with_baseline:
                    line += f",{r.avg_cost_baseline / scale!r}"
                fh.write(line + "\n")
            mean_line = f"mean,{self.mean / scale!r}"
            std_line = f"std,{self.std / scale!r}"
            if with_baseline:
                mean_line += f",{self.mean_baseline / scale!r}"
                std_line += f",{self.std_baseline / scale!r}"
            fh.write(mean_line + "\n")
            fh.write(std_line + "\n")


def derive_imbalance_cost(
    data: Dataset,
    rounds: int,
    depth_limit: int,
    shrinkage: float = 1.0,
    feature_fraction: float = 1.0,
    seed: int = 0,
    kernel=None,
) -> tuple[CostMatrix, str]:
    """Confusion-derived cost matrix from a constant-cost baseline trained
    on an internal 80/20 split of ``data`` (confusions measured on the held
    out 20% to avoid optimistic error patterns)."""
    k = data.k
    inner = stratified_folds(data, 5, child_seed(seed, FOLD_STREAM, 1))
    holdout = inner == 0
    baseline_cost = make_01_cost(k, 1.0 / (k * (k - 1)))
    model, _ = train(
        data.subset(~holdout),
        baseline_cost,
        rounds,
        depth_limit,
        shrinkage,
        feature_fraction,
        seed=child_seed(seed, FOLD_STREAM, 2),
        kernel=kernel,
    )
    held = data.subset(holdout)
    conf = confusion(model.predict_batch(held.features), held.labels, k)
    try:
        return imbalance_cost_matrix(conf, "auto"), ""
    except PerfectBaseline:
        return baseline_cost, "perfect-baseline-fallback"


def cross_validate(
    data: Dataset,
    cost,
    folds: int = 5,
    *,
    rounds: int = 100,
    depth_limit: int = 4,
    shrinkage: float = 1.0,
    feature_fraction: float = 1.0,
    seed: int = 0,
    compare_baseline: bool = False,
    eval_cost: CostMatrix | None = None,
    kernel=None,
) -> CrossValReport:
    """K-fold cross-validation of the booster.

    ``cost`` is a CostMatrix or the string "imbalance-auto", which derives a
    matrix per training fold from a constant-cost baseline.  Each fold is
    scored with ``eval_cost`` when given, otherwise with its own training
    matrix.  ``compare_baseline`` also trains a constant-cost model per fold
    and scores it under the same evaluation matrix.
    """
    assignment = stratified_folds(data, folds, seed)
    k = data.k
    samme_cost = make_01_cost(k, 1.0 / (k * (k - 1)))
    results = []
    for f in range(folds):
        test_mask = assignment == f
        train_data = data.subset(~test_mask)
        test_data = data.subset(test_mask)
        note = ""
        if isinstance(cost, str):
            if cost != AUTO_IMBALANCE:
                raise ValidationError(f"unknown cost mode {cost!r}")
            fold_cost, note = derive_imbalance_cost(
                train_data,
                rounds,
                depth_limit,
                shrinkage,
                feature_fraction,
                seed=child_seed(seed, FOLD_STREAM, 10 + f),
                kernel=kernel,
            )
        else:
            fold_cost = cost
        scoring = eval_cost if eval_cost is not None else fold_cost

        model, _ = train(
            train_data,
            fold_cost,
            rounds,
            depth_limit,
            shrinkage,
            feature_fraction,
            seed=child_seed(seed, FOLD_STREAM, 20 + f),
            kernel=kernel,
        )
        preds = model.predict_batch(test_data.features)
        result = FoldResult(
            fold=f,
            avg_cost=average_cost(preds, test_data.labels, scoring),
            confusion=confusion(preds, test_data.labels, k),
            cost_note=note,
        )
        if compare_baseline:
            base, _ = train(
                train_data,
                samme_cost,
                rounds,
                depth_limit,
                shrinkage,
                feature_fraction,
                seed=child_seed(seed, FOLD_STREAM, 30 + f),
                kernel=kernel,
            )
            base_preds = base.predict_batch(test_data.features)
            result.avg_cost_baseline = average_cost(base_preds, test_data.labels, scoring)
        results.append(result)

    costs = np.array([r.avg_cost for r in results])
    report = CrossValReport(
        folds=results,
        mean=float(costs.mean()),
        std=float(costs.std(ddof=1)),
    )
    if compare_baseline:
        base_costs = np.array([r.avg_cost_baseline for r in results])
        report.mean_baseline = float(base_costs.mean())
        report.std_baseline = float(base_costs.std(ddof=1))
    return report
