"""Detection scores and early-exit calibration for soft cascades.

Scoring: with predicted costs c = C* f(x), the detection score is the
background's predicted cost minus the cheapest positive class's.  It is
positive exactly when some positive class beats the background.

Calibration follows backward pruning from positive score traces: evaluate
the score after each member for every calibration positive, then set
rejection thresholds that no retained positive's trace ever falls under.
Per-stage mode keeps the elementwise minimum of the traces; single mode
keeps one scalar, the lowest point reached by any retained trace (the trace
of the positive with the lowest final score alone is not a safe floor, since
another positive can dip lower mid-trace).  Early-exit evaluation then
returns the background label the first time a partial score drops strictly
below the applicable threshold, so pruning can only turn labels into
background, never into another class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import Ensemble
from .dataset import Dataset
from .errors import ValidationError


@dataclass(frozen=True)
class CascadeThresholds:
    """Rejection thresholds: one scalar ("single") or one value per member
    ("per_stage"), plus the background label they were calibrated for."""

    mode: str
    values: np.ndarray
    n_members: int
    background_label: int = 1
    n_calibration: int = 0
    n_excluded: int = 0

    def __post_init__(self):
        if self.mode not in ("single", "per_stage"):
            raise ValidationError(f"unknown threshold mode {self.mode!r}")
        vals = np.atleast_1d(np.asarray(self.values, dtype=np.float64)).copy()
        if not np.all(np.isfinite(vals)):
            raise ValidationError("thresholds must be finite")
        expected = 1 if self.mode == "single" else self.n_members
        if vals.shape != (expected,):
            raise ValidationError(
                f"{self.mode} thresholds need {expected} values, got {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def at_stage(self, m: int) -> float:
        return float(self.values[0] if self.mode == "single" else self.values[m])


def _cost_code_table(ensemble: Ensemble) -> np.ndarray:
    # column j = change of the predicted-cost vector per unit step when a
    # member predicts label j+1
    return ensemble.extended.c_star @ ensemble.codes.codes.T


def score_from_costs(costs, background_label: int = 1) -> float:
    """Background predicted cost minus the cheapest non-background cost."""
    c = np.asarray(costs, dtype=np.float64)
    if c.ndim != 1 or c.size < 2:
        raise ValidationError("need a cost vector of length >= 2")
    bg = background_label - 1
    if not 0 <= bg < c.size:
        raise ValidationError(f"background label {background_label} outside 1..{c.size}")
    rest = np.delete(c, bg)
    return float(c[bg] - rest.min())


def trace_matrix(ensemble: Ensemble, x, background_label: int = 1) -> np.ndarray:
    """Per-sample, per-member partial detection scores, shape (n, M)."""
    x = ensemble._check_matrix(x)
    n = x.shape[0]
    m = len(ensemble.members)
    table = _cost_code_table(ensemble)
    bg = background_label - 1
    if not 0 <= bg < ensemble.k:
        raise ValidationError(f"background label {background_label} outside 1..{ensemble.k}")
    pos_cols = [j for j in range(ensemble.k) if j != bg]
    costs = np.zeros((n, ensemble.k))
    out = np.empty((n, m))
    for idx, (beta, tree) in enumerate(ensemble.members):
        preds = tree.predict_batch(x)
        costs += beta * table[:, preds - 1].T
        out[:, idx] = costs[:, bg] - costs[:, pos_cols].min(axis=1)
    return out


def score_trace(ensemble: Ensemble, x, background_label: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return trace_matrix(ensemble, x[None, :], background_label)[0]


def detection_score(ensemble: Ensemble, x, background_label: int = 1) -> float:
    """Final detection score of one sample; 0 for an empty ensemble."""
    if len(ensemble.members) == 0:
        f = ensemble.margin_vector(x)  # validates the dimension
        return score_from_costs(ensemble.extended.c_star @ f, background_label)
    return float(score_trace(ensemble, x, background_label)[-1])


def thresholds_from_traces(
    traces,
    mode: str,
    *,
    background_label: int = 1,
    n_excluded: int = 0,
) -> CascadeThresholds:
    """Thresholds guaranteeing that no trace in ``traces`` is pruned."""
    t = np.asarray(traces, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] < 1:
        raise ValidationError("need at least one retained trace")
    if mode == "per_stage":
        values = t.min(axis=0)
    elif mode == "single":
        values = np.array([t.min()])
    else:
        raise ValidationError(f"unknown threshold mode {mode!r}")
    return CascadeThresholds(
        mode=mode,
        values=values,
        n_members=t.shape[1],
        background_label=background_label,
        n_calibration=t.shape[0],
        n_excluded=n_excluded,
    )


def calibrate(
    ensemble: Ensemble,
    positives: Dataset,
    mode: str = "single",
    background_label: int = 1,
) -> CascadeThresholds:
    """Calibrate rejection thresholds on positive samples.

    Samples labeled as background or whose final score is not positive are
    excluded (their count is recorded on the result); every retained
    positive keeps its prediction under pruned evaluation.
    """
    if len(ensemble.members) == 0:
        raise ValidationError("cannot calibrate an empty ensemble")
    traces = trace_matrix(ensemble, positives.features, background_label)
    retained = (positives.labels != background_label) & (traces[:, -1] > 0)
    n_excluded = int(positives.n_samples - retained.sum())
    if not retained.any():
        raise ValidationError("no calibration positives retained (labels or scores)")
    return thresholds_from_traces(
        traces[retained],
        mode,
        background_label=background_label,
        n_excluded=n_excluded,
    )


def predict_pruned(
    ensemble: Ensemble, thresholds: CascadeThresholds, x
) -> tuple[int, int]:
    """Evaluate members in order, exiting with the background label the
    first time the partial score falls below the stage threshold.  Returns
    (label, members_evaluated).
    """
    if thresholds.n_members != len(ensemble.members):
        raise ValidationError(
            f"thresholds were calibrated for {thresholds.n_members} members, "
            f"model has {len(ensemble.members)}"
        )
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (ensemble.n_features,):
        raise ValidationError(
            f"model expects {ensemble.n_features} features, got shape {x.shape}"
        )
    bg = thresholds.background_label - 1
    pos_cols = [j for j in range(ensemble.k) if j != bg]
    table = _cost_code_table(ensemble)
    costs = np.zeros(ensemble.k)
    for m, (beta, tree) in enumerate(ensemble.members):
        costs += beta * table[:, tree.predict(x) - 1]
        score = costs[bg] - costs[pos_cols].min()
        if score < thresholds.at_stage(m):
            return thresholds.background_label, m + 1
    return int(np.argmin(costs)) + 1, len(ensemble.members)
