"""Cost-matrix algebra, label codes, margins, losses and decision rules.

A K x K cost matrix C holds the penalty C(i, j) >= 0 for predicting class j
when the true class is i; the diagonal is zero.  Replacing each diagonal zero
with the negated sum of its row turns every row into a sum-to-zero margin
vector whose diagonal entry acts as a reward for a correct decision.  The dot
product of row l of the extended matrix with a margin-coded prediction is the
cost-sensitive margin: negative exactly when the prediction is correct.  Its
exponential is the loss the booster descends.

Two decision rules live here.  ``min_cost_label`` picks the label whose
extended-matrix row gives the smallest dot product with an accumulated margin
vector; with a constant off-diagonal matrix it reduces to argmax of the
margin scores.  ``min_cost_decision`` is the classic minimum-risk rule over a
posterior.  Both break ties toward the lowest label index.

Labels are 1-based in every public signature.  All returned arrays are
read-only; functions here are pure and safe to call from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Exponents beyond this are clamped so exp() never overflows; callers that
# care receive a saturation flag.
EXP_CLAMP = 700.0


class CostMatrixError(ValidationError):
    """Matrix violates the cost-matrix contract."""


def clamped_exp(x):
    """exp(x) with exponents clipped to +-EXP_CLAMP.

    Returns (values, saturated) where saturated tells whether any exponent
    was clipped.
    """
    arr = np.asarray(x, dtype=np.float64)
    saturated = bool(np.any(np.abs(arr) > EXP_CLAMP))
    return np.exp(np.clip(arr, -EXP_CLAMP, EXP_CLAMP)), saturated


def _as_square(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise CostMatrixError(f"cost matrix must be square, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise CostMatrixError("cost matrix needs at least 2 classes")
    return arr


@dataclass(frozen=True)
class CostMatrix:
    """K x K misclassification costs: entry (i, j) = cost of predicting j
    for a sample of true class i.

    Contract: entries nonnegative and finite, diagonal exactly zero, and
    every row must contain at least one strictly positive off-diagonal entry
    (a row of zeros would make the class free to misclassify and leaves no
    reward to extend into).
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = _as_square(self.entries).copy()
        if not np.all(np.isfinite(arr)):
            raise CostMatrixError("cost entries must be finite")
        if np.any(arr < 0):
            raise CostMatrixError("cost entries must be nonnegative")
        if np.any(np.diagonal(arr) != 0):
            raise CostMatrixError("diagonal costs must be exactly zero")
        off = arr.sum(axis=1)
        if np.any(off <= 0):
            bad = [i + 1 for i in np.nonzero(off <= 0)[0]]
            raise CostMatrixError(
                f"rows {bad} have no positive off-diagonal cost; every class "
                "needs at least one costly error"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def scaled(self, alpha: float) -> "CostMatrix":
        if alpha <= 0:
            raise CostMatrixError("scale factor must be positive")
        return CostMatrix(self.entries * alpha)

    def total_mass(self) -> float:
        return float(self.entries.sum())


@dataclass(frozen=True)
class ExtendedCostMatrix:
    """Cost matrix with negated row sums on the diagonal.

    Rows sum to zero, so each row is a margin vector; the strictly negative
    diagonal rewards correct decisions.  ``margin_scale`` is K/(K-1), the
    dot product between an extended row and a margin code per unit of cost;
    it is kept inside every solver exponent and weight update so the step
    size solved downstream is the exact minimizer of the empirical
    exponential loss.
    """

    k: int
    c_star: np.ndarray
    margin_scale: float

    def __post_init__(self):
        arr = _as_square(self.c_star).copy()
        if arr.shape[0] != self.k:
            raise CostMatrixError("k does not match matrix shape")
        if np.any(np.diagonal(arr) >= 0):
            raise CostMatrixError("extended diagonal must be strictly negative")
        arr.setflags(write=False)
        object.__setattr__(self, "c_star", arr)
        a, _ = clamped_exp(self.margin_scale * arr)
        a.setflags(write=False)
        object.__setattr__(self, "_a", a)

    @property
    def a(self) -> np.ndarray:
        """Elementwise exp of the scaled extended matrix.

        Raising it elementwise to a power beta gives the per-class weight
        multipliers used by both the tree objective and the step-size
        equation: entries below 1 on the diagonal, at or above 1 elsewhere.
        """
        return self._a


def extend_cost_matrix(cost: CostMatrix) -> ExtendedCostMatrix:
    """Replace each diagonal zero with the negated sum of its row."""
    arr = cost.entries.copy()
    np.fill_diagonal(arr, -arr.sum(axis=1))
    k = cost.k
    return ExtendedCostMatrix(k=k, c_star=arr, margin_scale=k / (k - 1))


@dataclass(frozen=True)
class LabelCodeSet:
    """Margin-vector codes: label l maps to the vector with 1 at
    coordinate l and -1/(K-1) elsewhere.  Codes sum to zero; the dot of a
    code with itself is K/(K-1) and with any other code -K/(K-1)^2.
    """

    k: int
    codes: np.ndarray

    def code(self, label: int) -> np.ndarray:
        _check_label(label, self.k)
        return self.codes[label - 1]


def label_codes(k: int) -> LabelCodeSet:
    if k < 2:
        raise ValidationError("need at least 2 classes")
    codes = np.full((k, k), -1.0 / (k - 1))
    np.fill_diagonal(codes, 1.0)
    codes.setflags(write=False)
    return LabelCodeSet(k=k, codes=codes)


def _check_label(label: int, k: int) -> None:
    if not 1 <= label <= k:
        raise ValidationError(f"label {label} outside 1..{k}")


def cost_margin(ext: ExtendedCostMatrix, true_label: int, predicted_label: int) -> float:
    """Margin of predicting ``predicted_label`` on a sample of
    ``true_label``: K/(K-1) times the corresponding extended entry.
    Negative exactly when the prediction is correct.
    """
    _check_label(true_label, ext.k)
    _check_label(predicted_label, ext.k)
    return float(ext.margin_scale * ext.c_star[true_label - 1, predicted_label - 1])


def cmel(ext: ExtendedCostMatrix, true_label: int, margin_vector) -> float:
    """Cost-weighted multi-class exponential loss of a margin vector.

    exp of the dot between the true label's extended row and the margin
    vector.  The exponent is clamped at +-700, so the result is always
    finite and strictly positive.
    """
    _check_label(true_label, ext.k)
    f = np.asarray(margin_vector, dtype=np.float64)
    if f.shape != (ext.k,):
        raise ValidationError(f"margin vector must have length {ext.k}")
    tol = 1e-9 * max(1.0, float(np.abs(f).max(initial=0.0)))
    if abs(float(f.sum())) > tol:
        raise ValidationError("margin vector must sum to zero")
    value, _ = clamped_exp(float(ext.c_star[true_label - 1] @ f))
    return float(value)


def min_cost_label(f, ext: ExtendedCostMatrix) -> int:
    """Label whose extended row has the smallest dot product with the
    margin vector ``f``; ties go to the lowest label.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (ext.k,):
        raise ValidationError(f"margin vector must have length {ext.k}")
    return int(np.argmin(ext.c_star @ f)) + 1


def min_cost_decision(posterior, cost) -> int:
    """Minimum-risk label under a posterior: argmin_j posterior . C(-, j).

    ``cost`` may be a CostMatrix or any square array-like; the rule itself
    is well defined for arbitrary cost tables (it is invariant to adding a
    constant to any single row, which a strict cost matrix cannot express).
    """
    p = np.asarray(posterior, dtype=np.float64)
    entries = cost.entries if isinstance(cost, CostMatrix) else _as_square(cost)
    if p.shape != (entries.shape[0],):
        raise ValidationError(f"posterior must have length {entries.shape[0]}")
    if np.any(p < 0):
        raise ValidationError("posterior entries must be nonnegative")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValidationError("posterior must sum to 1")
    return int(np.argmin(p @ entries)) + 1


def posterior_from_scores(f) -> np.ndarray:
    """Softmax of a score vector, stabilized by max subtraction; invariant
    under adding a constant to all coordinates.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.size < 2:
        raise ValidationError("need a score vector of length >= 2")
    z = np.exp(f - f.max())
    return z / z.sum()


def make_01_cost(k: int, scale: float = 1.0) -> CostMatrix:
    """Constant off-diagonal matrix: the cost-insensitive problem."""
    if k < 2:
        raise ValidationError("need at least 2 classes")
    if scale <= 0:
        raise ValidationError("scale must be positive")
    arr = np.full((k, k), float(scale))
    np.fill_diagonal(arr, 0.0)
    return CostMatrix(arr)


def make_detection_cost(k_positive: int, fn_weight: float) -> CostMatrix:
    """Detection matrix over 1 background + k_positive classes.

    Background is label 1.  False positives and confusions between positive
    classes cost 1; false negatives (a positive predicted as background)
    cost ``fn_weight``.
    """
    if k_positive < 1:
        raise ValidationError("need at least one positive class")
    if fn_weight <= 0:
        raise ValidationError("false-negative weight must be positive")
    k = k_positive + 1
    arr = np.ones((k, k))
    arr[1:, 0] = float(fn_weight)
    np.fill_diagonal(arr, 0.0)
    return CostMatrix(arr)


def make_circular_view_cost(
    k_positive: int, alpha: float, beta: float, gamma: float
) -> CostMatrix:
    """Detection matrix whose positive classes sit on a circle of views.

    Confusing view i with view j costs gamma * (1 - |(2|i-j| - Kp)/Kp|):
    lowest (2/Kp) for neighbouring views, 1 for opposite views, and the
    circle wraps so |i-j| = Kp-1 is also a neighbour.  Row 1 (background
    predicted as a view) costs alpha, column 1 (view predicted as
    background) costs beta.
    """
    if k_positive < 4 or k_positive % 2 != 0:
        raise ValidationError("need an even number >= 4 of view classes")
    if min(alpha, beta, gamma) <= 0:
        raise ValidationError("alpha, beta, gamma must be positive")
    kp = k_positive
    i, j = np.indices((kp, kp))
    view = 1.0 - np.abs((2.0 * np.abs(i - j) - kp) / kp)
    arr = np.zeros((kp + 1, kp + 1))
    arr[0, 1:] = float(alpha)
    arr[1:, 0] = float(beta)
    arr[1:, 1:] = gamma * view
    return CostMatrix(arr)


def save_cost_csv(cost: CostMatrix, path) -> None:
    """K lines of K comma-separated shortest round-trip decimals."""
    lines = [",".join(repr(float(v)) for v in row) for row in cost.entries]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_cost_csv(path) -> CostMatrix:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(cell) for cell in line.split(",")])
            except ValueError as exc:
                raise CostMatrixError(f"bad number on line {line_no}: {exc}") from exc
    if not rows:
        raise CostMatrixError("empty cost-matrix file")
    if len(set(len(r) for r in rows)) != 1:
        raise CostMatrixError("ragged cost-matrix file")
    return CostMatrix(np.array(rows))
