"""Cost-sensitive decision trees.

The fitting objective comes straight from the boosting descent step: a
sample of class l landing in a leaf that predicts k contributes
weight * m[l, k], where m is the per-class multiplier table (elementwise
power beta of the extended-matrix exponential, diagonal below 1, errors at
or above 1).  Leaves take the label minimizing their weighted column sum;
splits are midpoints between consecutive distinct sorted feature values and
are accepted only when they reduce the objective by more than a small
epsilon.  Ties break toward the lowest feature index, then the lowest
threshold, then the lowest label.

Fitting is deterministic: with feature_fraction < 1 the sampled feature set
is a pure function of the supplied generator, and the split search delegates
to a kernel whose result does not depend on the backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import Dataset
from .errors import DimensionMismatch, ValidationError

DEFAULT_MIN_NODE_WEIGHT = 1e-6
DEFAULT_SPLIT_GAIN_EPSILON = 1e-12


@dataclass
class Node:
    feature: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None
    label: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.label is not None


@dataclass
class CostTree:
    """Depth-limited binary tree mapping a feature vector to a label in 1..K."""

    root: Node
    depth_limit: int
    n_features: int

    def predict(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise DimensionMismatch(
                f"expected {self.n_features} features, got shape {x.shape}"
            )
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.label

    def predict_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected (n, {self.n_features}) features, got shape {x.shape}"
            )
        out = np.empty(x.shape[0], dtype=np.int64)
        stack = [(self.root, np.arange(x.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.is_leaf:
                out[idx] = node.label
                continue
            go_left = x[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out

    def depth(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def n_leaves(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 1
            return walk(node.left) + walk(node.right)

        return walk(self.root)

    def to_dict(self) -> dict:
        def walk(node):
            if node.is_leaf:
                return {"leaf_label": int(node.label)}
            return {
                "feature_index": int(node.feature),
                "threshold": float(node.threshold),
                "left": walk(node.left),
                "right": walk(node.right),
            }

        return walk(self.root)

    @classmethod
    def from_dict(cls, tree: dict, depth_limit: int, n_features: int) -> "CostTree":
        def walk(rec):
            if "leaf_label" in rec:
                return Node(label=int(rec["leaf_label"]))
            return Node(
                feature=int(rec["feature_index"]),
                threshold=float(rec["threshold"]),
                left=walk(rec["left"]),
                right=walk(rec["right"]),
            )

        return cls(root=walk(tree), depth_limit=depth_limit, n_features=n_features)


@dataclass(frozen=True)
class WeakFitStats:
    """Weighted success masses per class (s) and weighted error masses per
    (true, predicted) pair (e, zero diagonal).  With normalized weights the
    two sum to 1."""

    s: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64).copy()
        e = np.asarray(self.e, dtype=np.float64).copy()
        k = s.shape[0]
        if s.ndim != 1 or e.shape != (k, k):
            raise ValidationError("stats shapes must be (K,) and (K, K)")
        if np.any(s < 0) or np.any(e < 0):
            raise ValidationError("stats masses must be nonnegative")
        if np.any(np.diagonal(e) != 0):
            raise ValidationError("error-mass diagonal must be zero")
        if abs(float(s.sum() + e.sum()) - 1.0) > 1e-9:
            raise ValidationError("stats masses must sum to 1 (normalized weights)")
        s.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "e", e)

    @property
    def k(self) -> int:
        return self.s.shape[0]

    def total_error(self) -> float:
        return float(self.e.sum())


def leaf_label(leaf_weights_by_class, a_beta) -> int:
    """Label minimizing the weighted multiplier cost of a leaf:
    argmin_k sum_j w[j] * a_beta[j, k], lowest index on ties."""
    w = np.asarray(leaf_weights_by_class, dtype=np.float64)
    m = np.asarray(a_beta, dtype=np.float64)
    if w.ndim != 1 or m.shape != (w.shape[0], w.shape[0]):
        raise ValidationError("need class weights (K,) and multipliers (K, K)")
    if np.any(w < 0):
        raise ValidationError("class weights must be nonnegative")
    if not np.any(w > 0):
        raise ValidationError("all-zero class weights rejected")
    # accumulate row by row so exact ties stay exact across columns (a BLAS
    # dot may break mathematically equal columns by an ulp)
    totals = np.zeros(w.shape[0])
    for j in range(w.shape[0]):
        totals += w[j] * m[j]
    return int(np.argmin(totals)) + 1


def fit_cost_tree(
    data: Dataset,
    weights,
    a_beta,
    depth_limit: int,
    feature_fraction: float = 1.0,
    *,
    rng: np.random.Generator | int | None = None,
    min_node_weight: float = DEFAULT_MIN_NODE_WEIGHT,
    split_gain_epsilon: float = DEFAULT_SPLIT_GAIN_EPSILON,
    kernel=None,
) -> CostTree:
    """Greedy top-down tree minimizing the weighted multiplier objective.

    ``min_node_weight`` is a fraction of the total weight; nodes below it,
    depth-exhausted nodes, and nodes no split improves by more than
    ``split_gain_epsilon`` become leaves.
    """
    if depth_limit < 1:
        raise ValidationError("depth_limit must be >= 1")
    if not 0.0 < feature_fraction <= 1.0:
        raise ValidationError("feature_fraction must be in (0, 1]")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.n_samples,):
        raise ValidationError("weights must align with samples")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite and nonnegative")
    total = float(w.sum())
    if total <= 0:
        raise ValidationError("all-zero weights rejected")
    w = w / total
    m = np.asarray(a_beta, dtype=np.float64)
    if m.shape != (data.k, data.k) or np.any(m <= 0):
        raise ValidationError("multiplier table must be (K, K) and positive")

    if kernel is None:
        kernel = _kernels
    x = data.features
    li = data.labels - 1
    sample_costs = np.ascontiguousarray(w[:, None] * m[li, :])

    n_feat = data.n_features
    if feature_fraction < 1.0:
        if rng is None:
            raise ValidationError("feature sampling requires a generator or seed")
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        n_pick = max(1, math.ceil(feature_fraction * n_feat))
        features = np.sort(rng.choice(n_feat, size=n_pick, replace=False))
    else:
        features = np.arange(n_feat)

    def grow(idx: np.ndarray, depth_left: int) -> Node:
        z_node = sample_costs[idx]
        totals = z_node.sum(axis=0)
        label = int(np.argmin(totals)) + 1
        node_obj = float(totals.min())
        w_node = w[idx]
        node_weight = float(w_node.sum())
        if depth_left == 0 or node_weight < min_node_weight:
            return Node(label=label)
        node_labels = li[idx]
        if np.all(node_labels == node_labels[0]):
            return Node(label=label)

        best = None  # (objective, feature, order, pos)
        for f in features:
            v = x[idx, f]
            order = np.argsort(v, kind="stable")
            vs = np.ascontiguousarray(v[order])
            if vs[0] == vs[-1]:
                continue
            ws = np.ascontiguousarray(w_node[order])
            zs = np.ascontiguousarray(z_node[order])
            pos, obj = kernel.best_split(vs, ws, zs, min_node_weight)
            if pos >= 0 and (best is None or obj < best[0]):
                best = (obj, int(f), order, pos, vs)
        if best is None or node_obj - best[0] <= split_gain_epsilon:
            return Node(label=label)

        obj, f, order, pos, vs = best
        threshold = (vs[pos] + vs[pos + 1]) / 2.0
        if threshold >= vs[pos + 1]:  # midpoint rounded up between adjacent floats
            threshold = float(vs[pos])
        left_idx = idx[order[: pos + 1]]
        right_idx = idx[order[pos + 1 :]]
        return Node(
            feature=f,
            threshold=float(threshold),
            left=grow(left_idx, depth_left - 1),
            right=grow(right_idx, depth_left - 1),
        )

    root = grow(np.arange(data.n_samples), depth_limit)
    return CostTree(root=root, depth_limit=depth_limit, n_features=n_feat)


def evaluate_stats(tree: CostTree, data: Dataset, weights) -> WeakFitStats:
    """Weighted success and error masses of a tree's predictions."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.n_samples,):
        raise ValidationError("weights must align with samples")
    total = float(w.sum())
    if total <= 0:
        raise ValidationError("all-zero weights rejected")
    preds = tree.predict_batch(data.features)
    return stats_from_predictions(preds, data.labels, w / total, data.k)


def stats_from_predictions(predictions, labels, weights, k: int) -> WeakFitStats:
    preds = np.asarray(predictions, dtype=np.int64)
    labs = np.asarray(labels, dtype=np.int64)
    w = np.asarray(weights, dtype=np.float64)
    s = np.zeros(k)
    e = np.zeros((k, k))
    correct = preds == labs
    np.add.at(s, labs[correct] - 1, w[correct])
    np.add.at(e, (labs[~correct] - 1, preds[~correct] - 1), w[~correct])
    return WeakFitStats(s=s, e=e)
