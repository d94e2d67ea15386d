"""Stage-wise additive training of cost-sensitive tree ensembles.

Each round fits a tree on the current weights against the unit-step
multiplier table, solves the step size balancing weighted error against
success mass, multiplies every weight by exp(step * margin of the round's
prediction) and renormalizes.  Prediction accumulates step-weighted margin
codes and picks the label whose extended-cost row yields the smallest dot
product.

The cost matrix is rescaled internally to unit total mass before training
and the solved steps are scaled back, so two matrices that differ only by a
positive factor produce identical trees and identical predictions with steps
scaled by the inverse factor; a constant off-diagonal matrix lands exactly
on the 1/(K(K-1)) scaling whose steps match the closed-form constant-cost
formula.  Rounds whose solver reports an unbounded step (no costly errors)
add the tree with a capped step and stop; rounds too weak for a positive
step stop without adding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import (
    CostMatrix,
    ExtendedCostMatrix,
    LabelCodeSet,
    clamped_exp,
    extend_cost_matrix,
    label_codes,
)
from .dataset import Dataset
from .errors import DimensionMismatch, ValidationError
from .seeding import TREE_STREAM, child_rng
from .solvers import NoErrors, TooWeak, solve_beta
from .tree import (
    DEFAULT_MIN_NODE_WEIGHT,
    DEFAULT_SPLIT_GAIN_EPSILON,
    CostTree,
    fit_cost_tree,
    stats_from_predictions,
)

# Step cap for rounds without costly errors (the root diverges to infinity).
NO_ERRORS_BETA = 50.0


@dataclass
class Ensemble:
    """Ordered (step, tree) members over a fixed cost matrix.

    The margin vector of x is the step-weighted sum of the members' label
    codes; prediction minimizes the extended-row dot product against it.
    Immutable once built; safe for concurrent prediction.
    """

    cost: CostMatrix
    members: list
    shrinkage: float
    n_features: int
    feature_names: list | None = None
    extended: ExtendedCostMatrix = field(init=False, repr=False)
    codes: LabelCodeSet = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValidationError("shrinkage must be in (0, 1]")
        for beta, _tree in self.members:
            if beta <= 0:
                raise ValidationError("member steps must be positive")
        self.extended = extend_cost_matrix(self.cost)
        self.codes = label_codes(self.cost.k)

    @property
    def k(self) -> int:
        return self.cost.k

    def __len__(self) -> int:
        return len(self.members)

    def _check_matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"model expects {self.n_features} feature columns, got shape {x.shape}"
            )
        return x

    def margin_matrix(self, x) -> np.ndarray:
        x = self._check_matrix(x)
        f = np.zeros((x.shape[0], self.k))
        for beta, tree in self.members:
            preds = tree.predict_batch(x)
            f += beta * self.codes.codes[preds - 1]
        return f

    def margin_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise DimensionMismatch(
                f"model expects {self.n_features} features, got shape {x.shape}"
            )
        return self.margin_matrix(x[None, :])[0]

    def predict_batch(self, x) -> np.ndarray:
        f = self.margin_matrix(x)
        return np.argmin(f @ self.extended.c_star.T, axis=1) + 1

    def predict(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise DimensionMismatch(
                f"model expects {self.n_features} features, got shape {x.shape}"
            )
        return int(self.predict_batch(x[None, :])[0])


def predict(ensemble: Ensemble, x) -> int:
    return ensemble.predict(x)


def margin_vector(ensemble: Ensemble, x) -> np.ndarray:
    return ensemble.margin_vector(x)


@dataclass
class RoundRecord:
    round: int
    beta: float
    objective: float
    cmel: float
    train_cost: float


@dataclass
class TrainReport:
    """Per-round observability of the descent: solved step, tree objective,
    mean exponential loss, and training average cost."""

    records: list
    requested_rounds: int
    stop_reason: str | None = None
    saturated: bool = False
    weight_history: dict = field(default_factory=dict)

    @property
    def betas(self) -> np.ndarray:
        return np.array([r.beta for r in self.records])

    @property
    def cmel_curve(self) -> np.ndarray:
        return np.array([r.cmel for r in self.records])

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("round,beta,objective,cmel,train_cost\n")
            for r in self.records:
                fh.write(
                    f"{r.round},{r.beta!r},{r.objective!r},{r.cmel!r},{r.train_cost!r}\n"
                )


def train(
    data: Dataset,
    cost: CostMatrix,
    rounds: int,
    depth_limit: int,
    shrinkage: float = 1.0,
    feature_fraction: float = 1.0,
    seed: int = 0,
    *,
    min_node_weight: float = DEFAULT_MIN_NODE_WEIGHT,
    split_gain_epsilon: float = DEFAULT_SPLIT_GAIN_EPSILON,
    continue_on_no_errors: bool = False,
    track_weights=(),
    kernel=None,
) -> tuple[Ensemble, TrainReport]:
    """Run the stage-wise loop for up to ``rounds`` iterations.

    ``track_weights`` lists round numbers whose normalized weight vector is
    snapshotted into the report (for descent diagnostics).  Training is
    deterministic given the seed.
    """
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    if not 0.0 < shrinkage <= 1.0:
        raise ValidationError("shrinkage must be in (0, 1]")
    if data.k != cost.k:
        raise ValidationError(
            f"cost matrix is {cost.k}x{cost.k} but data declares {data.k} classes"
        )

    mass = cost.total_mass()
    cost_norm = CostMatrix(cost.entries / mass)
    ext = extend_cost_matrix(cost_norm)
    a_unit = ext.a  # multiplier table at unit step
    codes = label_codes(cost.k)

    x = data.features
    labels = data.labels
    li = labels - 1
    n = data.n_samples
    k = cost.k

    w = np.full(n, 1.0 / n)
    f = np.zeros((n, k))
    members = []
    report = TrainReport(records=[], requested_rounds=rounds)
    track = set(int(r) for r in track_weights)

    for m in range(1, rounds + 1):
        rng = child_rng(seed, TREE_STREAM, m)
        tree = fit_cost_tree(
            data,
            w,
            a_unit,
            depth_limit,
            feature_fraction,
            rng=rng,
            min_node_weight=min_node_weight,
            split_gain_epsilon=split_gain_epsilon,
            kernel=kernel,
        )
        preds = tree.predict_batch(x)
        objective = float(np.sum(w * a_unit[li, preds - 1]))
        stats = stats_from_predictions(preds, labels, w, k)

        stop_after = False
        try:
            beta_hat = solve_beta(stats, cost_norm)
        except TooWeak:
            report.stop_reason = "too_weak"
            break
        except NoErrors:
            beta_hat = NO_ERRORS_BETA
            if not continue_on_no_errors:
                stop_after = True
                report.stop_reason = "no_errors"

        beta_used = shrinkage * beta_hat
        mult, sat = clamped_exp(beta_used * ext.margin_scale * ext.c_star[li, preds - 1])
        report.saturated |= sat
        w = w * mult
        w /= w.sum()
        f += beta_used * codes.codes[preds - 1]
        members.append((beta_used / mass, tree))

        expo = np.einsum("nk,nk->n", ext.c_star[li], f)
        losses, sat = clamped_exp(expo)
        report.saturated |= sat
        ens_preds = np.argmin(f @ ext.c_star.T, axis=1) + 1
        report.records.append(
            RoundRecord(
                round=m,
                beta=beta_used / mass,
                objective=objective,
                cmel=float(losses.mean()),
                train_cost=float(cost.entries[li, ens_preds - 1].mean()),
            )
        )
        if m in track:
            report.weight_history[m] = w.copy()
        if stop_after:
            break

    ensemble = Ensemble(
        cost=cost,
        members=members,
        shrinkage=shrinkage,
        n_features=data.n_features,
        feature_names=list(data.feature_names),
    )
    return ensemble, report
