"""Step-size solvers for the boosting loop.

The step size beta of a fitted weak learner balances exponentially weighted
error mass against success mass:

    sum_{j != k} E[j,k] C[j,k] A[j,k]^beta  =  sum_j S[j] (sum_h C[j,h]) A[j,j]^beta

with A the elementwise exponential of the scaled extended cost matrix (see
costs.ExtendedCostMatrix.a).  The left side rises from the weighted error
cost, the right side decays from the success reward, so a positive root
exists exactly when errors are cheap enough at beta = 0; it is found by
Newton steps safeguarded by bisection on a doubling bracket.

Three closed-form specializations are provided as independent oracles: the
constant-cost multi-class step (the SAMME formula), the binary
cost-sensitive step (the cost-sensitive AdaBoost equation), and the
group-vs-rest polynomial step (the PIBoost polynomial).  With the scale
convention used here the binary equivalence carries doubled costs, since
K/(K-1) = 2 when K = 2.
"""

from __future__ import annotations

import math

import numpy as np

from .costs import CostMatrix, clamped_exp, extend_cost_matrix
from .errors import ValidationError
from .tree import WeakFitStats

DEFAULT_RTOL = 1e-10
DEFAULT_MAX_ITER = 200


class SolverError(RuntimeError):
    """Step-size equation has no usable positive root."""


class NoErrors(SolverError):
    """No positively-costed error mass: the step size is unbounded."""


class TooWeak(SolverError):
    """Error mass already outweighs success mass at beta = 0."""


def _balance_root(pos_coef, pos_expo, neg_coef, neg_expo, rtol, max_iter):
    """Positive root of sum pos_coef*exp(b*pos_expo) - sum neg_coef*exp(b*neg_expo).

    Requires positive coefficients, pos_expo > 0 and neg_expo < 0 so the
    residual is strictly increasing.  Convergence: |residual| below rtol
    times the magnitude of either side.
    """

    def parts(b):
        le, _ = clamped_exp(b * pos_expo)
        re, _ = clamped_exp(b * neg_expo)
        lhs = float(pos_coef @ le)
        rhs = float(neg_coef @ re)
        slope = float((pos_coef * pos_expo) @ le - (neg_coef * neg_expo) @ re)
        return lhs - rhs, lhs + rhs, slope

    f0, _, _ = parts(0.0)
    if f0 >= 0.0:
        raise TooWeak("weighted error cost meets or exceeds success reward at beta=0")

    lo, flo = 0.0, f0
    hi = 1.0
    fhi, _, _ = parts(hi)
    while fhi < 0.0:
        lo, flo = hi, fhi
        hi *= 2.0
        if hi > 1e12:
            raise SolverError("failed to bracket the step-size root")
        fhi, _, _ = parts(hi)

    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx, scale, slope = parts(x)
        if abs(fx) <= rtol * max(scale, 1e-300):
            return x
        if fx > 0.0:
            hi = x
        else:
            lo = x
        if slope > 0.0:
            step = x - fx / slope
            x = step if lo < step < hi else 0.5 * (lo + hi)
        else:
            x = 0.5 * (lo + hi)
    return x  # bisection estimate stands after the iteration cap


def solve_beta(
    stats: WeakFitStats,
    cost: CostMatrix,
    *,
    rtol: float = DEFAULT_RTOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Unique positive step size balancing error and success mass.

    Raises NoErrors when no error carries positive cost (step unbounded)
    and TooWeak when the balance already tips at beta = 0.
    """
    if stats.k != cost.k:
        raise ValidationError("stats and cost matrix disagree on K")
    ext = extend_cost_matrix(cost)
    entries = cost.entries

    err_coef = stats.e * entries
    off = ~np.eye(cost.k, dtype=bool)
    keep = off & (err_coef > 0)
    pos_coef = err_coef[keep]
    pos_expo = ext.margin_scale * entries[keep]
    if pos_coef.size == 0:
        raise NoErrors("no positively-costed errors; step size unbounded")

    row_sums = entries.sum(axis=1)
    suc_coef = stats.s * row_sums
    diag_expo = ext.margin_scale * np.diagonal(ext.c_star)
    keep_s = suc_coef > 0
    neg_coef = suc_coef[keep_s]
    neg_expo = diag_expo[keep_s]

    return _balance_root(pos_coef, pos_expo, neg_coef, neg_expo, rtol, max_iter)


def samme_beta(total_error: float, k: int) -> float:
    """Closed-form step for the constant 1/(K(K-1)) cost matrix:
    ((K-1)^2/K) * (log((1-E)/E) + log(K-1)).

    Defined for 0 < E <= (K-1)/K; the upper boundary is chance level and
    returns exactly 0.
    """
    if k < 2:
        raise ValidationError("need at least 2 classes")
    e = float(total_error)
    chance = (k - 1) / k
    if not 0.0 < e <= chance:
        raise ValidationError(f"total error must lie in (0, {chance}] for K={k}")
    return ((k - 1) ** 2 / k) * (math.log((1.0 - e) / e) + math.log(k - 1))


def cs_adaboost_beta(
    c1: float,
    c2: float,
    b: float,
    d: float,
    t1: float,
    t2: float,
    *,
    rtol: float = DEFAULT_RTOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Positive root of the binary cost-sensitive step equation

        2 c1 b cosh(beta c1) + 2 c2 d cosh(beta c2)
            = t1 c1 exp(-beta c1) + t2 c2 exp(-beta c2)

    where b and d are the weighted errors on each class and t1, t2 the
    total class masses.
    """
    vals = [c1, c2, b, d, t1, t2]
    if any(v < 0 for v in vals):
        raise ValidationError("all inputs must be nonnegative")
    if not (b < t1 and d < t2):
        raise ValidationError("per-class error must be below the class mass")
    if b + d <= 0:
        raise ValidationError("need some error mass (b + d > 0)")
    if c1 <= 0 and c2 <= 0:
        raise ValidationError("at least one cost must be positive")
    # cosh expansion leaves rising error terms against decaying success terms
    pos_coef = np.array([c1 * b, c2 * d])
    pos_expo = np.array([c1, c2])
    neg_coef = np.array([c1 * (t1 - b), c2 * (t2 - d)])
    neg_expo = np.array([-c1, -c2])
    keep_p = pos_coef > 0
    keep_n = neg_coef > 0
    if not keep_p.any():
        raise NoErrors("no positively-costed errors; step size unbounded")
    return _balance_root(
        pos_coef[keep_p], pos_expo[keep_p], neg_coef[keep_n], neg_expo[keep_n],
        rtol, max_iter,
    )


def piboost_poly_coeffs(s: int, k: int, e1: float, e2: float, a1: float, a2: float) -> np.ndarray:
    """Ascending coefficients of the group-vs-rest step polynomial

        E1 (K-s) x^{2(K-s)} + E2 s x^K - s (A2-E2) x^{K-2s} - (K-s)(A1-E1)

    multiplied by x^{2s-K} when K < 2s so all exponents are nonnegative.
    The nonzero coefficients carry exactly one sign change, so the
    polynomial has exactly one positive root.
    """
    if not (isinstance(s, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise ValidationError("s and k must be integers")
    if not 1 <= s < k:
        raise ValidationError("need 1 <= s < K")
    if not (0 <= e1 <= a1 and 0 <= e2 <= a2):
        raise ValidationError("errors must lie between 0 and their group mass")
    if abs((a1 + a2) - 1.0) > 1e-9:
        raise ValidationError("group masses must sum to 1")
    shift = max(0, 2 * s - k)
    terms = {}
    for expo, coef in (
        (2 * (k - s) + shift, e1 * (k - s)),
        (k + shift, e2 * s),
        (k - 2 * s + shift, -s * (a2 - e2)),
        (shift, -(k - s) * (a1 - e1)),
    ):
        terms[expo] = terms.get(expo, 0.0) + coef
    coeffs = np.zeros(max(terms) + 1)
    for expo, coef in terms.items():
        coeffs[expo] += coef
    return coeffs


def piboost_beta(s: int, k: int, e1: float, e2: float, a1: float, a2: float) -> float:
    """Step size s(K-s)(K-1) * log(R), with R the unique positive root of
    the group-vs-rest polynomial.  The root is bracketed and bisected;
    R <= 1 (nonpositive step) raises TooWeak.
    """
    coeffs = piboost_poly_coeffs(s, k, e1, e2, a1, a2)
    if e1 == 0 and e2 == 0:
        raise NoErrors("no error mass; step size unbounded")
    if not np.any(coeffs < 0):
        raise TooWeak("no success mass; every step is nonpositive")

    def poly(x):
        return float(np.polynomial.polynomial.polyval(x, coeffs))

    f1 = poly(1.0)
    if f1 >= 0.0:
        # single crossing: P(1) >= 0 means the root sits at or below 1
        raise TooWeak("polynomial root at or below 1 gives a nonpositive step")

    lo, hi = 1.0, 2.0
    fhi = poly(hi)
    while fhi < 0.0:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            raise SolverError("failed to bracket the polynomial root")
        fhi = poly(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if poly(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    scale = float(np.polynomial.polynomial.polyval(root, np.abs(coeffs)))
    if abs(poly(root)) > 1e-10 * max(scale, 1e-300):
        raise SolverError("polynomial root did not converge")
    return s * (k - s) * (k - 1) * math.log(root)
