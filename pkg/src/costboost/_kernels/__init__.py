"""Split-search kernels for cost-sensitive tree fitting.

The compiled extension is preferred when it was built; otherwise the numpy
fallback is used.  Both implement the same contract with the same
floating-point operation order, so fitted trees are bit-identical across
backends.  Set COSTBOOST_KERNEL=python or =compiled to force one.

Kernel contract -- best_split(values, weights, costs, min_child_weight):

* ``values``  float64[n], sorted ascending
* ``weights`` float64[n], aligned with values, nonnegative
* ``costs``   float64[n, K] C-contiguous; costs[i, k] is sample i's weighted
  cost of landing in a leaf that predicts label k+1
* a split after position i sends samples 0..i left; it is a candidate iff
  values[i] < values[i+1] and both children carry at least
  ``min_child_weight``
* objective of a candidate = (min over k of left column sums)
  + (min over k of right column sums), computed from per-column running
  sums in sample order
* returns (position, objective) of the smallest objective, earliest
  position on ties, or (-1, inf) when no candidate exists
"""

import os

from . import _split_py

_requested = os.environ.get("COSTBOOST_KERNEL", "").lower()

if _requested == "python":
    _active = _split_py
    BACKEND = "python"
else:
    try:
        from . import _split_fast

        _active = _split_fast
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _active = _split_py
        BACKEND = "python"

best_split = _active.best_split


def backend(name=None):
    """Return a kernel module by name ("python" / "compiled"), default active."""
    if name is None:
        return _active
    if name == "python":
        return _split_py
    if name == "compiled":
        from . import _split_fast

        return _split_fast
    raise ValueError(f"unknown kernel backend {name!r}")
