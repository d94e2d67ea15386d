"""Pure-numpy split-search kernel.

Mirrors the compiled kernel operation for operation: per-column cumulative
sums in sample order, right side by subtraction from the totals, one add per
candidate.  See the package docstring for the contract.
"""

import numpy as np


def best_split(values, weights, costs, min_child_weight):
    n = values.shape[0]
    if n < 2:
        return -1, np.inf
    cw = np.cumsum(weights)
    cz = np.cumsum(costs, axis=0)
    total_w = cw[-1]
    total_z = cz[-1]
    left = cz[:-1].min(axis=1)
    right = (total_z - cz[:-1]).min(axis=1)
    obj = left + right
    valid = values[:-1] < values[1:]
    valid &= cw[:-1] >= min_child_weight
    valid &= (total_w - cw[:-1]) >= min_child_weight
    if not valid.any():
        return -1, np.inf
    obj = np.where(valid, obj, np.inf)
    pos = int(np.argmin(obj))
    return pos, float(obj[pos])
