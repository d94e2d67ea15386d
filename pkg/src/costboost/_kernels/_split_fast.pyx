# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled split-search kernel.

Same contract and same floating-point operation order as _split_py, so the
two backends return identical results.  Column sums run in sample order, the
right side comes from subtracting the running sum from the totals, and the
totals are accumulated by the same sequence of adds as the running pass.
"""

from libc.math cimport INFINITY

import numpy as np


def best_split(double[::1] values, double[::1] weights,
               double[:, ::1] costs, double min_child_weight):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t k = costs.shape[1]
    if n < 2:
        return -1, INFINITY

    run_arr = np.zeros(k, dtype=np.float64)
    tot_arr = np.zeros(k, dtype=np.float64)
    cdef double[::1] run = run_arr
    cdef double[::1] tot = tot_arr

    cdef Py_ssize_t i, j
    cdef double total_w = 0.0
    for i in range(n):
        total_w += weights[i]
        for j in range(k):
            tot[j] += costs[i, j]

    cdef double cw = 0.0
    cdef double left, right, v, obj
    cdef double best = INFINITY
    cdef Py_ssize_t best_pos = -1
    for i in range(n - 1):
        cw += weights[i]
        for j in range(k):
            run[j] += costs[i, j]
        if not values[i] < values[i + 1]:
            continue
        if cw < min_child_weight:
            continue
        if total_w - cw < min_child_weight:
            continue
        left = run[0]
        right = tot[0] - run[0]
        for j in range(1, k):
            v = run[j]
            if v < left:
                left = v
            v = tot[j] - run[j]
            if v < right:
                right = v
        obj = left + right
        if obj < best:
            best = obj
            best_pos = i
    if best_pos < 0:
        return -1, INFINITY
    return best_pos, best
