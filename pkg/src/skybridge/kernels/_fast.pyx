# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot numeric kernels.

Mirrors `skybridge.kernels._pure` operation-for-operation; both
backends must produce bit-identical floats.
"""

from libc.math cimport log2, INFINITY

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "fast"


def waterfill(gains, double total_power):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.ascontiguousarray(gains, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    if n == 0:
        raise ValueError("empty channel list")
    if total_power <= 0.0:
        raise ValueError("total power must be positive")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] inv = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double lo, hi, mu, s, d, shift
    cdef Py_ssize_t it, active, best

    for i in range(n):
        if g[i] <= 0.0:
            raise ValueError("channel gains must be positive")
        inv[i] = 1.0 / g[i]

    lo = inv[0]
    hi = inv[0]
    for i in range(1, n):
        if inv[i] < lo:
            lo = inv[i]
        if inv[i] > hi:
            hi = inv[i]
    hi = hi + total_power

    for it in range(200):
        mu = 0.5 * (lo + hi)
        s = 0.0
        for i in range(n):
            d = mu - inv[i]
            if d > 0.0:
                s += d
        if s > total_power:
            hi = mu
        else:
            lo = mu
        if hi - lo <= 1e-18 * hi:
            break
    mu = 0.5 * (lo + hi)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] powers = np.zeros(n, dtype=np.float64)
    active = 0
    s = 0.0
    for i in range(n):
        d = mu - inv[i]
        if d > 0.0:
            powers[i] = d
            active += 1
            s += d
    if active == 0:
        best = 0
        for i in range(1, n):
            if inv[i] < inv[best]:
                best = i
        powers[best] = total_power
        return powers
    shift = (total_power - s) / active
    for i in range(n):
        if powers[i] > 0.0:
            powers[i] += shift
    return powers


def maxmin_share(double capacity, demands):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dem = np.ascontiguousarray(demands, dtype=np.float64)
    cdef Py_ssize_t n = dem.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] shares = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i, n_active, n_satisfied
    cdef double remaining, fair

    if capacity < 0.0:
        raise ValueError("negative capacity")
    for i in range(n):
        if dem[i] < 0.0:
            raise ValueError("negative demand")
    if n == 0 or capacity == 0.0:
        return shares

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active = np.zeros(n, dtype=np.uint8)
    remaining = capacity
    n_active = 0
    for i in range(n):
        if dem[i] > 0.0:
            active[i] = 1
            n_active += 1
    while n_active > 0:
        fair = remaining / n_active
        n_satisfied = 0
        for i in range(n):
            if active[i] and dem[i] <= fair:
                n_satisfied += 1
        if n_satisfied == 0:
            for i in range(n):
                if active[i]:
                    shares[i] = fair
            return shares
        n_active = 0
        for i in range(n):
            if active[i]:
                if dem[i] <= fair:
                    shares[i] = dem[i]
                    remaining -= dem[i]
                    active[i] = 0
                else:
                    n_active += 1
    return shares


cdef double _rate_est(double snr, double band, double cap, long count,
                      bint snr_splits) nogil:
    cdef double n = <double>(count + 1)
    cdef double b = band / n
    cdef double s = snr * n if snr_splits else snr
    cdef double access = b * log2(1.0 + s)
    if cap == INFINITY:
        return access
    cdef double share = cap / n
    if access < share:
        return access
    return share


def greedy_assign(snr_full, cand, band, backhaul_cap, qos, max_users, bint snr_splits):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] snr = np.ascontiguousarray(snr_full, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] c = np.ascontiguousarray(cand, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.ascontiguousarray(band, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cap = np.ascontiguousarray(backhaul_cap, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q = np.ascontiguousarray(qos, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] mx = np.ascontiguousarray(max_users, dtype=np.int64)
    cdef Py_ssize_t n_users = snr.shape[0]
    cdef Py_ssize_t n_stations = snr.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(n_stations, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] assignment = np.full(n_users, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] est_rate = np.zeros(n_users)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best0 = np.full(n_users, -1.0)
    cdef Py_ssize_t u, s_idx, k
    cdef double r, best_r
    cdef Py_ssize_t best_s

    for u in range(n_users):
        for s_idx in range(n_stations):
            if c[u, s_idx] and mx[s_idx] >= 1:
                r = _rate_est(snr[u, s_idx], b[s_idx], cap[s_idx], 0, snr_splits)
                if r > best0[u]:
                    best0[u] = r

    # stable argsort on the negated keys == descending rate, ties by index
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.argsort(
        np.negative(best0), kind="stable").astype(np.int64)

    for k in range(n_users):
        u = order[k]
        best_s = -1
        best_r = -1.0
        for s_idx in range(n_stations):
            if c[u, s_idx] and counts[s_idx] < mx[s_idx]:
                r = _rate_est(snr[u, s_idx], b[s_idx], cap[s_idx], counts[s_idx], snr_splits)
                if r > best_r:
                    best_r = r
                    best_s = s_idx
        if best_s >= 0 and best_r >= q[u]:
            assignment[u] = best_s
            est_rate[u] = best_r
            counts[best_s] += 1
    return assignment, est_rate
