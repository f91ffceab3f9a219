"""Pure-Python reference implementations of the hot numeric kernels.

The compiled extension (`skybridge.kernels._fast`) mirrors these
routines operation-for-operation so both backends produce bit-identical
floats.  Keep the arithmetic order in sync when editing either side.
"""

import math

import numpy as np

BACKEND = "pure"


def waterfill(gains, total_power):
    """Water-filling power allocation over parallel channels.

    Maximizes sum(log2(1 + g_i * p_i)) subject to sum(p_i) = total_power,
    p_i >= 0.  The water level is located by bisection, then the active
    set is shifted uniformly so power conservation holds to machine
    precision.

    gains: positive linear channel gains (gain over noise).
    total_power: total linear power budget (> 0).
    Returns an ndarray of per-channel powers.
    """
    n = len(gains)
    if n == 0:
        raise ValueError("empty channel list")
    if total_power <= 0.0:
        raise ValueError("total power must be positive")
    inv = [0.0] * n
    for i in range(n):
        g = gains[i]
        if g <= 0.0:
            raise ValueError("channel gains must be positive")
        inv[i] = 1.0 / g

    lo = min(inv)
    hi = max(inv) + total_power
    for _ in range(200):
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

    powers = np.zeros(n)
    active = 0
    s = 0.0
    for i in range(n):
        d = mu - inv[i]
        if d > 0.0:
            powers[i] = d
            active += 1
            s += d
    if active == 0:
        # Degenerate: budget so small bisection landed below every 1/g;
        # give everything to the best channel.
        best = int(np.argmin(inv))
        powers[best] = total_power
        return powers
    shift = (total_power - s) / active
    for i in range(n):
        if powers[i] > 0.0:
            powers[i] += shift
    return powers


def maxmin_share(capacity, demands):
    """Max-min fair division of one link's capacity among demands.

    Iteratively grants min(demand, remaining / n_active); users whose
    demand fits under the fair share receive their full demand.
    Returns an ndarray of shares with sum(shares) <= capacity.
    """
    n = len(demands)
    shares = np.zeros(n)
    if capacity < 0.0:
        raise ValueError("negative capacity")
    for d in demands:
        if d < 0.0:
            raise ValueError("negative demand")
    if n == 0 or capacity == 0.0:
        return shares
    remaining = capacity
    active = [i for i in range(n) if demands[i] > 0.0]
    while active:
        fair = remaining / len(active)
        satisfied = [i for i in active if demands[i] <= fair]
        if not satisfied:
            for i in active:
                shares[i] = fair
            return shares
        for i in satisfied:
            shares[i] = demands[i]
            remaining -= demands[i]
        active = [i for i in active if demands[i] > fair]
    return shares


def greedy_assign(snr_full, cand, band, backhaul_cap, qos, max_users, snr_splits):
    """Greedy bottleneck-aware user-to-station assignment.

    snr_full: (U, S) linear SNR of each user-station pair at the
        station's full access band (uplink: user peak power; downlink:
        station peak power, where the power and band splits cancel).
    cand: (U, S) uint8 candidacy mask.
    band: (S,) usable access bandwidth per station, Hz.
    backhaul_cap: (S,) min capacity along the station's back-haul chain.
    qos: (U,) minimum acceptable rate per user.
    max_users: (S,) associate-count cap per station (battery headroom
        for TBs; use a large value when unconstrained).
    snr_splits: True when per-user SNR grows as the band is split
        (uplink, fixed per-user power), False when it is invariant
        (downlink, station power split alongside the band).

    Returns (assignment, est_rate): station index per user (-1 when
    unserved) and the rate estimate used for the decision.
    """
    n_users, n_stations = snr_full.shape
    counts = [0] * n_stations
    assignment = np.full(n_users, -1, dtype=np.int64)
    est_rate = np.zeros(n_users)

    def rate_est(u, s, extra):
        n = counts[s] + extra
        b = band[s] / n
        snr = snr_full[u, s] * n if snr_splits else snr_full[u, s]
        access = b * math.log2(1.0 + snr)
        cap = backhaul_cap[s]
        if cap == math.inf:
            return access
        return min(access, cap / n)

    # Process users in descending order of their best first-user rate.
    best0 = np.full(n_users, -1.0)
    for u in range(n_users):
        for s in range(n_stations):
            if cand[u, s] and max_users[s] >= 1:
                r = rate_est(u, s, 1)
                if r > best0[u]:
                    best0[u] = r
    order = sorted(range(n_users), key=lambda u: (-best0[u], u))

    for u in order:
        best_s = -1
        best_r = -1.0
        for s in range(n_stations):
            if cand[u, s] and counts[s] < max_users[s]:
                r = rate_est(u, s, 1)
                if r > best_r:
                    best_r = r
                    best_s = s
        if best_s >= 0 and best_r >= qos[u]:
            assignment[u] = best_s
            est_rate[u] = best_r
            counts[best_s] += 1
    return assignment, est_rate
