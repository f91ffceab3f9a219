"""Kernel-level tests: hand oracles, optimality properties, and
bit-identical agreement between the pure and compiled backends."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skybridge import kernels


def _backends():
    mods = [kernels.get_backend("pure")]
    try:
        mods.append(kernels.get_backend("fast"))
    except ImportError:
        pass
    return mods


BACKENDS = _backends()


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
class TestWaterfill:
    def test_hand_oracle_two_channels(self, impl):
        # gains [2, 1], budget 1: level mu solves (mu-1/2)+(mu-1)=1
        p = impl.waterfill(np.array([2.0, 1.0]), 1.0)
        assert p == pytest.approx([0.75, 0.25], rel=1e-12)

    def test_single_channel_takes_everything(self, impl):
        p = impl.waterfill(np.array([0.3]), 2.5)
        assert p[0] == 2.5

    def test_weak_channel_shut_off(self, impl):
        # second channel is 1e6x weaker; nearly all power goes to the first
        p = impl.waterfill(np.array([1.0, 1e-6]), 1e-3)
        assert p[0] == pytest.approx(1e-3, rel=1e-9)
        assert p[1] == 0.0

    def test_rejects_bad_inputs(self, impl):
        with pytest.raises(ValueError):
            impl.waterfill(np.array([]), 1.0)
        with pytest.raises(ValueError):
            impl.waterfill(np.array([1.0]), 0.0)
        with pytest.raises(ValueError):
            impl.waterfill(np.array([1.0, -2.0]), 1.0)

    def test_kkt_and_conservation_random(self, impl):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = rng.integers(1, 12)
            g = 10.0 ** rng.uniform(-3, 3, n)
            total = 10.0 ** rng.uniform(-3, 2)
            p = impl.waterfill(g, total)
            assert abs(p.sum() - total) <= 1e-12 * total
            active = p > 0
            assert active.any()
            levels = p[active] + 1.0 / g[active]
            mu = levels.mean()
            assert np.abs(levels - mu).max() <= 1e-9 * max(mu, 1.0)
            if (~active).any():
                # inactive channels sit at or above the water level
                assert (1.0 / g[~active] >= mu - 1e-9 * max(mu, 1.0)).all()


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
class TestMaxminShare:
    def test_hand_oracle(self, impl):
        s = impl.maxmin_share(9.0, np.array([1.0, 5.0, 10.0]))
        assert s == pytest.approx([1.0, 4.0, 4.0], rel=1e-12)

    def test_surplus_capacity_meets_all_demands(self, impl):
        s = impl.maxmin_share(100.0, np.array([3.0, 7.0]))
        assert s == pytest.approx([3.0, 7.0])

    def test_zero_demand_gets_zero(self, impl):
        s = impl.maxmin_share(10.0, np.array([0.0, 4.0]))
        assert s[0] == 0.0 and s[1] == 4.0

    def test_never_exceeds_demand_or_capacity(self, impl):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = rng.integers(0, 10)
            dem = rng.uniform(0, 10, n)
            cap = rng.uniform(0, 20)
            s = impl.maxmin_share(cap, dem)
            assert (s <= dem + 1e-12).all()
            assert s.sum() <= cap + 1e-9
            # work-conserving: either all demands met or capacity used up
            if not np.allclose(s, dem):
                assert s.sum() == pytest.approx(cap, rel=1e-9)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
class TestGreedyAssign:
    def test_respects_candidacy_and_quota(self, impl):
        snr = np.full((3, 2), 10.0)
        cand = np.array([[1, 0], [1, 1], [0, 1]], dtype=np.uint8)
        band = np.array([1e6, 1e6])
        cap = np.array([np.inf, np.inf])
        qos = np.zeros(3)
        quota = np.array([1, 1], dtype=np.int64)
        a, _ = impl.greedy_assign(snr, cand, band, cap, qos, quota, False)
        assert a[0] in (-1, 0) and a[2] in (-1, 1)
        counts = np.bincount(a[a >= 0], minlength=2)
        assert (counts <= quota).all()

    def test_qos_floor_leaves_user_unserved(self, impl):
        snr = np.array([[0.001]])
        cand = np.ones((1, 1), dtype=np.uint8)
        a, est = impl.greedy_assign(snr, cand, np.array([1e6]),
                                    np.array([np.inf]), np.array([1e9]),
                                    np.array([10], dtype=np.int64), False)
        assert a[0] == -1 and est[0] == 0.0

    def test_backhaul_share_drives_choice(self, impl):
        # station 0 has the better radio but a starved back-haul
        snr = np.array([[100.0, 50.0]])
        cand = np.ones((1, 2), dtype=np.uint8)
        band = np.array([1e6, 1e6])
        cap = np.array([1e3, np.inf])
        a, est = impl.greedy_assign(snr, cand, band, cap, np.zeros(1),
                                    np.array([10, 10], dtype=np.int64), False)
        assert a[0] == 1
        assert est[0] == pytest.approx(1e6 * math.log2(51.0))


def test_backends_bit_identical():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    pure, fast = BACKENDS
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = rng.integers(1, 15)
        g = 10.0 ** rng.uniform(-4, 4, n)
        total = 10.0 ** rng.uniform(-2, 2)
        assert (pure.waterfill(g, total) == fast.waterfill(g, total)).all()
        dem = rng.uniform(0, 10, n)
        cap = rng.uniform(0, 5 * n)
        assert (pure.maxmin_share(cap, dem) == fast.maxmin_share(cap, dem)).all()
    for _ in range(30):
        n_u = rng.integers(1, 12)
        n_s = rng.integers(1, 6)
        snr = 10.0 ** rng.uniform(-2, 3, (n_u, n_s))
        cand = (rng.random((n_u, n_s)) < 0.8).astype(np.uint8)
        band = 10.0 ** rng.uniform(5, 7, n_s)
        cap = np.where(rng.random(n_s) < 0.3, np.inf,
                       10.0 ** rng.uniform(5, 8, n_s))
        qos = np.where(rng.random(n_u) < 0.5, 0.0, 1e5)
        quota = rng.integers(0, 6, n_s).astype(np.int64)
        for splits in (False, True):
            a1, e1 = pure.greedy_assign(snr, cand, band, cap, qos, quota, splits)
            a2, e2 = fast.greedy_assign(snr, cand, band, cap, qos, quota, splits)
            assert (a1 == a2).all()
            assert (e1 == e2).all()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=1e-4, max_value=1e4), min_size=1, max_size=10),
       st.floats(min_value=1e-4, max_value=1e3))
def test_waterfill_beats_uniform_split(gains, total):
    g = np.array(gains)
    p = kernels.waterfill(g, total)
    opt = np.log2(1.0 + g * p).sum()
    uni = np.log2(1.0 + g * (total / len(g))).sum()
    assert opt >= uni - 1e-9 * max(1.0, abs(uni))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0, max_value=1e6), max_size=12),
       st.floats(min_value=0, max_value=1e7))
def test_maxmin_is_max_min_fair(demands, capacity):
    dem = np.array(demands)
    s = kernels.maxmin_share(capacity, dem)
    # no share can grow without shrinking an equal-or-smaller one
    unmet = dem - s > 1e-9
    if unmet.any() and (s > 0).any():
        assert s[unmet].min() >= s[s > 0].min() - 1e-9
