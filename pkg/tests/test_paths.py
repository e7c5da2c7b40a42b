import numpy as np
import pytest

from isolab.paths import (Grid, TwoSidedPath, add_drift, derived_rng, one_sided_grid,
                          sample_bm, two_sided_grid)


class TestDerivedRng:
    def test_deterministic(self):
        a = derived_rng(7, 3).standard_normal(5)
        b = derived_rng(7, 3).standard_normal(5)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = derived_rng(7, 0).standard_normal(5)
        b = derived_rng(7, 1).standard_normal(5)
        assert not np.array_equal(a, b)

    def test_order_independent(self):
        # consuming stream 5 first does not change stream 2
        first = derived_rng(1, 2).standard_normal(4)
        _ = derived_rng(1, 5).standard_normal(100)
        again = derived_rng(1, 2).standard_normal(4)
        assert np.array_equal(first, again)


class TestGrid:
    def test_two_sided_contains_zero_once(self):
        g = two_sided_grid(1.0, 2.0, 0.25)
        assert np.count_nonzero(g.times == 0.0) == 1
        assert g.times[0] == -1.0 and g.times[-1] == 2.0
        assert np.allclose(np.diff(g.times), 0.25)

    def test_one_sided(self):
        g = one_sided_grid(1.0, 0.5)
        assert np.allclose(g.times, [0.0, 0.5, 1.0])
        assert g.zero_index == 0

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            two_sided_grid(0.0, 0.0, 0.1)
        with pytest.raises(ValueError):
            one_sided_grid(1.0, -0.1)
        with pytest.raises(ValueError):
            Grid(times=np.array([0.0, 0.0, 1.0]))

    def test_zero_index(self):
        g = two_sided_grid(0.5, 0.5, 0.25)
        assert g.times[g.zero_index] == 0.0
        with pytest.raises(ValueError):
            Grid(times=np.array([1.0, 2.0])).zero_index


class TestSampleBm:
    def test_anchored_at_zero(self):
        g = two_sided_grid(1.0, 1.0, 0.1)
        p = sample_bm(g, derived_rng(0, 0))
        assert p.values[g.zero_index] == 0.0

    def test_increment_moments(self):
        g = two_sided_grid(1.0, 1.0, 0.5)
        n = 40_000
        end_r = np.empty(n)
        end_l = np.empty(n)
        for i in range(n):
            p = sample_bm(g, derived_rng(42, i))
            end_r[i] = p.values[-1]
            end_l[i] = p.values[0]
        # B(1) and B(-1) are independent standard normals
        assert abs(end_r.mean()) < 0.02
        assert abs(end_r.var() - 1.0) < 0.03
        assert abs(end_l.var() - 1.0) < 0.03
        assert abs(np.corrcoef(end_r, end_l)[0, 1]) < 0.02

    def test_one_sided_grid_works(self):
        g = one_sided_grid(2.0, 0.5)
        p = sample_bm(g, derived_rng(3, 0))
        assert p.values[0] == 0.0
        assert len(p.values) == len(g.times)


class TestAddDrift:
    def test_pointwise_shift(self):
        g = two_sided_grid(1.0, 1.0, 0.5)
        p = sample_bm(g, derived_rng(9, 0))
        q = add_drift(p, lambda t: t ** 2)
        assert np.allclose(q.values, p.values + g.times ** 2)

    def test_anchor_preserved(self):
        g = two_sided_grid(1.0, 1.0, 0.5)
        p = sample_bm(g, derived_rng(9, 1))
        q = add_drift(p, lambda t: 3 * t)
        assert q.values[g.zero_index] == 0.0

    def test_nonvanishing_drift_rejected(self):
        g = two_sided_grid(1.0, 1.0, 0.5)
        p = sample_bm(g, derived_rng(9, 2))
        with pytest.raises(ValueError):
            add_drift(p, lambda t: t + 1.0)


class TestTwoSidedPath:
    def test_length_mismatch(self):
        g = two_sided_grid(0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            TwoSidedPath(grid=g, values=np.zeros(99))
