"""Attribute importance and its resampling null."""

import numpy as np
import pytest

from cosa.datagen import gen_design2
from cosa.distances import DataMatrix, ScaleFactors, TargetSpec, compute_scale_factors
from cosa.errors import GroupTooSmall, RangeTooLarge
from cosa.importance import EPS, attimp, dispersion, dispersions


def brute_dispersion(X, s, group, k, norm_n):
    tot = 0.0
    for i in group:
        for j in group:
            tot += abs(X[i, k] - X[j, k]) / s[k]
    return tot / norm_n**2


class TestDispersion:
    def test_constant_within_group(self):
        X = DataMatrix([[1.0, 0.0], [1.0, 5.0], [2.0, 1.0]])
        S = compute_scale_factors(X)
        assert dispersion(X, S, None, [0, 1], 0) == 0.0

    def test_two_members(self):
        X = DataMatrix([[0.0], [4.0], [9.0]])
        S = ScaleFactors(np.ones(1), "preset")
        assert dispersion(X, S, None, [0, 1], 0) == 2.0

    def test_brute_force(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            n, p = int(rng.integers(3, 10)), int(rng.integers(1, 6))
            X = DataMatrix(rng.normal(size=(n, p)))
            S = compute_scale_factors(X)
            group = rng.choice(n, size=int(rng.integers(2, n + 1)), replace=False)
            got = dispersions(X, S, None, group)
            want = [brute_dispersion(X.values, S.s, group, k, len(group)) for k in range(p)]
            np.testing.assert_allclose(got, want, rtol=1e-12)
            got_g = dispersions(X, S, None, group, norm="global")
            want_g = [brute_dispersion(X.values, S.s, group, k, n) for k in range(p)]
            np.testing.assert_allclose(got_g, want_g, rtol=1e-12)

    def test_group_too_small(self):
        X = DataMatrix(np.arange(6.0).reshape(3, 2))
        S = compute_scale_factors(X)
        with pytest.raises(GroupTooSmall):
            dispersion(X, S, None, [1], 0)


class TestAttimp:
    def setup_method(self):
        rng = np.random.default_rng(52)
        self.X = DataMatrix(rng.normal(size=(20, 12)))
        self.S = compute_scale_factors(self.X)

    def test_sorted_and_consistent(self):
        rep = attimp(self.X, self.S, None, [0, 3, 5, 7, 9], times=5, seed=1)
        assert np.all(np.diff(rep.imp) <= 0)
        assert sorted(rep.att.tolist()) == list(range(12))
        np.testing.assert_allclose(rep.imp, 1 / (rep.disp + EPS))
        # ordering by importance equals ordering by ascending dispersion
        assert np.all(np.diff(rep.disp) >= 0)
        assert rep.null_curves.shape == (5, 12)
        assert np.all(np.diff(rep.null_curves, axis=1) <= 0)
        np.testing.assert_allclose(rep.null_mean, rep.null_curves.mean(axis=0))

    def test_range_truncates(self):
        rep = attimp(self.X, self.S, None, [0, 1, 2], R=4, times=3, seed=2)
        assert rep.att.size == rep.imp.size == 4
        assert rep.null_curves.shape == (3, 4)

    def test_no_null(self):
        rep = attimp(self.X, self.S, None, [0, 1, 2])
        assert rep.null_curves.size == 0
        assert rep.null_mean.size == 0

    def test_seeded_determinism(self):
        a = attimp(self.X, self.S, None, [2, 4, 6], times=7, seed=9)
        b = attimp(self.X, self.S, None, [2, 4, 6], times=7, seed=9)
        np.testing.assert_array_equal(a.null_curves, b.null_curves)

    def test_repetition_streams_independent_of_count(self):
        """Repetition r draws the same subset whether 3 or 8 repetitions are requested."""
        a = attimp(self.X, self.S, None, [2, 4, 6], times=3, seed=9)
        b = attimp(self.X, self.S, None, [2, 4, 6], times=8, seed=9)
        np.testing.assert_array_equal(a.null_curves, b.null_curves[:3])

    def test_errors(self):
        with pytest.raises(RangeTooLarge):
            attimp(self.X, self.S, None, [0, 1], R=13)
        with pytest.raises(GroupTooSmall):
            attimp(self.X, self.S, None, [0])

    def test_targeted(self):
        targ = TargetSpec.from_data(self.X, "high/low")
        rep = attimp(self.X, self.S, targ, [0, 1, 2, 3])
        assert np.all(rep.disp >= 0)


def test_planted_attributes_rank_first():
    design = gen_design2(seed=3)
    S = compute_scale_factors(design.X)
    for g, attrs in enumerate(design.attribute_sets, start=1):
        group = np.flatnonzero(design.object_labels == g)
        rep = attimp(design.X, S, None, group, R=30)
        assert set(rep.att.tolist()) == set(attrs.tolist())
