"""Per-attribute distances, scale factors, targeting and composite dissimilarities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cosa.distances import (
    CATEGORICAL,
    NUMERIC,
    DataMatrix,
    DissimilarityMatrix,
    ScaleFactors,
    TargetSpec,
    attr_distance,
    attribute_distances,
    compute_scale_factors,
    condensed_index,
    fixed_weight_dissimilarity,
    l1_dissimilarity,
    pair_indices,
    sqeuclid_dissimilarity,
    targeted_attr_distance,
)
from cosa.errors import AllZeroWeights, DataError, LengthMismatch, ZeroDispersion


def oracle_composite(X, s, kinds, targ, w=None, power=1):
    """Nested-loop reference: D_ij = sum_k w_k d_ijk**power, condensed order."""
    n, p = X.shape
    w = np.ones(p) if w is None else w
    out = []
    for j in range(n):
        for i in range(j + 1, n):
            tot = 0.0
            for k in range(p):
                if targ.active:
                    u = None if targ.u is None else targ.u[k]
                    d = targeted_attr_distance(X[i, k], X[j, k], targ.mode, targ.t[k], u, kinds[k], s[k])
                else:
                    d = attr_distance(X[i, k], X[j, k], kinds[k], s[k])
                tot += w[k] * d**power
            out.append(tot)
    return np.array(out)


def random_instance(rng, n=None, p=None, with_cat=True):
    n = n or int(rng.integers(2, 7))
    p = p or int(rng.integers(1, 5))
    vals = rng.normal(size=(n, p))
    kinds = [NUMERIC] * p
    if with_cat and p > 1 and rng.random() < 0.5:
        vals[:, 0] = rng.integers(0, 3, size=n)
        kinds[0] = CATEGORICAL
    # guarantee dispersion in every column
    vals[0, :] += 0.0
    vals[1, :] = vals[0, :] + np.where(np.array(kinds) == CATEGORICAL, 1, 1.5)
    return DataMatrix(vals, kinds=kinds)


def random_target(rng, X, mode):
    if mode == "none":
        return TargetSpec()
    hi = X.values.max(axis=0)
    lo = X.values.min(axis=0)
    if mode == "single_high":
        return TargetSpec(mode, hi)
    if mode == "single_low":
        return TargetSpec(mode, lo)
    return TargetSpec(mode, hi, lo)


class TestScaleFactors:
    def test_sample_sd(self):
        X = DataMatrix([[0.0], [2.0]])
        S = compute_scale_factors(X, "std")
        assert S.s[0] == pytest.approx(2 / np.sqrt(2), rel=1e-15)

    def test_constant_column(self):
        X = DataMatrix([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])
        with pytest.raises(ZeroDispersion):
            compute_scale_factors(X, "std")
        with pytest.raises(ZeroDispersion):
            compute_scale_factors(X, "mad")

    def test_preset_passthrough(self):
        X = DataMatrix(np.arange(12.0).reshape(4, 3))
        S = compute_scale_factors(X, "preset", [1, 1, 1])
        np.testing.assert_array_equal(S.s, [1, 1, 1])
        with pytest.raises(LengthMismatch):
            compute_scale_factors(X, "preset", [1, 1])

    def test_mad(self):
        X = DataMatrix([[0.0], [1.0], [5.0]])
        S = compute_scale_factors(X, "mad")
        assert S.s[0] == pytest.approx((2 + 1 + 3) / 3)

    def test_categorical_gets_one(self):
        X = DataMatrix([[0, 1.0], [3, 2.0]], kinds=[CATEGORICAL, NUMERIC])
        assert compute_scale_factors(X).s[0] == 1.0


class TestDataMatrix:
    def test_rejects_nonfinite(self):
        with pytest.raises(DataError):
            DataMatrix([[1.0, np.nan], [2.0, 3.0]])
        with pytest.raises(DataError):
            DataMatrix([[1.0, np.inf], [2.0, 3.0]])

    def test_rejects_bad_codes(self):
        with pytest.raises(DataError):
            DataMatrix([[0.5], [1.0]], kinds=[CATEGORICAL])
        with pytest.raises(DataError):
            DataMatrix([[-1.0], [1.0]], kinds=[CATEGORICAL])

    def test_shape_checks(self):
        with pytest.raises(DataError):
            DataMatrix([[1.0, 2.0]])
        with pytest.raises(LengthMismatch):
            DataMatrix([[1.0], [2.0]], row_ids=["a"])


class TestAttrDistance:
    def test_examples(self):
        assert attr_distance(3.7, 3.7, NUMERIC, 0.3) == 0
        assert attr_distance(3, 1, NUMERIC, 1) == 2
        assert attr_distance(2, 5, CATEGORICAL, 0.5) == 2

    def test_targeted_examples(self):
        assert targeted_attr_distance(2, 2, "single_high", 2, None, NUMERIC, 1) == 0
        assert targeted_attr_distance(0, 1, "single_high", 2, None, NUMERIC, 1) == 2
        # both near a different pole is not small
        assert targeted_attr_distance(2, -2, "dual", 2, -2, NUMERIC, 1) == 4
        assert targeted_attr_distance(-2, -2, "dual", 2, -2, NUMERIC, 1) == 0

    def test_dual_requires_ordered_targets(self):
        with pytest.raises(ValueError):
            TargetSpec("dual", np.array([0.0]), np.array([1.0]))


class TestCondensed:
    def test_index_formula_matches_pdist_order(self):
        n = 7
        I, J = pair_indices(n)
        for t, (i, j) in enumerate(zip(I, J)):
            assert i > j
            assert condensed_index(n, i, j) == t == condensed_index(n, j, i)
            assert t == j * n - j * (j + 1) // 2 + i - j - 1

    def test_square_round_trip(self):
        rng = np.random.default_rng(0)
        D = DissimilarityMatrix(5, rng.random(10))
        sq = D.to_square()
        np.testing.assert_array_equal(sq, sq.T)
        np.testing.assert_array_equal(DissimilarityMatrix.from_square(sq).values, D.values)
        np.testing.assert_array_equal(D.row(2), sq[2])
        assert D[3, 1] == sq[3, 1]

    def test_length_check(self):
        with pytest.raises(LengthMismatch):
            DissimilarityMatrix(4, np.zeros(5))


class TestComposites:
    def test_examples(self):
        S = ScaleFactors(np.array([1.0, 1.0]), "preset")
        np.testing.assert_array_equal(l1_dissimilarity(DataMatrix([[0, 0], [1, 1]]), S).values, [2])
        np.testing.assert_array_equal(sqeuclid_dissimilarity(DataMatrix([[0, 0], [1, 2]]), S).values, [5])

    def test_identical_rows_zero(self):
        X = DataMatrix([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [0.0, 5.0, 1.0]])
        S = compute_scale_factors(X)
        for f in (l1_dissimilarity, sqeuclid_dissimilarity):
            assert f(X, S).values[0] == 0.0

    def test_uniform_weights_proportional(self):
        rng = np.random.default_rng(3)
        X = DataMatrix(rng.normal(size=(6, 4)))
        S = compute_scale_factors(X)
        D = fixed_weight_dissimilarity(X, S, np.full(4, 0.25))
        np.testing.assert_allclose(D.values, 0.25 * l1_dissimilarity(X, S).values, rtol=1e-15)

    def test_one_hot_selects_attribute(self):
        rng = np.random.default_rng(4)
        X = DataMatrix(rng.normal(size=(6, 4)))
        S = compute_scale_factors(X)
        D = fixed_weight_dissimilarity(X, S, [0, 0, 1, 0])
        np.testing.assert_array_equal(D.values, attribute_distances(X, S)[:, 2])

    def test_weight_errors(self):
        X = DataMatrix(np.arange(6.0).reshape(3, 2))
        S = compute_scale_factors(X)
        with pytest.raises(AllZeroWeights):
            fixed_weight_dissimilarity(X, S, [0, 0])
        with pytest.raises(LengthMismatch):
            fixed_weight_dissimilarity(X, S, [1, 1, 1])

    @pytest.mark.parametrize("mode", ["none", "single_high", "single_low", "dual"])
    def test_oracle_equivalence(self, mode):
        """200 random instances, N <= 6, P <= 4, every composite, 1e-12 relative."""
        rng = np.random.default_rng(100)
        for _ in range(200):
            X = random_instance(rng)
            S = compute_scale_factors(X, str(rng.choice(["std", "mad"])))
            targ = random_target(rng, X, mode)
            w = rng.random(X.p) + 0.01
            cases = [
                (l1_dissimilarity(X, S, targ), oracle_composite(X.values, S.s, X.kinds, targ)),
                (sqeuclid_dissimilarity(X, S, targ), oracle_composite(X.values, S.s, X.kinds, targ, power=2)),
                (fixed_weight_dissimilarity(X, S, w, 1, targ), oracle_composite(X.values, S.s, X.kinds, targ, w)),
                (fixed_weight_dissimilarity(X, S, w, 2, targ), oracle_composite(X.values, S.s, X.kinds, targ, w, 2)),
            ]
            for got, want in cases:
                np.testing.assert_allclose(got.values, want, rtol=1e-12, atol=0)
                assert np.all(got.values >= 0)

    def test_chunking_matches_single_block(self, monkeypatch):
        import cosa.distances as dist

        rng = np.random.default_rng(5)
        X = DataMatrix(rng.normal(size=(30, 7)))
        S = compute_scale_factors(X)
        whole = l1_dissimilarity(X, S).values
        monkeypatch.setattr(dist, "_CHUNK_CELLS", 20)
        np.testing.assert_array_equal(l1_dissimilarity(X, S).values, whole)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(3, 7), st.integers(1, 4)), elements=st.floats(-50, 50)),
    st.randoms(use_true_random=False),
)
def test_permutation_equivariance(vals, rnd):
    vals = vals.copy()
    vals[1] = vals[0] + 1.0  # keeps every column dispersed
    X = DataMatrix(vals)
    S = compute_scale_factors(X)
    n = X.n
    perm = list(range(n))
    rnd.shuffle(perm)
    perm = np.array(perm)
    Xp = DataMatrix(vals[perm])
    D = l1_dissimilarity(X, S).to_square()
    Dp = l1_dissimilarity(Xp, S).to_square()
    np.testing.assert_array_equal(Dp, D[np.ix_(perm, perm)])
