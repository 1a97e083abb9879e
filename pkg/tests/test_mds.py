"""Classical scaling and SMACOF."""

import warnings

import numpy as np
import pytest
from scipy.linalg import orthogonal_procrustes

from cosa.distances import DissimilarityMatrix
from cosa.errors import DegenerateRank, SizeMismatch
from cosa.mds import _interval_fit, _pair_dist, classical_mds, smacof, stress


def euclid(Z):
    return DissimilarityMatrix(Z.shape[0], _pair_dist(Z))


def procrustes_residual(A, B):
    A = A - A.mean(axis=0)
    B = B - B.mean(axis=0)
    R, _ = orthogonal_procrustes(B, A)
    return float(np.abs(B @ R - A).max())


class TestClassical:
    def test_two_points(self):
        Z = classical_mds(DissimilarityMatrix(2, [2.0]), p=1).Z
        np.testing.assert_allclose(np.sort(Z[:, 0]), [-1.0, 1.0], atol=1e-12)

    def test_recovers_configuration(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            Z0 = rng.normal(size=(6, 2))
            Z0 -= Z0.mean(axis=0)
            emb = classical_mds(euclid(Z0), p=2)
            assert procrustes_residual(Z0, emb.Z) < 1e-8

    def test_equilateral(self):
        emb = classical_mds(DissimilarityMatrix(3, [1.0, 1.0, 1.0]), p=2)
        np.testing.assert_allclose(_pair_dist(emb.Z), 1.0, atol=1e-9)

    def test_trailing_eigenvalues_vanish(self):
        rng = np.random.default_rng(32)
        Z0 = rng.normal(size=(10, 2))
        with pytest.warns(UserWarning, match="non-positive"):
            emb = classical_mds(euclid(Z0), p=4)
        assert emb.negative_eigen
        np.testing.assert_array_equal(emb.Z[:, 2:], 0.0)
        ev = np.asarray(emb.eigenvalues)
        assert np.all(np.abs(ev[2:4]) <= 1e-8 * ev[0])

    def test_negative_eigen_flag(self):
        # violates the triangle inequality badly: not Euclidean
        D = DissimilarityMatrix(4, [1.0, 1.0, 10.0, 1.0, 1.0, 1.0])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            emb = classical_mds(D, p=3)
        assert emb.negative_eigen
        assert np.all(np.isfinite(emb.Z))

    def test_degenerate(self):
        with pytest.raises(DegenerateRank):
            classical_mds(DissimilarityMatrix(3, np.zeros(3)), p=1)

    def test_centered(self):
        rng = np.random.default_rng(33)
        emb = classical_mds(DissimilarityMatrix(8, rng.random(28)), p=2)
        np.testing.assert_allclose(emb.Z.mean(axis=0), 0.0, atol=1e-12)


class TestStress:
    def test_examples(self):
        assert stress(np.array([[0.0], [1.0]]), DissimilarityMatrix(2, [3.0])) == 8.0
        rng = np.random.default_rng(34)
        Z = rng.normal(size=(5, 2))
        assert stress(Z, euclid(Z)) == pytest.approx(0.0, abs=1e-24)

    def test_scaling(self):
        Z = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
        Dh = DissimilarityMatrix(3, [1.0, 1.0, 1.0])
        for c in (0.5, 2.0):
            want = 2 * sum((1 - c * d) ** 2 for d in (3.0, 4.0, 5.0))
            assert stress(c * Z, Dh) == pytest.approx(want, rel=1e-14)

    def test_translation_invariance(self):
        rng = np.random.default_rng(35)
        Z = rng.normal(size=(6, 2))
        Dh = DissimilarityMatrix(6, rng.random(15))
        assert stress(Z + [3.0, -7.0], Dh) == pytest.approx(stress(Z, Dh), rel=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            stress(np.zeros((3, 2)), DissimilarityMatrix(2, [1.0]))


def monotone(history):
    return all(b <= a + 1e-12 for a, b in zip(history, history[1:]))


class TestSmacof:
    def test_zero_stress_on_euclidean(self):
        rng = np.random.default_rng(36)
        for _ in range(10):
            Z0 = rng.normal(size=(8, 2))
            emb = smacof(euclid(Z0), p=2, interc=0, niter=500, tol=0)
            assert emb.stress < 1e-10

    def test_zero_stress_from_random_start(self):
        rng = np.random.default_rng(37)
        Z0 = rng.normal(size=(7, 2))
        emb = smacof(euclid(Z0), p=2, interc=0, niter=5000, tol=1e-15, init="random", seed=1)
        assert emb.stress < 1e-10

    @pytest.mark.parametrize("interc", [0, 1])
    def test_monotone_history(self, interc):
        """50 random instances, non-Euclidean input, both inits."""
        rng = np.random.default_rng(38 + interc)
        for r in range(50):
            n = int(rng.integers(4, 15))
            D = DissimilarityMatrix(n, rng.random(n * (n - 1) // 2) + 0.1)
            init = "random" if r % 2 else "classical"
            emb = smacof(D, p=2, interc=interc, niter=200, tol=0, init=init, seed=r)
            assert monotone(emb.history), np.diff(emb.history).max()
            np.testing.assert_allclose(emb.Z.mean(axis=0), 0.0, atol=1e-10)

    def test_interval_feasibility(self):
        rng = np.random.default_rng(40)
        for r in range(50):
            n = int(rng.integers(4, 12))
            D = DissimilarityMatrix(n, rng.random(n * (n - 1) // 2) * 3 + rng.random() * 5)
            emb = smacof(D, p=2, interc=1, niter=100)
            assert emb.dhat.min() >= 0
            assert emb.beta >= 0
            assert emb.alpha is not None

    def test_interval_fit_is_cone_projection(self):
        """Brute-force grid over the feasible (alpha, beta) region never beats the fit."""
        rng = np.random.default_rng(41)
        for _ in range(20):
            D = rng.random(10) * 2 + 0.5
            d = rng.random(10) * 3 - 0.5
            a, b = _interval_fit(D, d)
            assert b >= 0 and a + b * D.min() >= -1e-12
            loss = np.sum((a + b * D - d) ** 2)
            for bb in np.linspace(0, 4, 81):
                for aa in np.linspace(-bb * D.min(), 4, 81):
                    assert loss <= np.sum((aa + bb * D - d) ** 2) + 1e-12

    def test_additive_constant(self):
        """Interval scaling absorbs an added constant that plain SMACOF must fit."""
        rng = np.random.default_rng(42)
        for _ in range(10):
            Z0 = rng.normal(size=(10, 2))
            D = DissimilarityMatrix(10, _pair_dist(Z0) + 2.0)
            plain = smacof(D, interc=0, niter=300)
            interval = smacof(D, interc=1, niter=300)
            assert interval.stress <= plain.stress

    def test_determinism(self):
        rng = np.random.default_rng(43)
        D = DissimilarityMatrix(9, rng.random(36))
        a = smacof(D, init="random", seed=5)
        b = smacof(D, init="random", seed=5)
        np.testing.assert_array_equal(a.Z, b.Z)
        assert a.history == b.history

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            smacof(DissimilarityMatrix(3, [1.0, 1.0, 1.0]), p=3)
