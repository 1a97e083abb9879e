"""Classical (Torgerson-Gower) scaling and SMACOF least-squares MDS."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .distances import DissimilarityMatrix, pair_indices
from .errors import DegenerateRank, SizeMismatch

_EIG_RTOL = 1e-10


@dataclass
class Embedding:
    Z: np.ndarray
    stress: float
    history: list = field(default_factory=list)
    p: int = 2
    transform: str = "none"  # or "interval"
    alpha: float | None = None
    beta: float | None = None
    eigenvalues: np.ndarray | None = None
    negative_eigen: bool = False
    dhat: np.ndarray | None = None
    n_iter: int = 0


def _pair_dist(Z: np.ndarray) -> np.ndarray:
    I, J = pair_indices(Z.shape[0])
    diff = Z[I] - Z[J]
    return np.sqrt((diff * diff).sum(axis=1))


def stress(Z, Dhat: DissimilarityMatrix) -> float:
    """Raw stress over the full square: 2 * sum_{i>j} (dhat_ij - dist_ij(Z))^2."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Dhat.n:
        raise SizeMismatch(f"configuration has {Z.shape[0]} rows, dissimilarities N={Dhat.n}")
    r = Dhat.values - _pair_dist(Z)
    return float(2.0 * np.dot(r, r))


def _check_dims(n: int, p: int):
    if not 1 <= p <= n - 1:
        raise ValueError(f"p must lie in [1, {n - 1}], got {p}")


def classical_mds(D: DissimilarityMatrix, p: int = 2) -> Embedding:
    """Torgerson-Gower scaling: top-p eigenpairs of -J D^2 J / 2.

    Non-positive eigenvalues inside the top p give zero columns and set
    ``negative_eigen``.
    """
    n = D.n
    _check_dims(n, p)
    D2 = D.to_square() ** 2
    # double centring without forming J
    B = -0.5 * (D2 - D2.mean(axis=0) - D2.mean(axis=1)[:, None] + D2.mean())
    B = (B + B.T) / 2
    evals, evecs = eigh(B)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if not evals[0] > 0:
        raise DegenerateRank("no positive eigenvalue in the double-centred matrix")
    top = evals[:p]
    # round-off leaves rank-deficient directions at +-1e-14 or so
    keep = top > _EIG_RTOL * evals[0]
    negative = not bool(keep.all())
    if negative:
        warnings.warn("classical MDS: non-positive eigenvalues among the top p; zero columns returned")
    Z = evecs[:, :p] * np.sqrt(np.where(keep, top, 0.0))
    # sign convention: largest-magnitude loading of each column is positive
    flip = np.sign(Z[np.abs(Z).argmax(axis=0), np.arange(p)])
    Z = Z * np.where(flip == 0, 1.0, flip)
    Z = Z - Z.mean(axis=0)
    return Embedding(
        Z=Z,
        stress=stress(Z, D),
        p=p,
        eigenvalues=evals,
        negative_eigen=negative,
    )


def _guttman(Z: np.ndarray, dhat: np.ndarray) -> np.ndarray:
    n = Z.shape[0]
    I, J = pair_indices(n)
    d = _pair_dist(Z)
    ratio = np.divide(dhat, d, out=np.zeros_like(d), where=d > 0)
    Bm = np.zeros((n, n))
    Bm[I, J] = -ratio
    Bm[J, I] = -ratio
    Bm[np.diag_indices(n)] = -Bm.sum(axis=1)
    return Bm @ Z / n


def _interval_fit(D: np.ndarray, d: np.ndarray) -> tuple[float, float]:
    """Least-squares alpha + beta*D ~ d with beta >= 0 and min(alpha + beta*D) >= 0.

    The feasible set is a convex cone; the optimum is the best feasible point
    among the interior solution and the solutions on each face.
    """
    Dmin = D.min()
    cands = []
    Dc = D - D.mean()
    var = np.dot(Dc, Dc)
    if var > 0:
        b = np.dot(Dc, d) / var
        a = d.mean() - b * D.mean()
        cands.append((a, b))
    # face alpha = -beta*Dmin: smallest fitted value exactly 0
    E = D - Dmin
    ee = np.dot(E, E)
    if ee > 0:
        b = max(np.dot(E, d) / ee, 0.0)
        cands.append((-b * Dmin, b))
    # face beta = 0: constant fit
    cands.append((max(d.mean(), 0.0), 0.0))
    best = None
    for a, b in cands:
        if b < 0 or a + b * Dmin < -1e-12 * max(1.0, abs(a)):
            continue
        r = a + b * D - d
        loss = np.dot(r, r)
        if best is None or loss < best[0]:
            best = (loss, a, b)
    return best[1], best[2]


def smacof(
    D: DissimilarityMatrix,
    p: int = 2,
    niter: int = 100,
    interc: int = 1,
    tol: float = 1e-6,
    init: str = "classical",
    seed: int | None = None,
) -> Embedding:
    """Metric SMACOF, optionally with an interval transform dhat = alpha + beta*D.

    With ``interc=1`` the disparities are refitted after every Guttman step
    and rescaled to the sum of squares of D, which keeps the alternation
    monotone and rules out the collapsed solution.  ``alpha``/``beta`` in the
    result are the coefficients after that rescaling.
    """
    n = D.n
    _check_dims(n, p)
    if interc not in (0, 1):
        raise ValueError("interc must be 0 or 1")
    delta = D.values
    if init == "classical":
        Z = classical_mds(D, p).Z if np.any(delta != 0) else np.zeros((n, p))
    elif init == "random":
        Z = np.random.default_rng(seed).standard_normal((n, p))
    else:
        raise ValueError(f"unknown init {init!r}")
    Z = Z - Z.mean(axis=0)

    norm2 = np.dot(delta, delta)
    dhat = delta.copy()
    alpha, beta = 0.0, 1.0
    Dh = DissimilarityMatrix(n, dhat)
    cur = stress(Z, Dh)
    history = [cur]
    it = 0
    for it in range(1, niter + 1):
        Z = _guttman(Z, dhat)
        if interc:
            a, b = _interval_fit(delta, _pair_dist(Z))
            fit = a + b * delta
            fn = np.dot(fit, fit)
            if fn > 0:
                scale = np.sqrt(norm2 / fn)
                alpha, beta = a * scale, b * scale
                dhat = np.maximum(alpha + beta * delta, 0.0)
                Dh = DissimilarityMatrix(n, dhat)
        new = stress(Z, Dh)
        history.append(new)
        done = cur <= 0 or (cur - new) / cur < tol
        cur = new
        if done:
            break

    Z = Z - Z.mean(axis=0)
    return Embedding(
        Z=Z,
        stress=cur,
        history=history,
        p=p,
        transform="interval" if interc else "none",
        alpha=alpha if interc else None,
        beta=beta if interc else None,
        dhat=dhat,
        n_iter=it,
    )
