"""COSA weight/distance iteration with the homotopy schedule.

The per-attribute pair distances are computed once and kept as an
(N(N-1)/2, P) array; every iteration reuses them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .distances import (
    DataMatrix,
    DissimilarityMatrix,
    ScaleFactors,
    TargetSpec,
    attribute_distances,
    compute_scale_factors,
    condensed_index,
)
from .errors import SizeMismatch

log = logging.getLogger(__name__)


@dataclass
class CosaParams:
    lam: float = 0.2
    knn: int | None = None  # floor(sqrt(N)) when None
    eta_init: float | None = None  # lam when None
    eta_step: float | None = None  # lam / 10 when None
    max_outer: int = 100
    max_inner: int = 50
    inner_tol: float = 1e-4
    outer_tol: float = 1e-4
    targ: str = "none"
    scale_method: str = "std"
    scale_preset: tuple | None = None
    knn_includes_self: bool = False
    seed: int = 0

    def resolved(self, n: int) -> "CosaParams":
        """Copy with every None default filled in for ``n`` objects, validated."""
        p = replace(
            self,
            knn=self.knn if self.knn is not None else max(1, math.isqrt(n)),
            eta_init=self.eta_init if self.eta_init is not None else self.lam,
            eta_step=self.eta_step if self.eta_step is not None else self.lam / 10,
        )
        if not p.lam > 0:
            raise ValueError("lambda must be positive")
        if not 1 <= p.knn <= n - 1:
            raise ValueError(f"knn must lie in [1, {n - 1}], got {p.knn}")
        if p.eta_init < p.lam:
            raise ValueError("eta_init must be >= lambda")
        if not p.eta_step > 0:
            raise ValueError("eta_step must be positive")
        if p.max_outer < 1 or p.max_inner < 1:
            raise ValueError("max_outer and max_inner must be >= 1")
        return p


@dataclass(frozen=True)
class IterationRecord:
    wchange: float
    iit: int
    oit: int
    it: int
    eta: float
    msd: float
    crit: float

    def format(self) -> str:
        """One console line: Wchange, #iit, #oit, #it, Eta, MSD, Crit."""
        return (
            f"{self.wchange:11.6f} {self.iit:8d} {self.oit:4d} {self.it:4d}   "
            f"{self.eta:<#10.4g} {self.msd:<14.6g} {self.crit:.6g}"
        )


LOG_HEADER = "    Wchange     #iit #oit  #it   Eta        MSD            Crit"


@dataclass
class CosaResult:
    D: DissimilarityMatrix
    W: np.ndarray
    log: list = field(default_factory=list)
    tunpar: dict = field(default_factory=dict)
    params: CosaParams | None = None


def homotopy_eta(eta_init: float, eta_step: float, oit: int) -> float:
    """eta used during outer step ``oit``: eta_init + oit*eta_step, rounded once."""
    return float(Fraction(eta_init) + oit * Fraction(eta_step))


def knn_sets(D: DissimilarityMatrix, K: int, include_self: bool = False) -> np.ndarray:
    """(N, K) neighbour indices; ties go to the lower object index.

    With ``include_self`` each object is its own first neighbour and K-1
    others follow.
    """
    n = D.n
    if not 1 <= K <= n - 1:
        raise ValueError(f"K must lie in [1, {n - 1}]")
    out = np.empty((n, K), dtype=np.intp)
    take = K - 1 if include_self else K
    for i in range(n):
        row = D.row(i)
        others = np.delete(np.arange(n), i)
        order = np.argsort(row[others], kind="stable")
        nb = others[order[:take]]
        out[i] = np.concatenate(([i], nb)) if include_self else nb
    return out


def _neighbour_sums(dk: np.ndarray, n: int, neighbors: np.ndarray) -> np.ndarray:
    """A_ik = sum over j in KNN(i) of d_ijk.  Self-neighbours contribute zero."""
    rows = np.repeat(np.arange(n), neighbors.shape[1]).reshape(neighbors.shape)
    self_mask = rows == neighbors
    idx = condensed_index(n, rows, np.where(self_mask, (rows + 1) % n, neighbors))
    block = dk[idx]
    if self_mask.any():
        block[self_mask] = 0.0
    return block.sum(axis=1)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def weights_from_sums(A: np.ndarray, K: int, lam: float) -> np.ndarray:
    """Closed-form minimiser of the linearised criterion for given sums A."""
    return _softmax_rows(-A / (K * lam))


def update_weights(X, S, targ, neighbors, K, lam, dk=None) -> np.ndarray:
    """New N x P weight matrix from the current neighbour sets."""
    if dk is None:
        dk = attribute_distances(X, S, targ)
    return weights_from_sums(_neighbour_sums(dk, X.n, neighbors), K, lam)


def _column_blocks(n: int):
    """(j, slice) pairs: pairs (i, j) for i > j sit contiguously in condensed order."""
    start = 0
    for j in range(n - 1):
        stop = start + n - 1 - j
        yield j, slice(start, stop)
        start = stop


def _pair_terms(dk: np.ndarray, W: np.ndarray, eta: float | None):
    """Max-weight L1 and (if ``eta``) inverse-exponential values for every pair.

    One pass over the pair blocks; the inverse-exponential sum uses
    log-sum-exp on log max(w_ik, w_jk) - d_ijk/eta.
    """
    n = W.shape[0]
    l1 = np.empty(dk.shape[0])
    inv = np.empty(dk.shape[0]) if eta is not None else None
    with np.errstate(divide="ignore"):
        logW = np.log(W)
    for j, sl in _column_blocks(n):
        d = dk[sl]
        m = np.maximum(W[j], W[j + 1:])
        l1[sl] = np.einsum("ik,ik->i", m, d)
        if eta is None:
            continue
        a = np.maximum(logW[j], logW[j + 1:])
        a -= d / eta
        top = a.max(axis=1)
        a -= top[:, None]
        np.exp(a, out=a)
        inv[sl] = -eta * (top + np.log(a.sum(axis=1)))
    return l1, inv


def invexp_from_dk(dk: np.ndarray, W: np.ndarray, eta: float) -> np.ndarray:
    return _pair_terms(dk, W, eta)[1]


def invexp_dissimilarity(X, S, targ, W, eta, dk=None) -> DissimilarityMatrix:
    """-eta * log sum_k max(w_ik, w_jk) exp(-d_ijk / eta), via log-sum-exp.

    Not clamped: when the pairwise max-weights sum above one, entries near
    zero distance go negative, and for large eta every such entry drifts
    towards -inf (the limit is the weighted L1 only when that sum is 1).
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if dk is None:
        dk = attribute_distances(X, S, targ)
    return DissimilarityMatrix(X.n, invexp_from_dk(dk, np.asarray(W, dtype=float), eta))


def maxweight_from_dk(dk: np.ndarray, W: np.ndarray) -> np.ndarray:
    return _pair_terms(dk, W, None)[0]


def maxweight_l1_dissimilarity(X, S, targ, W, dk=None) -> DissimilarityMatrix:
    """sum_k max(w_ik, w_jk) d_ijk -- the COSA dissimilarity."""
    if dk is None:
        dk = attribute_distances(X, S, targ)
    return DissimilarityMatrix(X.n, maxweight_from_dk(dk, np.asarray(W, dtype=float)))


def _entropy_term(W: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        wlogw = np.where(W > 0, W * np.log(W), 0.0)
    return wlogw.sum(axis=1)


def criterion_from_sums(A: np.ndarray, W: np.ndarray, K: int, lam: float) -> float:
    return float(((W * A).sum(axis=1) / K + lam * _entropy_term(W)).sum())


def criterion(X, S, targ, W, neighbors, K, lam, dk=None) -> float:
    """Q(W) with row-i weights on the neighbour distances plus the entropy penalty."""
    if dk is None:
        dk = attribute_distances(X, S, targ)
    A = _neighbour_sums(dk, X.n, neighbors)
    return criterion_from_sums(A, np.asarray(W, dtype=float), K, lam)


def msd(D_l1w: DissimilarityMatrix, D_eta: DissimilarityMatrix) -> float:
    """Mean squared difference, full-square double sum over N(N-1)."""
    if D_l1w.n != D_eta.n:
        raise SizeMismatch(f"N={D_l1w.n} vs N={D_eta.n}")
    n = D_l1w.n
    diff = D_l1w.values - D_eta.values
    return float(np.dot(diff, diff) * 2.0 / (n * (n - 1)))


def run_cosa(
    X: DataMatrix,
    params: CosaParams | None = None,
    callback: Callable[[IterationRecord, np.ndarray], None] | None = None,
) -> CosaResult:
    """Run the full COSA outer/inner homotopy iteration.

    ``callback(record, W)`` is invoked after every inner iteration with the
    freshly updated weights.
    """
    params = (params or CosaParams()).resolved(X.n)
    S = compute_scale_factors(X, params.scale_method, params.scale_preset)
    targ = TargetSpec.from_data(X, params.targ)
    dk = attribute_distances(X, S, targ)
    n, p = X.n, X.p
    K, lam = params.knn, params.lam

    W = np.full((n, p), 1.0 / p)
    records: list[IterationRecord] = []
    it = 0
    D_eta = None  # invexp distances at (W, eta) when still valid
    for oit in range(1, params.max_outer + 1):
        eta = homotopy_eta(params.eta_init, params.eta_step, oit)
        W_outer_start = W
        D_eta = None
        for iit in range(1, params.max_inner + 1):
            it += 1
            if D_eta is None:
                D_eta = invexp_from_dk(dk, W, eta)
            neighbors = knn_sets(DissimilarityMatrix(n, D_eta), K, params.knn_includes_self)
            A = _neighbour_sums(dk, n, neighbors)
            W_new = weights_from_sums(A, K, lam)
            wchange = float(np.abs(W_new - W).sum())
            W = W_new
            D_l1w, D_eta = _pair_terms(dk, W, eta)
            rec = IterationRecord(
                wchange=wchange,
                iit=iit,
                oit=oit,
                it=it,
                eta=eta,
                msd=msd(DissimilarityMatrix(n, D_l1w), DissimilarityMatrix(n, D_eta)),
                crit=criterion_from_sums(A, W, K, lam),
            )
            records.append(rec)
            log.info(rec.format())
            if callback is not None:
                callback(rec, W)
            if wchange < params.inner_tol:
                break
        if float(np.abs(W - W_outer_start).sum()) < params.outer_tol:
            break

    last = records[-1]
    result = CosaResult(
        D=DissimilarityMatrix(n, maxweight_from_dk(dk, W)),
        W=W,
        log=records,
        tunpar={
            "crit": last.crit,
            "lambda": lam,
            "homotopy": last.eta,
            "msd": last.msd,
            "knn": K,
            "noit": last.oit,
            "totit": last.it,
        },
        params=params,
    )
    return result
