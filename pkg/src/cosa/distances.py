"""Per-attribute distances, scale factors, targeting and composite dissimilarities.

Everything here works on condensed (lower-triangle) storage.  Pair ``(i, j)``
with ``i > j`` lives at index ``j*N - j*(j+1)//2 + i - j - 1``, which is the
same ordering scipy's ``pdist`` uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AllZeroWeights,
    DataError,
    LengthMismatch,
    ZeroDispersion,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"

SCALE_METHODS = ("std", "mad", "preset")
TARGET_MODES = ("none", "single_high", "single_low", "dual")

# pair-chunk budget for the composite routines, in float64 cells
_CHUNK_CELLS = 1 << 22


@dataclass
class DataMatrix:
    """N x P attribute table; categorical attributes hold integer codes."""

    values: np.ndarray
    kinds: tuple = ()
    row_ids: list = field(default_factory=list)
    col_ids: list = field(default_factory=list)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError("data matrix must be two-dimensional")
        n, p = values.shape
        if n < 2 or p < 1:
            raise DataError(f"need N >= 2 objects and P >= 1 attributes, got {n}x{p}")
        bad = np.argwhere(~np.isfinite(values))
        if len(bad):
            r, c = bad[0]
            raise DataError("non-finite value", row=int(r), col=int(c))
        kinds = tuple(self.kinds) if len(self.kinds) else (NUMERIC,) * p
        if len(kinds) != p:
            raise LengthMismatch(f"{len(kinds)} kinds for {p} attributes")
        for k, kind in enumerate(kinds):
            if kind not in (NUMERIC, CATEGORICAL):
                raise DataError(f"unknown attribute kind {kind!r}", col=k)
            if kind == CATEGORICAL:
                col = values[:, k]
                if np.any(col < 0) or np.any(col != np.round(col)):
                    raise DataError("categorical codes must be non-negative integers", col=k)
        self.values = values
        self.kinds = kinds
        self.row_ids = [str(r) for r in self.row_ids] if len(self.row_ids) else [str(i + 1) for i in range(n)]
        self.col_ids = [str(c) for c in self.col_ids] if len(self.col_ids) else [f"V{k + 1}" for k in range(p)]
        if len(self.row_ids) != n:
            raise LengthMismatch(f"{len(self.row_ids)} row ids for {n} rows")
        if len(self.col_ids) != p:
            raise LengthMismatch(f"{len(self.col_ids)} column ids for {p} columns")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def categorical(self) -> np.ndarray:
        """Boolean mask of categorical attributes."""
        return np.array([k == CATEGORICAL for k in self.kinds], dtype=bool)


@dataclass(frozen=True)
class ScaleFactors:
    s: np.ndarray
    method: str


@dataclass(frozen=True)
class TargetSpec:
    """Per-attribute targets.  ``t`` is the high target, ``u`` the low one (dual mode)."""

    mode: str = "none"
    t: np.ndarray | None = None
    u: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in TARGET_MODES:
            raise ValueError(f"unknown target mode {self.mode!r}")
        if self.mode != "none" and self.t is None:
            raise ValueError(f"target mode {self.mode!r} needs t")
        if self.mode == "dual":
            if self.u is None:
                raise ValueError("dual targeting needs u")
            if np.any(np.asarray(self.t) < np.asarray(self.u)):
                raise ValueError("dual targeting requires t >= u for every attribute")

    @classmethod
    def from_data(cls, X: DataMatrix, targ: str = "none") -> "TargetSpec":
        """Build a target spec from a short name: none, high, low or high/low.

        Targets default to column extremes.
        """
        hi = X.values.max(axis=0)
        lo = X.values.min(axis=0)
        if targ in (None, "none"):
            return cls()
        if targ == "high":
            return cls("single_high", hi)
        if targ == "low":
            return cls("single_low", lo)
        if targ in ("high/low", "dual"):
            return cls("dual", hi, lo)
        raise ValueError(f"unknown targeting {targ!r}; expected none, high, low or high/low")

    @property
    def active(self) -> bool:
        return self.mode != "none"


@dataclass
class DissimilarityMatrix:
    """Condensed symmetric dissimilarities over ``n`` objects.

    Entries must be finite.  They are usually non-negative, but the
    inverse-exponential homotopy distance can legitimately dip below zero,
    so the sign is not enforced here.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.n < 2:
            raise LengthMismatch("a dissimilarity matrix needs at least 2 objects")
        if self.values.size != self.n * (self.n - 1) // 2:
            raise LengthMismatch(
                f"condensed length {self.values.size} does not match N={self.n}"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("dissimilarities must be finite")

    def __getitem__(self, ij):
        i, j = ij
        if i == j:
            return 0.0
        return float(self.values[condensed_index(self.n, i, j)])

    def row(self, i: int) -> np.ndarray:
        """Dissimilarities from object ``i`` to every object (0 at ``i``)."""
        others = np.arange(self.n)
        out = np.zeros(self.n)
        mask = others != i
        out[mask] = self.values[condensed_index(self.n, i, others[mask])]
        return out

    def to_square(self) -> np.ndarray:
        sq = np.zeros((self.n, self.n))
        I, J = pair_indices(self.n)
        sq[I, J] = self.values
        sq[J, I] = self.values
        return sq

    @classmethod
    def from_square(cls, sq) -> "DissimilarityMatrix":
        sq = np.asarray(sq, dtype=float)
        I, J = pair_indices(sq.shape[0])
        return cls(sq.shape[0], sq[I, J])


def condensed_index(n: int, i, j):
    """Condensed position of pair (i, j); works elementwise on arrays."""
    i = np.asarray(i)
    j = np.asarray(j)
    hi = np.maximum(i, j)
    lo = np.minimum(i, j)
    idx = lo * n - lo * (lo + 1) // 2 + hi - lo - 1
    return idx if idx.ndim else int(idx)


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index arrays (I > J) in condensed order."""
    J, I = np.triu_indices(n, k=1)
    return I, J


def compute_scale_factors(X: DataMatrix, method: str = "std", preset: Sequence[float] | None = None) -> ScaleFactors:
    """Per-attribute dispersion used to put attribute distances on a common scale.

    ``std`` is the sample standard deviation (divisor N-1), ``mad`` the mean
    absolute deviation about the mean, ``preset`` passes ``preset`` through.
    Categorical attributes get 1 under std/mad.
    """
    if method not in SCALE_METHODS:
        raise ValueError(f"unknown scale method {method!r}")
    if method == "preset":
        if preset is None:
            raise LengthMismatch("preset scale factors missing")
        s = np.asarray(preset, dtype=float).ravel()
        if s.size != X.p:
            raise LengthMismatch(f"{s.size} preset scale factors for {X.p} attributes")
    else:
        vals = X.values
        if method == "std":
            s = vals.std(axis=0, ddof=1)
        else:
            s = np.abs(vals - vals.mean(axis=0)).mean(axis=0)
        s = np.where(X.categorical, 1.0, s)
    for k in range(s.size):
        if not s[k] > 0 or not np.isfinite(s[k]):
            raise ZeroDispersion(k)
    return ScaleFactors(s=s, method=method)


def attr_distance(xi, xj, kind: str, s_k: float) -> float:
    if kind == CATEGORICAL:
        return float(xi != xj) / s_k
    return abs(xi - xj) / s_k


def targeted_attr_distance(xi, xj, mode: str, t_k, u_k, kind: str, s_k: float) -> float:
    """Distance that is small only when both values sit near a target."""
    single = max(attr_distance(xi, t_k, kind, s_k), attr_distance(xj, t_k, kind, s_k))
    if mode == "dual":
        low = max(attr_distance(xi, u_k, kind, s_k), attr_distance(xj, u_k, kind, s_k))
        return min(single, low)
    return single


def pair_attr_distances(X: DataMatrix, S: ScaleFactors, targ: TargetSpec, I, J) -> np.ndarray:
    xi = X.values[I]
    xj = X.values[J]
    cat = X.categorical
    s = S.s

    def dist(a, b):
        d = np.abs(a - b)
        if cat.any():
            d[..., cat] = (d[..., cat] != 0).astype(float)
        return d / s

    if not targ.active:
        return dist(xi, xj)
    t = np.asarray(targ.t, dtype=float)
    out = np.maximum(dist(xi, t), dist(xj, t))
    if targ.mode == "dual":
        u = np.asarray(targ.u, dtype=float)
        np.minimum(out, np.maximum(dist(xi, u), dist(xj, u)), out=out)
    return out


def _chunks(n: int, p: int) -> Iterator[tuple[slice, np.ndarray, np.ndarray]]:
    I, J = pair_indices(n)
    step = max(1, _CHUNK_CELLS // max(p, 1))
    for start in range(0, I.size, step):
        sl = slice(start, start + step)
        yield sl, I[sl], J[sl]


def attribute_distances(X: DataMatrix, S: ScaleFactors, targ: TargetSpec | None = None) -> np.ndarray:
    """All per-attribute pair distances as an (N(N-1)/2, P) array."""
    targ = targ or TargetSpec()
    I, J = pair_indices(X.n)
    return pair_attr_distances(X, S, targ, I, J)


def _composite(X, S, targ, weights, power) -> DissimilarityMatrix:
    targ = targ or TargetSpec()
    out = np.empty(X.n * (X.n - 1) // 2)
    for sl, I, J in _chunks(X.n, X.p):
        d = pair_attr_distances(X, S, targ, I, J)
        if power == 2:
            d = d * d
        if weights is not None:
            d = d * weights
        out[sl] = d.sum(axis=1)
    return DissimilarityMatrix(X.n, out)


def l1_dissimilarity(X: DataMatrix, S: ScaleFactors, targ: TargetSpec | None = None) -> DissimilarityMatrix:
    return _composite(X, S, targ, None, 1)


def sqeuclid_dissimilarity(X: DataMatrix, S: ScaleFactors, targ: TargetSpec | None = None) -> DissimilarityMatrix:
    return _composite(X, S, targ, None, 2)


def fixed_weight_dissimilarity(
    X: DataMatrix,
    S: ScaleFactors,
    w: Sequence[float],
    power: int = 1,
    targ: TargetSpec | None = None,
) -> DissimilarityMatrix:
    """Composite with one global weight per attribute, ``sum_k w_k d_ijk**power``."""
    w = np.asarray(w, dtype=float).ravel()
    if w.size != X.p:
        raise LengthMismatch(f"{w.size} weights for {X.p} attributes")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("attribute weights must be finite and non-negative")
    if not w.sum() > 0:
        raise AllZeroWeights("attribute weights sum to zero")
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    return _composite(X, S, targ, w, power)
