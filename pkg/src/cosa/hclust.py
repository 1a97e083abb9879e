"""Agglomerative clustering of condensed dissimilarities, and tree cutting.

Ward uses the Lance-Williams update on squared dissimilarities and reports
heights as square roots of the updated values (R's ``ward.D2`` convention,
also what scipy's ``method='ward'`` does).  On non-Euclidean input the
updated value can go negative; such heights are reported as 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import adjusted_rand_score

from .distances import DissimilarityMatrix
from .errors import AllZero, InvalidK

LINKAGES = ("single", "complete", "average", "ward")


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """N-1 merges; leaves are nodes 0..N-1, merge t creates node N+t."""

    n: int
    merges: list
    leaf_order: list
    linkage: str
    inversions: bool = False

    def to_linkage_matrix(self) -> np.ndarray:
        """scipy-style (N-1, 4) array: left, right, height, size."""
        return np.array([[m.left, m.right, m.height, m.size] for m in self.merges], dtype=float)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "linkage": self.linkage,
            "inversions": self.inversions,
            "merges": [
                {"left": m.left, "right": m.right, "height": m.height, "size": m.size}
                for m in self.merges
            ],
            "leaf_order": list(self.leaf_order),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dendrogram":
        return cls(
            n=d["n"],
            merges=[Merge(m["left"], m["right"], m["height"], m["size"]) for m in d["merges"]],
            leaf_order=list(d["leaf_order"]),
            linkage=d["linkage"],
            inversions=d.get("inversions", False),
        )


@dataclass
class GroupAssignment:
    """labels[i] = 0 for background, 1..G otherwise; index[g-1] lists group g."""

    labels: np.ndarray
    index: list = field(default_factory=list)

    @property
    def n_groups(self) -> int:
        return len(self.index)

    @classmethod
    def from_labels(cls, labels) -> "GroupAssignment":
        labels = np.asarray(labels, dtype=int)
        G = int(labels.max(initial=0))
        index = [sorted(np.flatnonzero(labels == g).tolist()) for g in range(1, G + 1)]
        return cls(labels=labels, index=index)

    def to_dict(self, row_ids=None) -> dict:
        out = {
            "grps": self.labels.tolist(),
            "index": {f"grp{g + 1}": members for g, members in enumerate(self.index)},
        }
        if row_ids is not None:
            out["ids"] = {
                f"grp{g + 1}": [row_ids[i] for i in members] for g, members in enumerate(self.index)
            }
        return out


def normalize_ss(D: DissimilarityMatrix) -> DissimilarityMatrix:
    """Rescale so the squared entries of the condensed triangle sum to N."""
    ss = float(np.dot(D.values, D.values))
    if ss == 0:
        raise AllZero("cannot normalise an all-zero dissimilarity matrix")
    return DissimilarityMatrix(D.n, D.values * np.sqrt(D.n / ss))


def agglomerate(D: DissimilarityMatrix, linkage: str = "average") -> Dendrogram:
    """Lance-Williams agglomeration.

    Ties on the minimal dissimilarity go to the pair with the smallest
    (min node id, max node id).
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    n = D.n
    M = D.to_square()
    if linkage == "ward":
        M = M * M
    np.fill_diagonal(M, np.inf)
    node = np.arange(n)  # node id held by each slot
    size = np.ones(n, dtype=int)
    active = np.ones(n, dtype=bool)
    merges = []
    prev = -np.inf
    inversions = False
    for t in range(n - 1):
        slots = np.flatnonzero(active)
        sub = M[np.ix_(slots, slots)]
        best = sub.min()
        ai, bi = np.nonzero(sub == best)
        keep = ai < bi
        ai, bi = slots[ai[keep]], slots[bi[keep]]
        lo = np.minimum(node[ai], node[bi])
        hi = np.maximum(node[ai], node[bi])
        pick = np.lexsort((hi, lo))[0]
        a, b = ai[pick], bi[pick]
        if node[a] > node[b]:
            a, b = b, a
        height = float(np.sqrt(max(best, 0.0))) if linkage == "ward" else float(best)
        if height < prev:
            inversions = True
        prev = height
        na, nb = size[a], size[b]
        merges.append(Merge(int(node[a]), int(node[b]), height, int(na + nb)))

        others = np.flatnonzero(active)
        others = others[(others != a) & (others != b)]
        da, db = M[a, others], M[b, others]
        if linkage == "single":
            new = np.minimum(da, db)
        elif linkage == "complete":
            new = np.maximum(da, db)
        elif linkage == "average":
            new = (na * da + nb * db) / (na + nb)
        else:
            nk = size[others]
            new = ((na + nk) * da + (nb + nk) * db - nk * M[a, b]) / (na + nb + nk)
        M[a, others] = new
        M[others, a] = new
        active[b] = False
        M[b, :] = np.inf
        M[:, b] = np.inf
        node[a] = n + t
        size[a] = na + nb

    return Dendrogram(
        n=n,
        merges=merges,
        leaf_order=_leaf_order(n, merges),
        linkage=linkage,
        inversions=inversions,
    )


def _leaf_order(n: int, merges) -> list:
    if n == 1:
        return [0]
    order = []
    stack = [2 * n - 2]
    while stack:
        v = stack.pop()
        if v < n:
            order.append(v)
        else:
            m = merges[v - n]
            stack.append(m.right)
            stack.append(m.left)
    return order


def cut(dend: Dendrogram, height: float | None = None, k: int | None = None, min_size: int = 2) -> GroupAssignment:
    """Cut the tree at a height or into exactly ``k`` clusters.

    Clusters smaller than ``min_size`` become background (label 0); the rest
    are numbered 1..G in leaf order.
    """
    if (height is None) == (k is None):
        raise ValueError("cut needs exactly one of height or k")
    n = dend.n
    if k is not None:
        if not 1 <= k <= n:
            raise InvalidK(f"k must lie in [1, {n}], got {k}")
        n_apply = n - k
    else:
        # running max keeps the applied merges a prefix when Ward heights invert
        heights = np.maximum.accumulate([m.height for m in dend.merges])
        n_apply = int(np.searchsorted(heights, height, side="right"))

    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in range(n_apply):
        m = dend.merges[t]
        parent[find(m.left)] = n + t
        parent[find(m.right)] = n + t

    roots = np.array([find(i) for i in range(n)])
    counts = {r: int((roots == r).sum()) for r in set(roots.tolist())}
    labels = np.zeros(n, dtype=int)
    numbering = {}
    for leaf in dend.leaf_order:
        r = roots[leaf]
        if counts[r] < min_size:
            continue
        if r not in numbering:
            numbering[r] = len(numbering) + 1
        labels[leaf] = numbering[r]
    return GroupAssignment.from_labels(labels)


def cut_labels(dend: Dendrogram, k: int) -> np.ndarray:
    """Plain k-cluster partition (labels 1..k in leaf order, no background)."""
    return cut(dend, k=k, min_size=1).labels


def best_cut_ari(dend: Dendrogram, truth) -> tuple[float, int]:
    """Best adjusted Rand index over all k-cuts, scored on objects with truth > 0.

    Returns (ari, k); the smallest k wins ties.
    """
    truth = np.asarray(truth, dtype=int)
    mask = truth > 0
    best, best_k = -np.inf, 1
    for k in range(1, dend.n + 1):
        with warnings.catch_warnings():
            # many singleton clusters at large k trip sklearn's target-type heuristic
            warnings.simplefilter("ignore", UserWarning)
            score = adjusted_rand_score(truth[mask], cut_labels(dend, k)[mask])
        if score > best:
            best, best_k = score, k
    return float(best), best_k
