"""Seeded planted-cluster designs with ground truth.

RNG: one ``numpy.random.default_rng(seed)`` (PCG64) per design.  Draw order
is fixed: the N x P standard-normal matrix, then the object permutation,
then the attribute permutation.  Signal cells reuse their background draw,
rescaled to sd 0.2 and shifted to the block mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import DataMatrix
from .errors import DimensionTooSmall


@dataclass
class PlantedDesign:
    X: DataMatrix
    object_labels: np.ndarray
    attribute_sets: list
    seed: int
    design: int

    def to_truth(self) -> dict:
        return {
            "design": self.design,
            "seed": self.seed,
            "n": self.X.n,
            "p": self.X.p,
            "object_labels": self.object_labels.tolist(),
            "attribute_sets": [sorted(int(k) for k in s) for s in self.attribute_sets],
        }


def _standardize(X: np.ndarray) -> np.ndarray:
    return (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)


def _plant(X, rows, cols, mean):
    cells = np.ix_(rows, cols)
    X[cells] = X[cells] * 0.2 + mean


def gen_design2(seed: int, n: int = 100, p: int = 1000) -> PlantedDesign:
    """Two 15-object groups on partially overlapping 30-attribute subsets.

    Group 1: +1.5 on attributes a[0:15], -1.5 on a[15:30].
    Group 2: -1.5 on a[15:30], +1.5 on a[30:45].
    Signal cells are N(mean, 0.2); everything else N(0, 1).
    """
    if n < 30 or p < 45:
        raise DimensionTooSmall(f"design 2 needs N >= 30 and P >= 45, got {n}x{p}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    o = rng.permutation(n)
    a = rng.permutation(p)
    g1, g2 = o[:15], o[15:30]
    _plant(X, g1, a[0:15], 1.5)
    _plant(X, g1, a[15:30], -1.5)
    _plant(X, g2, a[15:30], -1.5)
    _plant(X, g2, a[30:45], 1.5)
    labels = np.zeros(n, dtype=int)
    labels[g1] = 1
    labels[g2] = 2
    return PlantedDesign(
        X=DataMatrix(_standardize(X)),
        object_labels=labels,
        attribute_sets=[np.sort(a[0:30]), np.sort(a[15:45])],
        seed=seed,
        design=2,
    )


def gen_design1(seed: int, n: int = 60, p: int = 500) -> PlantedDesign:
    """Three equal groups sharing one 50-attribute signal subset.

    Group means on the signal attributes are -1.5, 0 and +1.5 with sd 0.2;
    there is no background.
    """
    if n < 60 or n % 3 or p < 50:
        raise DimensionTooSmall(f"design 1 needs N >= 60 (multiple of 3) and P >= 50, got {n}x{p}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    o = rng.permutation(n)
    a = rng.permutation(p)
    m = n // 3
    signal = a[:50]
    labels = np.zeros(n, dtype=int)
    for g, mean in enumerate((-1.5, 0.0, 1.5)):
        rows = o[g * m:(g + 1) * m]
        _plant(X, rows, signal, mean)
        labels[rows] = g + 1
    return PlantedDesign(
        X=DataMatrix(_standardize(X)),
        object_labels=labels,
        attribute_sets=[np.sort(signal)],
        seed=seed,
        design=1,
    )
