"""Attribute importance for a group of objects, with a resampling null."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import DataMatrix, ScaleFactors, TargetSpec, pair_attr_distances
from .errors import GroupTooSmall, RangeTooLarge

EPS = 1e-12


@dataclass
class ImportanceReport:
    group: list
    att: np.ndarray
    imp: np.ndarray
    disp: np.ndarray
    null_curves: np.ndarray  # (times, R); empty when times == 0
    null_mean: np.ndarray
    seed: int | None


def _group_dispersion(X: DataMatrix, S: ScaleFactors, targ: TargetSpec, group: np.ndarray, norm: float) -> np.ndarray:
    """sum over ordered pairs (i, j) in group of d_ijk, times ``norm``, for every k."""
    a, b = np.triu_indices(group.size, k=1)
    d = pair_attr_distances(X, S, targ, group[a], group[b])
    # each unordered pair appears twice in the ordered double sum; i == j adds 0
    return 2.0 * d.sum(axis=0) * norm


def _check_group(X, group) -> np.ndarray:
    group = np.asarray(group, dtype=int).ravel()
    if group.size < 2:
        raise GroupTooSmall(f"group needs at least 2 objects, got {group.size}")
    if np.unique(group).size != group.size:
        raise ValueError("group contains duplicate objects")
    if group.min() < 0 or group.max() >= X.n:
        raise IndexError("group member out of range")
    return group


def dispersion(X: DataMatrix, S: ScaleFactors, targ: TargetSpec | None, group, k: int, norm: str = "group") -> float:
    """Within-group dispersion of attribute ``k``.

    ``norm='group'`` divides the ordered double sum by N_l^2, ``'global'`` by N^2.
    """
    return float(dispersions(X, S, targ, group, norm)[k])


def dispersions(X: DataMatrix, S: ScaleFactors, targ: TargetSpec | None, group, norm: str = "group") -> np.ndarray:
    group = _check_group(X, group)
    if norm not in ("group", "global"):
        raise ValueError("norm must be 'group' or 'global'")
    m = group.size if norm == "group" else X.n
    return _group_dispersion(X, S, targ or TargetSpec(), group, 1.0 / (m * m))


def _ranked(disp: np.ndarray, R: int):
    imp = 1.0 / (disp + EPS)
    # stable sort on -imp keeps attribute order on ties
    order = np.argsort(-imp, kind="stable")[:R]
    return order, imp[order], disp[order]


def attimp(
    X: DataMatrix,
    S: ScaleFactors,
    targ: TargetSpec | None,
    group,
    R: int | None = None,
    times: int = 0,
    seed: int | None = None,
    norm: str = "group",
) -> ImportanceReport:
    """Rank attributes by importance 1/(S_kl + eps) for ``group``.

    With ``times > 0`` draws that many random subsets of the same size from
    all N objects; repetition r uses the r-th child of
    ``SeedSequence(seed)``, so results do not depend on evaluation order.
    """
    targ = targ or TargetSpec()
    group = _check_group(X, group)
    R = X.p if R is None else int(R)
    if R > X.p:
        raise RangeTooLarge(f"range {R} exceeds P={X.p}")
    if R < 1:
        raise ValueError("range must be >= 1")
    disp = dispersions(X, S, targ, group, norm)
    att, imp, dsp = _ranked(disp, R)

    curves = np.empty((0, R))
    if times > 0:
        children = np.random.SeedSequence(seed).spawn(times)
        curves = np.empty((times, R))
        for r, child in enumerate(children):
            sample = np.random.default_rng(child).choice(X.n, size=group.size, replace=False)
            _, curves[r], _ = _ranked(dispersions(X, S, targ, sample, norm), R)
    null_mean = curves.mean(axis=0) if times > 0 else np.empty(0)
    return ImportanceReport(
        group=sorted(group.tolist()),
        att=att,
        imp=imp,
        disp=dsp,
        null_curves=curves,
        null_mean=null_mean,
        seed=seed,
    )
