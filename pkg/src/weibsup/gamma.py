"""Admissible partition trees and the gamma_alpha chaining functionals.

A tree is admissible when level 0 is the whole set, levels are nested, and
level n holds at most 2^(2^n) cells.  The value of a tree at alpha is
sup over points t of sum_n 2^(n/alpha) * diam(A_n(t)); any admissible tree
therefore yields an upper bound for gamma_alpha, and the explicit small-set
enumeration recovers the infimum.

Cells of zero diameter count as terminal: the weight transforms can collapse
distinct points onto each other, and such cells contribute nothing to any
level sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Metric, PointSet, RandomStream, pairwise_distance_matrix, point_norms
from .mcsup import Driver, esup_mc

__all__ = [
    "NotAdmissibleError",
    "PartitionTree",
    "GammaValue",
    "validate_admissible",
    "build_greedy_tree",
    "gamma_from_tree",
    "gamma_exact_small",
    "exact_small_tree",
    "dudley_bound",
    "sudakov_lower",
    "gaussian_gamma2_proxy",
    "intersect_trees",
    "chaining_bound",
    "tree_to_jsonable",
]

_GAMMA_METHODS = ("exact_small", "greedy_upper", "dudley", "sudakov_lower", "gaussian_proxy")
_MAX_LEVELS = 64


class NotAdmissibleError(ValueError):
    """A partition sequence violates one of the admissibility invariants."""


@dataclass(frozen=True, eq=False)
class PartitionTree:
    """Nested partitions of a point set, as tuples of sorted index tuples."""

    pointset: PointSet
    levels: tuple[tuple[tuple[int, ...], ...], ...]


@dataclass(frozen=True)
class GammaValue:
    alpha: float
    value: float
    method: str
    stderr: float | None = None

    def __post_init__(self) -> None:
        if self.method not in _GAMMA_METHODS:
            raise ValueError(f"unknown gamma method {self.method!r}")
        if not self.value >= 0.0:
            raise ValueError(f"gamma value must be nonnegative, got {self.value}")


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 4.0:
        raise ValueError(f"alpha must lie in (0, 4], got {alpha}")


def _level_budget(n: int) -> int | None:
    """2^(2^n), or None once it exceeds any realistic cardinality."""
    return None if 2**n >= 64 else 2 ** (2**n)


def _cell_is_point(points: np.ndarray, cell: Sequence[int]) -> bool:
    if len(cell) == 1:
        return True
    rows = points[np.asarray(cell, dtype=np.int64)]
    return bool(np.all(rows == rows[0]))


def validate_admissible(tree: PartitionTree) -> None:
    """Raise NotAdmissibleError naming the first violated invariant."""
    m = tree.pointset.m
    levels = tree.levels
    if not levels:
        raise NotAdmissibleError("tree has no levels")
    if len(levels[0]) != 1 or tuple(levels[0][0]) != tuple(range(m)):
        raise NotAdmissibleError("level 0 must be the single cell containing every point")
    prev_cell_of: np.ndarray | None = None
    for n, level in enumerate(levels):
        budget = _level_budget(n)
        if budget is not None and len(level) > budget:
            raise NotAdmissibleError(
                f"level {n} has {len(level)} cells, over the budget 2^(2^{n}) = {budget}"
            )
        cell_of = np.full(m, -1, dtype=np.int64)
        for ci, cell in enumerate(level):
            for i in cell:
                if not 0 <= i < m:
                    raise NotAdmissibleError(f"level {n} references point index {i}")
                if cell_of[i] != -1:
                    raise NotAdmissibleError(f"level {n} cells overlap at point {i}")
                cell_of[i] = ci
        if (cell_of == -1).any():
            missing = int(np.argmax(cell_of == -1))
            raise NotAdmissibleError(f"level {n} does not cover point {missing}")
        if prev_cell_of is not None:
            for cell in level:
                parents = {int(prev_cell_of[i]) for i in cell}
                if len(parents) != 1:
                    raise NotAdmissibleError(
                        f"level {n} cell {tuple(cell)} is not nested in a single parent"
                    )
        prev_cell_of = cell_of
    for cell in levels[-1]:
        if not _cell_is_point(tree.pointset.points, cell):
            raise NotAdmissibleError(
                f"final level cell {tuple(cell)} is neither a singleton nor a "
                "zero-diameter duplicate group"
            )


def _kcenter_split(
    cell: tuple[int, ...], k: int, dist: np.ndarray, norms: np.ndarray
) -> list[tuple[int, ...]]:
    """Split one cell into at most k children by greedy farthest-point centers.

    The first center is the max-norm point; ties break to the lowest index
    (cells are sorted, argmax returns the first maximizer).
    """
    idx = np.asarray(cell, dtype=np.int64)
    sub = dist[np.ix_(idx, idx)]
    centers = [int(np.argmax(norms[idx]))]
    min_dist = sub[centers[0]].copy()
    while len(centers) < k:
        far = int(np.argmax(min_dist))
        if min_dist[far] == 0.0:
            break
        centers.append(far)
        np.minimum(min_dist, sub[far], out=min_dist)
    assign = np.argmin(sub[:, centers], axis=1)
    return [tuple(int(i) for i in idx[assign == ci]) for ci in range(len(centers))]


def build_greedy_tree(pset: PointSet, metric: Metric) -> PartitionTree:
    """Admissible tree by recursive greedy farthest-point k-center splits.

    At level n each surviving cell receives an equal share of the level
    budget 2^(2^n), rounded up and capped by cell size; share left unused by
    small cells is redistributed to cells still short of splitting, and if
    ceil rounding overshoots the hard cardinality cap the largest allocations
    are trimmed.  Construction stops at the first level where every cell has
    zero diameter.
    """
    m = pset.m
    dist = pairwise_distance_matrix(pset.points, metric)
    norms = point_norms(pset.points, metric)
    levels: list[tuple[tuple[int, ...], ...]] = [(tuple(range(m)),)]

    def done(level: tuple[tuple[int, ...], ...]) -> bool:
        return all(_cell_is_point(pset.points, cell) for cell in level)

    n = 1
    while not done(levels[-1]) and n < _MAX_LEVELS:
        cells = levels[-1]
        hard = _level_budget(n)
        target = m if hard is None else -(-hard // len(cells))
        # a zero-diameter cell cannot split; it takes exactly one slot
        sizes = [
            1 if _cell_is_point(pset.points, cell) else len(cell) for cell in cells
        ]
        allocs = [min(size, target) for size in sizes]
        total = sum(allocs)
        if hard is not None and total > hard:
            # ceil rounding overshot the cardinality cap; trim largest shares
            while total > hard:
                worst = max(range(len(allocs)), key=lambda i: (allocs[i], i))
                allocs[worst] -= 1
                total -= 1
        else:
            # redistribute unused share to the cells still short of splitting
            cap = m if hard is None else min(hard, m)
            while total < cap:
                deficits = [size - alloc for size, alloc in zip(sizes, allocs)]
                best = max(range(len(allocs)), key=lambda i: (deficits[i], -i))
                if deficits[best] <= 0:
                    break
                allocs[best] += 1
                total += 1
        new_level: list[tuple[int, ...]] = []
        for cell, alloc in zip(cells, allocs):
            if alloc <= 1 or _cell_is_point(pset.points, cell):
                new_level.append(cell)
            else:
                new_level.extend(_kcenter_split(cell, alloc, dist, norms))
        levels.append(tuple(new_level))
        n += 1
    return PartitionTree(pointset=pset, levels=tuple(levels))


def _per_point_level_sums(
    tree: PartitionTree, weights_by_level: Sequence[float], dist: np.ndarray
) -> np.ndarray:
    m = tree.pointset.m
    acc = np.zeros(m)
    for level, w in zip(tree.levels, weights_by_level):
        for cell in level:
            if len(cell) > 1:
                idx = np.asarray(cell, dtype=np.int64)
                d = float(dist[np.ix_(idx, idx)].max())
                if d > 0.0:
                    acc[idx] += w * d
    return acc


def gamma_from_tree(tree: PartitionTree, alpha: float, metric: Metric) -> GammaValue:
    """sup over points of sum_n 2^(n/alpha) * diam(A_n(t)) for this tree."""
    _check_alpha(alpha)
    validate_admissible(tree)
    dist = pairwise_distance_matrix(tree.pointset.points, metric)
    weights = [2.0 ** (n / alpha) for n in range(len(tree.levels))]
    acc = _per_point_level_sums(tree, weights, dist)
    return GammaValue(alpha=alpha, value=float(acc.max()), method="greedy_upper")


def _best_partition_max_diam(dist: np.ndarray, max_blocks: int) -> tuple[float, list[int]]:
    """Min over partitions into at most max_blocks blocks of the max cell diameter.

    Exhaustive search in restricted-growth order with branch-and-bound on the
    running maximum; feasible because m <= 8.
    """
    m = dist.shape[0]
    best_val = math.inf
    best_assign: list[int] = []
    assign = [0] * m

    def recurse(i: int, used: int, current: float) -> None:
        nonlocal best_val, best_assign
        if current >= best_val:
            return
        if i == m:
            best_val = current
            best_assign = assign[:i]
            return
        for b in range(min(used + 1, max_blocks)):
            grown = current
            ok = True
            for j in range(i):
                if assign[j] == b:
                    d = dist[i, j]
                    if d > grown:
                        grown = d
                    if grown >= best_val:
                        ok = False
                        break
            if ok:
                assign[i] = b
                recurse(i + 1, max(used, b + 1), grown)
        assign[i] = 0

    recurse(0, 0, 0.0)
    return best_val, best_assign


def gamma_exact_small(pset: PointSet, metric: Metric, alpha: float) -> GammaValue:
    """Exact gamma_alpha by enumerating admissible sequences, for m <= 8.

    With m <= 8 < 16 every admissible tree can reach singletons by level 2,
    so the infimum reduces to diam(T) + 2^(1/alpha) * min over level-1
    partitions (at most 4 blocks) of the max cell diameter.
    """
    _check_alpha(alpha)
    if pset.m > 8:
        raise ValueError(f"exact enumeration is limited to m <= 8 points, got {pset.m}")
    dist = pairwise_distance_matrix(pset.points, metric)
    whole = float(dist.max())
    if pset.m <= 4:
        return GammaValue(alpha=alpha, value=whole, method="exact_small")
    best, _ = _best_partition_max_diam(dist, 4)
    return GammaValue(
        alpha=alpha, value=whole + 2.0 ** (1.0 / alpha) * best, method="exact_small"
    )


def exact_small_tree(pset: PointSet, metric: Metric) -> PartitionTree:
    """An optimal admissible tree realizing gamma_exact_small."""
    if pset.m > 8:
        raise ValueError(f"exact enumeration is limited to m <= 8 points, got {pset.m}")
    m = pset.m
    whole = (tuple(range(m)),)
    singletons = tuple((i,) for i in range(m))
    if m == 1:
        return PartitionTree(pset, (whole,))
    if m <= 4:
        return PartitionTree(pset, (whole, singletons))
    dist = pairwise_distance_matrix(pset.points, metric)
    _, assign = _best_partition_max_diam(dist, 4)
    blocks: dict[int, list[int]] = {}
    for i, b in enumerate(assign):
        blocks.setdefault(b, []).append(i)
    level1 = tuple(tuple(blocks[b]) for b in sorted(blocks))
    if all(len(cell) == 1 for cell in level1):
        return PartitionTree(pset, (whole, level1))
    return PartitionTree(pset, (whole, level1, singletons))


def dudley_bound(pset: PointSet, metric: Metric) -> GammaValue:
    """Entropy-sum upper companion: sum_n 2^(n/2) e_n with e_n the covering
    radius from greedy farthest-point selection of N_n centers, N_0 = 1 and
    N_n = min(m, 2^(2^n))."""
    m = pset.m
    dist = pairwise_distance_matrix(pset.points, metric)
    norms = point_norms(pset.points, metric)
    radii: list[float] = []
    first = int(np.argmax(norms))
    min_dist = dist[first].copy()
    radii.append(float(min_dist.max()))
    while radii[-1] > 0.0 and len(radii) < m:
        far = int(np.argmax(min_dist))
        np.minimum(min_dist, dist[far], out=min_dist)
        radii.append(float(min_dist.max()))

    total = 0.0
    n = 0
    while n < _MAX_LEVELS:
        budget = _level_budget(n)
        centers = 1 if n == 0 else (m if budget is None else min(m, budget))
        e_n = radii[centers - 1] if centers <= len(radii) else 0.0
        total += 2.0 ** (n / 2.0) * e_n
        if e_n == 0.0:
            break
        n += 1
    return GammaValue(alpha=2.0, value=total, method="dudley")


def sudakov_lower(pset: PointSet, metric: Metric) -> GammaValue:
    """Packing-number lower companion: max over a geometric grid of
    eps * sqrt(log P(eps)), with P the greedy packing count at separation eps."""
    if pset.m < 2:
        return GammaValue(alpha=2.0, value=0.0, method="sudakov_lower")
    dist = pairwise_distance_matrix(pset.points, metric)
    diam = float(dist.max())
    if diam == 0.0:
        return GammaValue(alpha=2.0, value=0.0, method="sudakov_lower")
    best = 0.0
    eps = diam
    shrink = 2.0 ** -0.25
    for _ in range(48):
        kept = [0]
        for i in range(1, pset.m):
            if min(dist[i, j] for j in kept) >= eps:
                kept.append(i)
        count = len(kept)
        if count >= 2:
            best = max(best, eps * math.sqrt(math.log(count)))
        eps *= shrink
    return GammaValue(alpha=2.0, value=best, method="sudakov_lower")


def gaussian_gamma2_proxy(
    pset: PointSet, samples: int, stream: RandomStream, workers: int = 1
) -> GammaValue:
    """Gaussian expected supremum as a gamma_2 estimate, accurate up to the
    universal majorizing-measure constants.

    A zero-diameter set has no supremum fluctuation: the value is exactly 0,
    so no sampling happens there.
    """
    if _cell_is_point(pset.points, tuple(range(pset.m))):
        return GammaValue(alpha=2.0, value=0.0, method="gaussian_proxy", stderr=0.0)
    est = esup_mc(pset, Driver.gaussian(), samples, stream, workers)
    return GammaValue(
        alpha=2.0, value=max(est.mean, 0.0), method="gaussian_proxy", stderr=est.stderr
    )


def intersect_trees(a: PartitionTree, b: PartitionTree) -> PartitionTree:
    """Level n of the result = nonempty intersections of both trees' level n-1.

    The cardinality budget transfers because |A_{n-1}| * |B_{n-1}| <=
    (2^(2^(n-1)))^2 = 2^(2^n).  Levels past a tree's depth reuse its final
    partition.
    """
    if a.pointset is not b.pointset and not np.array_equal(
        a.pointset.points, b.pointset.points
    ):
        raise ValueError("trees must partition the same point set")
    pset = a.pointset
    m = pset.m
    depth = max(len(a.levels), len(b.levels))
    levels: list[tuple[tuple[int, ...], ...]] = [(tuple(range(m)),)]
    for n in range(1, depth + 1):
        if all(_cell_is_point(pset.points, cell) for cell in levels[-1]):
            break
        pa = a.levels[min(n - 1, len(a.levels) - 1)]
        pb = b.levels[min(n - 1, len(b.levels) - 1)]
        cells: list[tuple[int, ...]] = []
        for cell_a in pa:
            set_a = set(cell_a)
            for cell_b in pb:
                inter = sorted(set_a.intersection(cell_b))
                if inter:
                    cells.append(tuple(inter))
        levels.append(tuple(cells))
    return PartitionTree(pointset=pset, levels=tuple(levels))


def chaining_bound(pset: PointSet, r: float, tree: PartitionTree) -> float:
    """sup over points of sum_k Delta_k(A_k(t)) with the two-norm level term
    Delta_k(A) = sup_{s,u in A} [2^(k/2) |s-u|_2 + 2^(k/r) |s-u|_inf]."""
    if not 0.0 < r <= 2.0:
        raise ValueError(f"r must lie in (0, 2], got {r}")
    if tree.pointset is not pset and not np.array_equal(tree.pointset.points, pset.points):
        raise ValueError("tree does not partition the given point set")
    validate_admissible(tree)
    d2 = pairwise_distance_matrix(pset.points, Metric.l2())
    dinf = pairwise_distance_matrix(pset.points, Metric.linf())
    acc = np.zeros(pset.m)
    for k, level in enumerate(tree.levels):
        w2 = 2.0 ** (k / 2.0)
        winf = 2.0 ** (k / r)
        for cell in level:
            if len(cell) > 1:
                idx = np.asarray(cell, dtype=np.int64)
                block = w2 * d2[np.ix_(idx, idx)] + winf * dinf[np.ix_(idx, idx)]
                d = float(block.max())
                if d > 0.0:
                    acc[idx] += d
    return float(acc.max())


def tree_to_jsonable(tree: PartitionTree) -> list[list[list[int]]]:
    """Nested lists (level -> cells -> point indices) for report archival."""
    return [[list(cell) for cell in level] for level in tree.levels]
