"""Wasserstein and bottleneck distances between two diagrams.

The p-Wasserstein distance is computed by min-cost assignment on the augmented
bipartite graph: each diagram is padded with one diagonal slot per point of
the other diagram, point-to-diagonal edges cost the perpendicular L_q distance
to the diagonal, and diagonal-to-diagonal edges cost nothing.  The bottleneck
distance (p = infinity) is a minimax objective and goes through a separate
binary-search-plus-matching path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .diagrams import Diagram

DIAGONAL = None  # sentinel for "matched to the diagonal" in Matching pairs


@dataclass(frozen=True)
class MetricParams:
    """Exponents of the distance: p for the outer sum, q for the ground norm."""

    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be >= 1")


@dataclass(frozen=True)
class Matching:
    """A bijection between two augmented diagrams.

    `pairs` lists (left, right) where each side is a point index or DIAGONAL;
    diagonal-diagonal pairs are omitted (they cost nothing).  `cost` is the
    sum of p-th powers of ground distances, so distance = cost ** (1/p).
    """

    pairs: tuple[tuple[int | None, int | None], ...]
    cost: float

    def transposed(self) -> "Matching":
        return Matching(tuple((r, l) for l, r in self.pairs), self.cost)


def _ground_distance(a, b, q: float) -> float:
    db, dd = abs(a.birth - b.birth), abs(a.death - b.death)
    if q == 2.0:
        return math.hypot(db, dd)
    if math.isinf(q):
        return max(db, dd)
    return (db**q + dd**q) ** (1.0 / q)


def diagonal_distance_q(p, q: float) -> float:
    """L_q distance from a point to the diagonal: (death-birth) / 2^(1-1/q).

    The nearest diagonal point is the perpendicular foot at ((b+d)/2, (b+d)/2)
    for every q in [1, inf].
    """
    gap = p.death - p.birth
    if math.isinf(q):
        return gap / 2.0
    return gap / (2.0 ** (1.0 - 1.0 / q))


def build_cost_matrix(X: Diagram, Y: Diagram, params: MetricParams = MetricParams()) -> np.ndarray:
    """(k+m) x (k+m) augmented cost matrix of ground distances raised to p.

    Rows: the k points of X followed by m diagonal slots.  Columns: the m
    points of Y followed by k diagonal slots.  Diagonal-diagonal entries are 0.
    """
    if math.isinf(params.p):
        raise ValueError("p = inf is the bottleneck distance; use bottleneck()")
    k, m = len(X), len(Y)
    n = k + m
    cost = np.zeros((n, n))
    for i, x in enumerate(X):
        for j, y in enumerate(Y):
            cost[i, j] = _ground_distance(x, y, params.q) ** params.p
        cost[i, m:] = diagonal_distance_q(x, params.q) ** params.p
    for j, y in enumerate(Y):
        cost[k:, j] = diagonal_distance_q(y, params.q) ** params.p
    return cost


def solve_assignment(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact min-cost assignment: permutation pi minimizing sum cost[i, pi[i]].

    Rejects non-square or NaN-containing input.  Deterministic: identical
    matrices always yield the identical permutation.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {cost.shape}")
    if cost.size and np.isnan(cost).any():
        raise ValueError("cost matrix contains NaN")
    if cost.size == 0:
        return np.empty(0, dtype=int), 0.0
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return perm, float(cost[rows, cols].sum())


def _matching_from_permutation(perm, k: int, m: int, cost_total: float) -> Matching:
    pairs = []
    for i in range(k + m):
        j = int(perm[i])
        left = i if i < k else DIAGONAL
        right = j if j < m else DIAGONAL
        if left is DIAGONAL and right is DIAGONAL:
            continue
        pairs.append((left, right))
    return Matching(tuple(pairs), cost_total)


def wasserstein(
    X: Diagram, Y: Diagram, params: MetricParams = MetricParams()
) -> tuple[float, Matching]:
    """p-Wasserstein distance between diagrams and a matching that realizes it.

    Symmetric by construction: the computation always runs on the
    lexicographically smaller diagram first, so wasserstein(X, Y) and
    wasserstein(Y, X) return bit-identical distances.
    """
    if Y.points < X.points:
        dist, matching = wasserstein(Y, X, params)
        return dist, matching.transposed()
    cost = build_cost_matrix(X, Y, params)
    perm, total = solve_assignment(cost)
    distance = total ** (1.0 / params.p)
    return distance, _matching_from_permutation(perm, len(X), len(Y), total)


def _has_perfect_matching(adj: list[list[int]], n_right: int) -> bool:
    """Kuhn's augmenting-path test for a perfect matching covering the left side."""
    match_right = [-1] * n_right

    def try_augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or try_augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    for u in range(len(adj)):
        if not try_augment(u, [False] * n_right):
            return False
    return True


def bottleneck(X: Diagram, Y: Diagram, q: float = 2.0) -> float:
    """Bottleneck (minimax) distance: the smallest threshold t such that the
    augmented bipartite graph restricted to edges of cost <= t has a perfect
    matching.  Binary search over the candidate edge costs."""
    k, m = len(X), len(Y)
    if k == 0 and m == 0:
        return 0.0
    n = k + m
    edge = np.zeros((n, n))
    for i, x in enumerate(X):
        for j, y in enumerate(Y):
            edge[i, j] = _ground_distance(x, y, q)
        edge[i, m:] = diagonal_distance_q(x, q)
    for j, y in enumerate(Y):
        edge[k:, j] = diagonal_distance_q(y, q)

    candidates = np.unique(edge)

    def feasible(t: float) -> bool:
        adj = [list(np.nonzero(edge[i] <= t)[0]) for i in range(n)]
        return _has_perfect_matching(adj, n)

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])
