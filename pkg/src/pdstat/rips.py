"""Minimal Vietoris-Rips persistence (H0 and H1 over Z/2) for small point
clouds, plus seeded samplers for the example geometries (noisy circle,
annulus, double annulus).

Connected components are tracked with a union-find over the edges in
filtration order; one-dimensional cycles are paired by column reduction of
the triangle boundary matrix, stored as integer bitmasks and restricted to
the cycle-creating edges (the merging edges are already resolved by the
union-find pass and can never be pivots).  Classes that never die are emitted
with death equal to the filtration cap so downstream modules only ever see
finite diagrams; the cap is recorded alongside the output.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .diagrams import Diagram

MAX_POINTS = 400


@dataclass
class PointCloud:
    """Finite set of points in Euclidean space, one row per point."""

    coords: np.ndarray

    def __init__(self, coords):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise ValueError("coords must be an (n, d) array with d >= 1")
        if not np.isfinite(coords).all():
            raise ValueError("coordinates must be finite")
        self.coords = coords

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices with filtration values, sorted by (value, dimension, vertices)
    so that faces never appear after cofaces."""

    simplices: tuple[tuple[tuple[int, ...], float], ...]
    max_radius: float
    n_vertices: int


def build_rips(cloud: PointCloud, max_radius: float, max_dim: int = 2) -> FilteredComplex:
    """All simplices up to max_dim with filtration value at most max_radius.

    Edge value = Euclidean distance, triangle value = largest edge value.
    Guarded to small clouds; larger inputs are out of scope.
    """
    n = len(cloud)
    if n > MAX_POINTS:
        raise ValueError(f"{n} points exceeds the {MAX_POINTS}-point scale limit")
    if max_radius < 0:
        raise ValueError("max_radius must be nonnegative")
    dist = np.sqrt(((cloud.coords[:, None, :] - cloud.coords[None, :, :]) ** 2).sum(-1))
    simplices: list[tuple[tuple[int, ...], float]] = [((i,), 0.0) for i in range(n)]
    close = dist <= max_radius
    for i in range(n):
        for j in range(i + 1, n):
            if close[i, j]:
                simplices.append(((i, j), float(dist[i, j])))
    if max_dim >= 2:
        for i in range(n):
            for j in range(i + 1, n):
                if not close[i, j]:
                    continue
                ks = np.nonzero(close[i] & close[j])[0]
                for k in ks[ks > j]:
                    value = max(dist[i, j], dist[i, k], dist[j, k])
                    simplices.append(((i, int(j), int(k)), float(value)))
    simplices.sort(key=lambda sv: (sv[1], len(sv[0]), sv[0]))
    return FilteredComplex(tuple(simplices), float(max_radius), n)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i


def _persistence_pairs(fc: FilteredComplex):
    """Raw (birth, death) pairs with math.inf for essential classes."""
    vertices = [(v[0], val) for v, val in fc.simplices if len(v) == 1]
    edges = [(v, val) for v, val in fc.simplices if len(v) == 2]
    triangles = [(v, val) for v, val in fc.simplices if len(v) == 3]

    birth = {v: val for v, val in vertices}
    uf = _UnionFind(fc.n_vertices)
    h0: list[tuple[float, float]] = []
    positive = []  # edge order positions of the cycle-creating edges
    edge_row = {}
    for pos, (verts, val) in enumerate(edges):
        i, j = verts
        ri, rj = uf.find(i), uf.find(j)
        if ri == rj:
            positive.append(pos)
            edge_row[verts] = pos
            continue
        # the younger component dies; ties resolved toward the larger root
        if (birth[ri], ri) < (birth[rj], rj):
            ri, rj = rj, ri
        h0.append((birth[ri], val))
        uf.parent[ri] = rj
    roots = {uf.find(i) for i in range(fc.n_vertices)}
    h0.extend((birth[r], math.inf) for r in roots)

    # column reduction of the triangle boundaries over the positive edges
    row_of = {edges[pos][0]: idx for idx, pos in enumerate(positive)}
    pivot: dict[int, int] = {}
    columns: list[int] = []
    h1: list[tuple[float, float]] = []
    paired_rows = set()
    for verts, val in triangles:
        col = 0
        for face in itertools.combinations(verts, 2):
            row = row_of.get(face)
            if row is not None:
                col |= 1 << row
        while col:
            low = col.bit_length() - 1
            if low not in pivot:
                pivot[low] = len(columns)
                columns.append(col)
                paired_rows.add(low)
                h1.append((edges[positive[low]][1], val))
                break
            col ^= columns[pivot[low]]
    for idx, pos in enumerate(positive):
        if idx not in paired_rows:
            h1.append((edges[pos][1], math.inf))
    return h0, h1


def persistence(fc: FilteredComplex) -> tuple[Diagram, Diagram]:
    """Persistence diagrams (H0, H1) of the filtration.  Essential classes are
    capped at the complex's max_radius; pairs with zero persistence vanish in
    the Diagram constructor."""
    h0, h1 = _persistence_pairs(fc)
    cap = fc.max_radius
    h0_d = Diagram([(b, cap if math.isinf(d) else d) for b, d in h0])
    h1_d = Diagram([(b, cap if math.isinf(d) else d) for b, d in h1])
    return h0_d, h1_d


# ---------------------------------------------------------------------------
# example geometries


def sample_circle(n: int, radius: float = 1.0, noise: float = 0.05, seed: int = 0) -> PointCloud:
    """n points at uniform angles on a circle with Gaussian radial noise."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 101]))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    r = radius + rng.normal(0.0, noise, n)
    return PointCloud(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))


def sample_annulus(
    n: int,
    r_inner: float,
    r_outer: float,
    center: tuple[float, float] = (0.0, 0.0),
    seed: int = 0,
) -> PointCloud:
    """n points uniform in area between the two radii."""
    if not (0 <= r_inner < r_outer):
        raise ValueError("need 0 <= r_inner < r_outer")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 202]))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    r = np.sqrt(rng.uniform(r_inner**2, r_outer**2, n))
    return PointCloud(
        np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])
    )


# Default double-annulus geometry; the bands nearly touch so the union reads
# as one figure with a large and a small hole.  The bands are kept thin and
# densely sampled so that each subsample's two hole classes stand far from the
# sampling noise.  These radii are artifact choices, configurable from the CLI.
DOUBLE_ANNULUS_BIG = (1.55, 1.65)
DOUBLE_ANNULUS_SMALL = (0.9, 1.0)
DOUBLE_ANNULUS_OFFSET = 2.75


def sample_double_annulus(
    n_big: int = 75,
    n_small: int = 50,
    seed: int = 0,
    big: tuple[float, float] = DOUBLE_ANNULUS_BIG,
    small: tuple[float, float] = DOUBLE_ANNULUS_SMALL,
    offset: float = DOUBLE_ANNULUS_OFFSET,
) -> PointCloud:
    """Two side-by-side annuli of different radii."""
    a = sample_annulus(n_big, big[0], big[1], (0.0, 0.0), seed)
    b = sample_annulus(n_small, small[0], small[1], (offset, 0.0), seed + 1)
    return PointCloud(np.vstack([a.coords, b.coords]))
