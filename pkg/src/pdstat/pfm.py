"""The probabilistic Frechet mean: a finitely supported measure over diagrams.

Each Monte-Carlo draw perturbs every input point inside a radius-alpha ball
(points closer than alpha to the diagonal may fall onto it and vanish), finds
the optimal grouping of the perturbed diagrams, and lifts that grouping back
to the original labels, adding a trivial selection for every vanished point.
The measure puts weight count/draws on each distinct canonical grouping, with
the atom located at the grouping's mean over the ORIGINAL diagrams.

Optimal groupings are found exactly, for small total point counts, by a
dynamic program over subsets of points (each grouping is an exact cover by
blocks holding at most one point per diagram); larger instances fall back to
the iterative Frechet-mean algorithm with random restarts, which is an
approximation and flagged as such in the result.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .diagrams import Diagram, DiagramSet, PlanePoint, SQRT2, diagonal_distance
from .frechet import frechet_mean
from .grouping import (
    Grouping,
    Selection,
    grouping_mean,
    trivial_selection,
)

DEFAULT_EXACT_THRESHOLD = 8
DEFAULT_RESTARTS = 4


@dataclass(frozen=True)
class PerturbParams:
    """Perturbation radius, number of Monte-Carlo draws, and master seed."""

    alpha: float
    draws: int = 100
    seed: int = 0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError("alpha must be positive")
        if self.draws < 1:
            raise ValueError("draws must be >= 1")


@dataclass(frozen=True)
class LabeledDraw:
    """One perturbed copy of a diagram set, keeping original point labels.

    entries[i] lists, for every point of input diagram i in order, the pair
    (original point index, perturbed point or None if it fell to the diagonal).
    """

    entries: tuple[tuple[tuple[int, PlanePoint | None], ...], ...]

    def surviving(self) -> tuple[DiagramSet, list[list[int]]]:
        """The draw as a DiagramSet plus, per diagram, the original labels
        aligned with the (sorted) point order of the constructed Diagram."""
        diagrams = []
        labels = []
        for per_diagram in self.entries:
            alive = sorted(
                ((p, j) for j, p in per_diagram if p is not None),
                key=lambda t: t[0],
            )
            diagrams.append(Diagram([p for p, _ in alive]))
            labels.append([j for _, j in alive])
        return DiagramSet(diagrams), labels

    def dropped(self) -> list[tuple[int, int]]:
        return [
            (i, j)
            for i, per_diagram in enumerate(self.entries)
            for j, p in per_diagram
            if p is None
        ]


@dataclass(frozen=True)
class MeasureAtom:
    weight: float
    diagram: Diagram
    grouping: Grouping | None = None


@dataclass(frozen=True)
class DiagramMeasure:
    """Finitely supported probability measure over diagrams.

    For PFM outputs every atom carries the grouping that generated it (the
    identity key: atoms with equal mean diagrams but distinct groupings stay
    separate) and the sampling metadata needed to reproduce the run.
    """

    atoms: tuple[MeasureAtom, ...]
    alpha: float | None = None
    draws: int | None = None
    seed: int | None = None
    exact: bool | None = None

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a measure needs at least one atom")
        total = math.fsum(a.weight for a in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        for a in self.atoms:
            if not (0.0 < a.weight <= 1.0):
                raise ValueError(f"weight {a.weight} outside (0, 1]")
        groupings = [a.grouping for a in self.atoms if a.grouping is not None]
        if len(set(groupings)) != len(groupings):
            raise ValueError("duplicate groupings across atoms")

    def __len__(self) -> int:
        return len(self.atoms)

    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms])

    def diagrams(self) -> tuple[Diagram, ...]:
        return tuple(a.diagram for a in self.atoms)


def dirac(d: Diagram) -> DiagramMeasure:
    return DiagramMeasure((MeasureAtom(1.0, d),))


class OptimalGroupingResult(NamedTuple):
    grouping: Grouping
    exact: bool


def survival_radius(x: PlanePoint, alpha: float) -> float:
    return min(alpha, diagonal_distance(x))


def perturb_point(x: PlanePoint, alpha: float, rng) -> PlanePoint | None:
    """Draw uniformly in the radius-alpha ball around x; keep the draw only if
    it lies within min(alpha, distance-to-diagonal) of x, else return None
    (the point falls onto the diagonal).  Survival probability is r^2/alpha^2.

    Uniform ball sampling is rejection from the bounding square, so the result
    is deterministic given the generator state.
    """
    while True:
        dx, dy = rng.uniform(-alpha, alpha, size=2)
        if dx * dx + dy * dy <= alpha * alpha:
            break
    r = survival_radius(x, alpha)
    if dx * dx + dy * dy > r * r:
        return None
    moved = PlanePoint(x.birth + dx, x.death + dy)
    if moved.death <= moved.birth:  # boundary draw, measure zero
        return None
    return moved


def perturb_diagram_set(x: DiagramSet, alpha: float, rng) -> LabeledDraw:
    return LabeledDraw(
        tuple(
            tuple((j, perturb_point(p, alpha, rng)) for j, p in enumerate(d))
            for d in x
        )
    )


def lift_grouping(g_draw: Grouping, draw: LabeledDraw, x: DiagramSet) -> Grouping:
    """Map a grouping on the surviving perturbed points back to the original
    labels and append a trivial selection for every dropped point."""
    n = x.n_diagrams
    _, labels = draw.surviving()
    rows = []
    for s in g_draw:
        entries: list[int | None] = [None] * n
        for i, j in s.chosen():
            if not (0 <= j < len(labels[i])):
                raise ValueError(f"selection references unknown draw point ({i},{j})")
            entries[i] = labels[i][j]
        rows.append(Selection(entries))
    for i, j in draw.dropped():
        rows.append(trivial_selection(i, j, n))
    return Grouping(rows)


# ---------------------------------------------------------------------------
# the exact optimal grouping as a max-score exact cover over point subsets


def _flat_points(x: DiagramSet):
    return [(i, j) for i in range(x.n_diagrams) for j in range(len(x[i]))]


def _blocks(x: DiagramSet, flat):
    """All candidate selections as index blocks: nonempty subsets of the flat
    points with at most one point per diagram."""
    pos = {pt: idx for idx, pt in enumerate(flat)}
    per_diagram = [
        [None] + [pos[(i, j)] for j in range(len(x[i]))] for i in range(x.n_diagrams)
    ]
    blocks = []
    for combo in itertools.product(*per_diagram):
        members = tuple(c for c in combo if c is not None)
        if members:
            blocks.append(members)
    return blocks


def _grouping_from_blocks(block_members, flat, n: int, dropped) -> Grouping:
    rows = []
    for members in block_members:
        entries: list[int | None] = [None] * n
        for f in members:
            i, j = flat[f]
            entries[i] = j
        rows.append(Selection(entries))
    for i, j in dropped:
        rows.append(trivial_selection(i, j, n))
    return Grouping(rows)


def _batch_optimal_groupings(x: DiagramSet, a, b, survived):
    """Exact optimal lifted grouping for every draw in a batch.

    a, b: (T, P) rotated coordinates of the perturbed points; survived: (T, P)
    booleans.  Returns a list of T canonical groupings on the original labels.

    A grouping's objective decomposes over its selections; in rotated
    coordinates a selection with point sums (SA, SB) and k members scores
    SA^2/k + SB^2/N (to be maximized, the per-draw constant term dropped).
    The optimum is an exact cover of the surviving points by blocks, found by
    a subset-mask dynamic program shared across the batch.
    """
    n = x.n_diagrams
    flat = _flat_points(x)
    p_total = len(flat)
    t_total = a.shape[0]
    blocks = _blocks(x, flat)
    n_blocks = len(blocks)

    member_matrix = np.zeros((p_total, n_blocks))
    block_mask = np.zeros(n_blocks, dtype=np.int64)
    block_size = np.zeros(n_blocks)
    for bi, members in enumerate(blocks):
        for f in members:
            member_matrix[f, bi] = 1.0
            block_mask[bi] |= 1 << f
        block_size[bi] = len(members)

    # blocks indexed by each member point, for the lowest-uncovered-point rule
    blocks_of_point = [
        [bi for bi, members in enumerate(blocks) if f in members]
        for f in range(p_total)
    ]

    full = (1 << p_total) - 1
    n_states = 1 << p_total
    ghost_base = n_blocks  # choice codes >= ghost_base mean "point was dropped"

    results: list[Grouping] = []
    chunk = max(1, (1 << 22) // n_states)
    for start in range(0, t_total, chunk):
        sl = slice(start, min(start + chunk, t_total))
        ac, bc, sc = a[sl], b[sl], survived[sl]
        t = ac.shape[0]

        sa = ac @ member_matrix
        sb = bc @ member_matrix
        score = sa * sa / block_size + sb * sb / n
        alive_members = sc.astype(float) @ member_matrix
        score = np.where(alive_members == block_size, score, -np.inf)

        best = np.full((t, n_states), -np.inf)
        best[:, 0] = 0.0
        choice = np.full((t, n_states), -1, dtype=np.int32)
        for mask in range(n_states - 1):
            src = best[:, mask]
            feasible = src > -np.inf
            if not feasible.any():
                continue
            free = full & ~mask
            p = (free & -free).bit_length() - 1  # lowest uncovered point
            ghost_state = mask | (1 << p)
            cand = np.where(~sc[:, p] & feasible, src, -np.inf)
            better = cand > best[:, ghost_state]
            if better.any():
                best[better, ghost_state] = cand[better]
                choice[better, ghost_state] = ghost_base + p
            for bi in blocks_of_point[p]:
                bm = block_mask[bi]
                if bm & mask:
                    continue
                new = mask | bm
                cand = src + score[:, bi]
                better = cand > best[:, new]
                if better.any():
                    best[better, new] = cand[better]
                    choice[better, new] = bi
        for ti in range(t):
            mask = full
            members_list = []
            dropped = []
            while mask:
                code = int(choice[ti, mask])
                if code < 0:
                    raise RuntimeError("exact-cover DP failed to reach full mask")
                if code >= ghost_base:
                    f = code - ghost_base
                    dropped.append(flat[f])
                    mask ^= 1 << f
                else:
                    members_list.append(blocks[code])
                    mask ^= int(block_mask[code])
            results.append(_grouping_from_blocks(members_list, flat, n, dropped))
    return results


def optimal_grouping(
    x: DiagramSet,
    threshold: int = DEFAULT_EXACT_THRESHOLD,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> OptimalGroupingResult:
    """A grouping minimizing the Frechet function.

    Exact (global) when the total point count is at most `threshold`;
    otherwise the iterative mean with `restarts` random starts, which only
    guarantees a local optimum and is flagged exact=False.
    """
    if x.total_points() <= threshold:
        p_total = x.total_points()
        if p_total == 0:
            return OptimalGroupingResult(Grouping(()), True)
        pts = [x[i].points[j] for i, j in _flat_points(x)]
        a = np.array([[(p.birth + p.death) / SQRT2 for p in pts]])
        b = np.array([[(p.death - p.birth) / SQRT2 for p in pts]])
        survived = np.ones((1, p_total), dtype=bool)
        return OptimalGroupingResult(
            _batch_optimal_groupings(x, a, b, survived)[0], True
        )
    result = frechet_mean(x, restarts=restarts, seed=seed)
    return OptimalGroupingResult(result.grouping, False)


# ---------------------------------------------------------------------------
# assembling the measure


def _vectorized_draws(x: DiagramSet, params: PerturbParams):
    """All perturbations at once: rotated coordinates (T, P) and survival."""
    flat = _flat_points(x)
    pts = [x[i].points[j] for i, j in flat]
    p_total = len(flat)
    base = np.array([[p.birth, p.death] for p in pts])  # (P, 2)
    radius = np.array([survival_radius(p, params.alpha) for p in pts])

    rng = np.random.default_rng(np.random.SeedSequence(params.seed))
    t = params.draws
    offsets = rng.uniform(-params.alpha, params.alpha, size=(t, p_total, 2))
    norm2 = (offsets**2).sum(axis=2)
    bad = norm2 > params.alpha**2
    while bad.any():
        offsets[bad] = rng.uniform(-params.alpha, params.alpha, size=(int(bad.sum()), 2))
        norm2 = (offsets**2).sum(axis=2)
        bad = norm2 > params.alpha**2
    survived = norm2 <= radius**2
    coords = base[None, :, :] + offsets
    gap = coords[:, :, 1] - coords[:, :, 0]
    survived &= gap > 0  # boundary draws, measure zero
    a = coords.sum(axis=2) / SQRT2
    b = gap / SQRT2
    return flat, a, b, survived, coords


def _approx_draw_grouping(x, flat, coords, survived, ti, restarts, child_seed):
    per_diagram: list[list[tuple[int, PlanePoint | None]]] = [
        [] for _ in range(x.n_diagrams)
    ]
    for f, (i, j) in enumerate(flat):
        if survived[ti, f]:
            p = PlanePoint(float(coords[ti, f, 0]), float(coords[ti, f, 1]))
        else:
            p = None
        per_diagram[i].append((j, p))
    draw = LabeledDraw(tuple(tuple(d) for d in per_diagram))
    ds, _ = draw.surviving()
    result = frechet_mean(ds, restarts=restarts, seed=child_seed)
    return lift_grouping(result.grouping, draw, x)


def pfm(
    x: DiagramSet,
    params: PerturbParams,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    restarts: int = DEFAULT_RESTARTS,
) -> DiagramMeasure:
    """Monte-Carlo estimate of the probabilistic Frechet mean.

    Weight of a grouping = occurrences of its canonical form / draws; each
    atom's diagram is the grouping mean over the original inputs.  The result
    is deterministic given the seed.
    """
    if x.total_points() == 0:
        return DiagramMeasure(
            (MeasureAtom(1.0, Diagram(), Grouping(())),),
            alpha=params.alpha,
            draws=params.draws,
            seed=params.seed,
            exact=True,
        )
    flat, a, b, survived, coords = _vectorized_draws(x, params)
    exact = len(flat) <= exact_threshold
    if exact:
        groupings = _batch_optimal_groupings(x, a, b, survived)
    else:
        child_seeds = np.random.SeedSequence([params.seed, 1]).generate_state(
            params.draws
        )
        groupings = [
            _approx_draw_grouping(
                x, flat, coords, survived, ti, restarts, int(child_seeds[ti])
            )
            for ti in range(params.draws)
        ]
    counts: dict[Grouping, int] = {}
    for g in groupings:
        counts[g] = counts.get(g, 0) + 1
    ordered = sorted(
        counts.items(), key=lambda kv: (-kv[1], [s.sort_key() for s in kv[0]])
    )
    atoms = tuple(
        MeasureAtom(cnt / params.draws, grouping_mean(g, x), g)
        for g, cnt in ordered
    )
    return DiagramMeasure(
        atoms,
        alpha=params.alpha,
        draws=params.draws,
        seed=params.seed,
        exact=exact,
    )
