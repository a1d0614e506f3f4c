"""Selections and groupings over N diagrams, their closed-form means, and the
sum-of-squared-distances objective they minimize.

A selection picks one point-or-diagonal from each of the N diagrams; a
grouping is a set of selections covering every off-diagonal point exactly
once.  `None` encodes the diagonal throughout, matching the JSON form where
diagonal entries serialize to null.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagrams import Diagram, DiagramSet, PlanePoint, to_rotated


@dataclass(frozen=True)
class Selection:
    """One entry per diagram: a point index, or None for the diagonal."""

    entries: tuple[int | None, ...]

    def __init__(self, entries):
        object.__setattr__(self, "entries", tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def chosen(self):
        """(diagram index, point index) pairs of the non-diagonal entries."""
        return tuple((i, j) for i, j in enumerate(self.entries) if j is not None)

    def is_trivial(self) -> bool:
        return len(self.chosen()) == 1

    def sort_key(self):
        return self.chosen()


@dataclass(frozen=True)
class Grouping:
    """A tuple of selections.  Construction canonicalizes: all-diagonal rows
    are dropped and the remaining selections are sorted by their
    (diagram index, point index) pattern, so two groupings that differ only
    by row order or padding compare equal."""

    selections: tuple[Selection, ...]

    def __init__(self, selections):
        rows = [s if isinstance(s, Selection) else Selection(s) for s in selections]
        rows = [s for s in rows if s.chosen()]
        rows.sort(key=Selection.sort_key)
        object.__setattr__(self, "selections", tuple(rows))

    def __len__(self) -> int:
        return len(self.selections)

    def __iter__(self):
        return iter(self.selections)

    def n_diagrams(self) -> int:
        return len(self.selections[0]) if self.selections else 0


def canonicalize(g: Grouping) -> Grouping:
    """Idempotent canonical form (Grouping construction already canonicalizes)."""
    return Grouping(g.selections)


def validate_grouping(g: Grouping, x: DiagramSet) -> None:
    """Check coverage: every off-diagonal point of every diagram appears in
    exactly one selection.  Raises ValueError otherwise."""
    n = x.n_diagrams
    seen: set[tuple[int, int]] = set()
    for s in g:
        if len(s) != n:
            raise ValueError(f"selection length {len(s)} != {n} diagrams")
        for i, j in s.chosen():
            if not (0 <= j < len(x[i])):
                raise ValueError(f"point index {j} out of range for diagram {i}")
            if (i, j) in seen:
                raise ValueError(f"point ({i},{j}) covered twice")
            seen.add((i, j))
    expected = {(i, j) for i in range(n) for j in range(len(x[i]))}
    missing = expected - seen
    if missing:
        raise ValueError(f"points not covered: {sorted(missing)}")


def trivial_selection(i: int, j: int, n: int) -> Selection:
    """The selection choosing point j of diagram i and the diagonal elsewhere."""
    if not (0 <= i < n):
        raise IndexError(f"diagram index {i} out of range for N={n}")
    if j < 0:
        raise IndexError(f"point index {j} negative")
    return Selection(tuple(j if k == i else None for k in range(n)))


def selection_mean(s: Selection, x: DiagramSet) -> PlanePoint | None:
    """The unique minimizer of the summed squared distances to the selection's
    k points and its N-k diagonal copies.

    Closed form: with k off-diagonal points (x_i, y_i) out of N diagrams,
        mean = ((N+k)*sum(x) + (N-k)*sum(y), (N-k)*sum(x) + (N+k)*sum(y)) / (2*N*k)
    equivalently the rotated coordinates (mean of a's over k, mean of b's over N).
    Returns None (the diagonal) for an all-diagonal selection.
    """
    n = x.n_diagrams
    if len(s) != n:
        raise ValueError(f"selection length {len(s)} != {n} diagrams")
    chosen = s.chosen()
    k = len(chosen)
    if k == 0:
        return None
    sx = sy = 0.0
    for i, j in chosen:
        p = x[i].points[j]
        sx += p.birth
        sy += p.death
    scale = 1.0 / (2.0 * n * k)
    return PlanePoint(
        scale * ((n + k) * sx + (n - k) * sy),
        scale * ((n - k) * sx + (n + k) * sy),
    )


def selection_cost(s: Selection, x: DiagramSet) -> float:
    """Summed squared distance from the selection's points and diagonal copies
    to the selection mean: sum(a^2 + b^2) - (sum a)^2/k - (sum b)^2/N in
    rotated coordinates."""
    n = x.n_diagrams
    chosen = s.chosen()
    k = len(chosen)
    if k == 0:
        return 0.0
    sq = sa = sb = 0.0
    for i, j in chosen:
        a, b = to_rotated(x[i].points[j])
        sq += a * a + b * b
        sa += a
        sb += b
    return sq - sa * sa / k - sb * sb / n


def grouping_mean(g: Grouping, x: DiagramSet) -> Diagram:
    """Diagram with one point at the mean of each selection."""
    validate_grouping(g, x)
    means = []
    for s in g:
        m = selection_mean(s, x)
        if m is not None:
            means.append(m)
    return Diagram(means)


def grouping_cost(g: Grouping, x: DiagramSet) -> float:
    """Within-grouping objective: the summed selection costs.  Minimizing this
    over all groupings is equivalent to minimizing the Frechet function over
    all candidate mean diagrams."""
    return sum(selection_cost(s, x) for s in g)


def frechet_function(y: Diagram, x: DiagramSet, params=None) -> float:
    """Sum over the input diagrams of the squared Wasserstein distance to y."""
    from .matching import MetricParams, wasserstein

    params = params or MetricParams()
    total = 0.0
    for xi in x:
        dist, matching = wasserstein(y, xi, params)
        total += matching.cost if params.p == 2.0 else dist**2
    return total


def enumerate_groupings(x: DiagramSet, max_points: int = 8):
    """Yield every valid grouping of x exactly once, in canonical form.

    Groupings are the partitions of all off-diagonal points into blocks with
    at most one point per diagram.  Brute-force oracle: refuses instances with
    more than `max_points` points total.
    """
    flat = [(i, j) for i in range(x.n_diagrams) for j in range(len(x[i]))]
    if len(flat) > max_points:
        raise ValueError(
            f"{len(flat)} points exceeds the enumeration threshold {max_points}"
        )
    n = x.n_diagrams

    def to_grouping(blocks) -> Grouping:
        sels = []
        for block in blocks:
            entries: list[int | None] = [None] * n
            for i, j in block:
                entries[i] = j
            sels.append(Selection(entries))
        return Grouping(sels)

    def recurse(idx: int, blocks: list[list[tuple[int, int]]]):
        if idx == len(flat):
            yield to_grouping(blocks)
            return
        i, j = flat[idx]
        for block in blocks:
            if all(bi != i for bi, _ in block):
                block.append((i, j))
                yield from recurse(idx + 1, blocks)
                block.pop()
        blocks.append([(i, j)])
        yield from recurse(idx + 1, blocks)
        blocks.pop()

    if not flat:
        yield Grouping(())
        return
    yield from recurse(0, [])


def grouping_to_lists(g: Grouping) -> list[list[int | None]]:
    """JSON-ready form: one list of N entries per selection, canonical order."""
    return [list(s.entries) for s in g]


def grouping_from_lists(rows, n: int | None = None) -> Grouping:
    g = Grouping(tuple(Selection(row) for row in rows))
    if n is not None:
        for s in g:
            if len(s) != n:
                raise ValueError(f"selection length {len(s)} != {n}")
    return g


def all_trivial_grouping(x: DiagramSet) -> Grouping:
    """The grouping made of one trivial selection per off-diagonal point."""
    n = x.n_diagrams
    return Grouping(
        tuple(
            trivial_selection(i, j, n)
            for i in range(n)
            for j in range(len(x[i]))
        )
    )
