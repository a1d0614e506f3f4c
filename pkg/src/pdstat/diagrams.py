"""Core value types: points in the birth/death plane, diagrams, diagram sets.

A diagram stores only its off-diagonal points; the diagonal is implicit and
carries infinite multiplicity.  All types are immutable and hashable, so they
can be shared freely between threads and used as dict keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, order=True)
class PlanePoint:
    """A (birth, death) pair in the closed upper half-plane."""

    birth: float
    death: float

    def __post_init__(self):
        if not (math.isfinite(self.birth) and math.isfinite(self.death)):
            raise ValueError(f"coordinates must be finite, got {self}")
        if self.death < self.birth:
            raise ValueError(f"death < birth in {self}")

    @property
    def persistence(self) -> float:
        return self.death - self.birth


def diagonal_distance(p: PlanePoint) -> float:
    """Perpendicular L2 distance from p to the diagonal: (death - birth)/sqrt(2)."""
    return (p.death - p.birth) / SQRT2


def to_rotated(p: PlanePoint) -> tuple[float, float]:
    """Coordinates of p on the axes (1,1)/sqrt(2) (along the diagonal) and
    (-1,1)/sqrt(2) (perpendicular to it).  The second coordinate equals
    diagonal_distance(p)."""
    return (p.birth + p.death) / SQRT2, (p.death - p.birth) / SQRT2


def from_rotated(a: float, b: float) -> PlanePoint:
    """Inverse of to_rotated."""
    return PlanePoint((a - b) / SQRT2, (a + b) / SQRT2)


@dataclass(frozen=True)
class Diagram:
    """Finite multiset of strictly off-diagonal points.

    Points with death == birth are identified with the implicit diagonal and
    silently dropped on construction; death < birth is rejected.  Multiplicity
    is represented by repetition.  Equality is exact multiset equality; use
    `close_to` for tolerance-based comparison.
    """

    points: tuple[PlanePoint, ...] = ()

    def __init__(self, points=()):
        pts = []
        for p in points:
            if not isinstance(p, PlanePoint):
                p = PlanePoint(float(p[0]), float(p[1]))
            if p.death > p.birth:
                pts.append(p)
        object.__setattr__(self, "points", tuple(sorted(pts)))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def close_to(self, other: "Diagram", tol: float = 1e-9) -> bool:
        """Multiset equality up to coordinatewise tolerance (sorted pairing)."""
        if len(self) != len(other):
            return False
        return all(
            abs(p.birth - q.birth) <= tol and abs(p.death - q.death) <= tol
            for p, q in zip(self.points, other.points)
        )


EMPTY_DIAGRAM = Diagram()


@dataclass(frozen=True)
class BoxBound:
    """The bounded subspace of diagrams with at most K off-diagonal points,
    all coordinates in [0, M]."""

    M: float
    K: int

    def __post_init__(self):
        if self.M <= 0:
            raise ValueError("M must be positive")
        if self.K < 0:
            raise ValueError("K must be nonnegative")


def in_box(d: Diagram, bound: BoxBound) -> bool:
    """True iff d has at most K points with all coordinates in [0, M]."""
    if len(d) > bound.K:
        return False
    return all(0.0 <= p.birth <= bound.M and 0.0 <= p.death <= bound.M for p in d)


def diameter_bound(bound: BoxBound) -> float:
    """Coarse diameter bound sqrt(2)*K*M for the boxed diagram space.

    Any point is at most (sqrt(2)/2)*M from the diagonal, so the distance of a
    diagram to the empty diagram is at most (sqrt(2)/2)*K*M, and the diameter
    at most twice that.
    """
    return SQRT2 * bound.K * bound.M


@dataclass(frozen=True)
class DiagramSet:
    """An ordered list of N >= 1 diagrams.  Order is significant: index i
    identifies the i-th input diagram everywhere downstream."""

    diagrams: tuple[Diagram, ...] = field(default=())

    def __init__(self, diagrams):
        ds = tuple(d if isinstance(d, Diagram) else Diagram(d) for d in diagrams)
        if not ds:
            raise ValueError("a diagram set needs at least one diagram")
        object.__setattr__(self, "diagrams", ds)

    @property
    def n_diagrams(self) -> int:
        return len(self.diagrams)

    def __len__(self) -> int:
        return len(self.diagrams)

    def __iter__(self):
        return iter(self.diagrams)

    def __getitem__(self, i) -> Diagram:
        return self.diagrams[i]

    def total_points(self) -> int:
        return sum(len(d) for d in self.diagrams)
