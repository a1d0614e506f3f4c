"""Local minimization of the Frechet function by alternating optimal
matchings against a candidate diagram with closed-form grouping means.

Each iteration matches the candidate against every input diagram, assembles
the matchings into a grouping, and replaces the candidate with the grouping's
mean.  The objective value never increases, and the loop stops as soon as the
grouping (compared in canonical form) stops changing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagrams import Diagram, DiagramSet
from .grouping import Grouping, Selection, grouping_mean, trivial_selection
from .matching import DIAGONAL, Matching, MetricParams, wasserstein


@dataclass(frozen=True)
class FrechetResult:
    mean: Diagram
    grouping: Grouping
    value: float
    iterations: int
    converged: bool
    history: tuple[float, ...] = ()


def matchings_to_grouping(
    matchings: list[Matching], y: Diagram, x: DiagramSet
) -> Grouping:
    """Assemble per-diagram matchings of the candidate y into one grouping.

    Selection j collects, for each diagram i, the point matched to y's j-th
    point (or the diagonal).  Points of x matched to y's diagonal become
    trivial selections; y-points matched to the diagonal everywhere yield
    all-diagonal rows, which the Grouping constructor drops.
    """
    n = x.n_diagrams
    if len(matchings) != n:
        raise ValueError(f"need one matching per diagram, got {len(matchings)}")
    rows: list[list[int | None]] = [[None] * n for _ in range(len(y))]
    extras: list[Selection] = []
    for i, matching in enumerate(matchings):
        for left, right in matching.pairs:
            if left is DIAGONAL:
                if right is DIAGONAL:
                    continue
                extras.append(trivial_selection(i, right, n))
            elif right is DIAGONAL:
                continue
            else:
                if not (0 <= left < len(y)):
                    raise ValueError(f"matching {i} references y-point {left}")
                if rows[left][i] is not None:
                    raise ValueError(f"matching {i} pairs y-point {left} twice")
                rows[left][i] = right
    return Grouping([Selection(r) for r in rows] + extras)


def _pairings_and_value(y, x, params):
    matchings = []
    value = 0.0
    for xi in x:
        dist, matching = wasserstein(y, xi, params)
        matchings.append(matching)
        value += matching.cost if params.p == 2.0 else dist**2
    return matchings, value


def _single_run(x, y0, max_iter, params):
    """Iterations count update steps: the run stops once the pairing of the
    updated candidate matches the pairing that produced it."""
    y = y0
    previous: Grouping | None = None
    history = []
    grouping = None
    for it in range(max_iter + 1):
        matchings, value = _pairings_and_value(y, x, params)
        history.append(value)
        grouping = matchings_to_grouping(matchings, y, x)
        if grouping == previous:
            return FrechetResult(y, grouping, value, it, True, tuple(history))
        if it == max_iter:
            break
        previous = grouping
        y = grouping_mean(grouping, x)
    # out of update budget: y is the mean of `previous`, whose pairing moved on
    return FrechetResult(y, previous, history[-1], max_iter, False, tuple(history))


def frechet_mean(
    x: DiagramSet,
    init: Diagram | int | str | None = None,
    max_iter: int = 64,
    restarts: int = 1,
    seed: int = 0,
    params: MetricParams = MetricParams(),
) -> FrechetResult:
    """Iterate matchings and grouping means until the pairing stabilizes.

    `init` is a Diagram, an index into x, the string "random" for a seeded
    random choice of input diagram, or None for the first diagram.  With
    restarts > 1, the remaining starts are seeded random choices and the best
    final value wins.  Hitting max_iter is reported via converged=False,
    not raised.
    """
    if x.n_diagrams < 1:
        raise ValueError("empty diagram set")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(init, Diagram):
        y0 = init
    elif init is None:
        y0 = x[0]
    elif init == "random":
        y0 = x[int(rng.integers(x.n_diagrams))]
    else:
        y0 = x[int(init)]

    best = _single_run(x, y0, max_iter, params)
    for _ in range(restarts - 1):
        alt = _single_run(x, x[int(rng.integers(x.n_diagrams))], max_iter, params)
        if alt.value < best.value:
            best = alt
    return best
