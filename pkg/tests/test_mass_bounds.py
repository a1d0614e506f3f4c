"""Empirical checks of the probabilistic bounds behind the continuity result:
weight mass shifted between associated groupings, mean-measure displacement
under small point moves, and the cost of deleting points.

All three are inequalities between Monte-Carlo estimates and closed-form
right-hand sides, checked with a generous sampling allowance on top.
"""

import math

import numpy as np

from pdstat.diagrams import BoxBound, Diagram, DiagramSet, diagonal_distance, diameter_bound
from pdstat.measure import (
    ground_cost_matrix,
    holder_constants_from_mbar,
    mc_mass_stderr,
    mc_slack,
    measure_wasserstein,
    product_metric,
)
from pdstat.pfm import PerturbParams, pfm

ALPHA = 0.35
DRAWS = 4000


def _far_diagram_set(rng, n, k, lo=1.0, hi=5.0):
    """Diagrams whose points all sit well above the diagonal, so a small
    nudge keeps every point off-diagonal and the label correspondence is the
    identity matching."""
    diagrams = []
    for _ in range(n):
        pts = []
        for _ in range(k):
            b = rng.uniform(0, hi - lo)
            pts.append((b, b + rng.uniform(lo, hi - b)))
        diagrams.append(Diagram(pts))
    return DiagramSet(diagrams)


def _nudge(x: DiagramSet, rng, scale: float) -> tuple[DiagramSet, float]:
    """Move every point by at most `scale`; returns the moved set and the
    total displacement sum over all points."""
    moved = []
    total = 0.0
    for d in x:
        pts = []
        for p in d:
            dx, dy = rng.uniform(-scale, scale, size=2)
            total += math.hypot(dx, dy)
            pts.append((p.birth + dx, p.death + dy))
        moved.append(Diagram(pts))
    return DiagramSet(moved), total


def _grouping_weights(measure):
    return {a.grouping: a.weight for a in measure.atoms}


def test_grouping_weight_shift_bound():
    # mass that must move between the two grouping distributions is bounded
    # by (4/alpha) * total point displacement
    rng = np.random.default_rng(31)
    for trial in range(6):
        n = int(rng.integers(2, 4))
        x = _far_diagram_set(rng, n, 2)
        y, displacement = _nudge(x, rng, 0.05)
        mu_x = pfm(x, PerturbParams(ALPHA, DRAWS, seed=100 + trial), exact_threshold=12)
        mu_y = pfm(y, PerturbParams(ALPHA, DRAWS, seed=200 + trial), exact_threshold=12)
        w_x = _grouping_weights(mu_x)
        w_y = _grouping_weights(mu_y)
        # points never vanish here, so groupings on x and y share index
        # patterns and the label association is the identity
        shifted = sum(
            max(w - w_y.get(g, 0.0), 0.0) for g, w in w_x.items()
        )
        rhs = 4.0 / ALPHA * displacement
        slack = 3.0 * (mc_mass_stderr(mu_x) + mc_mass_stderr(mu_y))
        assert shifted <= rhs + slack


def test_mean_measure_shift_bound():
    # measure distance under small moves: sqrt((4 mbar^2 / alpha) * sum of
    # displacements) plus the product-metric distance
    rng = np.random.default_rng(32)
    for trial in range(6):
        n = int(rng.integers(2, 4))
        k = 2
        x = _far_diagram_set(rng, n, k)
        y, displacement = _nudge(x, rng, 0.05)
        mu_x = pfm(x, PerturbParams(ALPHA, DRAWS, seed=300 + trial), exact_threshold=12)
        mu_y = pfm(y, PerturbParams(ALPHA, DRAWS, seed=400 + trial), exact_threshold=12)
        ground = ground_cost_matrix(mu_x, mu_y)
        dist, _ = measure_wasserstein(mu_x, mu_y, ground=ground)
        m_box = max(
            max(max(p.birth, p.death) for p in d) for d in list(x) + list(y) if len(d)
        )
        mbar = diameter_bound(BoxBound(m_box + ALPHA, n * k))
        rhs = math.sqrt(4.0 * mbar**2 / ALPHA * displacement) + product_metric(x, y)
        gmax = float(np.sqrt(ground.max())) if ground.size else 0.0
        assert dist <= rhs + mc_slack(mu_x, mu_y, gmax)


def test_dropped_points_bound():
    # deleting points costs at most (1/N^2 + mbar^2/alpha^2) times the
    # squared diagonal gaps of the deleted points
    rng = np.random.default_rng(33)
    for trial in range(6):
        n = int(rng.integers(2, 4))
        diagrams = []
        for _ in range(n):
            b = rng.uniform(0, 3)
            pts = [(b, b + rng.uniform(1.0, 3.0))]
            noise_b = rng.uniform(0, 4)
            pts.append((noise_b, noise_b + rng.uniform(0.05, 0.3)))
            diagrams.append(Diagram(pts))
        x = DiagramSet(diagrams)
        # drop the point nearest the diagonal from the first diagram
        victim = min(x[0], key=diagonal_distance)
        reduced = [Diagram([p for p in x[0] if p != victim])] + list(x.diagrams[1:])
        x_tilde = DiagramSet(reduced)
        mu_x = pfm(x, PerturbParams(ALPHA, DRAWS, seed=500 + trial), exact_threshold=12)
        mu_t = pfm(x_tilde, PerturbParams(ALPHA, DRAWS, seed=600 + trial), exact_threshold=12)
        ground = ground_cost_matrix(mu_x, mu_t)
        dist, _ = measure_wasserstein(mu_x, mu_t, ground=ground)
        m_box = max(max(max(p.birth, p.death) for p in d) for d in x if len(d))
        mbar = diameter_bound(BoxBound(m_box + ALPHA, n * 2))
        rhs_sq = (1.0 / n**2 + mbar**2 / ALPHA**2) * diagonal_distance(victim) ** 2
        gmax = float(np.sqrt(ground.max())) if ground.size else 0.0
        assert dist <= math.sqrt(rhs_sq) + mc_slack(mu_x, mu_t, gmax)


def test_rectangle_weights_follow_the_short_side():
    # a rectangle slightly longer in the death direction: the matching across
    # the shorter side dominates, so its mean diagram carries more weight
    stretch = 0.25
    x = DiagramSet(
        [
            Diagram([(2, 6), (4, 8 + stretch)]),
            Diagram([(2, 8 + stretch), (4, 6)]),
        ]
    )
    mu = pfm(x, PerturbParams(0.3, draws=6000, seed=9))
    horizontal = Diagram([(3, 6), (3, 8 + stretch)])
    vertical = Diagram([(2, 7 + stretch / 2), (4, 7 + stretch / 2)])
    w_h = sum(a.weight for a in mu.atoms if a.diagram == horizontal)
    w_v = sum(a.weight for a in mu.atoms if a.diagram == vertical)
    assert w_h > w_v
    assert w_h + w_v > 0.95
    assert w_h < 1.0  # the longer pairing still occurs
