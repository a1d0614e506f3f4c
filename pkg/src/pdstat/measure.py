"""Wasserstein distance between finitely supported measures over diagram
space, the product metric on diagram sets, and the constants of the
continuity bound for the perturbation-based mean.

Masses are scaled to a common integer denominator (exact for Monte-Carlo
weights count/draws) and the transport problem is solved as an exact
min-cost flow by successive shortest augmenting paths, so no mass drifts in
floating point.  Ground costs are squared diagram Wasserstein distances and
the returned distance is the square root of the optimal cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .diagrams import BoxBound, DiagramSet, diameter_bound
from .matching import MetricParams, wasserstein
from .pfm import DiagramMeasure


@dataclass(frozen=True)
class TransportPlan:
    """Optimal flows between two atom lists: (source index, target index,
    mass) triples with matching marginals, plus the total squared-distance
    cost they pay."""

    flows: tuple[tuple[int, int, float], ...]
    cost: float


def _integer_masses(measure: DiagramMeasure) -> list[Fraction]:
    """Atom weights as exact rationals.  Monte-Carlo measures carry their
    draw count, making counts/draws exact; other weights are snapped to the
    nearest rational with a bounded denominator."""
    if measure.draws:
        fracs = [
            Fraction(round(a.weight * measure.draws), measure.draws)
            for a in measure.atoms
        ]
    else:
        fracs = [Fraction(a.weight).limit_denominator(10**9) for a in measure.atoms]
    defect = 1 - sum(fracs)
    if abs(defect) > Fraction(1, 10**9):
        raise ValueError(f"weights do not sum to 1 (defect {float(defect)})")
    if defect:
        top = max(range(len(fracs)), key=lambda i: fracs[i])
        fracs[top] += defect
    return fracs


def _solve_transport(supply: list[int], demand: list[int], cost: np.ndarray):
    """Exact transportation problem by successive shortest augmenting paths
    with node potentials.  Supplies and demands are positive integers with
    equal sums; flows stay integral throughout, so no mass is lost to
    floating-point arithmetic (only the costs are floats)."""
    m, n = len(supply), len(demand)
    total = m + n  # nodes: left 0..m-1, right m..m+n-1
    pi = [0.0] * total
    rem_s = list(supply)
    rem_d = list(demand)
    flow = [[0] * n for _ in range(m)]
    inf = math.inf

    while any(r > 0 for r in rem_s):
        dist = [inf] * total
        parent: list[int | None] = [None] * total
        visited = [False] * total
        for i in range(m):
            if rem_s[i] > 0:
                dist[i] = 0.0
        for _ in range(total):
            node = -1
            best = inf
            for k in range(total):
                if not visited[k] and dist[k] < best:
                    best = dist[k]
                    node = k
            if node < 0:
                break
            visited[node] = True
            if node < m:
                i = node
                for j in range(n):
                    k = m + j
                    if visited[k]:
                        continue
                    rc = max(cost[i, j] + pi[i] - pi[k], 0.0)
                    if best + rc < dist[k]:
                        dist[k] = best + rc
                        parent[k] = node
            else:
                j = node - m
                for i in range(m):
                    if visited[i] or flow[i][j] <= 0:
                        continue
                    rc = max(-cost[i, j] + pi[node] - pi[i], 0.0)
                    if best + rc < dist[i]:
                        dist[i] = best + rc
                        parent[i] = node
        target = -1
        for j in range(n):
            if rem_d[j] > 0 and dist[m + j] < inf:
                if target < 0 or dist[m + j] < dist[target]:
                    target = m + j
        if target < 0:
            raise RuntimeError("transport problem infeasible")

        # walk back to the source and find the bottleneck
        arcs = []  # (i, j, forward)
        node = target
        while parent[node] is not None:
            prev = parent[node]
            if prev < m:
                arcs.append((prev, node - m, True))
            else:
                arcs.append((node, prev - m, False))
            node = prev
        amount = min(rem_s[node], rem_d[target - m])
        for i, j, forward in arcs:
            if not forward:
                amount = min(amount, flow[i][j])
        for i, j, forward in arcs:
            flow[i][j] += amount if forward else -amount
        rem_s[node] -= amount
        rem_d[target - m] -= amount

        dt = dist[target]
        for k in range(total):
            pi[k] += min(dist[k], dt)
    return flow


def ground_cost_matrix(
    mu: DiagramMeasure, nu: DiagramMeasure, params: MetricParams = MetricParams()
) -> np.ndarray:
    """Pairwise squared diagram distances between the two supports."""
    rows = mu.diagrams()
    cols = nu.diagrams()
    out = np.zeros((len(rows), len(cols)))
    for i, di in enumerate(rows):
        for j, dj in enumerate(cols):
            dist, matching = wasserstein(di, dj, params)
            out[i, j] = matching.cost if params.p == 2.0 else dist**2
    return out


def _support_key(measure: DiagramMeasure):
    return tuple(
        (a.weight, tuple((p.birth, p.death) for p in a.diagram)) for a in measure.atoms
    )


def measure_wasserstein(
    mu: DiagramMeasure,
    nu: DiagramMeasure,
    params: MetricParams = MetricParams(),
    ground: np.ndarray | None = None,
) -> tuple[float, TransportPlan]:
    """Exact 2-Wasserstein distance between measures on diagram space.

    Symmetric by construction (arguments are ordered canonically before
    solving).  Raises on weight-sum violations.  `ground` lets callers reuse
    a precomputed ground_cost_matrix(mu, nu, params); otherwise the pairwise
    costs are computed once per call.
    """
    if _support_key(nu) < _support_key(mu):
        dist, plan = measure_wasserstein(
            nu, mu, params, ground.T if ground is not None else None
        )
        return dist, TransportPlan(
            tuple((j, i, m) for i, j, m in plan.flows), plan.cost
        )
    fr_mu = _integer_masses(mu)
    fr_nu = _integer_masses(nu)
    denom = math.lcm(
        *[f.denominator for f in fr_mu], *[f.denominator for f in fr_nu]
    )
    supply = [int(f * denom) for f in fr_mu]
    demand = [int(f * denom) for f in fr_nu]
    cost = ground if ground is not None else ground_cost_matrix(mu, nu, params)
    flow = _solve_transport(supply, demand, cost)
    flows = []
    total = 0.0
    for i in range(len(supply)):
        for j in range(len(demand)):
            if flow[i][j] > 0:
                mass = flow[i][j] / denom
                flows.append((i, j, mass))
                total += mass * cost[i, j]
    return math.sqrt(total), TransportPlan(tuple(flows), total)


def product_metric(
    x: DiagramSet, y: DiagramSet, params: MetricParams = MetricParams()
) -> float:
    """Coordinatewise combination sqrt(sum_i W2(X_i, Y_i)^2) of diagram
    distances between two equal-length diagram sets."""
    if x.n_diagrams != y.n_diagrams:
        raise ValueError(f"diagram sets differ in length: {x.n_diagrams} vs {y.n_diagrams}")
    total = 0.0
    for xi, yi in zip(x, y):
        dist, matching = wasserstein(xi, yi, params)
        total += matching.cost if params.p == 2.0 else dist**2
    return math.sqrt(total)


def holder_constants_from_mbar(n: int, mbar: float, alpha: float) -> float:
    """The continuity constant from a diameter bound mbar:
    C = sqrt(2*(1/N^2 + mbar^2/alpha^2) + 4*mbar^2/alpha + 1)."""
    return math.sqrt(
        2.0 * (1.0 / n**2 + mbar**2 / alpha**2) + 4.0 * mbar**2 / alpha + 1.0
    )


def holder_constants(n: int, bound: BoxBound, alpha: float) -> tuple[float, float]:
    """(C, C') where C' = max(C * sqrt(N*K + 1), mbar) bounds the measure
    distance by C' * sqrt(product-metric distance).  mbar is the coarse
    diameter bound of the space holding the mean diagrams (at most N*K points
    in the same box)."""
    if n < 1 or alpha <= 0:
        raise ValueError("need n >= 1 and alpha > 0")
    mbar = diameter_bound(BoxBound(bound.M, n * bound.K))
    c = holder_constants_from_mbar(n, mbar, alpha)
    c_prime = max(c * math.sqrt(n * bound.K + 1.0), mbar)
    return c, c_prime


def mc_mass_stderr(measure: DiagramMeasure) -> float:
    """Standard error of the total variation of a Monte-Carlo measure:
    half the summed binomial standard errors of its atom weights.  Returns 0
    for measures without draw metadata (no sampling noise model)."""
    if not measure.draws:
        return 0.0
    t = measure.draws
    return 0.5 * sum(
        math.sqrt(a.weight * (1.0 - a.weight) / t) for a in measure.atoms
    )


def mc_slack(
    mu: DiagramMeasure, nu: DiagramMeasure, ground_max: float, n_se: float = 3.0
) -> float:
    """Monte-Carlo allowance for an inequality on measure_wasserstein(mu, nu):
    misallocating total-variation mass eps moves the distance by at most
    sqrt(eps) * ground_max, so n_se standard errors of mass translate to
    sqrt(n_se * (se_mu + se_nu)) * ground_max."""
    se = mc_mass_stderr(mu) + mc_mass_stderr(nu)
    return math.sqrt(n_se * se) * ground_max
