"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report.  Tolerances are fixed here, not calibrated at runtime.
"""

import math
import time

import numpy as np

from pdstat.diagrams import (
    BoxBound,
    Diagram,
    DiagramSet,
    PlanePoint,
    diagonal_distance,
)
from pdstat.frechet import frechet_mean
from pdstat.grouping import (
    Selection,
    enumerate_groupings,
    frechet_function,
    grouping_cost,
    grouping_mean,
    selection_mean,
    trivial_selection,
    validate_grouping,
)
from pdstat.matching import wasserstein
from pdstat.measure import (
    ground_cost_matrix,
    holder_constants,
    mc_slack,
    measure_wasserstein,
)
from pdstat.pfm import DiagramMeasure, MeasureAtom, PerturbParams, pfm, _vectorized_draws
from pdstat.plotting import stack_heights
from pdstat.rips import build_rips, persistence, sample_circle, sample_double_annulus
from pdstat.vineyard import (
    continuity_report,
    make_square_crossing,
    vineyard_pfm,
)
from pdstat import io as pio
from pdstat.cli import run as cli_run

from oracles import brute_wasserstein

SQUARE = DiagramSet([Diagram([(2, 6), (4, 8)]), Diagram([(2, 8), (4, 6)])])


def report(number: int, ok: bool, description: str, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {number:02d} {status}: {description}{suffix}")
    assert ok, f"criterion {number} failed: {description}{suffix}"


def random_diagram(rng, max_points, hi=5.0):
    k = int(rng.integers(0, max_points + 1))
    pts = []
    for _ in range(k):
        b = rng.uniform(0, hi)
        pts.append((b, rng.uniform(b, hi)))
    return Diagram(pts)


def test_criterion_01_wasserstein_oracle():
    rng = np.random.default_rng(101)
    start = time.time()
    worst = 0.0
    for _ in range(500):
        x = random_diagram(rng, 5)
        y = random_diagram(rng, 5)
        got, _ = wasserstein(x, y)
        want = brute_wasserstein(
            [(p.birth, p.death) for p in x], [(p.birth, p.death) for p in y]
        )
        worst = max(worst, abs(got - want))
    elapsed = time.time() - start
    report(
        1,
        worst <= 1e-9 and elapsed < 10.0,
        "solver matches brute force on 500 random pairs",
        f"worst diff {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_02_metric_axioms():
    rng = np.random.default_rng(102)
    sym_ok = True
    tri_worst = 0.0
    for _ in range(100):
        a, b, c = (random_diagram(rng, 6) for _ in range(3))
        dab, _ = wasserstein(a, b)
        dba, _ = wasserstein(b, a)
        sym_ok &= dab == dba
        dac, _ = wasserstein(a, c)
        dcb, _ = wasserstein(c, b)
        tri_worst = max(tri_worst, dab - dac - dcb)

    def rand_measure():
        n = int(rng.integers(1, 5))
        cuts = sorted(rng.choice(np.arange(1, 16), size=n - 1, replace=False))
        weights = np.diff([0, *cuts, 16]) / 16
        return DiagramMeasure(
            tuple(MeasureAtom(float(w), random_diagram(rng, 3)) for w in weights)
        )

    for _ in range(100):
        mu, nu, rho = rand_measure(), rand_measure(), rand_measure()
        d_mn, _ = measure_wasserstein(mu, nu)
        d_nm, _ = measure_wasserstein(nu, mu)
        sym_ok &= d_mn == d_nm
        d_mr, _ = measure_wasserstein(mu, rho)
        d_rn, _ = measure_wasserstein(rho, nu)
        tri_worst = max(tri_worst, d_mn - d_mr - d_rn)
    report(
        2,
        sym_ok and tri_worst <= 1e-9,
        "metric axioms for diagram and measure distances on 200 triples",
        f"worst triangle violation {tri_worst:.2e}",
    )


def test_criterion_03_trivial_selection_ratio():
    rng = np.random.default_rng(103)
    worst = 0.0
    for n in range(2, 7):
        for _ in range(100):
            b = rng.uniform(0, 5)
            d = b + rng.uniform(1e-6, 5)
            ds = DiagramSet([Diagram([(b, d)])] + [Diagram()] * (n - 1))
            m = selection_mean(trivial_selection(0, 0, n), ds)
            want = diagonal_distance(PlanePoint(b, d)) / n
            worst = max(worst, abs(diagonal_distance(m) - want))
    report(
        3,
        worst <= 1e-12,
        "trivial-selection mean sits at 1/N of the diagonal distance",
        f"worst error {worst:.2e}",
    )


def test_criterion_04_close_selections():
    rng = np.random.default_rng(104)
    worst = -math.inf
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        k = int(rng.integers(1, n + 1))
        pts1, pts2 = [], []
        for _ in range(k):
            b = rng.uniform(0, 5)
            pts1.append((b, b + rng.uniform(0.01, 3)))
            b = rng.uniform(0, 5)
            pts2.append((b, b + rng.uniform(0.01, 3)))
        ds1 = DiagramSet([Diagram([p]) for p in pts1] + [Diagram()] * (n - k))
        ds2 = DiagramSet([Diagram([p]) for p in pts2] + [Diagram()] * (n - k))
        sel = Selection([0] * k + [None] * (n - k))
        m1 = selection_mean(sel, ds1)
        m2 = selection_mean(sel, ds2)
        lhs = (m1.birth - m2.birth) ** 2 + (m1.death - m2.death) ** 2
        rhs = sum(
            (p1[0] - p2[0]) ** 2 + (p1[1] - p2[1]) ** 2
            for p1, p2 in zip(pts1, pts2)
        )
        worst = max(worst, lhs - rhs)
    report(
        4,
        worst <= 1e-12,
        "selection means move no farther than their points",
        f"worst slack violation {worst:.2e}",
    )


def test_criterion_05_mean_algorithm():
    rng = np.random.default_rng(105)
    monotone = True
    value_consistent = True
    oracle_ok = True
    for _ in range(200):
        n = int(rng.integers(1, 5))
        ds = DiagramSet([random_diagram(rng, 4) for _ in range(n)])
        result = frechet_mean(ds)
        for a, b in zip(result.history, result.history[1:]):
            monotone &= b <= a + 1e-9
        value_consistent &= (
            abs(result.value - frechet_function(result.mean, ds)) <= 1e-9
        )
        if 0 < ds.total_points() <= 8:
            validate_grouping(result.grouping, ds)
            values = [grouping_cost(g, ds) for g in enumerate_groupings(ds)]
            oracle_ok &= result.mean == grouping_mean(result.grouping, ds)
            oracle_ok &= result.value >= min(values) - 1e-9
    report(
        5,
        monotone and value_consistent and oracle_ok,
        "mean iteration is monotone and lands on a valid grouping",
    )


def test_criterion_06_square_weights():
    start = time.time()
    means = {
        Diagram([(2, 7), (4, 7)]): [],
        Diagram([(3, 6), (3, 8)]): [],
    }
    for seed in range(5):
        mu = pfm(SQUARE, PerturbParams(0.3, draws=10_000, seed=seed))
        for target, acc in means.items():
            acc.append(
                sum(a.weight for a in mu.atoms if a.diagram == target)
            )
    averages = {d: sum(ws) / len(ws) for d, ws in means.items()}
    ok = all(0.45 <= w <= 0.55 for w in averages.values())
    elapsed = time.time() - start
    report(
        6,
        ok and elapsed < 30.0,
        "square-fixture weights average near one half over 5 seeds",
        f"weights {[round(w, 4) for w in averages.values()]}, {elapsed:.1f}s",
    )


def test_criterion_07_survival_rates():
    alpha = 0.4
    draws = 100_000
    failures = []
    for i, ratio in enumerate([0.25, 0.5, 0.75, 1.0]):
        gap = ratio * alpha * math.sqrt(2.0)
        x = DiagramSet([Diagram([(1.0, 1.0 + gap)])])
        _, _, _, survived, _ = _vectorized_draws(
            x, PerturbParams(alpha, draws, seed=700 + i)
        )
        emp = survived.mean()
        want = ratio**2
        se = math.sqrt(max(want * (1 - want), 1e-12) / draws)
        if abs(emp - want) > 3 * se + 1e-12:
            failures.append((ratio, emp, want))
    report(
        7,
        not failures,
        "perturbation survival matches r^2/alpha^2 within 3 standard errors",
        f"failures {failures}" if failures else "4 ratios checked",
    )


def test_criterion_08_holder_bound():
    rng = np.random.default_rng(108)
    alpha, draws, m_box, k_max = 0.3, 5000, 5.0, 3
    violations = 0
    max_ratio = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        x = DiagramSet([random_diagram(rng, k_max, m_box) for _ in range(n)])
        y = DiagramSet([random_diagram(rng, k_max, m_box) for _ in range(n)])
        seed = int(rng.integers(2**31))
        mu_x = pfm(x, PerturbParams(alpha, draws, seed), exact_threshold=12)
        mu_y = pfm(y, PerturbParams(alpha, draws, seed + 1), exact_threshold=12)
        dist, _ = measure_wasserstein(mu_x, mu_y)
        d2 = 0.0
        for xi, yi in zip(x, y):
            di, _ = wasserstein(xi, yi)
            d2 += di**2
        d2 = math.sqrt(d2)
        _, c_prime = holder_constants(n, BoxBound(m_box, k_max), alpha)
        ground = ground_cost_matrix(mu_x, mu_y)
        gmax = float(np.sqrt(ground.max())) if ground.size else 0.0
        slack = mc_slack(mu_x, mu_y, gmax)
        bound = c_prime * math.sqrt(d2) + slack
        if dist > bound:
            violations += 1
        if bound > 0:
            max_ratio = max(max_ratio, dist / bound)
    report(
        8,
        violations == 0,
        "Holder bound holds on 50 random pairs",
        f"max distance/bound ratio {max_ratio:.4f}",
    )


def test_criterion_09_vineyard_contrast():
    params = PerturbParams(0.3, draws=4000, seed=109)
    coarse = make_square_crossing(21, delta=0.5)
    fine = make_square_crossing(41, delta=0.5)

    means = [frechet_mean(f).mean for f in coarse.frames]
    jump = max(
        wasserstein(a, b)[0] for a, b in zip(means, means[1:])
    )
    half_diagonal = math.sqrt(2.0)  # square of side 2

    mu_coarse = vineyard_pfm(coarse, params)
    rep_coarse = continuity_report(mu_coarse, coarse, params)
    mu_fine = vineyard_pfm(fine, params)
    rep_fine = continuity_report(mu_fine, fine, params)

    within = all(s.within_bound for s in rep_coarse.steps) and all(
        s.within_bound for s in rep_fine.steps
    )
    reduced = rep_fine.max_measure_step() < rep_coarse.max_measure_step()
    report(
        9,
        jump > half_diagonal and within and reduced,
        "deterministic mean jumps at the crossing, measure path stays bounded",
        f"jump {jump:.3f} > {half_diagonal:.3f}; max step "
        f"{rep_coarse.max_measure_step():.3f} -> {rep_fine.max_measure_step():.3f}",
    )


def test_criterion_10_rips_pipeline():
    start = time.time()
    cloud = sample_circle(50, seed=3)
    fc = build_rips(cloud, 2.2)
    _, h1 = persistence(fc)
    pers = sorted((p.death - p.birth for p in h1), reverse=True)
    circle_ok = len(pers) >= 1 and (
        len(pers) == 1 or pers[0] > 2.5 * pers[1]
    )

    h1s = []
    for i in range(30):
        sub = sample_double_annulus(seed=7000 + i)
        sub_fc = build_rips(sub, 2.4)
        _, sub_h1 = persistence(sub_fc)
        h1s.append(sub_h1)
    mu = pfm(DiagramSet(h1s), PerturbParams(0.3, draws=100, seed=7), restarts=4)
    stacks = sorted(stack_heights(mu), key=lambda s: -(s[1] - s[0]))
    top_two = stacks[:2]
    annulus_ok = len(stacks) >= 2 and all(w >= 0.99 for _, _, w in top_two)
    elapsed = time.time() - start
    ratio = f"circle ratio {pers[0] / pers[1]:.1f}" if len(pers) > 1 else "one circle class"
    report(
        10,
        circle_ok and annulus_ok and elapsed < 300.0,
        "circle signal isolated; double-annulus stacks at full height",
        f"{ratio}; stack weights {[round(w, 3) for _, _, w in top_two]}, {elapsed:.0f}s",
    )


def test_criterion_11_determinism(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    pio.write_diagram(a, SQUARE[0])
    pio.write_diagram(b, SQUARE[1])

    outputs = []
    for attempt in range(2):
        cloud = tmp_path / f"cloud{attempt}.csv"
        dg_dir = tmp_path / f"dg{attempt}"
        measure = tmp_path / f"measure{attempt}.json"
        svg = tmp_path / f"stack{attempt}.svg"
        mean_out = tmp_path / f"mean{attempt}.json"
        rips_json = tmp_path / f"rips{attempt}.json"
        assert cli_run(["sample", "circle", "--n", "40", "--seed", "5", "--out", str(cloud)]) == 0
        assert cli_run(
            ["rips", str(cloud), "--max-radius", "2.0", "--out-dir", str(dg_dir),
             "--out", str(rips_json)]
        ) == 0
        assert cli_run(
            ["pfm", str(a), str(b), "--alpha", "0.3", "--draws", "2000",
             "--seed", "11", "--out", str(measure)]
        ) == 0
        assert cli_run(["plot", str(measure), "--out", str(svg)]) == 0
        assert cli_run(["mean", str(a), str(b), "--out", str(mean_out)]) == 0
        outputs.append(
            cloud.read_bytes()
            + (dg_dir / f"cloud{attempt}_h1.csv").read_bytes()
            + rips_json.read_bytes()
            + measure.read_bytes()
            + svg.read_bytes()
            + mean_out.read_bytes()
        )
    report(
        11,
        outputs[0] == outputs[1],
        "full pipeline reruns byte-identically under fixed seeds",
    )
