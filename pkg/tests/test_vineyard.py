import math

import numpy as np
import pytest

from pdstat.diagrams import Diagram, DiagramSet
from pdstat.frechet import frechet_mean
from pdstat.matching import wasserstein
from pdstat.pfm import PerturbParams, pfm
from pdstat.vineyard import (
    Vineyard,
    continuity_report,
    enclosing_box,
    frame_seed,
    make_square_crossing,
    vineyard_pfm,
)

PARAMS = PerturbParams(0.3, draws=1500, seed=29)


def translating_vineyard(times):
    """Two far-from-diagonal single-point diagrams translating rigidly; a
    single grouping stays optimal, so the mean path is deterministic."""
    frames = []
    for t in times:
        frames.append(
            DiagramSet([Diagram([(1 + t, 9 + t)]), Diagram([(1.2 + t, 9.4 + t)])])
        )
    return Vineyard(times, frames)


def test_vineyard_validation():
    d = DiagramSet([Diagram([(0, 1)])])
    with pytest.raises(ValueError):
        Vineyard([0.0, 0.0], [d, d])
    with pytest.raises(ValueError):
        Vineyard([0.0], [d, d])
    with pytest.raises(ValueError):
        Vineyard([0.0, 1.0], [d, DiagramSet([Diagram(), Diagram()])])


def test_constant_vineyard_measures_agree():
    frame = DiagramSet([Diagram([(2, 6)]), Diagram([(2.3, 6.4)])])
    v = Vineyard([0.0, 0.5, 1.0], [frame] * 3)
    measures = vineyard_pfm(v, PARAMS)
    # far from any tie: every frame yields the same single-atom measure
    assert all(len(m) == 1 for m in measures)
    assert len({m.atoms[0].diagram for m in measures}) == 1
    report = continuity_report(measures, v, PARAMS)
    assert all(s.set_distance == 0.0 for s in report.steps)
    assert all(s.measure_distance == 0.0 for s in report.steps)
    assert report.exponent is None


def test_single_frame_vineyard_matches_pfm():
    frame = DiagramSet([Diagram([(2, 6)]), Diagram([(2.5, 6.5)])])
    v = Vineyard([0.0], [frame])
    only = vineyard_pfm(v, PARAMS)[0]
    direct = pfm(
        frame, PerturbParams(PARAMS.alpha, PARAMS.draws, frame_seed(PARAMS.seed, 0))
    )
    assert only == direct


def test_vineyard_determinism_and_threads():
    v = make_square_crossing(5)
    serial = vineyard_pfm(v, PARAMS)
    again = vineyard_pfm(v, PARAMS)
    threaded = vineyard_pfm(v, PARAMS, threads=4)
    assert serial == again == threaded


def test_square_crossing_contrast():
    v = make_square_crossing(21, delta=0.5)
    measures = vineyard_pfm(v, PARAMS)
    report = continuity_report(measures, v, PARAMS)
    assert all(s.within_bound for s in report.steps)

    means = [frechet_mean(f).mean for f in v.frames]
    jumps = [wasserstein(a, b)[0] for a, b in zip(means, means[1:])]
    assert max(jumps) > math.sqrt(2)  # half the square's diagonal
    # the probabilistic path moves smoothly by comparison
    assert report.max_measure_step() < max(jumps)


def test_smooth_fixture_refinement_halves_steps():
    coarse = translating_vineyard(np.linspace(0, 1, 11))
    fine = translating_vineyard(np.linspace(0, 1, 21))
    m_coarse = vineyard_pfm(coarse, PARAMS)
    m_fine = vineyard_pfm(fine, PARAMS)
    r_coarse = continuity_report(m_coarse, coarse, PARAMS)
    r_fine = continuity_report(m_fine, fine, PARAMS)
    # single-grouping regime: measures are deterministic single atoms, so
    # halving the time step halves the largest measure step exactly
    assert all(len(m) == 1 for m in m_coarse + m_fine)
    assert r_fine.max_measure_step() <= 0.5 * r_coarse.max_measure_step() + 1e-9


def test_exponent_fit_linear_regime():
    # varying step sizes in the single-grouping regime: measure step tracks
    # the set step linearly, so the fitted exponent is about 1
    times = [0.0, 0.05, 0.15, 0.35, 0.75, 1.0]
    v = translating_vineyard(np.array(times))
    measures = vineyard_pfm(v, PARAMS)
    report = continuity_report(measures, v, PARAMS)
    assert report.exponent is not None
    assert abs(report.exponent - 1.0) < 0.05


def test_continuity_report_requires_two_frames():
    frame = DiagramSet([Diagram([(2, 6)])])
    v = Vineyard([0.0], [frame])
    measures = vineyard_pfm(v, PARAMS)
    with pytest.raises(ValueError):
        continuity_report(measures, v, PARAMS)


def test_enclosing_box():
    v = make_square_crossing(5, delta=0.5)
    box = enclosing_box(v)
    assert box.K == 2
    assert abs(box.M - 8.5) < 1e-12
