import math

import numpy as np
import pytest

from rodknots.curves import integrate_frenet
from rodknots.invariants import (
    InvariantsError,
    InvariantsReport,
    SelfIntersectionError,
    crossing_census,
    crossing_count,
    invariants_report,
    killing_residual_order1,
    linking,
    min_self_distance,
    self_linking,
    sphere_directions,
    total_torsion,
    verify_linking_theorem,
    writhe,
)

# quarter turn about y: (x, y, z) -> (z, y, -x)
TURN_Y = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])


def circle(steps=800):
    # unit circle in the xy-plane centred at (0, 1, 0)
    return integrate_frenet(lambda s: np.ones_like(s), 0.0, 2 * math.pi, steps, closed=True)


def test_circle_invariants():
    c = circle()
    assert abs(writhe(c)) < 1e-12
    assert total_torsion(c) == 0.0
    assert min_self_distance(c).distance == pytest.approx(2.0, abs=1e-4)
    assert crossing_count(c).count == 0


def test_hopf_link():
    a = circle()
    # a second circle in the yz-plane threading the first through its centre
    b = a.transformed(TURN_Y, shift=(0.0, 1.0, 0.0))
    lk = linking(a, b)
    assert abs(abs(lk) - 1) < 1e-10
    assert linking(b, a) == pytest.approx(lk, abs=1e-10)
    assert linking(a, b, method="midpoint") == pytest.approx(lk, abs=1e-3)
    far = a.transformed(TURN_Y, shift=(0.0, 10.0, 0.0))
    assert abs(linking(a, far)) < 1e-10


def test_linking_errors():
    a = circle()
    with pytest.raises(InvariantsError):
        linking(a, a)
    with pytest.raises(ValueError):
        linking(a, a.transformed(TURN_Y, shift=(0.0, 1.0, 0.0)), method="guess")
    open_arc = integrate_frenet(lambda s: np.ones_like(s), 0.0, 3.0, 100)
    with pytest.raises(InvariantsError):
        linking(a, open_arc)
    with pytest.raises(InvariantsError):
        writhe(open_arc)


def test_self_intersection_detected():
    # planar figure-eight: curvature changes sign and the curve crosses itself
    L = 2 * math.pi
    c = integrate_frenet(lambda s: 2.5 * np.sin(s), 0.0, 4 * L, 4000)
    assert min_self_distance(c).distance < c.ds
    pts = c.position
    closed_like = c.with_updates(closed=True, position=np.vstack([pts[:-1], pts[:1]]))
    with pytest.raises(SelfIntersectionError):
        writhe(closed_like)
    # the check can be switched off
    assert np.isfinite(writhe(closed_like, check=False))


def test_self_linking_odd_rod(rod13):
    sl = self_linking(rod13)
    assert sl == pytest.approx(1.5, abs=1e-3)


def test_crossings_of_rod(rod25):
    census = crossing_census(rod25)
    assert len(census) == len(sphere_directions())
    best = min(census, key=lambda c: c.count)
    assert best.count == 5
    assert best.all_same_sign
    assert abs(best.diagram_writhe) == 5


def test_linking_theorem_small_parameter(rod13_coarse, rod13_params):
    chk = verify_linking_theorem(rod13_coarse, rod13_params, 0.01)
    assert not chk.inconclusive
    assert chk.lk_rounded == 0
    assert chk.sl_rounded == 1.5
    assert chk.residual < 1e-3


def test_linking_theorem_flags_large_parameter(rod13_coarse, rod13_params):
    chk = verify_linking_theorem(rod13_coarse, rod13_params, 0.3, smallness=0.05)
    assert chk.inconclusive


def test_killing_residual(rod13, rod25):
    for rod in (rod13, rod25):
        fit = killing_residual_order1(rod)
        assert fit.residual < 1e-4 * fit.scale
        assert math.hypot(fit.a0, fit.a1) == pytest.approx(1.0)
    wavy = integrate_frenet(lambda s: 1.0 + 0.3 * np.cos(s) + 0.2 * np.cos(2.3 * s), 0.4, 12.0, 4000)
    assert killing_residual_order1(wavy).residual > 1e-2
    fixed = killing_residual_order1(rod13, a0=1.0, a1=0.0)
    assert fixed.residual == pytest.approx(np.abs(rod13.kappa).max(), rel=1e-6)


def test_report_round_trip(rod13_coarse):
    rep = invariants_report(rod13_coarse, crossings=True)
    assert rep.parity == "odd"
    assert rep.self_linking == pytest.approx(1.5, abs=1e-3)
    # a (1,3) torus knot is unknotted: some direction shows no crossing at all
    assert rep.crossing_count["min"] == 0
    assert rep.crossing_count["max"] >= 2
    back = InvariantsReport.from_json(rep.to_json())
    assert back == rep
