import math

import numpy as np
import pytest

from rodknots.curves import closure_defect, measure_geometry
from rodknots.elliptic import jacobi, make_modulus
from rodknots.rod import (
    RodError,
    UnrealizableTorusKnot,
    build_rod,
    closure_ratio,
    compute_Lambda,
    dtheta_fraction,
    find_torus_rod,
    lambda_from_definition,
    lambda_values,
    p_max,
    rod_curvature,
    rod_frame,
    rod_params,
    rod_position,
    sigma_from_closure,
)

P_MAX = 0.9089085


def test_p_max():
    assert p_max() == pytest.approx(P_MAX, abs=1e-6)
    assert abs(closure_ratio(p_max())) < 1e-14


def test_sigma_from_closure_limits():
    m = make_modulus(0.63093)
    s = sigma_from_closure(m)
    assert 0 < s < 1 / m.p
    assert s ** 2 == pytest.approx(m.p ** -2 * (2 * m.E / m.K - 1), rel=1e-12)
    assert sigma_from_closure(p_max() - 1e-9) < 1e-3
    small = make_modulus(1e-3)
    assert sigma_from_closure(small) * small.p == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(RodError):
        sigma_from_closure(0.95)


def test_params_invariants(rod13_params):
    P = rod13_params
    p, s = P.p, complex(P.sigma)
    mu = 0.25 * np.sqrt((p ** -2 - s ** 2) ** 2 + 4 * s ** 2)
    assert abs(P.mu - mu) < 1e-12
    assert abs(P.m_param - 16 * mu ** 2 / (p ** -2 + s ** 2) ** 2) < 1e-12
    assert abs(P.lambda1 - (s ** 2 - p ** -2 + 2) / 4) < 1e-12
    assert P.is_physical and P.tau == s / 2
    assert P.length == pytest.approx(3 * 4 * p * P.K)


def test_torus_rod_moduli():
    # the (2,5) value is the modulus with Delta theta / 2 pi = 2/5
    assert find_torus_rod(1, 3).p == pytest.approx(0.63093, abs=1e-5)
    assert find_torus_rod(2, 5).p == pytest.approx(0.739828, abs=1e-6)
    assert find_torus_rod(3, 7).p == pytest.approx(0.7845, abs=5e-5)


@pytest.mark.parametrize("mn", [(1, 3), (2, 5), (1, 4), (3, 7), (2, 9)])
def test_torus_rod_closes_at_fraction(mn):
    P = find_torus_rod(*mn)
    assert abs(P.dtheta) / (2 * math.pi) == pytest.approx(mn[0] / mn[1], abs=1e-12)
    x0, x1 = np.array(0.0), np.array(2 * P.K * mn[1])
    assert np.abs(rod_position(x1, P) - rod_position(x0, P)).max() < 1e-9


@pytest.mark.parametrize("mn", [(1, 2), (3, 5), (2, 4), (0, 3), (1, 0)])
def test_unrealizable(mn):
    with pytest.raises(UnrealizableTorusKnot):
        find_torus_rod(*mn)


def test_mirror_rod():
    P, Q = find_torus_rod(1, 3), find_torus_rod(-1, 3)
    assert Q.p == P.p and Q.sigma == -P.sigma


def test_lambda_real_and_fraction(rod13_params):
    P = rod13_params
    L = compute_Lambda(P)
    assert abs(L.imag) < 1e-14
    # Delta theta = -2 K Lambda: a positive-torsion rod turns clockwise about its axis
    x = np.linspace(0, 2 * P.K, 2001)
    pos = rod_position(x, P)
    theta = np.unwrap(np.arctan2(pos[:, 1], pos[:, 0]))
    assert theta[-1] - theta[0] == pytest.approx(-2 * P.K * L.real, abs=1e-12)
    assert abs(-2 * P.K * L.real) / (2 * math.pi) == pytest.approx(1 / 3, abs=1e-10)


def test_lambda_formulas_agree(rng):
    for p in (0.4, 0.63093, 0.8):
        for s in rng.uniform(0.05, 0.99 / p, 50):
            P = rod_params(p, s)
            assert abs(lambda_from_definition(P) - compute_Lambda(P)) < 1e-8


def test_lambda_vectorized_agrees(rng):
    m = make_modulus(0.63093)
    sig = rng.uniform(0.1, 2.5, 40) + 1j * rng.uniform(0.1, 2.0, 40)
    vec = lambda_values(m, sig)
    for s, v in zip(sig, vec):
        P = rod_params(m, s)
        assert abs(P.Lambda - v) < 1e-9


def test_lambda_finite_at_branch_point():
    m = make_modulus(0.63093)
    s = m.p_prime / m.p + 1j
    P = rod_params(m, s)
    assert abs(P.mu) < 1e-12
    assert np.isfinite(P.Lambda)
    near = rod_params(m, s + 1e-7)
    assert abs(near.Lambda - P.Lambda) < 1e-3
    # sin^2(K Lambda) vanishes there
    assert abs(np.sin(m.K * P.Lambda)) < 1e-6


def test_dtheta_monotone():
    ps = np.linspace(0.05, p_max() - 1e-4, 40)
    d = np.array([dtheta_fraction(p) for p in ps])
    assert np.all(np.diff(d) > 0)
    assert d[0] < 0.03 and 0.49 < d[-1] < 0.5


def test_radius_matches_closed_form(rod13_params):
    P = rod13_params
    x = np.linspace(0, 6 * P.K, 301)
    pos = rod_position(x, P)
    sn = jacobi(x, P.modulus).sn
    r = np.sqrt(1 / P.m_param.real - sn ** 2) / P.mu.real
    assert np.abs(np.hypot(pos[:, 0], pos[:, 1]) - r).max() < 1e-9
    assert abs(rod_position(np.array(0.0), P)[2]) < 1e-15
    assert np.hypot(*rod_position(np.array(0.0), P)[:2]) == pytest.approx(
        1 / (P.mu.real * math.sqrt(P.m_param.real)), rel=1e-12)
    r_shift = np.hypot(*rod_position(x + 2 * P.K, P)[:, :2].T)
    assert np.abs(r_shift - np.hypot(pos[:, 0], pos[:, 1])).max() < 1e-12


def test_frame_orthonormal(rod25_params, rng):
    x = rng.uniform(0, 10 * rod25_params.K, 1000)
    T, N, B = rod_frame(x, rod25_params)
    F = np.stack([T, N, B], axis=1)
    assert np.abs(F @ np.transpose(F, (0, 2, 1)) - np.eye(3)).max() < 1e-9
    assert np.abs(np.cross(T, N) - B).max() < 1e-9


def test_frame_against_differences(rod13_params):
    P = rod13_params
    p = P.p
    x = np.linspace(0.1, 5.9 * P.K, 200)
    h = 1e-4
    T, N, B = rod_frame(x, P)
    dpos = (rod_position(x + h, P) - rod_position(x - h, P)) / (2 * h * 2 * p)
    assert np.abs(dpos - T).max() < 1e-7
    Tp, _, _ = rod_frame(x + h, P)
    Tm, _, _ = rod_frame(x - h, P)
    dT = (Tp - Tm) / (2 * h * 2 * p)
    assert np.abs(dT - rod_curvature(x, P)[:, None] * N).max() < 1e-5
    # third row of the frame matrix
    assert np.abs(B[:, 2] + P.sigma.real * rod_curvature(x, P) / (2 * P.mu.real)).max() < 1e-12


@pytest.mark.parametrize("mn, parity", [((1, 3), "odd"), ((2, 5), "odd"), ((1, 4), "even")])
def test_build_rod(mn, parity):
    c = build_rod(*mn, samples_per_period=int(4000 / mn[1]))
    assert c.closed and c.parity == parity
    d = closure_defect(c)
    assert d.position_gap < 1e-5 * c.length and d.frame_gap < 1e-8
    g = measure_geometry(c)
    assert np.abs(g.kappa - c.kappa).max() < 1e-4
    assert np.abs(g.tau[g.reliable] - c.tau).max() < 1e-4
    assert c.tau == pytest.approx(c.meta["sigma"] / 2)


def test_figure_eight_limit():
    flat = []
    for p in (0.85, 0.9, 0.908):
        m = make_modulus(p)
        P = rod_params(m, sigma_from_closure(m))
        pts = rod_position(np.linspace(0, 4 * m.K, 800, endpoint=False), P)
        sv = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
        flat.append(sv[-1] / sv[0])
    assert flat[0] > flat[1] > flat[2]
    assert flat[2] < 0.1


def test_complex_sigma_has_no_positions():
    P = rod_params(0.6, 1.0 + 0.5j)
    with pytest.raises(RodError):
        rod_position(np.array([0.1]), P)
