"""Closed elastic rods of constant torsion (the cn-family).

Scaling: maximum curvature 1, curvature ``kappa(s) = cn(x, p)`` with
``x = s / (2p)``, and torsion ``tau = sigma / 2``.  Everything about the rod
is a function of the modulus ``p`` and ``sigma``; the closure condition fixes
``sigma`` in terms of ``p``.

Cylindrical coordinates ``(r, theta, z)`` are adapted to the rod's symmetry
axis.  ``Delta theta = -2 K Lambda`` is the rotation about that axis over one
``2K`` period of ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .curves import SampledCurve, frames_orthonormalize
from .elliptic import (
    EllipticDomainError,
    EllipticModulus,
    EllipticPoleError,
    incomplete_E,
    incomplete_F,
    inverse_sn,
    jacobi,
    jacobi_zeta,
    make_modulus,
    theta_suite,
)

__all__ = [
    "RodError",
    "UnrealizableTorusKnot",
    "RodParams",
    "rod_params",
    "closure_ratio",
    "p_max",
    "sigma_from_closure",
    "compute_Lambda",
    "lambda_values",
    "lambda_from_definition",
    "dtheta_fraction",
    "find_torus_rod",
    "rod_position",
    "rod_frame",
    "rod_curvature",
    "build_rod",
]

MU_SMALL = 1e-6


class RodError(ValueError):
    """Rod parameters outside the range where the construction applies."""


class UnrealizableTorusKnot(RodError):
    """``(m, n)`` outside ``0 < |m/n| < 1/2`` or not coprime."""


@dataclass(frozen=True)
class RodParams:
    """Constants of one rod (or of its analytic continuation to complex sigma).

    ``mu``, ``m_param``, ``lambda1`` and ``Lambda`` are derived from
    ``(p, sigma)`` at construction; use :func:`rod_params` rather than
    filling them in by hand.
    """

    modulus: EllipticModulus
    sigma: complex
    mu: complex
    m_param: complex
    lambda1: complex
    Lambda: complex
    n_periods: Optional[int] = None
    torus_type: Optional[tuple[int, int]] = None
    kappa0: float = 1.0
    xi: Optional[float] = None
    F_hat: Optional[float] = None

    @property
    def p(self) -> float:
        return self.modulus.p

    @property
    def K(self) -> float:
        return self.modulus.K

    @property
    def tau(self) -> complex:
        return self.sigma / 2

    @property
    def is_physical(self) -> bool:
        return abs(complex(self.sigma).imag) == 0.0

    @property
    def period_length(self) -> float:
        """Arclength of one ``2K`` period of ``x``."""
        return 4.0 * self.p * self.K

    @property
    def length(self) -> float:
        if self.n_periods is None:
            raise RodError("rod has no period count; it is not a closed rod")
        return self.n_periods * self.period_length

    @property
    def dtheta(self) -> float:
        """Rotation about the symmetry axis over one ``2K`` period."""
        return float((-2.0 * self.K * self.Lambda).real)


def _mu(p: float, sigma: complex) -> complex:
    P = p ** -2
    return 0.25 * np.sqrt(complex((P - sigma * sigma) ** 2 + 4.0 * sigma * sigma))


def rod_params(p, sigma, n_periods: Optional[int] = None,
               torus_type: Optional[tuple[int, int]] = None) -> RodParams:
    """Derive all rod constants from modulus ``p`` and ``sigma = 2 tau``."""
    modulus = p if isinstance(p, EllipticModulus) else make_modulus(p)
    p = modulus.p
    P = p ** -2
    sig = complex(sigma)
    mu = _mu(p, sig)
    m_param = 16.0 * mu * mu / (P + sig * sig) ** 2
    lam1 = (sig * sig - P + 2.0) / 4.0
    xi = F_hat = None
    if sig.imag == 0.0:
        s = sig.real
        xi = math.pi / 2 - 2.0 * math.atan(2.0 * s / (P - s * s + 4.0 * mu.real))
        F_hat = float(incomplete_F(xi, modulus.p_prime))
    params = RodParams(modulus=modulus, sigma=sig, mu=mu, m_param=m_param, lambda1=lam1,
                       Lambda=0j, n_periods=n_periods, torus_type=torus_type, xi=xi, F_hat=F_hat)
    return replace(params, Lambda=compute_Lambda(params))


def closure_ratio(p: float) -> float:
    """``2E/K - 1``; positive exactly when the rod can close."""
    K, E = make_modulus(p).K, make_modulus(p).E
    return 2.0 * E / K - 1.0


def p_max() -> float:
    """Largest modulus admitting a closed rod (zero of ``2E/K - 1``)."""
    return brentq(closure_ratio, 0.5, 0.99, xtol=1e-15, rtol=1e-15)


def sigma_from_closure(m) -> float:
    """Positive ``sigma`` solving ``sigma^2 = p^-2 (2E/K - 1)``."""
    m = m if isinstance(m, EllipticModulus) else make_modulus(m)
    ratio = 2.0 * m.E / m.K - 1.0
    if ratio <= 0.0:
        raise RodError(f"p={m.p} is at or beyond p_max; the rod cannot close in z")
    return math.sqrt(ratio) / m.p


def lambda_from_definition(params: RodParams) -> complex:
    """``Lambda`` from the incomplete-integral formula (real sigma only).

    Divides by ``mu``; used as a cross-check on :func:`compute_Lambda`.
    """
    if params.xi is None:
        raise RodError("the incomplete-integral formula is only wired up for real sigma")
    if abs(params.mu) < MU_SMALL:
        raise RodError("mu vanishes; use compute_Lambda")
    m = params.modulus
    xi = params.xi
    s = params.sigma.real
    val = (incomplete_E(xi, m.p_prime) + (m.E / m.K - 1.0) * incomplete_F(xi, m.p_prime)
           + params.lambda1.real * m.p * s / params.mu.real)
    return complex(val)


def compute_Lambda(params: RodParams) -> complex:
    """``Lambda = -i Z(sn^-1 alpha) + p^2 sigma alpha``, ``alpha = 4 mu / (p (p^-2 + sigma^2))``.

    Free of ``mu`` in denominators, so it stays finite at the branch points
    ``sigma = +-p'/p +- i``.  Of the two inverse-sn candidates ``u`` and
    ``2K - u`` we keep the one with ``cn u / dn u = i (p^-2 - sigma^2) / (2 sigma)``;
    that picks the continuation agreeing with the incomplete-integral formula
    on the real axis.  The result is determined up to ``Lambda -> -Lambda``
    (sign of ``mu``) and shifts by ``pi/K``, neither of which moves a zero of
    ``sin(k n K Lambda)``.
    """
    if params.sigma == 0:
        raise RodError("sigma = 0 is degenerate for Lambda")
    lam = lambda_values(params.modulus, params.sigma)
    if not np.isfinite(lam):
        raise EllipticPoleError(f"Lambda has a pole at sigma={params.sigma}")
    return complex(lam)


def lambda_values(modulus: EllipticModulus, sigma) -> np.ndarray:
    """Vectorized :func:`compute_Lambda` over an array of ``sigma``.

    Entries at singular points (``sigma = 0``, ``sigma = +-i/p``, poles of
    ``Z``) come back as NaN instead of raising.
    """
    m = modulus
    p = m.p
    P = p ** -2
    sig = np.atleast_1d(np.asarray(sigma, dtype=complex))
    out = np.full(sig.shape, np.nan + 0j)
    denom = P + sig * sig
    good = (np.abs(sig) > 0) & (np.abs(denom) > 1e-12)
    s = sig[good]
    mu = 0.25 * np.sqrt((P - s * s) ** 2 + 4.0 * s * s)
    alpha = 4.0 * mu / (p * denom[good])
    with np.errstate(all="ignore"):
        u0 = inverse_sn(alpha, m)
        target = 1j * (P - s * s) / (2.0 * s)
        cands = np.stack([u0, 2.0 * m.K - u0])
        errs = np.full(cands.shape, np.inf)
        for j in range(2):
            try:
                trip = jacobi(cands[j], m)
                errs[j] = np.abs(trip.cn - target * trip.dn)
            except EllipticPoleError:
                errs[j] = [_pointwise_branch_err(u, t, m) for u, t in zip(cands[j], target)]
        u = np.where(errs[1] < errs[0], cands[1], cands[0])
        try:
            Z = jacobi_zeta(u, m)
        except EllipticPoleError:
            Z = np.array([_safe_zeta(ui, m) for ui in u])
        lam = -1j * Z + p * p * s * alpha
    lam = np.where(s.imag == 0.0, lam.real + 0j, lam)
    out[good] = lam
    if np.ndim(sigma) == 0:
        return out[0]
    return out


def _pointwise_branch_err(u, target, m):
    try:
        trip = jacobi(np.asarray(u, dtype=complex), m)
    except EllipticPoleError:
        return np.inf
    return abs(complex(trip.cn) - target * complex(trip.dn))


def _safe_zeta(u, m):
    try:
        return complex(jacobi_zeta(np.asarray(u, dtype=complex), m))
    except EllipticPoleError:
        return complex(np.nan, np.nan)


def dtheta_fraction(p: float) -> float:
    """``|Delta theta| / 2 pi`` for the closed rod of modulus ``p``."""
    m = make_modulus(p)
    sig = sigma_from_closure(m)
    lam = compute_Lambda(rod_params(m, sig))
    return abs(2.0 * m.K * lam.real) / (2.0 * math.pi)


def find_torus_rod(m: int, n: int, tol: float = 1e-12) -> RodParams:
    """Modulus giving a closed rod with the knot type of the ``(m, n)`` torus knot.

    Brackets ``|Delta theta|/2 pi = |m|/n`` on ``(0.01, p_max - 1e-6)`` and
    solves with Brent's method.  Negative ``m`` gives the mirror rod
    (``sigma < 0``).
    """
    if n <= 0 or m == 0 or math.gcd(abs(m), n) != 1:
        raise UnrealizableTorusKnot(f"({m}, {n}): need n > 0, m != 0 and gcd(m, n) = 1")
    target = abs(m) / n
    if not target < 0.5:
        raise UnrealizableTorusKnot(f"({m}, {n}): |m/n| must be < 1/2")
    lo, hi = 0.01, p_max() - 1e-6
    g = lambda p: dtheta_fraction(p) - target
    if g(lo) * g(hi) > 0:
        raise ArithmeticError(f"no sign change bracketing |m/n|={target} on [{lo}, {hi}]")
    p = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    if abs(g(p)) > tol:
        raise ArithmeticError(f"torus-rod search converged to residual {abs(g(p)):.3e}")
    modulus = make_modulus(p)
    sig = math.copysign(sigma_from_closure(modulus), m)
    return rod_params(modulus, sig, n_periods=n, torus_type=(m, n))


def _require_physical(params: RodParams):
    if not params.is_physical or params.F_hat is None:
        raise RodError("position and frame formulas need a real sigma")


def rod_curvature(x, params: RodParams):
    return jacobi(np.asarray(x, dtype=float), params.modulus).cn


def _radius(x, params: RodParams):
    sn = jacobi(np.asarray(x, dtype=float), params.modulus).sn
    return np.sqrt(1.0 / params.m_param.real - sn * sn) / params.mu.real


def rod_position(x, params: RodParams) -> np.ndarray:
    """Position on the rod at elliptic coordinate ``x`` (shape ``(..., 3)``).

    ``x, y`` come from the theta-function representation of the third-kind
    integrals and ``z = Z(x) / (mu p)``.  The symmetry axis is the z-axis.
    """
    _require_physical(params)
    x = np.asarray(x, dtype=float)
    m = params.modulus
    p, mu, lam, F = m.p, params.mu.real, params.Lambda.real, params.F_hat
    th = theta_suite(x, m)
    if np.any(np.abs(th.Theta) < 1e-14):
        raise EllipticPoleError("Theta vanishes; position formula is singular")
    plus = theta_suite(x + 1j * F, m).Theta1
    minus = theta_suite(x - 1j * F, m).Theta1
    h1 = complex(theta_suite(1j * F, m).H1)
    pref = math.sqrt(2.0 * m.K * m.p_prime / (math.pi * p)) / (2.0 * mu * h1)
    e = np.exp(1j * lam * x)
    xs = pref * (minus / e + plus * e) / th.Theta
    ys = pref * (minus / e - plus * e) / (1j * th.Theta)
    zs = th.dTheta / th.Theta / (mu * p)
    return np.stack([xs.real, ys.real, zs], axis=-1)


def _cyl_frame_coeffs(x, params: RodParams):
    """Rows T, N, B in the cylindrical basis ``(r d_r, d_theta, d_z)``."""
    m = params.modulus
    p = m.p
    sig, mu, lam1 = params.sigma.real, params.mu.real, params.lambda1.real
    P = p ** -2
    sn, cn, dn = jacobi(np.asarray(x, dtype=float), m)
    r2 = (1.0 / params.m_param.real - sn * sn) / mu ** 2
    T = np.stack([
        -cn * sn * dn / (2 * p * mu ** 2 * r2),
        -sig * (P + sig ** 2 - 4 * lam1 * sn ** 2) / (8 * mu ** 3 * r2),
        (cn ** 2 - 2 * lam1) / (2 * mu),
    ], axis=-1)
    N = np.stack([
        -cn * (P + sig ** 2 - 2 * sn ** 2) / (4 * mu ** 2 * r2),
        lam1 * sig * sn * dn / (2 * p * mu ** 3 * r2),
        -sn * dn / (2 * p * mu),
    ], axis=-1)
    B = np.stack([
        sig * sn * dn / (2 * p * mu ** 2 * r2),
        -(P ** 2 - sig ** 4) * cn / (16 * mu ** 3 * r2),
        -sig * cn / (2 * mu),
    ], axis=-1)
    return T, N, B, np.sqrt(r2)


def rod_frame(x, params: RodParams):
    """Frenet triad ``(T, N, B)`` in Cartesian coordinates at ``x``.

    Built from the cylindrical-basis frame matrix and the angle ``theta``
    read off :func:`rod_position`.  Each array has shape ``(..., 3)``.
    """
    _require_physical(params)
    x = np.asarray(x, dtype=float)
    pos = rod_position(x, params)
    theta = np.arctan2(pos[..., 1], pos[..., 0])
    T, N, B, r = _cyl_frame_coeffs(x, params)
    if np.any(r < 1e-12):
        raise RodError("r(x) = 0: cylindrical frame is degenerate")
    c, s = np.cos(theta), np.sin(theta)
    e_r = np.stack([c, s, np.zeros_like(c)], axis=-1)
    e_t = np.stack([-s, c, np.zeros_like(c)], axis=-1)
    e_z = np.zeros_like(e_r)
    e_z[..., 2] = 1.0

    def to_cart(row):
        return (row[..., 0:1] * r[..., None] * e_r + row[..., 1:2] * r[..., None] * e_t
                + row[..., 2:3] * e_z)

    return to_cart(T), to_cart(N), to_cart(B)


def build_rod(m: int, n: int, samples_per_period: int = 4000,
              params: Optional[RodParams] = None) -> SampledCurve:
    """Sample the closed ``(m, n)`` rod by arclength from the explicit formulas."""
    if params is None:
        params = find_torus_rod(m, n)
    n_per = params.n_periods if params.n_periods is not None else n
    count = int(samples_per_period) * n_per
    K, p = params.K, params.p
    x = np.linspace(0.0, 2.0 * K * n_per, count + 1)
    pos = rod_position(x, params)
    T, N, B = rod_frame(x, params)
    T, N, B = frames_orthonormalize(T, N, B)
    kappa = rod_curvature(x, params)
    return SampledCurve(
        s=2.0 * p * x,
        position=pos,
        T=T, N=N, B=B,
        kappa=np.asarray(kappa, dtype=float),
        tau=float(params.tau.real),
        closed=True,
        parity="even" if n_per % 2 == 0 else "odd",
        meta={"p": p, "sigma": float(params.sigma.real), "n_periods": n_per,
              "torus_type": params.torus_type, "x": x, "params": params},
    )
