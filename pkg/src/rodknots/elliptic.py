"""Elliptic integrals, Jacobi elliptic functions, Jacobi zeta and theta functions.

Conventions
-----------
The modulus is ``p`` (not the parameter ``m = p**2``).  Theta functions follow
the Jacobi notation used in Byrd & Friedman::

    Theta(u)  = theta_4(v),   Theta_1(u) = theta_3(v),
    H(u)      = theta_1(v),   H_1(u)     = theta_2(v),

with ``v = pi * u / (2 K)`` and nome ``q = exp(-pi K'/K)``.  With this scaling
``Theta'(u) / Theta(u)`` is exactly the Jacobi zeta function ``Z(u)``.

Every function here broadcasts over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import elliprd, elliprf

__all__ = [
    "EllipticDomainError",
    "EllipticPoleError",
    "EllipticModulus",
    "JacobiTriple",
    "ThetaValues",
    "make_modulus",
    "agm_complete",
    "incomplete_F",
    "incomplete_E",
    "jacobi",
    "jacobi_real",
    "inverse_sn",
    "jacobi_zeta",
    "theta_suite",
    "identity_residuals",
    "IDENTITY_TOL",
    "LEGENDRE_TOL",
]

POLE_TOL = 1e-10
# pass thresholds for the self-checks below
IDENTITY_TOL = 1e-11
LEGENDRE_TOL = 1e-12


class EllipticDomainError(ValueError):
    """Modulus or argument outside the domain of the function."""


class EllipticPoleError(ArithmeticError):
    """Argument sits on (or within tolerance of) a pole."""


def agm_complete(p: float, p_prime: Optional[float] = None) -> tuple[float, float]:
    """Complete integrals ``(K(p), E(p))`` by the arithmetic-geometric mean.

    Uses ``K = pi / (2 AGM(1, p'))`` and
    ``E = K (1 - sum_n 2**(n-1) c_n**2)`` with ``c_0 = p``.  Passing ``p_prime``
    keeps its digits when ``p`` rounds to 1.
    """
    if p_prime is None:
        if not 0.0 <= p < 1.0:
            raise EllipticDomainError(f"modulus p={p!r} must lie in [0, 1)")
        p_prime = math.sqrt((1.0 - p) * (1.0 + p))
    elif not 0.0 < p_prime <= 1.0:
        raise EllipticDomainError(f"complementary modulus {p_prime!r} must lie in (0, 1]")
    a, b = 1.0, p_prime
    c = p
    acc = 0.5 * c * c
    power = 0.5
    for _ in range(60):
        if abs(c) <= 1e-16 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        power *= 2.0
        acc += power * c * c
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - acc)


@dataclass(frozen=True)
class EllipticModulus:
    """A modulus ``p`` with its complete integrals and theta nome cached."""

    p: float
    p_prime: float
    K: float
    E: float
    K_prime: float
    E_prime: float
    q_nome: float

    @property
    def m(self) -> float:
        return self.p * self.p

    def legendre_residual(self) -> float:
        """``E K' + E' K - K K' - pi/2`` (zero up to rounding)."""
        return self.E * self.K_prime + self.E_prime * self.K - self.K * self.K_prime - math.pi / 2

    def complementary(self) -> "EllipticModulus":
        return make_modulus(self.p_prime)


def make_modulus(p: float) -> EllipticModulus:
    """Build an :class:`EllipticModulus` for ``0 < p < 1``."""
    p = float(p)
    if not (0.0 < p < 1.0) or not math.isfinite(p):
        raise EllipticDomainError(f"modulus p={p!r} must satisfy 0 < p < 1 (K diverges at p=1)")
    pp = math.sqrt((1.0 - p) * (1.0 + p))
    K, E = agm_complete(p)
    Kp, Ep = agm_complete(pp, p_prime=p)
    return EllipticModulus(p=p, p_prime=pp, K=K, E=E, K_prime=Kp, E_prime=Ep,
                           q_nome=math.exp(-math.pi * Kp / K))


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any((k < 0) | (k >= 1)):
        raise EllipticDomainError("incomplete integrals need 0 <= k < 1")
    return k


def _reduce_angle(xi):
    # xi = phi + j*pi with phi in [-pi/2, pi/2]
    j = np.round(np.asarray(xi, dtype=float) / np.pi)
    return xi - j * np.pi, j


def incomplete_F(xi, k):
    """Incomplete integral of the first kind ``F(xi, k)`` (Carlson ``R_F``)."""
    k = _check_k(k)
    phi, j = _reduce_angle(xi)
    s, c = np.sin(phi), np.cos(phi)
    kk = k * k
    base = s * elliprf(c * c, 1.0 - kk * s * s, 1.0)
    if np.any(j != 0):
        base = base + 2.0 * j * elliprf(0.0, 1.0 - kk, 1.0)
    return base


def incomplete_E(xi, k):
    """Incomplete integral of the second kind ``E(xi, k)`` (Carlson ``R_F``, ``R_D``)."""
    k = _check_k(k)
    phi, j = _reduce_angle(xi)
    s, c = np.sin(phi), np.cos(phi)
    kk = k * k
    c2, d2 = c * c, 1.0 - kk * s * s
    base = s * elliprf(c2, d2, 1.0) - kk * s ** 3 * elliprd(c2, d2, 1.0) / 3.0
    if np.any(j != 0):
        Ec = elliprf(0.0, 1.0 - kk, 1.0) - kk * elliprd(0.0, 1.0 - kk, 1.0) / 3.0
        base = base + 2.0 * j * Ec
    return base


@dataclass(frozen=True)
class JacobiTriple:
    """``sn``, ``cn``, ``dn`` evaluated at a common argument."""

    sn: np.ndarray
    cn: np.ndarray
    dn: np.ndarray

    def __iter__(self):
        return iter((self.sn, self.cn, self.dn))


def _as_modulus(m) -> EllipticModulus:
    return m if isinstance(m, EllipticModulus) else make_modulus(m)


def jacobi_real(u, m: EllipticModulus):
    """Real ``sn, cn, dn`` by descending Landen (AGM) transformation.

    The argument is first reduced modulo ``4K`` so the amplitude recursion
    works on a bounded range.
    """
    u = np.asarray(u, dtype=float)
    K = m.K
    ur = u - 4.0 * K * np.round(u / (4.0 * K))
    a, b, c = [1.0], [m.p_prime], [m.p]
    while abs(c[-1]) > 1e-16 * a[-1] and len(a) < 40:
        a_n, b_n = a[-1], b[-1]
        a.append(0.5 * (a_n + b_n))
        b.append(math.sqrt(a_n * b_n))
        c.append(0.5 * (a_n - b_n))
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * ur
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(np.clip(c[j] / a[j] * np.sin(phi), -1.0, 1.0)))
    sn, cn = np.sin(phi), np.cos(phi)
    # dn > 0 on the real line for p < 1
    dn = np.sqrt(1.0 - m.p * m.p * sn * sn)
    return sn, cn, dn


def jacobi(u, m) -> JacobiTriple:
    """Jacobi elliptic functions of a (possibly complex) argument.

    For ``u = x + i y`` the real functions at ``(x, p)`` and ``(y, p')`` are
    combined with the addition formulas.

    Raises
    ------
    EllipticPoleError
        If ``u`` is within tolerance of a pole (``u = i K' mod lattice``).
    """
    m = _as_modulus(m)
    u = np.asarray(u)
    if not np.iscomplexobj(u):
        sn, cn, dn = jacobi_real(u, m)
        return JacobiTriple(sn, cn, dn)
    x, y = u.real, u.imag
    s, c, d = jacobi_real(x, m)
    mc = m.complementary()
    s1, c1, d1 = jacobi_real(y, mc)
    k2 = m.p * m.p
    delta = c1 * c1 + k2 * s * s * s1 * s1
    if np.any(np.abs(delta) < POLE_TOL):
        raise EllipticPoleError("argument within tolerance of a pole of sn, cn, dn")
    sn = (s * d1 + 1j * c * d * s1 * c1) / delta
    cn = (c * c1 - 1j * s * d * s1 * d1) / delta
    dn = (d * c1 * d1 - 1j * k2 * s * c * s1) / delta
    return JacobiTriple(sn, cn, dn)


def identity_residuals(u, m) -> dict:
    """Largest violations of ``sn^2 + cn^2 = 1``, ``dn^2 + p^2 sn^2 = 1`` and Legendre's relation."""
    m = _as_modulus(m)
    t = jacobi(u, m)
    return {"sn2_cn2": float(np.max(np.abs(t.sn ** 2 + t.cn ** 2 - 1))),
            "dn2_sn2": float(np.max(np.abs(t.dn ** 2 + m.p * m.p * t.sn ** 2 - 1))),
            "legendre": m.legendre_residual()}


def inverse_sn(w, m, polish: int = 4):
    """Principal-branch inverse of ``sn``: ``u = w R_F(1 - w^2, 1 - p^2 w^2, 1)``.

    A few Newton steps on ``sn(u) = w`` clean up the last digits.
    """
    m = _as_modulus(m)
    w = np.asarray(w, dtype=complex)
    # real w with |w| > 1 sits on the R_F branch cut; take the upper side
    on_cut = (w.imag == 0.0) & (np.abs(w.real) > 1.0)
    w0 = np.where(on_cut, w + 1e-300j, w)
    u = w0 * elliprf(1.0 - w0 * w0, 1.0 - m.p * m.p * w0 * w0, 1.0 + 0j)
    for _ in range(polish):
        sn, cn, dn = jacobi(u, m)
        deriv = cn * dn
        ok = np.abs(deriv) > 1e-8
        step = np.where(ok, (sn - w) / np.where(ok, deriv, 1.0), 0.0)
        u = u - step
    return u


def _zeta_real(x, m: EllipticModulus):
    x = np.asarray(x, dtype=float)
    xr = x - 2.0 * m.K * np.round(x / (2.0 * m.K))
    sn, cn, _ = jacobi_real(xr, m)
    phi = np.arctan2(sn, cn)
    return incomplete_E(phi, m.p) - (m.E / m.K) * xr


def jacobi_zeta(u, m):
    """Jacobi zeta function ``Z(u)`` for real or complex ``u``.

    Real part via ``E(am u) - (E/K) u``; complex arguments via the imaginary
    transformation and the addition formula
    ``Z(x+iy) = Z(x) + Z(iy) - p^2 sn x sn(iy) sn(x+iy)``.
    """
    m = _as_modulus(m)
    u = np.asarray(u)
    if not np.iscomplexobj(u):
        return _zeta_real(u, m)
    Kp = m.K_prime
    # Z(u + 2iK') = Z(u) - i pi / K
    j = np.round(u.imag / (2.0 * Kp))
    u = u - 2j * Kp * j
    out = -1j * math.pi / m.K * j
    # near Im u = +-K' the imaginary transformation divides by ~0; shift by iK'
    far = np.abs(u.imag) > 0.5 * Kp
    if np.any(far):
        w = np.where(far, u - 1j * Kp * np.sign(u.imag), u)
        base = _zeta_near_axis(w, m)
        sn, cn, dn = jacobi(w, m)
        with np.errstate(divide="ignore", invalid="ignore"):
            shift = cn * dn / sn - np.sign(u.imag) * 1j * math.pi / (2.0 * m.K)
        if np.any(far & (np.abs(sn) < POLE_TOL)):
            raise EllipticPoleError("argument within tolerance of a pole of Z")
        return out + np.where(far, base + shift, base)
    return out + _zeta_near_axis(u, m)


def _zeta_near_axis(u, m: EllipticModulus):
    x, y = u.real, u.imag
    mc = m.complementary()
    s1, c1, d1 = jacobi_real(y, mc)
    if np.any(np.abs(c1) < POLE_TOL):
        raise EllipticPoleError("argument within tolerance of a pole of Z")
    z_iy = 1j * (s1 * d1 / c1 - _zeta_real(y, mc) - math.pi * y / (2.0 * m.K * m.K_prime))
    sn_iy = 1j * s1 / c1
    sn_x = jacobi_real(x, m)[0]
    sn_u = jacobi(u.astype(complex), m).sn
    return _zeta_real(x, m) + z_iy - m.p * m.p * sn_x * sn_iy * sn_u


@dataclass(frozen=True)
class ThetaValues:
    """Jacobi theta functions at one argument; ``dTheta`` is d/du of Theta."""

    Theta: np.ndarray
    Theta1: np.ndarray
    H: np.ndarray
    H1: np.ndarray
    dTheta: np.ndarray


def _theta_sums(v, q: float):
    """theta_1..theta_4 and theta_4' at ``v`` by direct q-series."""
    v = np.asarray(v)
    cplx = np.iscomplexobj(v)
    dt = complex if cplx else float
    t1 = np.zeros(v.shape, dtype=dt)
    t2 = np.zeros(v.shape, dtype=dt)
    t3 = np.ones(v.shape, dtype=dt)
    t4 = np.ones(v.shape, dtype=dt)
    d4 = np.zeros(v.shape, dtype=dt)
    logq = math.log(q)
    y = float(np.max(np.abs(np.imag(v)))) if v.size else 0.0
    # terms grow like q^(n^2) e^(2 n |Im v|) until n ~ |Im v| / |log q|
    n_peak = y / -logq
    n = 0
    while True:
        h = n + 0.5
        qh = math.exp(logq * h * h)
        t1 = t1 + 2.0 * (-1) ** n * qh * np.sin((2 * n + 1) * v)
        t2 = t2 + 2.0 * qh * np.cos((2 * n + 1) * v)
        n += 1
        qn = math.exp(logq * n * n)
        cos2 = np.cos(2 * n * v)
        term3 = 2.0 * qn * cos2
        t3 = t3 + term3
        t4 = t4 + (-1) ** n * term3
        d4 = d4 - (-1) ** n * 4.0 * n * qn * np.sin(2 * n * v)
        if n > n_peak + 1:
            size = max(float(np.max(np.abs(t3))), float(np.max(np.abs(t4))), 1e-300)
            bound = qn * math.exp(2 * n * y) * (1 + 4 * n)
            if bound < 1e-15 * size * 1e-2:
                break
        if n > 2000:
            raise EllipticDomainError("theta series failed to converge")
    return t1, t2, t3, t4, d4


def theta_suite(x, m) -> ThetaValues:
    """``Theta, Theta_1, H, H_1`` and ``Theta'`` at ``x`` (real or complex)."""
    m = _as_modulus(m)
    q = m.q_nome
    if not 0.0 <= q < 1.0:
        raise EllipticDomainError(f"nome {q!r} outside [0, 1)")
    scale = math.pi / (2.0 * m.K)
    t1, t2, t3, t4, d4 = _theta_sums(scale * np.asarray(x), q)
    return ThetaValues(Theta=t4, Theta1=t3, H=t1, H1=t2, dTheta=scale * d4)
