"""Backlund transformations of constant-torsion curves.

Single transformation with constant ``C``::

    beta' = C sin(beta) - kappa
    new = old + 2C / (C^2 + tau^2) (cos(beta) T + sin(beta) N)
    new kappa = kappa - 2C sin(beta)

The double transformation uses a complex ``nu`` and its conjugate, built
algebraically from one solution ``chi`` of the phi-gauge linear system at
``nu``.  We write ``chi_1 / chi_2 = -rho exp(-i beta)``, the same sign
convention as ``z = -exp(-i beta)`` for the single transformation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .curves import SampledCurve, closure_defect, frames_orthonormalize, repeat_cover
from .elliptic import jacobi
from .rod import RodParams, rod_params
from .spectral import (
    GAUGE_A,
    PHI_GAUGE,
    PSI_GAUGE,
    FloquetRoot,
    SpectralSolution,
    a_from_nu,
    eigenvectors_vpm,
    riccati_rod_closed_form,
    riccati_solve,
    rod_kappa,
    su2_basis,
    su2_to_r3,
)

__all__ = [
    "BacklundError",
    "SingularPointError",
    "SingleBTSpec",
    "DoubleBTSpec",
    "curvature_function",
    "solve_beta",
    "beta_solution",
    "beta_residual",
    "single_bt",
    "superpose",
    "beta_C_derivative",
    "closed_single_bt_rod",
    "gauge_matrix",
    "double_gauge_matrix",
    "double_bt_terms",
    "gauge_displacement",
    "second_ratio",
    "double_bt",
    "case_a_chi0",
    "case_a_double_bt",
    "omega_initial_ratio",
    "closed_double_bt",
]

log = logging.getLogger(__name__)

SOURCES = ("ode", "closed_form_rod", "eigenvector_vplus", "eigenvector_vminus")


class BacklundError(ValueError):
    pass


class SingularPointError(BacklundError):
    """The double-transformation denominator vanishes; ``locations`` are arclengths."""

    def __init__(self, message: str, locations):
        super().__init__(message)
        self.locations = np.asarray(locations, dtype=float)


@dataclass(frozen=True)
class SingleBTSpec:
    C: float
    tau: float
    beta0: float = 0.0
    source: str = "ode"

    def __post_init__(self):
        if self.source not in SOURCES:
            raise BacklundError(f"unknown source {self.source!r}")
        if not (math.isfinite(self.C) and math.isfinite(self.tau)):
            raise BacklundError("C and tau must be finite")

    @property
    def theta_angle(self) -> float:
        """Angle between old and new binormals, ``tan(theta/2) = C / tau``."""
        return 2.0 * math.atan2(self.C, self.tau)

    @property
    def scale(self) -> float:
        den = self.C ** 2 + self.tau ** 2
        return 0.0 if den == 0 else 2.0 * self.C / den


@dataclass(frozen=True)
class DoubleBTSpec:
    nu: complex
    tau: float
    omega: complex = 1.0
    k_covers: int = 1

    @property
    def alpha_const(self) -> complex:
        nu, nb, t2 = self.nu, np.conj(self.nu), self.tau ** 2
        return 1j * (nu * nu - nb * nb) / ((t2 + nu * nu) * (t2 + nb * nb))

    @property
    def is_identity(self) -> bool:
        return abs(complex(self.nu).imag) <= 1e-14 * max(1.0, abs(self.nu))


# ---------------------------------------------------------------------------
# single transformation


def curvature_function(curve: SampledCurve) -> Callable:
    """``kappa(s)`` between samples: exact for rods, cubic spline otherwise."""
    params = curve.meta.get("params")
    if isinstance(params, RodParams):
        return rod_kappa(params)
    periodic = curve.closed and curve.parity == "even"
    spline = CubicSpline(curve.s, curve.kappa, bc_type="periodic" if periodic else "not-a-knot")
    return lambda s: spline(s)


def beta_solution(grid, beta, C) -> SpectralSolution:
    """Wrap an angle function as the unit-modulus solution ``z = -exp(-i beta)``."""
    beta = np.asarray(beta, dtype=float)
    vals = np.stack([-np.exp(-0.5j * beta), np.exp(0.5j * beta)], axis=-1) / math.sqrt(2.0)
    sol = SpectralSolution.from_values(grid, vals, PHI_GAUGE, complex(C))
    return SpectralSolution(grid=sol.grid, values=sol.values, gauge=PHI_GAUGE, ratio=sol.ratio,
                            lam=sol.lam, beta=beta)


BETA_CIRCLE_TOL = 1e-6


def solve_beta(kappa: Callable, C: float, beta0: float, grid) -> SpectralSolution:
    """Solve ``beta' = C sin(beta) - kappa`` through the linear system at ``nu = C``."""
    if np.iscomplexobj(C) and complex(C).imag != 0:
        raise BacklundError("the angle function needs a real C")
    C = float(np.real(C))
    z0 = -np.exp(-1j * beta0)
    sol = riccati_solve(kappa, C, z0, grid)
    z = sol.ratio
    # the circle |z| = 1 is invariant but can be transversally unstable, so
    # integration error drifts off it slowly; read beta from the angle
    drift = np.max(np.abs(np.abs(z) - 1.0)) if np.all(np.isfinite(z)) else np.inf
    if drift > BETA_CIRCLE_TOL:
        raise BacklundError(f"solution left the unit circle (|z| - 1 up to {drift:.1e}): C is not real or the angle function is unstable here")
    beta = -np.unwrap(np.angle(-z))
    beta = beta - beta[0] + beta0
    return beta_solution(sol.grid, beta, C)


def _deriv4(y, h):
    """Fourth-order first derivative; one-sided stencils at the ends."""
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    c = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    d[0] = c @ y[:5]
    d[1] = np.array([-3, -10, 18, -6, 1]) / (12 * h) @ y[:5]
    d[-1] = -(c @ y[::-1][:5])
    d[-2] = -(np.array([-3, -10, 18, -6, 1]) / (12 * h) @ y[::-1][:5])
    return d


def beta_residual(kappa_values, C, beta, grid) -> float:
    """Max of ``|beta' - (C sin beta - kappa)|`` normalized per unit arclength."""
    grid = np.asarray(grid, dtype=float)
    h = grid[1] - grid[0]
    d = _deriv4(np.asarray(beta, dtype=float), h)
    return float(np.max(np.abs(d - (C * np.sin(beta) - np.asarray(kappa_values)))))


def _derived_meta(curve: SampledCurve) -> dict:
    """Metadata for a transformed curve: the source's rod parameters no longer describe it."""
    meta = dict(curve.meta)
    if "params" in meta:
        meta["source_params"] = meta.pop("params")
    meta.pop("x", None)
    return meta


CLOSURE_TOL = 1e-6


def _closed_flag(curve: SampledCurve) -> bool:
    """A transform of a closed curve is closed only if it actually closes up."""
    if not curve.closed:
        return False
    gap = closure_defect(curve)
    return gap.position_gap <= CLOSURE_TOL * curve.length and gap.frame_gap <= CLOSURE_TOL * 10


def _check_grid_match(curve: SampledCurve, grid):
    if len(grid) != len(curve.s) or np.max(np.abs(np.asarray(grid) - curve.s)) > 1e-9 * max(1.0, curve.length):
        raise BacklundError("spectral solution is not sampled on the curve's grid")


def single_bt(curve: SampledCurve, spec: SingleBTSpec, beta: SpectralSolution,
              residual_tol: float = 1e-8) -> SampledCurve:
    """Transformed curve, frame and curvature.

    ``residual_tol`` bounds the ODE residual of ``beta`` as measured by
    fourth-order differences on the curve's grid; raise it for coarse grids.
    """
    if beta.beta is None:
        raise BacklundError("beta is not available on this solution")
    _check_grid_match(curve, beta.grid)
    tau = float(np.mean(curve.tau_array()))
    if abs(tau - spec.tau) > 1e-9 * max(1.0, abs(tau)):
        raise BacklundError(f"spec tau {spec.tau} does not match curve tau {tau}")
    b = beta.beta
    res = beta_residual(curve.kappa, spec.C, b, curve.s)
    if res > residual_tol:
        raise BacklundError(f"beta does not solve the transformation ODE (residual {res:.2e})")
    cb, sb = np.cos(b)[:, None], np.sin(b)[:, None]
    T, N, B = curve.T, curve.N, curve.B
    th = spec.theta_angle
    ct, st = math.cos(th), math.sin(th)
    V = cb * N - sb * T
    T2 = T + (1 - ct) * sb * V + st * sb * B
    N2 = N - (1 - ct) * cb * V - st * cb * B
    B2 = ct * B + st * V
    T2, N2, B2 = frames_orthonormalize(T2, N2, B2)
    pos = curve.position + spec.scale * (cb * T + sb * N)
    meta = _derived_meta(curve)
    meta.update({"transform": "single", "C": spec.C, "beta": b})
    out = curve.with_updates(position=pos, T=T2, N=N2, B=B2,
                             kappa=curve.kappa - 2.0 * spec.C * np.sin(b), meta=meta)
    return out.with_updates(closed=_closed_flag(out))


def beta_C_derivative(kappa: Callable, C: float, beta: SpectralSolution) -> np.ndarray:
    """``d beta / dC`` at fixed initial value (variational equation ``y' = sin b + C cos b y``)."""
    grid = beta.grid

    def rhs(t, y):
        b, d = y
        return [C * math.sin(b) - float(kappa(t)), math.sin(b) + C * math.cos(b) * d]

    sol = solve_ivp(rhs, (grid[0], grid[-1]), [float(beta.beta[0]), 0.0], t_eval=grid,
                    method="DOP853", rtol=1e-12, atol=1e-13)
    if not sol.success:
        raise BacklundError(sol.message)
    return sol.y[1]


def superpose(beta1: SpectralSolution, beta2: SpectralSolution, C1: float, C2: float,
              kappa: Optional[Callable] = None) -> tuple[SpectralSolution, SpectralSolution]:
    """Angles ``(beta_12, beta_21)`` of the two composite transformations.

    ``beta_12 - beta_1 = beta_21 - beta_2 = 2 arctan[(C1+C2)/(C1-C2) tan((beta1-beta2)/2)]``,
    evaluated continuously along the curve.  For ``C1 == C2`` the limit
    ``2 arctan(C dbeta/dC)`` is used, which needs ``kappa`` (both inputs
    must then be the same solution).
    """
    b1, b2 = beta1.beta, beta2.beta
    if b1 is None or b2 is None:
        raise BacklundError("both inputs need beta")
    if len(b1) != len(b2) or np.max(np.abs(beta1.grid - beta2.grid)) > 1e-12:
        raise BacklundError("inputs must share a grid")
    if C1 == C2:
        if kappa is None:
            raise BacklundError("the C1 = C2 limit needs kappa to form d beta / dC")
        if np.max(np.abs(b1 - b2)) > 1e-12:
            raise BacklundError("the C1 = C2 limit needs a common initial value")
        delta = 2.0 * np.arctan(C1 * beta_C_derivative(kappa, C1, beta1))
    else:
        ratio = (C1 + C2) / (C1 - C2)
        half = 0.5 * (b1 - b2)
        # 2 arctan(ratio tan x) continued through the poles of tan, pinned to
        # the principal value at the first sample
        delta = 2.0 * np.unwrap(np.arctan2(ratio * np.sin(half), np.cos(half)))
        principal = 2.0 * math.atan(ratio * math.tan(half[0])) if math.cos(half[0]) != 0 else delta[0]
        delta = delta + 2.0 * math.pi * round((principal - delta[0]) / (2.0 * math.pi))
    return (beta_solution(beta1.grid, b1 + delta, C2), beta_solution(beta1.grid, b2 + delta, C1))


def _rod_params_of(curve: SampledCurve, params: Optional[RodParams]) -> RodParams:
    params = params if params is not None else curve.meta.get("params")
    if not isinstance(params, RodParams):
        raise BacklundError("rod parameters are required")
    return params


def closed_single_bt_rod(rod: SampledCurve, params: Optional[RodParams], C: float,
                         which: str = "plus", source: str = "closed_form_rod") -> SampledCurve:
    """Closed transformation of a rod from the transfer-matrix eigenvector ``v_+`` or ``v_-``.

    ``source="closed_form_rod"`` evaluates the explicit angle function;
    ``source="ode"`` integrates from the eigenvector's initial value.
    The result is congruent to the rod, with curvature ``cn(x - a)`` (``v_+``)
    or ``cn(x + a)`` (``v_-``).
    """
    params = _rod_params_of(rod, params)
    if C == 0:
        raise BacklundError("C = 0 is the identity")
    if which not in ("plus", "minus"):
        raise BacklundError("which must be 'plus' or 'minus'")
    p = params.p
    x = rod.s / (2.0 * p)
    a = a_from_nu(params, C).real
    if which == "minus":
        a = -a
    if source == "closed_form_rod":
        sn_x = jacobi(x, params.modulus).sn
        sn_xa = jacobi(x - a, params.modulus).sn
        b = -(np.arcsin(p * sn_x) + np.arcsin(p * sn_xa))
        # the branch of arcsin keeps cos(beta) > 0 for v_+; v_- adds pi
        if which == "minus":
            b = b + math.pi
        beta = beta_solution(rod.s, b, C)
        spec_source = "closed_form_rod"
    elif source == "ode":
        ev = eigenvectors_vpm(rod_params(params.modulus, 2j * C))
        v = ev.phi_plus if which == "plus" else ev.phi_minus
        z0 = v[0] / v[1]
        b0 = float(-np.angle(-z0))
        beta = solve_beta(rod_kappa(params), C, b0, rod.s)
        spec_source = "eigenvector_vplus" if which == "plus" else "eigenvector_vminus"
    else:
        raise BacklundError(f"unknown source {source!r}")
    spec = SingleBTSpec(C=C, tau=float(params.tau.real), beta0=float(beta.beta[0]), source=spec_source)
    out = single_bt(rod, spec, beta, residual_tol=max(1e-8, 50 * (rod.ds ** 4)))
    meta = dict(out.meta)
    meta.update({"a": a, "which": which})
    return out.with_updates(meta=meta)


# ---------------------------------------------------------------------------
# double transformation


def gauge_matrix(lam, nu, z) -> np.ndarray:
    """``[[lam, -nu z], [-nu / z, lam]]`` (unnormalized), stacked over ``z``."""
    z = np.asarray(z, dtype=complex)
    G = np.empty(z.shape + (2, 2), dtype=complex)
    G[..., 0, 0] = lam
    G[..., 1, 1] = lam
    G[..., 0, 1] = -nu * z
    G[..., 1, 0] = -nu / z
    return G


def double_gauge_matrix(lam, nu, z, w) -> np.ndarray:
    """The composite gauge at ``(nu, conj nu)`` in closed form (unnormalized)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    nb = np.conj(nu)
    n2 = abs(nu) ** 2
    G = np.empty(z.shape + (2, 2), dtype=complex)
    G[..., 0, 0] = lam * lam + n2 * w / z
    G[..., 0, 1] = -lam * (nu * z + nb * w)
    G[..., 1, 0] = -lam * (nu / z + nb / w)
    G[..., 1, 1] = lam * lam + n2 * z / w
    return G


def second_ratio(nu, z):
    """``w = z (conj nu - nu |z|^2) / (conj nu |z|^2 - nu)`` from the conjugate-swap solution."""
    nb = np.conj(nu)
    a2 = np.abs(z) ** 2
    return z * (nb - nu * a2) / (nb * a2 - nu)


@dataclass(frozen=True)
class DoubleTerms:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    dkappa: np.ndarray
    denom: np.ndarray  # normalized (nu - nb rho^2)(nb - nu rho^2), in [0, |nu|^2]


def double_bt_terms(chi_values: np.ndarray, nu: complex, tau: float) -> DoubleTerms:
    """Frame components ``p, q, r`` and the curvature change, from ``chi``.

    Evaluated homogeneously in ``chi = (a, b)`` normalized to unit length, so
    ``chi_2 = 0`` is harmless: ``rho cos(beta) |b|^2 = -Re(a conj b)``,
    ``rho sin(beta) |b|^2 = Im(a conj b)``, ``rho^2 |b|^2 = |a|^2``.
    """
    chi = np.asarray(chi_values, dtype=complex)
    chi = chi / np.linalg.norm(chi, axis=-1, keepdims=True)
    a, b = chi[:, 0], chi[:, 1]
    R, S = np.abs(a) ** 2, np.abs(b) ** 2
    Z = a * np.conj(b)
    rc, rs = -Z.real, Z.imag
    nb = np.conj(nu)
    n2 = abs(nu) ** 2
    t2 = tau * tau
    den = ((nu * S - nb * R) * (nb * S - nu * R)).real
    im_part = ((nu - nb) / 2j).real       # Im nu
    re_part = ((nu + nb) / 2).real        # Re nu
    with np.errstate(divide="ignore", invalid="ignore"):
        p = -(im_part * (t2 + n2) * (S + R) * rc + re_part * (t2 - n2) * (S - R) * rs) / den
        q = (re_part * (t2 - n2) * (S - R) * rc - im_part * (t2 + n2) * (S + R) * rs) / den
        r = tau * n2 * (R * R - S * S) / den
        coef = (1j * (nu * nu - nb * nb)).real
        dk = coef * (2 * re_part * (R - S) * rc + 2 * im_part * (R + S) * rs) / den
    return DoubleTerms(p=p, q=q, r=r, dkappa=dk, denom=den)


def _frame_rotation(nu, z, tau):
    """Rows: coordinates of the new ``T, N, B`` in the old frame, from the composite gauge."""
    lam = -1j * tau
    w = second_ratio(nu, z)
    Tm = double_gauge_matrix(lam, nu, z, w)
    inv = np.linalg.inv(Tm)
    rows = [su2_to_r3(inv @ E @ Tm).real for E in su2_basis(PHI_GAUGE)]
    return np.stack(rows, axis=-2)


def gauge_displacement(nu, z, tau) -> np.ndarray:
    """``i T^-1 dT/dlam`` at ``lam = -i tau`` in old-frame coordinates (algebraic cross-check)."""
    lam = -1j * tau
    w = second_ratio(nu, z)
    G1 = gauge_matrix(lam, nu, z)
    G2 = gauge_matrix(lam, np.conj(nu), w)
    Tm = G2 @ G1
    dT = G1 + G2
    X = 1j * np.linalg.inv(Tm) @ dT
    return su2_to_r3(X).real


def _interpolate_isolated(values: np.ndarray, bad: np.ndarray) -> np.ndarray:
    """Replace flagged samples by a quadratic through the nearest good neighbours."""
    out = values.copy()
    idx = np.arange(len(values))
    good = np.flatnonzero(~bad)
    for i in np.flatnonzero(bad):
        nbrs = good[np.argsort(np.abs(good - i))[:3]]
        for j in range(values.shape[1] if values.ndim > 1 else 1):
            col = values[nbrs, j] if values.ndim > 1 else values[nbrs]
            coef = np.polyfit(idx[nbrs].astype(float), col, 2)
            if values.ndim > 1:
                out[i, j] = np.polyval(coef, float(i))
            else:
                out[i] = np.polyval(coef, float(i))
    return out


def double_bt(curve: SampledCurve, spec: DoubleBTSpec, chi: SpectralSolution,
              singular_tol: float = 1e-8) -> SampledCurve:
    """Double transformation at ``(nu, conj nu)`` from a phi-gauge solution ``chi`` at ``nu``.

    ``new = old + 2 alpha (p T + q N + r B)`` with ``chi_1/chi_2 = -rho e^{-i beta}``.
    The new frame is the old one rotated by the composite gauge matrix.
    Isolated samples where the normalized denominator is below
    ``singular_tol`` are filled in by quadratic interpolation and listed in
    ``meta["interpolated"]``; a run of such samples raises
    :class:`SingularPointError`.
    """
    if chi.gauge != PHI_GAUGE:
        chi = chi.to_gauge(PHI_GAUGE)
    _check_grid_match(curve, chi.grid)
    nu = complex(spec.nu)
    if abs(complex(chi.lam) - nu) > 1e-12 * max(1.0, abs(nu)):
        raise BacklundError("chi was computed at a different nu")
    tau = float(np.mean(curve.tau_array()))
    if abs(tau - spec.tau) > 1e-9 * max(1.0, abs(tau)):
        raise BacklundError("spec tau does not match the curve")
    if spec.is_identity:
        return curve
    meta = _derived_meta(curve)
    meta.update({"transform": "double", "nu": nu, "omega": complex(spec.omega)})
    terms = double_bt_terms(chi.values, nu, tau)
    scale = abs(nu) ** 2
    bad = terms.denom < singular_tol * scale
    if bad.any():
        runs = np.flatnonzero(np.diff(np.concatenate([[0], bad.astype(int), [0]])))
        lengths = runs[1::2] - runs[::2]
        if lengths.max() > 2 or bad.sum() > 0.01 * len(bad):
            raise SingularPointError(
                f"denominator vanishes at {bad.sum()} samples", curve.s[bad])
    alpha = spec.alpha_const
    coeff = 2.0 * (alpha * np.stack([terms.p, terms.q, terms.r], axis=-1))
    if np.max(np.abs(coeff.imag)) > 1e-8 * max(1.0, np.nanmax(np.abs(coeff.real))):
        raise BacklundError("displacement is not real; tau and nu are inconsistent")
    coeff = coeff.real
    dk = terms.dkappa
    z = chi.values[:, 0] / np.where(chi.values[:, 1] == 0, 1e-300, chi.values[:, 1])
    with np.errstate(all="ignore"):
        rot = _frame_rotation(nu, z, tau).reshape(len(z), 9)
    if bad.any():
        coeff = _interpolate_isolated(coeff, bad)
        dk = _interpolate_isolated(dk, bad)
        rot = _interpolate_isolated(rot, bad)
        meta["interpolated"] = np.flatnonzero(bad)
    rot = rot.reshape(-1, 3, 3)
    F = np.stack([curve.T, curve.N, curve.B], axis=-2)
    pos = curve.position + np.einsum("ni,nij->nj", coeff, F)
    newF = rot @ F
    T2, N2, B2 = frames_orthonormalize(newF[:, 0], newF[:, 1], newF[:, 2])
    meta["rho"] = np.abs(z)
    out = curve.with_updates(position=pos, T=T2, N=N2, B=B2, kappa=curve.kappa + dk, meta=meta)
    return out.with_updates(closed=_closed_flag(out))


def case_a_chi0(params: RodParams, nu: complex, which: str = "plus") -> np.ndarray:
    """Phi-gauge eigenvector ``A v_+`` (or ``A v_-``) of the rod transfer matrix at ``sigma = 2 i nu``."""
    ev = eigenvectors_vpm(rod_params(params.modulus, 2j * complex(nu), n_periods=params.n_periods))
    return ev.phi_plus if which == "plus" else ev.phi_minus


def case_a_double_bt(rod: SampledCurve, params: Optional[RodParams], nu: complex,
                     which: str = "plus", source: str = "closed_form_rod") -> SampledCurve:
    """Double transformation that closes after one rod (eigenvector case).

    ``source="closed_form_rod"`` starts from ``z_+(0) = i p sn a - dn a``;
    the output is congruent to the rod with curvature ``cn(x - a - conj a)``.
    ``source="eigenvector"`` starts from ``A v_+`` or ``A v_-`` (``which``)
    instead; it closes as well, but off the principal sheet of ``mu`` the
    two eigenvectors swap labels.
    """
    params = _rod_params_of(rod, params)
    nu = complex(nu)
    if which not in ("plus", "minus"):
        raise BacklundError("which must be 'plus' or 'minus'")
    a = a_from_nu(params, nu)
    if source == "closed_form_rod":
        if which != "plus":
            raise BacklundError("the closed form is the z_+ solution; use source='eigenvector'")
        z0 = complex(riccati_rod_closed_form(params, a, np.array([0.0]))[0])
    elif source == "eigenvector":
        v = case_a_chi0(params, nu, which)
        z0 = v[0] / v[1]
    else:
        raise BacklundError(f"unknown source {source!r}")
    chi = riccati_solve(rod_kappa(params), nu, z0, rod.s)
    out = double_bt(rod, DoubleBTSpec(nu, float(params.tau.real), omega=0.0, k_covers=1), chi)
    meta = dict(out.meta)
    meta.update({"which": which, "a": a, "case": "A"})
    meta.pop("omega", None)
    return out.with_updates(meta=meta)


def omega_initial_ratio(omega: complex, gauge: str = PSI_GAUGE) -> complex:
    """Phi-gauge ``z(0)`` for the combination ``omega chi^+ + chi^-``.

    With ``gauge="psi"`` the columns ``chi^+``, ``chi^-`` are the images under
    ``A`` of the psi-gauge fundamental matrix (the gauge the transfer-matrix
    formulas live in); with ``gauge="phi"`` they are the phi-gauge columns and
    ``z(0) = omega``.
    """
    omega = complex(omega)
    vec = np.array([1.0, 0.0], dtype=complex) if not np.isfinite(omega) else np.array([omega, 1.0])
    if gauge == PSI_GAUGE:
        vec = GAUGE_A @ vec
    elif gauge != PHI_GAUGE:
        raise BacklundError(f"unknown gauge {gauge!r}")
    return vec[0] / vec[1] if vec[1] != 0 else complex("inf")


def closed_double_bt(rod: SampledCurve, params: Optional[RodParams], root: FloquetRoot,
                     omega: complex = 1.0, residual_tol: float = 1e-8,
                     omega_gauge: str = PSI_GAUGE) -> SampledCurve:
    """Closed double transformation over ``k`` circuits at a Floquet root.

    ``chi = omega chi^+ + chi^-`` with ``chi^+``, ``chi^-`` fundamental
    columns in ``omega_gauge`` (see :func:`omega_initial_ratio`).  If the
    result already closes after fewer covers it is cut down to them.
    """
    params = _rod_params_of(rod, params)
    if root.residual > residual_tol:
        raise BacklundError(f"root residual {root.residual:.2e} exceeds {residual_tol:.1e}")
    k = root.k_covers
    nu = root.nu
    cover = repeat_cover(rod, k)
    omega = complex(omega)
    z0 = omega_initial_ratio(omega, omega_gauge)
    chi = riccati_solve(rod_kappa(params), nu, z0, cover.s)
    spec = DoubleBTSpec(nu=nu, tau=float(params.tau.real), omega=omega, k_covers=k)
    out = _minimal_cover(double_bt(cover, spec, chi), len(rod) - 1, k)
    meta = dict(out.meta)
    meta.update({"sigma_root": root.sigma_root, "k": k, "omega_gauge": omega_gauge})
    return out.with_updates(meta=meta)


def _minimal_cover(curve: SampledCurve, per_cover: int, k: int) -> SampledCurve:
    """Cut a ``k``-cover transform down to the fewest covers after which it closes.

    Some choices of ``omega`` close up early; keeping the retraced copy
    would make every self-distance zero.
    """
    if not curve.closed:
        return curve
    F0 = curve.frame(0)
    flip = np.diag([1.0, -1.0, -1.0])
    for j in range(1, k):
        if k % j:
            continue
        end = j * per_cover
        gap = np.linalg.norm(curve.position[end] - curve.position[0])
        if gap > CLOSURE_TOL * curve.length:
            continue
        Fj = curve.frame(end)
        for parity, G in (("even", Fj), ("odd", flip @ Fj)):
            if np.max(np.abs(G - F0)) <= 10 * CLOSURE_TOL:
                meta = dict(curve.meta)
                meta["covers_closed"] = j
                tau = curve.tau if np.ndim(curve.tau) == 0 else np.asarray(curve.tau)[:end + 1]
                return SampledCurve(s=curve.s[:end + 1], position=curve.position[:end + 1],
                                    T=curve.T[:end + 1], N=curve.N[:end + 1], B=curve.B[:end + 1],
                                    kappa=curve.kappa[:end + 1], tau=tau, closed=True,
                                    parity=parity, meta=_slice_meta(meta, end + 1))
    return curve


def _slice_meta(meta: dict, count: int) -> dict:
    out = {}
    for key, val in meta.items():
        if key == "interpolated":
            val = val[val < count]
        elif isinstance(val, np.ndarray) and val.ndim >= 1 and val.dtype != object and len(val) > count:
            val = val[:count]
        out[key] = val
    return out
