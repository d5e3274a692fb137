"""Associated linear systems, Riccati equations and Floquet roots.

Two gauges of the same 2x2 system are used::

    psi gauge:  psi' = 1/2 [[lam, kappa], [-kappa, -lam]] psi
    phi gauge:  phi' = 1/2 [[i kappa, lam], [lam, -i kappa]] phi

related by ``phi = A psi`` with the constant matrix :data:`GAUGE_A`.  At
``lam = -i tau`` the fundamental matrix is an SU(2) lift of the Frenet frame
of the curve with curvature ``kappa`` and torsion ``tau``.  The
Backlund parameter is ``nu = lam`` and the rod parameter ``sigma = 2 i nu``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .elliptic import EllipticDomainError, EllipticModulus, inverse_sn, jacobi, make_modulus
from .rod import RodParams, lambda_values, rod_params

__all__ = [
    "PSI_GAUGE",
    "PHI_GAUGE",
    "GAUGE_A",
    "SpectralError",
    "SpectralParam",
    "SpectralSolution",
    "FloquetRoot",
    "RootSearch",
    "EigenPair",
    "coefficient_matrix",
    "integrate_linear_system",
    "riccati_solve",
    "riccati_rod_closed_form",
    "a_from_nu",
    "transfer_matrix_rod",
    "transfer_generator",
    "eigenvectors_vpm",
    "find_floquet_roots",
    "polish_floquet_root",
    "roots_to_json",
    "su2_basis",
    "su2_to_r3",
    "frame_from_fundamental",
    "reconstruct_curve",
    "conjugate_swap",
    "rod_kappa",
]

log = logging.getLogger(__name__)

PSI_GAUGE = "psi_gauge"
PHI_GAUGE = "phi_gauge"
GAUGE_A = 0.5 * np.array([[1 - 1j, -1 - 1j], [1 - 1j, 1 + 1j]])
SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


class SpectralError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralParam:
    """The spectral parameter ``lam``, read as ``nu``, ``sigma`` or ``C``.

    ``nu`` is the same number as ``lam``; ``sigma = 2 i nu``; a real ``nu``
    is the single-transformation constant ``C``; ``lam = -i tau`` is the
    value at which the system encodes the Frenet equations.
    """

    lam: complex

    @classmethod
    def from_nu(cls, nu) -> "SpectralParam":
        return cls(complex(nu))

    @classmethod
    def from_sigma(cls, sigma) -> "SpectralParam":
        return cls(complex(sigma) / 2j)

    @classmethod
    def from_C(cls, C: float) -> "SpectralParam":
        return cls(complex(float(C)))

    @classmethod
    def from_tau(cls, tau: float) -> "SpectralParam":
        return cls(-1j * float(tau))

    @property
    def nu(self) -> complex:
        return self.lam

    @property
    def sigma(self) -> complex:
        return 2j * self.lam

    @property
    def C(self) -> float:
        if abs(self.lam.imag) > 1e-14 * max(1.0, abs(self.lam)):
            raise SpectralError(f"nu = {self.lam} is not real")
        return self.lam.real


def coefficient_matrix(kappa, lam: complex, gauge: str = PHI_GAUGE) -> np.ndarray:
    """Coefficient matrix of the linear system (vectorized over ``kappa``)."""
    k = np.asarray(kappa, dtype=complex)
    U = np.empty(k.shape + (2, 2), dtype=complex)
    if gauge == PHI_GAUGE:
        U[..., 0, 0], U[..., 0, 1] = 0.5j * k, 0.5 * lam
        U[..., 1, 0], U[..., 1, 1] = 0.5 * lam, -0.5j * k
    elif gauge == PSI_GAUGE:
        U[..., 0, 0], U[..., 0, 1] = 0.5 * lam, 0.5 * k
        U[..., 1, 0], U[..., 1, 1] = -0.5 * k, -0.5 * lam
    else:
        raise SpectralError(f"unknown gauge {gauge!r}")
    return U


def _ratio(values: np.ndarray, gauge: str) -> np.ndarray:
    a, b = values[:, 0], values[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        if gauge == PHI_GAUGE:
            return a / b
        return -a / b


def _beta_from(values: np.ndarray, gauge: str, tol: float = 1e-9) -> Optional[np.ndarray]:
    """Unwrapped single-transformation angle, when it is defined."""
    a, b = values[:, 0], values[:, 1]
    if gauge == PHI_GAUGE:
        # z = -exp(-i beta) on the unit circle
        z = _ratio(values, gauge)
        if not np.all(np.isfinite(z)) or np.max(np.abs(np.abs(z) - 1.0)) > tol:
            return None
        return -np.unwrap(np.angle(-z))
    # psi gauge: real solutions only
    scale = np.maximum(np.abs(a), np.abs(b))
    if np.max(np.abs(a.imag) + np.abs(b.imag)) > tol * np.max(scale):
        return None
    a, b = a.real, b.real
    return np.unwrap(np.arctan2(-2.0 * a * b, b * b - a * a))


@dataclass(frozen=True, eq=False)
class SpectralSolution:
    """A solution of the linear system sampled on a grid.

    ``values`` holds one 2-vector per grid point; ``fundamental`` (if present)
    the full fundamental matrix, normalized to the identity at ``grid[0]``.
    ``ratio`` is ``z = chi_1 / chi_2`` in the phi gauge and
    ``y = -psi_1 / psi_2`` in the psi gauge.
    """

    grid: np.ndarray
    values: np.ndarray
    gauge: str
    ratio: np.ndarray
    lam: complex
    beta: Optional[np.ndarray] = None
    fundamental: Optional[np.ndarray] = None

    @classmethod
    def from_values(cls, grid, values, gauge, lam, fundamental=None) -> "SpectralSolution":
        values = np.asarray(values, dtype=complex)
        return cls(grid=np.asarray(grid, dtype=float), values=values, gauge=gauge,
                   ratio=_ratio(values, gauge), lam=complex(lam),
                   beta=_beta_from(values, gauge), fundamental=fundamental)

    def combination(self, c) -> "SpectralSolution":
        """The solution ``Phi(s) c`` (needs ``fundamental``)."""
        if self.fundamental is None:
            raise SpectralError("no fundamental matrix stored")
        vals = self.fundamental @ np.asarray(c, dtype=complex)
        return SpectralSolution.from_values(self.grid, vals, self.gauge, self.lam, self.fundamental)

    def to_gauge(self, gauge: str) -> "SpectralSolution":
        if gauge == self.gauge:
            return self
        G = GAUGE_A if gauge == PHI_GAUGE else np.linalg.inv(GAUGE_A)
        vals = self.values @ G.T
        fund = None
        if self.fundamental is not None:
            fund = G @ self.fundamental @ np.linalg.inv(G)
        return SpectralSolution.from_values(self.grid, vals, gauge, self.lam, fund)

    def ode_residual(self, kappa: Callable) -> float:
        """Max of ``|v' - U v|`` by fourth-order differences (interior points)."""
        h = np.diff(self.grid)
        if not np.allclose(h, h[0], rtol=1e-9):
            raise SpectralError("residual check needs a uniform grid")
        h = h[0]
        v = self.values
        d = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
        U = coefficient_matrix(kappa(self.grid[2:-2]), self.lam, self.gauge)
        return float(np.max(np.abs(d - np.einsum("nij,nj->ni", U, v[2:-2]))))


def rod_kappa(params: RodParams) -> Callable:
    """``kappa(s) = cn(s / 2p)`` for the rod."""
    p = params.p
    m = params.modulus
    return lambda s: jacobi(np.asarray(s, dtype=float) / (2.0 * p), m).cn


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or not np.all(np.diff(grid) > 0):
        raise SpectralError("grid must be a strictly increasing 1-d array")
    return grid


def _integrate(kappa: Callable, lam: complex, grid: np.ndarray, y0: np.ndarray, gauge: str,
               rtol: float, atol: float) -> np.ndarray:
    shape = y0.shape
    lam = complex(lam)

    def rhs(t, y):
        U = coefficient_matrix(kappa(t), lam, gauge)
        return (U @ y.reshape(shape)).ravel()

    sol = solve_ivp(rhs, (grid[0], grid[-1]), y0.ravel().astype(complex), t_eval=grid,
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise SpectralError(f"integration failed: {sol.message}")
    return sol.y.T.reshape((len(grid),) + shape)


def integrate_linear_system(kappa: Callable, lam, grid, gauge: str = PHI_GAUGE,
                            rtol: float = 3e-14, atol: float = 1e-16) -> SpectralSolution:
    """Fundamental matrix with ``Phi(grid[0]) = I``.

    ``values`` is the first column; use :meth:`SpectralSolution.combination`
    for other solutions.
    """
    grid = _check_grid(grid)
    lam = complex(lam)
    if not np.isfinite(lam):
        raise SpectralError("lambda must be finite")
    fund = _integrate(kappa, lam, grid, np.eye(2, dtype=complex), gauge, rtol, atol)
    return SpectralSolution.from_values(grid, fund[:, :, 0], gauge, lam, fund)


def riccati_solve(kappa: Callable, nu, z0, grid, rtol: float = 3e-14,
                  atol: float = 1e-16) -> SpectralSolution:
    """``z = chi_1/chi_2`` for ``dz/ds = i kappa z + nu (1 - z^2) / 2``.

    The underlying 2-vector is integrated, so ``z`` may pass through
    infinity (reported as ``inf``) without special handling.
    """
    grid = _check_grid(grid)
    z0 = complex(z0)
    if np.isfinite(z0):
        chi0 = np.array([z0, 1.0], dtype=complex)
    else:
        chi0 = np.array([1.0, 0.0], dtype=complex)
    chi0 /= np.linalg.norm(chi0)
    vals = _integrate(kappa, complex(nu), grid, chi0, PHI_GAUGE, rtol, atol)
    return SpectralSolution.from_values(grid, vals, PHI_GAUGE, nu)


def conjugate_swap(sol: SpectralSolution) -> SpectralSolution:
    """``[[0, 1], [1, 0]] conj(chi)``: a solution at ``conj(nu)``."""
    if sol.gauge != PHI_GAUGE:
        raise SpectralError("the conjugate-swap symmetry is stated in the phi gauge")
    vals = np.conj(sol.values)[:, ::-1]
    return SpectralSolution.from_values(sol.grid, vals, PHI_GAUGE, np.conj(sol.lam))


# ---------------------------------------------------------------------------
# su(2) <-> R^3


def su2_basis(gauge: str = PHI_GAUGE) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrices standing for ``T, N, B`` at the identity frame."""
    if gauge == PHI_GAUGE:
        return (0.5 * np.array([[0, 1j], [1j, 0]]),
                0.5 * np.array([[0, 1], [-1, 0]], dtype=complex),
                0.5 * np.array([[-1j, 0], [0, 1j]]))
    return (0.5 * np.array([[1j, 0], [0, -1j]]),
            0.5 * np.array([[0, 1j], [1j, 0]]),
            0.5 * np.array([[0, -1], [1, 0]], dtype=complex))


def su2_to_r3(X: np.ndarray, gauge: str = PHI_GAUGE) -> np.ndarray:
    """Coordinates of (a stack of) traceless matrices in the basis of :func:`su2_basis`.

    Uses ``tr(E_i E_j) = -delta_ij / 2``; complex output when ``X`` is not in su(2).
    """
    return np.stack([-2.0 * np.einsum("...ij,ji->...", X, E) for E in su2_basis(gauge)], axis=-1)


def frame_from_fundamental(fund: np.ndarray, gauge: str = PHI_GAUGE):
    """Frenet frame rows ``(T, N, B)`` from an SU(2) fundamental matrix at ``lam = -i tau``."""
    inv = np.linalg.inv(fund)
    out = []
    for E in su2_basis(gauge):
        out.append(su2_to_r3(inv @ E @ fund, gauge).real)
    return tuple(out)


def reconstruct_curve(kappa: Callable, tau: float, grid, h: float = 1e-5,
                      gauge: str = PHI_GAUGE) -> np.ndarray:
    """Curve ``i Phi^-1 dPhi/dlam`` at ``lam = -i tau`` by a central difference in ``lam``."""
    lam0 = -1j * float(tau)
    F0 = integrate_linear_system(kappa, lam0, grid, gauge).fundamental
    Fp = integrate_linear_system(kappa, lam0 + h, grid, gauge).fundamental
    Fm = integrate_linear_system(kappa, lam0 - h, grid, gauge).fundamental
    X = 1j * np.linalg.inv(F0) @ (Fp - Fm) / (2 * h)
    return su2_to_r3(X, gauge).real


# ---------------------------------------------------------------------------
# closed forms for the rod


def riccati_rod_closed_form(params: RodParams, a, x):
    """``z_+(x) = -(dn x + i p sn x)(dn(x - a) + i p sn(x - a))``.

    Solves ``(1/2p) dz/dx = i z cn x + nu (1 - z^2)/2`` with ``z(0) = i p sn a - dn a``.
    """
    m = params.modulus
    p = m.p
    a = complex(a)
    cn_a = complex(jacobi(np.asarray(a), m).cn)
    if abs(cn_a + 1.0) < 1e-12:
        raise EllipticDomainError("cn(a) = -1 is excluded")
    x = np.asarray(x)
    t0 = jacobi(x.astype(complex), m)
    t1 = jacobi((x - a).astype(complex), m)
    return -(t0.dn + 1j * p * t0.sn) * (t1.dn + 1j * p * t1.sn)


def a_from_nu(params, nu, tol: float = 1e-12) -> complex:
    """Solve ``sn a / (1 + cn a) = 2 p nu`` for ``a`` near the origin.

    With ``u = 2 p nu`` this is ``sn a = 2u/(1+u^2)``, ``cn a = (1-u^2)/(1+u^2)``.
    A real ``nu`` gives a real ``a``.
    """
    m = params.modulus if isinstance(params, RodParams) else make_modulus(params)
    p = m.p
    nu = complex(nu)
    u = 2.0 * p * nu
    if abs(1.0 + u * u) < 1e-12:
        raise EllipticDomainError(f"2 p nu = {u} puts a at a pole of sn and cn")
    sn_t = 2.0 * u / (1.0 + u * u)
    cn_t = (1.0 - u * u) / (1.0 + u * u)
    a0 = complex(inverse_sn(sn_t, m))
    cands = [a0, 2.0 * m.K - a0, -2.0 * m.K - a0]
    scored = []
    for c in cands:
        cn_c = complex(jacobi(np.asarray(c), m).cn)
        scored.append((abs(cn_c - cn_t) > 1e-6 * max(1.0, abs(cn_t)), abs(c), c))
    scored.sort(key=lambda t: (t[0], t[1]))
    a = scored[0][2]
    for _ in range(8):
        t = jacobi(np.asarray(a), m)
        sn, cn, dn = complex(t.sn), complex(t.cn), complex(t.dn)
        if abs(dn) < 1e-14:
            break
        step = (sn / (1.0 + cn) - u) * (1.0 + cn) / dn
        a -= step
        if abs(step) < 1e-16 * max(1.0, abs(a)):
            break
    t = jacobi(np.asarray(a), m)
    err = abs(complex(t.sn) - u * (1.0 + complex(t.cn)))
    if err > tol * max(1.0, abs(u)) * 10 or abs(complex(t.cn) + 1.0) < 1e-12:
        raise EllipticDomainError(f"no solution for a found near the origin (residual {err:.2e})")
    if nu.imag == 0.0:
        a = complex(a.real, 0.0)
    return a


def transfer_generator(params: RodParams) -> np.ndarray:
    """``M = [[i c, d], [-d, -i c]]`` with ``c = (1 - 2 lambda_1)/(2 mu)``, ``d = sigma/(2 mu)``; ``M^2 = -I``."""
    mu = params.mu
    if abs(mu) < 1e-12:
        raise SpectralError("mu = 0: the transfer matrix is defective")
    c = (1.0 - 2.0 * params.lambda1) / (2.0 * mu)
    d = params.sigma / (2.0 * mu)
    return np.array([[1j * c, d], [-d, -1j * c]], dtype=complex)


def transfer_matrix_rod(params: RodParams, k: int) -> np.ndarray:
    """Closed-form square of the psi-gauge transfer matrix over ``k`` circuits.

    For ``k n`` even this is ``Psi(kL)^2 = cos(x Lambda) I + sin(x Lambda) M``
    with ``x = 2 k n K``; for ``k n`` odd it is ``(diag(1,-1) Psi(kL))^2``, the
    same matrix with the opposite sign.  (The sign in front of ``M`` goes with
    the branch of ``Lambda`` chosen in :func:`rod.compute_Lambda`.)
    """
    n = params.n_periods
    if n is None:
        raise SpectralError("params need n_periods")
    x = 2.0 * k * n * params.K
    th = x * params.Lambda
    mat = np.cos(th) * np.eye(2) + np.sin(th) * transfer_generator(params)
    return mat if (k * n) % 2 == 0 else -mat


@dataclass(frozen=True)
class EigenPair:
    psi_plus: np.ndarray
    psi_minus: np.ndarray

    @property
    def phi_plus(self) -> np.ndarray:
        return GAUGE_A @ self.psi_plus

    @property
    def phi_minus(self) -> np.ndarray:
        return GAUGE_A @ self.psi_minus


def eigenvectors_vpm(params: RodParams) -> EigenPair:
    """Eigenvectors ``v_+`` and ``v_-`` of the rod transfer matrix (psi gauge).

    ``M v_+ = -i v_+`` and ``M v_- = i v_-``, so for even ``k n`` the squared
    transfer matrix acts by ``e^{-i x Lambda}`` on ``v_+``.
    """
    mu = params.mu
    if abs(mu) < 1e-12:
        raise SpectralError("mu = 0: only one eigenvector")
    d = params.sigma / (2.0 * mu)
    e = 1j * (1.0 + (1.0 - 2.0 * params.lambda1) / (2.0 * mu))
    return EigenPair(psi_plus=np.array([-d, e]), psi_minus=np.array([e, -d]))


# ---------------------------------------------------------------------------
# Floquet roots


@dataclass(frozen=True)
class FloquetRoot:
    sigma_root: complex
    k_covers: int
    n_periods: int
    residual: float
    kind: str  # "double_root_identity_transfer" or "eigenvector_case"

    @property
    def nu(self) -> complex:
        return self.sigma_root / 2j

    def as_record(self, p: float) -> dict:
        return {"p": p, "n": self.n_periods, "k": self.k_covers,
                "sigma_re": self.sigma_root.real, "sigma_im": self.sigma_root.imag,
                "residual": self.residual}


@dataclass(frozen=True)
class RootSearch:
    """Roots found plus bookkeeping on the seeds."""

    roots: tuple
    p: float
    n: int
    k: int
    seeds: int
    converged: int
    diagnostics: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def _floquet_function(m: EllipticModulus, kn: int):
    return lambda s: np.sin(kn * m.K * lambda_values(m, s))


def _classify(m: EllipticModulus, sig: complex, n: int, k: int) -> Optional[str]:
    params = rod_params(m, sig, n_periods=n)
    try:
        M = transfer_generator(params)
    except SpectralError:
        return None
    th = k * n * m.K * params.Lambda
    # Psi(kL) = +-(cos th I + sin th M): a multiple of I iff sin th M vanishes
    offdiag = abs(np.sin(th)) * np.max(np.abs(M))
    return "double_root_identity_transfer" if offdiag < 1e-8 else "eigenvector_case"


def polish_floquet_root(params_base, sigma0: complex, k: int, n: Optional[int] = None,
                        max_iter: int = 60, residual_tol: float = 1e-10) -> FloquetRoot:
    """Newton's method on ``sin(k n K Lambda)`` from a single seed ``sigma0``."""
    if isinstance(params_base, RodParams):
        m = params_base.modulus
        n = params_base.n_periods if n is None else n
    else:
        m = make_modulus(float(params_base))
    if n is None or n <= 0 or k <= 0:
        raise SpectralError("need positive n and k")
    f = _floquet_function(m, k * n)
    s = np.array([complex(sigma0)])
    h = 1e-7
    for _ in range(max_iter):
        with np.errstate(all="ignore"):
            step = f(s) / ((f(s + h) - f(s - h)) / (2 * h))
        if not np.isfinite(step[0]):
            raise SpectralError(f"Newton iteration broke down near sigma = {s[0]:.6g}")
        s = s - step
        if abs(step[0]) < 1e-15 * max(1.0, abs(s[0])):
            break
    res = float(np.abs(f(s))[0])
    if not res < residual_tol:
        raise SpectralError(f"no Floquet root near {complex(sigma0):.6g} (residual {res:.2e})")
    kind = _classify(m, complex(s[0]), n, k)
    if kind is None:
        raise SpectralError("converged onto the branch point mu = 0")
    return FloquetRoot(sigma_root=complex(s[0]), k_covers=k, n_periods=n, residual=res, kind=kind)


def find_floquet_roots(params_base, n: Optional[int] = None, k: int = 2,
                       search_box: Sequence[float] = (0.05, 3.0, 0.05, 3.0),
                       grid: int = 20, max_iter: int = 60, residual_tol: float = 1e-10,
                       dedupe: float = 1e-6) -> RootSearch:
    """Zeros of ``sin(k n K Lambda(sigma))`` in a first-quadrant box.

    ``params_base`` is a :class:`RodParams` (``n`` taken from it) or a modulus
    ``p``.  Newton's method runs from a ``grid x grid`` lattice of seeds plus
    a few seeds near ``p'/p + i``; derivatives are central differences, which
    is fine because the function is analytic.  ``search_box`` is
    ``(re_min, re_max, im_min, im_max)``.
    """
    if isinstance(params_base, RodParams):
        m = params_base.modulus
        n = params_base.n_periods if n is None else n
    else:
        m = make_modulus(float(params_base))
    if n is None or n <= 0 or k <= 0:
        raise SpectralError("need positive n and k")
    r0, r1, i0, i1 = map(float, search_box)
    if r0 < 0 or i0 < 0 or r1 <= r0 or i1 <= i0:
        raise SpectralError("search box must be a rectangle in the first quadrant")
    kn = k * n
    f = _floquet_function(m, kn)
    s = (np.linspace(r0, r1, grid)[:, None] + 1j * np.linspace(i0, i1, grid)[None, :]).ravel()
    branch = m.p_prime / m.p + 1j
    near = branch + 0.05 * np.exp(2j * np.pi * np.arange(8) / 8) * np.array([1, 2, 3, 4] * 2)
    s = np.concatenate([s, near])
    active = np.ones(s.shape, bool)
    h = 1e-7
    for _ in range(max_iter):
        if not active.any():
            break
        sa = s[active]
        with np.errstate(all="ignore"):
            step = f(sa) / ((f(sa + h) - f(sa - h)) / (2 * h))
        bad = ~np.isfinite(step) | (np.abs(step) > 10.0)
        step = np.where(bad, 0.0, step)
        new = sa - step
        done = bad | (np.abs(step) < 1e-15 * np.maximum(1.0, np.abs(new)))
        s[active] = new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    with np.errstate(all="ignore"):
        res = np.abs(f(s))
    ok = (np.isfinite(res) & (res < residual_tol) & (s.real >= r0) & (s.real <= r1)
          & (s.imag >= i0) & (s.imag <= i1) & (np.abs(s - branch) > 1e-6))
    roots: list[FloquetRoot] = []
    for sig, r in sorted(zip(s[ok], res[ok]), key=lambda t: (t[0].real, t[0].imag)):
        if any(abs(sig - q.sigma_root) < dedupe for q in roots):
            continue
        kind = _classify(m, sig, n, k)
        if kind is None:
            continue
        roots.append(FloquetRoot(sigma_root=complex(sig), k_covers=k, n_periods=n,
                                 residual=float(r), kind=kind))
    diag = {"box": (r0, r1, i0, i1), "unconverged": int((~ok).sum())}
    if not roots:
        log.warning("no Floquet roots found for p=%.6g n=%d k=%d: %s", m.p, n, k, diag)
    return RootSearch(roots=tuple(roots), p=m.p, n=n, k=k, seeds=len(s),
                      converged=int(ok.sum()), diagnostics=diag)


def roots_to_json(search: RootSearch | Iterable[FloquetRoot], p: Optional[float] = None) -> str:
    """JSON list of ``{p, n, k, sigma_re, sigma_im, residual}`` records."""
    if isinstance(search, RootSearch):
        p = search.p
    if p is None:
        raise SpectralError("p is required")
    return json.dumps([r.as_record(float(p)) for r in search], indent=2)
