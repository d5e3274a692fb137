"""Arclength-sampled space curves with Frenet frames.

A :class:`SampledCurve` stores ``count + 1`` samples from ``s = 0`` to
``s = L`` inclusive.  For closed curves the last sample repeats the first
point; for odd curves its ``N``, ``B`` and ``kappa`` carry the sign flip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.signal import savgol_filter

__all__ = [
    "SampledCurve",
    "ClosureDefect",
    "GeometryEstimate",
    "frames_orthonormalize",
    "frenet_matrix",
    "integrate_frenet",
    "measure_geometry",
    "closure_defect",
    "resample",
    "repeat_cover",
]


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Arclength-parametrized curve with a (generalized) Frenet frame.

    Attributes
    ----------
    s : (M,) array
        Arclength of each sample, from 0 to ``length``.
    position, T, N, B : (M, 3) arrays
    kappa : (M,) array
        Signed curvature; may change sign at inflections.
    tau : float or (M,) array
        Torsion (a float for constant-torsion curves).
    closed : bool
        Whether the last sample closes up onto the first.
    parity : {"even", "odd"}
        Frame periodicity class of a closed curve.
    """

    s: np.ndarray
    position: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: np.ndarray
    tau: float | np.ndarray
    closed: bool = False
    parity: str = "even"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        for name in ("s", "position", "T", "N", "B", "kappa"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def length(self) -> float:
        return float(self.s[-1] - self.s[0])

    @property
    def ds(self) -> float:
        return self.length / (len(self.s) - 1)

    def __len__(self) -> int:
        return len(self.s)

    def loop_points(self) -> np.ndarray:
        """Positions with the duplicated closing sample dropped."""
        return self.position[:-1] if self.closed else self.position

    def frame(self, i: int) -> np.ndarray:
        """3x3 matrix with rows ``T, N, B`` at sample ``i``."""
        return np.stack([self.T[i], self.N[i], self.B[i]])

    def tau_array(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.tau, dtype=float), self.s.shape)

    def with_updates(self, **kw) -> "SampledCurve":
        data = {name: getattr(self, name) for name in
                ("s", "position", "T", "N", "B", "kappa", "tau", "closed", "parity", "meta")}
        data.update(kw)
        return SampledCurve(**data)

    def transformed(self, rotation: np.ndarray, shift=(0.0, 0.0, 0.0)) -> "SampledCurve":
        """Apply a rigid motion ``x -> R x + shift``; an improper ``R`` flips the torsion."""
        R = np.asarray(rotation, dtype=float)
        det = float(np.sign(np.linalg.det(R)))
        return self.with_updates(
            position=self.position @ R.T + np.asarray(shift, dtype=float),
            T=self.T @ R.T,
            N=self.N @ R.T,
            B=det * (self.B @ R.T),
            tau=det * np.asarray(self.tau) if np.ndim(self.tau) else float(det * self.tau),
        )


def frames_orthonormalize(T, N, B):
    """Project each triad onto SO(3) (polar decomposition via SVD)."""
    F = np.stack([T, N, B], axis=-2)
    U, _, Vt = np.linalg.svd(F)
    Q = U @ Vt
    return Q[..., 0, :], Q[..., 1, :], Q[..., 2, :]


def frenet_matrix(kappa, tau):
    """Generator ``A`` with ``d/ds [T;N;B] = A [T;N;B]``."""
    kappa = np.asarray(kappa, dtype=float)
    A = np.zeros(kappa.shape + (3, 3))
    A[..., 0, 1] = kappa
    A[..., 1, 0] = -kappa
    A[..., 1, 2] = tau
    A[..., 2, 1] = -tau
    return A


def integrate_frenet(kappa: Callable[[np.ndarray], np.ndarray], tau: float, length: float,
                     step_count: int, closed: bool = False, parity: str = "even") -> SampledCurve:
    """Integrate the Frenet equations with classical RK4 on a uniform grid.

    The frame starts at the identity triad and the origin; after every step
    the frame is projected back onto SO(3).
    """
    if step_count < 100:
        raise ValueError("step_count must be at least 100")
    if not np.isfinite(tau) or not np.isfinite(length) or length <= 0:
        raise ValueError("tau must be finite and length positive")
    h = length / step_count
    s = np.linspace(0.0, length, step_count + 1)
    k_nodes = np.asarray(kappa(s), dtype=float)
    k_mid = np.asarray(kappa(s[:-1] + 0.5 * h), dtype=float)
    F = np.eye(3)
    x = np.zeros(3)
    frames = np.empty((step_count + 1, 3, 3))
    pos = np.empty((step_count + 1, 3))
    frames[0], pos[0] = F, x
    A0 = frenet_matrix(k_nodes, tau)
    Am = frenet_matrix(k_mid, tau)
    for i in range(step_count):
        a0, am, a1 = A0[i], Am[i], A0[i + 1]
        k1 = a0 @ F
        k2 = am @ (F + 0.5 * h * k1)
        k3 = am @ (F + 0.5 * h * k2)
        k4 = a1 @ (F + h * k3)
        # position integrates the T row of the same stages
        x = x + h / 6.0 * (F[0] + 2 * (F[0] + 0.5 * h * k1[0]) + 2 * (F[0] + 0.5 * h * k2[0])
                           + (F[0] + h * k3[0]))
        F = F + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        U, _, Vt = np.linalg.svd(F)
        F = U @ Vt
        frames[i + 1], pos[i + 1] = F, x
    return SampledCurve(s=s, position=pos, T=frames[:, 0], N=frames[:, 1], B=frames[:, 2],
                        kappa=k_nodes, tau=float(tau), closed=closed, parity=parity)


@dataclass(frozen=True)
class GeometryEstimate:
    """Finite-difference curvature and torsion; ``reliable`` masks inflection zones."""

    kappa: np.ndarray
    tau: np.ndarray
    reliable: np.ndarray
    speed: np.ndarray


# Savitzky-Golay window and polynomial degree for measured derivatives
SG_WINDOW = 11
SG_ORDER = 6


def measure_geometry(curve: SampledCurve, kappa_floor: float = 0.05,
                     window: int = SG_WINDOW, order: int = SG_ORDER) -> GeometryEstimate:
    """Curvature and torsion from positions alone.

    Derivatives come from local least-squares polynomial fits (Savitzky-Golay,
    ``window`` points, degree ``order``), which behave like high-order central
    differences in the interior but average away round-off in the positions.
    Closed curves wrap around the seam; open curves fit the end windows
    one-sidedly.  Curvature is signed by the stored normal ``N``.  Samples
    where ``|kappa| < kappa_floor`` get ``reliable = False`` (torsion there
    divides by ~kappa^2).
    """
    if len(curve) < window:
        raise ValueError(f"need at least {window} samples")
    periodic = curve.closed
    pts = curve.loop_points() if periodic else curve.position
    mode = "wrap" if periodic else "interp"
    d1, d2, d3 = (savgol_filter(pts, window, order, deriv=j, delta=curve.ds, axis=0, mode=mode)
                  for j in (1, 2, 3))
    cross = np.cross(d1, d2)
    speed = np.linalg.norm(d1, axis=-1)
    kmag = np.linalg.norm(cross, axis=-1) / speed ** 3
    normals = curve.N[:-1] if periodic else curve.N
    sign = np.sign(np.einsum("ij,ij->i", d2, normals))
    sign[sign == 0] = 1.0
    kappa = sign * kmag
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.einsum("ij,ij->i", cross, d3) / np.einsum("ij,ij->i", cross, cross)
    reliable = np.isfinite(tau) & (kmag >= kappa_floor)
    if periodic:
        # repeat the closing sample (with the odd-curve sign flip)
        flip = -1.0 if curve.parity == "odd" else 1.0
        kappa = np.append(kappa, flip * kappa[0])
        tau = np.append(tau, tau[0])
        reliable = np.append(reliable, reliable[0])
        speed = np.append(speed, speed[0])
    return GeometryEstimate(kappa=kappa, tau=tau, reliable=reliable, speed=speed)


@dataclass(frozen=True)
class ClosureDefect:
    position_gap: float
    frame_gap: float


def closure_defect(curve: SampledCurve) -> ClosureDefect:
    """Gap between the two ends of a curve meant to close.

    ``frame_gap`` is the largest entry of ``F(L) - F(0)`` after undoing the
    sign flip of ``N`` and ``B`` on odd curves.
    """
    gap = float(np.linalg.norm(curve.position[-1] - curve.position[0]))
    F0, F1 = curve.frame(0), curve.frame(-1)
    if curve.parity == "odd":
        F1 = np.diag([1.0, -1.0, -1.0]) @ F1
    return ClosureDefect(position_gap=gap, frame_gap=float(np.max(np.abs(F1 - F0))))


def resample(curve: SampledCurve, count: int) -> SampledCurve:
    """Linear re-interpolation onto ``count + 1`` equally spaced arclengths."""
    s_new = np.linspace(curve.s[0], curve.s[-1], count + 1)

    def interp(arr):
        return np.stack([np.interp(s_new, curve.s, arr[:, j]) for j in range(arr.shape[1])], axis=-1)

    T, N, B = frames_orthonormalize(interp(curve.T), interp(curve.N), interp(curve.B))
    tau = curve.tau if np.ndim(curve.tau) == 0 else np.interp(s_new, curve.s, curve.tau)
    return curve.with_updates(s=s_new, position=interp(curve.position), T=T, N=N, B=B,
                              kappa=np.interp(s_new, curve.s, curve.kappa), tau=tau)


def repeat_cover(curve: SampledCurve, k: int) -> SampledCurve:
    """The closed curve traversed ``k`` times, as one sampled curve of length ``k L``.

    On odd curves ``N``, ``B`` and ``kappa`` change sign on every other
    circuit, so the result is odd exactly when ``k`` is odd.
    """
    if not curve.closed:
        raise ValueError("only closed curves can be covered")
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return curve
    M = len(curve) - 1
    L = curve.length
    flip = -1.0 if curve.parity == "odd" else 1.0
    parts = {name: [] for name in ("s", "position", "T", "N", "B", "kappa")}
    for j in range(k):
        stop = M + 1 if j == k - 1 else M
        sgn = flip ** j
        parts["s"].append(curve.s[:stop] + j * L)
        parts["position"].append(curve.position[:stop])
        parts["T"].append(curve.T[:stop])
        parts["N"].append(sgn * curve.N[:stop])
        parts["B"].append(sgn * curve.B[:stop])
        parts["kappa"].append(sgn * curve.kappa[:stop])
    tau = curve.tau if np.ndim(curve.tau) == 0 else np.concatenate(
        [np.asarray(curve.tau)[:M]] * (k - 1) + [np.asarray(curve.tau)])
    parity = "odd" if (curve.parity == "odd" and k % 2 == 1) else "even"
    meta = dict(curve.meta)
    meta["covers"] = k * meta.get("covers", 1)
    meta.pop("x", None)
    return SampledCurve(tau=tau, closed=True, parity=parity, meta=meta,
                        **{name: np.concatenate(v) for name, v in parts.items()})
