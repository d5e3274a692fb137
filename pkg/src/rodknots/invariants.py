"""Ribbon and knot diagnostics for sampled closed curves.

Writhe and linking numbers are Gauss double integrals evaluated by the
midpoint rule on the sample polygon.  Self-linking follows the Pohl form
``SL = Wr + (1/2pi) int tau ds``, which for curves with inflection points is
taken as the definition.  Crossing counts and minimum self-distance use
k-d trees so that only nearby pairs are examined.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .curves import SampledCurve

__all__ = [
    "InvariantsError",
    "SelfIntersectionError",
    "DegenerateProjectionError",
    "SelfDistance",
    "min_self_distance",
    "writhe",
    "total_torsion",
    "self_linking",
    "linking",
    "LinkingCheck",
    "verify_linking_theorem",
    "CrossingCount",
    "crossing_count",
    "sphere_directions",
    "crossing_census",
    "KillingFit",
    "killing_residual_order1",
    "InvariantsReport",
    "invariants_report",
]

_BLOCK = 512


class InvariantsError(ValueError):
    pass


class SelfIntersectionError(InvariantsError):
    def __init__(self, message: str, pair: tuple[int, int]):
        super().__init__(message)
        self.pair = pair


class DegenerateProjectionError(InvariantsError):
    pass


# ---------------------------------------------------------------- polygons

def _polygon(curve: SampledCurve) -> tuple[np.ndarray, bool]:
    """Distinct vertices of the sample polygon and whether it is cyclic."""
    if curve.closed:
        return curve.loop_points(), True
    return curve.position, False


def _segments(pts: np.ndarray, cyclic: bool) -> tuple[np.ndarray, np.ndarray]:
    nxt = np.roll(pts, -1, axis=0) if cyclic else pts[1:]
    start = pts if cyclic else pts[:-1]
    return 0.5 * (start + nxt), nxt - start


def _index_gap(i, j, n, cyclic):
    d = np.abs(i - j)
    return np.minimum(d, n - d) if cyclic else d


@dataclass(frozen=True)
class SelfDistance:
    distance: float
    pair: tuple[int, int]
    window: int


def min_self_distance(curve: SampledCurve, window: Optional[int] = None) -> SelfDistance:
    """Smallest distance between samples that are far apart along the curve.

    Pairs closer than ``window`` samples (cyclically on closed curves) are
    skipped.  The default window is the arclength ``pi / max|kappa|``: two
    points of a curve with curvature at most ``kappa_max`` that are closer
    along the curve cannot sit at a local minimum of the chord length, so the
    result is the shortest doubly-critical chord (the diameter for a circle)
    or a genuine near-contact.
    """
    pts, cyclic = _polygon(curve)
    n = len(pts)
    if window is None:
        kmax = float(np.max(np.abs(curve.kappa)))
        arc = math.pi / kmax if kmax > 0 else 0.5 * curve.length
        window = max(2, int(math.floor(arc / curve.ds + 1e-9)))
    window = int(window)
    if (cyclic and window > n // 2) or (not cyclic and window >= n):
        raise InvariantsError("exclusion window covers the whole curve")
    tree = cKDTree(pts)
    r = 4.0 * curve.ds
    while True:
        pairs = tree.query_pairs(r, output_type="ndarray")
        if len(pairs):
            gap = _index_gap(pairs[:, 0], pairs[:, 1], n, cyclic)
            pairs = pairs[gap >= window]
        if len(pairs):
            d = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
            k = int(np.argmin(d))
            return SelfDistance(float(d[k]), (int(pairs[k, 0]), int(pairs[k, 1])), window)
        r *= 2.0


# ----------------------------------------------------------- Gauss integrals

def _gauss_block(args):
    m1, d1, m2, d2, rows, band, n = args
    diff = m1[rows, None, :] - m2[None, :, :]
    dist3 = np.linalg.norm(diff, axis=-1) ** 3
    cr = np.cross(d1[rows, None, :], d2[None, :, :])
    integrand = np.einsum("ijk,ijk->ij", cr, diff)
    if band is not None:
        i = rows[:, None]
        j = np.arange(len(m2))[None, :]
        integrand = np.where(_index_gap(i, j, n, True) <= band, 0.0, integrand)
        dist3 = np.where(dist3 == 0, 1.0, dist3)
    return float(np.sum(integrand / dist3))


def _gauss_sum(m1, d1, m2, d2, band=None, workers=None) -> float:
    n = len(m1)
    blocks = [np.arange(a, min(a + _BLOCK, n)) for a in range(0, n, _BLOCK)]
    args = [(m1, d1, m2, d2, rows, band, n) for rows in blocks]
    workers = workers or min(8, os.cpu_count() or 1)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(_gauss_block, args))
    else:
        parts = [_gauss_block(a) for a in args]
    # fixed summation order keeps results bit-identical across runs
    return math.fsum(parts) / (4.0 * math.pi)


def writhe(curve: SampledCurve, band: int = 2, check: bool = True) -> float:
    """Gauss self-linking integral of a closed curve.

    Midpoint rule over segment pairs, skipping ``|i - j| <= band``
    (cyclically).  With ``check`` the curve is first tested for
    self-intersection at the sample scale.
    """
    if not curve.closed:
        raise InvariantsError("writhe needs a closed curve")
    if check:
        sd = min_self_distance(curve)
        if sd.distance < curve.ds:
            raise SelfIntersectionError(
                f"curve (nearly) self-intersects: distance {sd.distance:.3e} at samples {sd.pair}", sd.pair)
    pts, _ = _polygon(curve)
    m, d = _segments(pts, True)
    return _gauss_sum(m, d, m, d, band=band)


def total_torsion(curve: SampledCurve) -> float:
    """``(1/2pi) int tau ds`` over one circuit."""
    tau = curve.tau_array()
    if curve.closed:
        integral = float(np.sum(tau[:-1]) * curve.ds)
    else:
        integral = float(np.trapezoid(tau, curve.s))
    return integral / (2.0 * math.pi)


def self_linking(curve: SampledCurve, check: bool = True) -> float:
    """``Wr + (1/2pi) int tau ds``; integer for even curves, half-integer for odd."""
    return writhe(curve, check=check) + total_torsion(curve)


def _segment_block(args):
    a0, a1, b0, b1, rows = args
    p1, p2 = a0[rows, None, :], a1[rows, None, :]
    p3, p4 = b0[None, :, :], b1[None, :, :]
    r13, r14, r23, r24 = p3 - p1, p4 - p1, p3 - p2, p4 - p2

    def unit(v):
        nv = np.linalg.norm(v, axis=-1, keepdims=True)
        return np.divide(v, nv, out=np.zeros_like(v), where=nv > 0)

    n1, n2 = unit(np.cross(r13, r14)), unit(np.cross(r14, r24))
    n3, n4 = unit(np.cross(r24, r23)), unit(np.cross(r23, r13))

    def asin_dot(u, v):
        return np.arcsin(np.clip(np.einsum("ijk,ijk->ij", u, v), -1.0, 1.0))

    omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1)
    orient = np.einsum("ijk,ijk->ij", np.cross(p4 - p3, p2 - p1), r13)
    return float(np.sum(omega * np.sign(orient)))


def _segment_sum(pa, pb, workers=None) -> float:
    """Exact Gauss integral of two closed polygons (signed solid angles of segment pairs)."""
    a0, a1 = pa, np.roll(pa, -1, axis=0)
    b0, b1 = pb, np.roll(pb, -1, axis=0)
    n = len(pa)
    blocks = [np.arange(k, min(k + _BLOCK, n)) for k in range(0, n, _BLOCK)]
    args = [(a0, a1, b0, b1, rows) for rows in blocks]
    workers = workers or min(8, os.cpu_count() or 1)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(_segment_block, args))
    else:
        parts = [_segment_block(x) for x in args]
    return math.fsum(parts) / (4.0 * math.pi)


def linking(curve1: SampledCurve, curve2: SampledCurve, method: str = "segment") -> float:
    """Gauss linking integral of two disjoint closed curves.

    ``method="segment"`` integrates exactly over each pair of polygon
    segments, so the result is the linking number of the sample polygons and
    stays accurate when the curves pass closer than the sample spacing.
    ``method="midpoint"`` is the plain midpoint double sum.
    """
    if not (curve1.closed and curve2.closed):
        raise InvariantsError("linking needs two closed curves")
    p1, _ = _polygon(curve1)
    p2, _ = _polygon(curve2)
    gap = float(cKDTree(p2).query(p1)[0].min())
    if gap == 0.0:
        raise InvariantsError("curves share a sample point")
    if method == "segment":
        return _segment_sum(p1, p2)
    if method != "midpoint":
        raise ValueError(f"unknown method {method!r}")
    if gap < 0.5 * max(curve1.ds, curve2.ds):
        raise InvariantsError(f"curves come within {gap:.3e}; midpoint sum is unreliable")
    m1, d1 = _segments(p1, True)
    m2, d2 = _segments(p2, True)
    return _gauss_sum(m1, d1, m2, d2)


# ------------------------------------------------------- the linking theorem

@dataclass(frozen=True)
class LinkingCheck:
    lk: float
    sl: float
    n: int
    residual: float
    inconclusive: bool = False
    displacement: float = 0.0
    min_self_distance: float = 0.0

    @property
    def lk_rounded(self) -> int:
        return int(round(self.lk))

    @property
    def sl_rounded(self) -> float:
        return round(2.0 * self.sl) / 2.0


def verify_linking_theorem(rod: SampledCurve, params, C: float, which: str = "plus",
                           source: str = "closed_form_rod", smallness: float = 0.25) -> LinkingCheck:
    """Compare ``Lk(rod, BT(rod))`` with ``SL(rod) - n/2``.

    ``C`` counts as small when the transformation moves every point by less
    than ``smallness`` times the rod's minimum self-distance; otherwise the
    result is flagged ``inconclusive``.
    """
    from .backlund import closed_single_bt_rod

    tau = float(np.real(params.tau))
    shift = 2.0 * abs(C) / (C * C + tau * tau)
    sd = min_self_distance(rod).distance
    bt = closed_single_bt_rod(rod, params, C, which=which, source=source)
    if not bt.closed:
        raise InvariantsError("transformed rod does not close")
    lk = linking(rod, bt)
    sl = self_linking(rod)
    n = int(params.n_periods)
    return LinkingCheck(lk=lk, sl=sl, n=n, residual=abs(lk - (sl - n / 2.0)),
                        inconclusive=not shift < smallness * sd,
                        displacement=shift, min_self_distance=sd)


# ------------------------------------------------------------------ crossings

@dataclass(frozen=True)
class CrossingCount:
    count: int
    all_same_sign: bool
    signs: tuple[int, ...] = ()
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)

    @property
    def diagram_writhe(self) -> int:
        return int(sum(self.signs))


def _plane_basis(d):
    d = d / np.linalg.norm(d)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1), d


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _count_once(pts, cyclic, direction, eps=1e-9):
    e1, e2, d = _plane_basis(np.asarray(direction, float))
    q = np.stack([pts @ e1, pts @ e2], axis=-1)
    h = pts @ d
    nxt = np.roll(np.arange(len(pts)), -1) if cyclic else np.arange(1, len(pts))
    start = np.arange(len(pts)) if cyclic else np.arange(len(pts) - 1)
    a = q[nxt] - q[start]
    mid = 0.5 * (q[nxt] + q[start])
    seg_len = np.linalg.norm(a, axis=1)
    pairs = cKDTree(mid).query_pairs(float(seg_len.max()) + 1e-12, output_type="ndarray")
    nseg = len(start)
    if len(pairs):
        gap = _index_gap(pairs[:, 0], pairs[:, 1], nseg, cyclic)
        pairs = pairs[gap >= 2]
    if not len(pairs):
        return [], False
    i, j = pairs[:, 0], pairs[:, 1]
    ai, bj = a[i], a[j]
    w = q[start[j]] - q[start[i]]
    den = _cross2(ai, bj)
    scale = seg_len[i] * seg_len[j]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross2(w, bj) / den
        u = _cross2(w, ai) / den
    parallel = np.abs(den) <= eps * scale
    hit = ~parallel & (t > 0) & (t < 1) & (u > 0) & (u < 1)
    near = ~parallel & (t > -eps) & (t < 1 + eps) & (u > -eps) & (u < 1 + eps) & ~(
        (t > eps) & (t < 1 - eps) & (u > eps) & (u < 1 - eps))
    # collinear overlapping segments are degenerate too
    overlap = parallel & (np.abs(_cross2(w, ai)) <= eps * seg_len[i] * np.maximum(np.linalg.norm(w, axis=1), 1e-300))
    degenerate = bool(near.any() or (overlap & (np.linalg.norm(w, axis=1) < seg_len[i] + seg_len[j])).any())
    signs = []
    for k in np.flatnonzero(hit):
        ii, jj = i[k], j[k]
        zi = h[start[ii]] + t[k] * (h[nxt[ii]] - h[start[ii]])
        zj = h[start[jj]] + u[k] * (h[nxt[jj]] - h[start[jj]])
        if abs(zi - zj) <= eps * max(1.0, abs(zi)):
            degenerate = True
            continue
        over, under = (ai[k], bj[k]) if zi > zj else (bj[k], ai[k])
        signs.append(int(np.sign(_cross2(over, under))))
    return signs, degenerate


def crossing_count(curve: SampledCurve, direction=(0.0, 0.0, 1.0), attempts: int = 5) -> CrossingCount:
    """Crossings of the projection along ``direction`` with their signs.

    A crossing is positive when the over-strand turns counter-clockwise onto
    the under-strand as seen from ``+direction``.  Non-generic projections
    (vertex hits, tangencies, collinear overlaps, double points in space) are
    retried with a small deterministic tilt of the direction.
    """
    pts, cyclic = _polygon(curve)
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    rng = np.random.default_rng(12345)
    for attempt in range(attempts + 1):
        signs, degenerate = _count_once(pts, cyclic, d)
        if not degenerate:
            return CrossingCount(len(signs), len(set(signs)) <= 1, tuple(signs), tuple(float(x) for x in d))
        d = d + 1e-4 * rng.standard_normal(3)
        d /= np.linalg.norm(d)
    raise DegenerateProjectionError(f"projection still degenerate after {attempts} perturbations")


def sphere_directions(tilt: float = 1e-3) -> np.ndarray:
    """The 26 directions of the cube grid ``{-1,0,1}^3 \\ 0``, slightly tilted to be generic."""
    grid = np.array([(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1)
                     if (a, b, c) != (0, 0, 0)], dtype=float)
    grid += tilt * np.array([0.31, 0.57, 0.73])
    return grid / np.linalg.norm(grid, axis=1, keepdims=True)


def crossing_census(curve: SampledCurve, directions: Optional[np.ndarray] = None) -> list[CrossingCount]:
    dirs = sphere_directions() if directions is None else np.asarray(directions, float)
    return [crossing_count(curve, d) for d in dirs]


# --------------------------------------------------------- soliton residual

@dataclass(frozen=True)
class KillingFit:
    residual: float
    a0: float
    a1: float
    scale: float


def _kappa_loop(curve: SampledCurve, pad: int) -> np.ndarray:
    k = np.asarray(curve.kappa, float)
    if not curve.closed:
        return k
    core = k[:-1]
    flip = -1.0 if curve.parity == "odd" else 1.0
    return np.concatenate([flip * core[-pad:], core, flip * core[:pad]])


def _second_derivative(curve: SampledCurve) -> tuple[np.ndarray, np.ndarray]:
    h = curve.ds
    k = _kappa_loop(curve, 2)
    d2 = (-k[:-4] + 16 * k[1:-3] - 30 * k[2:-2] + 16 * k[3:-1] - k[4:]) / (12 * h * h)
    return k[2:-2], d2


def killing_residual_order1(curve: SampledCurve, a0: Optional[float] = None,
                            a1: Optional[float] = None) -> KillingFit:
    """Sup-norm of ``a0 kappa - a1 (kappa'' + kappa^3/2)`` along the curve.

    Both order-0 and order-1 binormal fields are multiples of ``B``, so the
    vector residual reduces to this scalar.  With ``a0``/``a1`` omitted the
    unit-norm pair minimizing the residual is found; ``scale`` is
    ``max|kappa|`` so residuals of differently sized curves compare.
    """
    kappa, kpp = _second_derivative(curve)
    W = kpp + 0.5 * kappa ** 3

    def res(theta):
        return float(np.max(np.abs(math.cos(theta) * kappa - math.sin(theta) * W)))

    scale = float(np.max(np.abs(kappa)))
    if a0 is not None and a1 is not None:
        return KillingFit(float(np.max(np.abs(a0 * kappa - a1 * W))), float(a0), float(a1), scale)
    thetas = np.linspace(0.0, math.pi, 721)
    vals = np.array([res(t) for t in thetas])
    k = int(np.argmin(vals))
    step = thetas[1] - thetas[0]
    best = minimize_scalar(res, bounds=(thetas[k] - step, thetas[k] + step), method="bounded",
                           options={"xatol": 1e-14})
    theta = float(best.x) if best.fun < vals[k] else float(thetas[k])
    return KillingFit(res(theta), math.cos(theta), math.sin(theta), scale)


# ----------------------------------------------------------------- reporting

@dataclass
class InvariantsReport:
    writhe: float
    total_torsion_over_2pi: float
    self_linking: float
    min_self_distance: float
    closure_gap: float
    parity: str
    linking: Optional[float] = None
    crossing_count: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "InvariantsReport":
        return cls(**json.loads(text))


def invariants_report(curve: SampledCurve, other: Optional[SampledCurve] = None,
                      crossings: bool = False) -> InvariantsReport:
    from .curves import closure_defect

    sd = min_self_distance(curve)
    wr = writhe(curve)
    tt = total_torsion(curve)
    rep = InvariantsReport(writhe=wr, total_torsion_over_2pi=tt, self_linking=wr + tt,
                           min_self_distance=sd.distance,
                           closure_gap=closure_defect(curve).position_gap, parity=curve.parity)
    if other is not None:
        rep.linking = linking(curve, other)
    if crossings:
        census = crossing_census(curve)
        counts = [c.count for c in census]
        best = census[int(np.argmin(counts))]
        rep.crossing_count = {"min": best.count, "max": int(max(counts)),
                              "all_same_sign_at_min": best.all_same_sign,
                              "per_direction": counts}
    return rep
