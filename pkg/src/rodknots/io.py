"""Curve files and ribbon meshes.

Curves are CSV with the header ``s,x,y,z,Tx,Ty,Tz,Nx,Ny,Nz,Bx,By,Bz,kappa,tau``,
17 significant digits and LF line endings, so a write/read round trip is
lossless.  A JSON sidecar (``<name>.json``) carries the closed flag, parity
and scalar metadata; without it both are inferred from the samples.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .curves import SampledCurve, closure_defect

__all__ = [
    "CURVE_COLUMNS",
    "CurveFormatError",
    "curve_to_csv",
    "curve_from_csv",
    "write_curve",
    "read_curve",
    "sidecar_path",
    "jsonable",
    "RibbonMesh",
    "ribbon_mesh",
    "mesh_to_obj",
    "mesh_to_ply",
    "write_mesh",
    "mesh_edge_report",
]

CURVE_COLUMNS = ("s", "x", "y", "z", "Tx", "Ty", "Tz", "Nx", "Ny", "Nz",
                 "Bx", "By", "Bz", "kappa", "tau")
FRAME_TOL = 1e-9


class CurveFormatError(ValueError):
    """Malformed curve file."""


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def curve_to_csv(curve: SampledCurve) -> str:
    tau = curve.tau_array()
    buf = _io.StringIO()
    buf.write(",".join(CURVE_COLUMNS) + "\n")
    for i in range(len(curve)):
        row = [curve.s[i], *curve.position[i], *curve.T[i], *curve.N[i], *curve.B[i],
               curve.kappa[i], tau[i]]
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def jsonable(obj):
    """Recursively convert numpy and complex values for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _infer_closure(s, pos, T, N, B, kappa) -> tuple[bool, str]:
    probe = SampledCurve(s=s, position=pos, T=T, N=N, B=B, kappa=kappa, tau=0.0)
    gap = closure_defect(probe)
    if gap.position_gap > 1e-6 * max(probe.length, 1.0):
        return False, "even"
    if gap.frame_gap <= 1e-5:
        return True, "even"
    flipped = closure_defect(probe.with_updates(closed=True, parity="odd"))
    if flipped.frame_gap <= 1e-5:
        return True, "odd"
    return False, "even"


def curve_from_csv(text: str, closed: Optional[bool] = None, parity: Optional[str] = None,
                   meta: Optional[dict] = None) -> SampledCurve:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != CURVE_COLUMNS:
        raise CurveFormatError("missing or wrong header; expected " + ",".join(CURVE_COLUMNS))
    body = [r for r in rows[1:] if r]
    if len(body) < 5:
        raise CurveFormatError("need at least 5 samples")
    try:
        data = np.array(body, dtype=float)
    except ValueError as exc:
        raise CurveFormatError(f"non-numeric entry: {exc}") from None
    if data.shape[1] != len(CURVE_COLUMNS):
        raise CurveFormatError("wrong number of columns")
    if not np.all(np.isfinite(data)):
        raise CurveFormatError("non-finite entries")
    s = data[:, 0]
    ds = np.diff(s)
    if np.any(ds <= 0) or np.ptp(ds) > 1e-6 * np.mean(ds):
        raise CurveFormatError("arclength column must be increasing and uniformly spaced")
    pos, T, N, B = data[:, 1:4], data[:, 4:7], data[:, 7:10], data[:, 10:13]
    F = np.stack([T, N, B], axis=1)
    err = np.abs(F @ np.transpose(F, (0, 2, 1)) - np.eye(3)).max()
    if err > FRAME_TOL * 10 or np.abs(np.cross(T, N) - B).max() > FRAME_TOL * 10:
        raise CurveFormatError(f"frames are not right-handed orthonormal (deviation {err:.2e})")
    step = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    if np.any(np.abs(step - ds) > 0.01 * ds):
        raise CurveFormatError("positions are not arclength-parametrized within 1%")
    kappa, tau = data[:, 13], data[:, 14]
    if np.ptp(tau) <= 1e-12 * max(1.0, abs(tau[0])):
        tau = float(tau[0])
    if closed is None or parity is None:
        c, p = _infer_closure(s, pos, T, N, B, kappa)
        closed = c if closed is None else closed
        parity = p if parity is None else parity
    return SampledCurve(s=s, position=pos, T=T, N=N, B=B, kappa=kappa, tau=tau,
                        closed=bool(closed), parity=parity, meta=dict(meta or {}))


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(".json")


def write_curve(curve: SampledCurve, path, extra: Optional[dict] = None) -> Path:
    """Write ``path`` (CSV) and its JSON sidecar; returns the sidecar path."""
    path = Path(path)
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(curve_to_csv(curve))
    meta = {k: v for k, v in curve.meta.items() if np.ndim(v) == 0 or isinstance(v, (list, tuple))}
    meta = {k: v for k, v in meta.items() if _is_plain(v)}
    side = {"closed": curve.closed, "parity": curve.parity, "length": curve.length,
            "samples": len(curve), "meta": meta}
    if extra:
        side.update(extra)
    sc = sidecar_path(path)
    with open(sc, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(jsonable(side), indent=2, sort_keys=True) + "\n")
    return sc


def _is_plain(v) -> bool:
    return isinstance(v, (int, float, complex, str, bool, list, tuple, np.number, np.bool_)) or v is None


def read_curve(path) -> tuple[SampledCurve, dict]:
    """Curve plus sidecar contents (empty dict without a sidecar)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise CurveFormatError(f"cannot read {path}: {exc}") from None
    side = {}
    sc = sidecar_path(path)
    if sc.exists():
        try:
            side = json.loads(sc.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CurveFormatError(f"bad sidecar {sc}: {exc}") from None
    curve = curve_from_csv(text, closed=side.get("closed"), parity=side.get("parity"),
                           meta=side.get("meta"))
    return curve, side


# ----------------------------------------------------------------- meshes

class RibbonMesh:
    """Triangle strip along a curve: vertices ``2 i`` and ``2 i + 1`` straddle sample ``i``."""

    def __init__(self, vertices: np.ndarray, faces: np.ndarray, closed: bool):
        self.vertices = vertices
        self.faces = faces
        self.closed = closed


def ribbon_mesh(curve: SampledCurve, width: float, direction: str = "normal") -> RibbonMesh:
    """Ribbon of total ``width`` centred on the curve.

    ``direction="normal"`` spans along ``N`` (on odd curves the strip closes
    with a half twist); ``"vertical"`` spans along the z axis.
    """
    if not width > 0 or not np.isfinite(width):
        raise ValueError("ribbon width must be positive")
    pts = curve.loop_points()
    m = len(pts)
    if direction == "normal":
        off = curve.N[:m]
    elif direction == "vertical":
        off = np.broadcast_to(np.array([0.0, 0.0, 1.0]), pts.shape)
    else:
        raise ValueError(f"unknown ribbon direction {direction!r}")
    half = 0.5 * width * off
    verts = np.empty((2 * m, 3))
    verts[0::2] = pts - half
    verts[1::2] = pts + half
    faces = []
    for i in range(m - 1):
        a, b, c, d = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        faces += [(a, c, b), (b, c, d)]
    if curve.closed:
        a, b = 2 * (m - 1), 2 * (m - 1) + 1
        c, d = (1, 0) if (direction == "normal" and curve.parity == "odd") else (0, 1)
        faces += [(a, c, b), (b, c, d)]
    return RibbonMesh(verts, np.asarray(faces, dtype=np.int64), curve.closed)


def mesh_to_obj(mesh: RibbonMesh) -> str:
    lines = [f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    return "\n".join(lines) + "\n"


def mesh_to_ply(mesh: RibbonMesh) -> str:
    head = ["ply", "format ascii 1.0", f"element vertex {len(mesh.vertices)}",
            "property double x", "property double y", "property double z",
            f"element face {len(mesh.faces)}", "property list uchar int vertex_indices",
            "end_header"]
    body = [f"{_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in mesh.vertices]
    body += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    return "\n".join(head + body) + "\n"


def write_mesh(mesh: RibbonMesh, path, fmt: Optional[str] = None) -> Path:
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt == "obj":
        text = mesh_to_obj(mesh)
    elif fmt == "ply":
        text = mesh_to_ply(mesh)
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(text)
    return path


def mesh_edge_report(mesh: RibbonMesh) -> dict:
    """Edge-use census: a valid ribbon uses every edge once (border) or twice (interior).

    A closed ribbon loop has no open ends: its border edges are exactly the
    two long sides (one loop for a half-twisted strip).
    """
    edges: dict[tuple[int, int], int] = {}
    for f in mesh.faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (min(a, b), max(a, b))
            edges[key] = edges.get(key, 0) + 1
    uses = np.array(list(edges.values()))
    border = [e for e, c in edges.items() if c == 1]
    # border edges forming cycles: every border vertex has degree 2
    deg: dict[int, int] = {}
    for a, b in border:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    border_cycles = bool(border) and all(d == 2 for d in deg.values())
    return {"edges": len(edges), "max_use": int(uses.max()), "border_edges": len(border),
            "border_is_cycles": border_cycles,
            "degenerate_faces": int(sum(len(set(map(int, f))) < 3 for f in mesh.faces))}
