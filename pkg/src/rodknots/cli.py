"""Command-line driver: ``rodknots <command> [options]``.

Commands
--------
rod         build a closed (m, n) torus-knot elastic rod
bt          single transformation of a rod (closed, eigenvector data) or of a curve file
bt2         closed double transformation at a Floquet root
roots       Floquet roots in the complex sigma plane
invariants  writhe, self-linking, linking, crossings of curve files
export      OBJ/PLY ribbon mesh of a curve file

Exit codes: 0 ok, 2 domain error, 3 bad input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import cmath
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import backlund, curves, invariants, rod, spectral
from .elliptic import EllipticDomainError, EllipticPoleError
from .io import (CurveFormatError, jsonable, read_curve, ribbon_mesh, write_curve, write_mesh)

__all__ = ["JobConfig", "main", "build_parser", "EXIT_OK", "EXIT_DOMAIN", "EXIT_INPUT", "EXIT_NUMERIC"]

log = logging.getLogger("rodknots")

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4


class InputError(ValueError):
    pass


@dataclass
class JobConfig:
    """A command name and its parameters; stored as JSON next to the outputs."""

    command: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "JobConfig":
        data = json.loads(text)
        if not isinstance(data, dict) or "command" not in data:
            raise InputError("config needs a 'command' entry")
        return cls(command=str(data["command"]), params=dict(data.get("params", {})))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "JobConfig":
        try:
            return cls.from_json(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _out_path(prefix: str, suffix: str) -> Path:
    p = Path(prefix)
    if p.suffix:
        p = p.with_suffix("")
    p.parent.mkdir(parents=True, exist_ok=True)
    return p.with_name(p.name + suffix)


def _samples_per_period(params: rod.RodParams, samples: int) -> int:
    """Samples per ``2K`` period for ``samples`` along the closed rod."""
    return max(8, int(round(samples / params.n_periods)))


def _rod_summary(params: rod.RodParams, built: curves.SampledCurve) -> dict:
    gap = curves.closure_defect(built)
    return {"p": params.p, "sigma": params.sigma, "tau": params.tau, "Lambda": params.Lambda,
            "dtheta_over_2pi": rod.dtheta_fraction(params.p), "n_periods": params.n_periods,
            "torus_type": list(params.torus_type) if params.torus_type else None,
            "length": built.length, "parity": built.parity,
            "closure": {"position_gap": gap.position_gap, "frame_gap": gap.frame_gap}}


def _write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")


def _build_rod(m: int, n: int, samples: int):
    params = rod.find_torus_rod(m, n)
    built = rod.build_rod(m, n, _samples_per_period(params, samples), params=params)
    return params, built


# ------------------------------------------------------------------ commands

def cmd_rod(a) -> int:
    params, built = _build_rod(a.m, a.n, a.samples)
    csv_path = _out_path(a.out, ".csv")
    summary = _rod_summary(params, built)
    write_curve(built, csv_path, extra={"rod": summary})
    _write_json(_out_path(a.out, ".rod.json"), summary)
    print(f"p = {params.p:.10f}  sigma = {params.sigma.real:.10f}  "
          f"dtheta/2pi = {summary['dtheta_over_2pi']:.10f}  -> {csv_path}")
    return EXIT_OK


def cmd_bt(a) -> int:
    if a.curve:
        curve, _ = read_curve(a.curve)
        if np.ndim(curve.tau) != 0:
            raise InputError("input curve must have constant torsion")
        beta = backlund.solve_beta(backlund.curvature_function(curve), a.C, a.beta0, curve.s)
        out = backlund.single_bt(curve, backlund.SingleBTSpec(a.C, float(curve.tau), a.beta0), beta,
                                 residual_tol=max(1e-8, 50 * curve.ds ** 4))
        extra = {"C": a.C, "beta0": a.beta0, "source": str(a.curve)}
    else:
        if a.m is None or a.n is None:
            raise InputError("give --curve or both --m and --n")
        params, built = _build_rod(a.m, a.n, a.samples)
        out = backlund.closed_single_bt_rod(built, params, a.C, which=a.branch, source=a.source)
        extra = {"C": a.C, "branch": a.branch, "a": out.meta.get("a"), "rod": _rod_summary(params, built)}
    csv_path = _out_path(a.out, ".csv")
    write_curve(out, csv_path, extra={"transform": extra})
    print(f"closed = {out.closed}  length = {out.length:.10f}  -> {csv_path}")
    return EXIT_OK


def _omega(a) -> complex:
    return a.omega_abs * cmath.exp(1j * a.omega_arg)


def cmd_bt2(a) -> int:
    params, built = _build_rod(a.m, a.n, a.samples)
    root = spectral.polish_floquet_root(params, complex(a.sigma_re, a.sigma_im), a.k)
    if abs(root.sigma_root - complex(a.sigma_re, a.sigma_im)) > a.seed_radius:
        raise ArithmeticError(f"Newton moved from the seed to {root.sigma_root:.6g}; "
                              f"give a closer --sigma-re/--sigma-im")
    gauge = {"psi": spectral.PSI_GAUGE, "phi": spectral.PHI_GAUGE}[a.omega_gauge]
    out = backlund.closed_double_bt(built, params, root, _omega(a), omega_gauge=gauge)
    csv_path = _out_path(a.out, ".csv")
    sd = invariants.min_self_distance(out)
    extra = {"sigma_root": root.sigma_root, "k": a.k, "omega": _omega(a), "omega_gauge": a.omega_gauge,
             "root_kind": root.kind, "min_self_distance": sd.distance,
             "min_self_distance_pair": list(sd.pair), "rod": _rod_summary(params, built)}
    write_curve(out, csv_path, extra={"transform": extra})
    print(f"sigma = {root.sigma_root:.10f}  closed = {out.closed}  "
          f"min self-distance = {sd.distance:.4g}  -> {csv_path}")
    return EXIT_OK


def cmd_roots(a) -> int:
    if a.p is not None:
        if a.n is None:
            raise InputError("--p needs --n")
        base, n = a.p, a.n
    else:
        if a.m is None or a.n is None:
            raise InputError("give --m and --n, or --p and --n")
        base, n = rod.find_torus_rod(a.m, a.n), None
    found = spectral.find_floquet_roots(base, n=n, k=a.k, search_box=a.box, grid=a.grid)
    records = [dict(r.as_record(found.p), kind=r.kind) for r in found]
    text = json.dumps(jsonable({"p": found.p, "n": found.n, "k": found.k, "roots": records,
                                "seeds": found.seeds, "converged": found.converged}),
                      indent=2, sort_keys=True) + "\n"
    if a.out:
        path = _out_path(a.out, ".json")
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_invariants(a) -> int:
    if a.pair:
        first, side = read_curve(a.pair[0])
        second, _ = read_curve(a.pair[1])
        rep = invariants.invariants_report(first, second, crossings=a.crossings)
        n = a.n_periods
        if n is None:
            n = (side.get("rod") or {}).get("n_periods")
        if n is not None:
            rep.extra["n_periods"] = n
            rep.extra["theorem_residual"] = abs(rep.linking - (rep.self_linking - n / 2.0))
    elif a.curve:
        first, _ = read_curve(a.curve)
        rep = invariants.invariants_report(first, crossings=a.crossings)
    else:
        raise InputError("give --curve or --pair")
    text = rep.to_json() + "\n"
    if a.out:
        path = _out_path(a.out, ".json")
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_export(a) -> int:
    curve, _ = read_curve(a.curve)
    if not a.width > 0:
        raise InputError("--width must be positive")
    mesh = ribbon_mesh(curve, a.width, a.direction)
    out = Path(a.out)
    if not out.suffix:
        out = out.with_suffix("." + a.format)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_mesh(mesh, out, a.format)
    print(f"{len(mesh.vertices)} vertices, {len(mesh.faces)} faces -> {out}")
    return EXIT_OK


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rodknots", description=__doc__.split("\n\n")[0],
                 formatter_class=argparse.RawDescriptionHelpFormatter,
                 epilog="Exit codes: 0 ok, 2 domain error, 3 bad input, 4 numerical failure.")
    ap.add_argument("--config", help="JSON job config {command, params}; params fill in options")
    ap.add_argument("--save-config", help="write the resolved job config to this file")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("rod", help="closed torus-knot elastic rod")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=4000, help="samples along the closed rod")
    p.add_argument("--out", default="rod")
    p.set_defaults(func=cmd_rod)

    p = sub.add_parser("bt", help="single transformation")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--curve", help="constant-torsion curve CSV (instead of --m/--n)")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--branch", choices=("plus", "minus"), default="plus")
    p.add_argument("--source", choices=("closed_form_rod", "ode"), default="closed_form_rod")
    p.add_argument("--beta0", type=float, default=0.0, help="initial angle for --curve input")
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--out", default="bt")
    p.set_defaults(func=cmd_bt)

    p = sub.add_parser("bt2", help="closed double transformation at a Floquet root")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sigma-re", type=float, required=True)
    p.add_argument("--sigma-im", type=float, required=True)
    p.add_argument("--seed-radius", type=float, default=0.05,
                   help="largest allowed distance between the seed and the polished root")
    p.add_argument("--omega-abs", type=float, default=1.0)
    p.add_argument("--omega-arg", type=float, default=0.0, help="argument of omega in radians")
    p.add_argument("--omega-gauge", choices=("psi", "phi"), default="psi")
    p.add_argument("--samples", type=int, default=4000, help="samples per circuit of the rod")
    p.add_argument("--out", default="bt2")
    p.set_defaults(func=cmd_bt2)

    p = sub.add_parser("roots", help="Floquet roots")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, help="modulus (instead of --m)")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--box", type=float, nargs=4, default=(0.05, 3.0, 0.05, 3.0),
                   metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("invariants", help="writhe, self-linking, linking, crossings")
    p.add_argument("--curve")
    p.add_argument("--pair", nargs=2, metavar=("CURVE", "OTHER"))
    p.add_argument("--n-periods", type=int, help="period count for the Lk = SL - n/2 check")
    p.add_argument("--crossings", action="store_true", help="crossing census over 26 directions")
    p.add_argument("--out")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("export", help="ribbon mesh")
    p.add_argument("--curve", required=True)
    p.add_argument("--format", choices=("obj", "ply"), default="obj")
    p.add_argument("--width", type=float, default=0.1)
    p.add_argument("--direction", choices=("normal", "vertical"), default="normal")
    p.add_argument("--out", default="ribbon")
    p.set_defaults(func=cmd_export)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Turn ``--config`` contents into command-line tokens placed before explicit options."""
    # scan by hand: a full parse would read option values as the command
    config = None
    for i, t in enumerate(argv):
        if t == "--config":
            if i + 1 >= len(argv):
                raise InputError("--config needs a path")
            config = argv[i + 1]
        elif t.startswith("--config="):
            config = t.split("=", 1)[1]
    if config is None:
        return argv
    cfg = JobConfig.load(config)
    tokens = [cfg.command]
    for key, val in cfg.params.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                tokens.append(flag)
        elif isinstance(val, (list, tuple)):
            tokens += [flag, *map(str, val)]
        elif val is not None:
            tokens += [flag, str(val)]
    rest = [t for t in argv if t != cfg.command]
    head = []
    it = iter(rest)
    for t in it:
        if t in ("--config", "--save-config"):
            head += [t, next(it, "")]
        elif t.startswith(("--config=", "--save-config=")):
            head.append(t)
        elif t in ("-v", "--verbose"):
            head.append(t)
        else:
            tokens.append(t)
    return head + tokens


def _resolved_config(a) -> JobConfig:
    skip = {"func", "command", "config", "save_config", "verbose"}
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(a).items() if k not in skip}
    return JobConfig(command=a.command, params=params)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        argv = _apply_config(ap, argv)
    except InputError as exc:
        print(f"rodknots: {exc}", file=sys.stderr)
        return EXIT_INPUT
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not a.command:
        ap.print_help()
        return EXIT_INPUT
    if a.save_config:
        _resolved_config(a).save(a.save_config)
    try:
        return a.func(a)
    except (rod.UnrealizableTorusKnot, rod.RodError, EllipticDomainError) as exc:
        print(f"rodknots: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InputError, CurveFormatError, OSError) as exc:
        print(f"rodknots: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, spectral.SpectralError, backlund.BacklundError,
            invariants.InvariantsError, EllipticPoleError, np.linalg.LinAlgError) as exc:
        print(f"rodknots: numerical failure: {exc}", file=sys.stderr)
        if isinstance(exc, backlund.SingularPointError):
            print(f"rodknots: singular samples: {list(exc.locations)[:20]}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"rodknots: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
