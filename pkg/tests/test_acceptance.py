"""Acceptance checks with one PASS/FAIL line per criterion.

Run ``python tests/test_acceptance.py`` for the report alone.  Under pytest
every clause is its own test and the report is printed in the terminal
summary.  Clauses that are contradicted by the mathematics are kept exactly
as stated and fail; the decisions ledger explains each one.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pytest

from rodknots.backlund import (SingleBTSpec, case_a_double_bt, closed_double_bt, closed_single_bt_rod,
                               single_bt, solve_beta)
from rodknots.curves import integrate_frenet, measure_geometry
from rodknots.elliptic import IDENTITY_TOL, LEGENDRE_TOL, identity_residuals, jacobi, make_modulus
from rodknots.invariants import crossing_census, killing_residual_order1, min_self_distance, verify_linking_theorem
from rodknots.rod import build_rod, find_torus_rod, p_max, rod_curvature, rod_frame
from rodknots.spectral import a_from_nu, find_floquet_roots, riccati_rod_closed_form

# closing length L is sampled with 4000 points
SAMPLES = 4000
TORSION_TOL = 1e-4
SPEED_TOL = 1e-6


@dataclass(frozen=True)
class Clause:
    name: str
    ok: bool
    detail: str


TITLES = {
    1: "torus-rod moduli",
    2: "p_max",
    3: "Floquet roots",
    4: "single transformation properties",
    5: "congruence of closed transformations",
    6: "closed-form angle and Riccati identity",
    7: "linking theorem",
    8: "knotting phenomenology",
    9: "order-1 soliton residual",
    10: "numerical hygiene",
}


@lru_cache(maxsize=None)
def rod(m, n, samples=SAMPLES):
    P = find_torus_rod(m, n)
    return P, build_rod(m, n, max(8, round(samples / n)), params=P)


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


def kappa_error(curve, want):
    return float(np.max(np.abs(measure_geometry(curve).kappa - want)))


def torsion_speed(curve, tau):
    g = measure_geometry(curve)
    return float(np.max(np.abs(g.tau[g.reliable] - tau))), float(np.max(np.abs(g.speed - 1)))


# -- the criteria ----------------------------------------------------------------

def criterion_1():
    out = []
    for mn, want in (((1, 3), 0.63093), ((2, 5), 0.7845)):
        P, dt = timed(find_torus_rod, *mn)
        out.append(Clause(f"modulus {mn}", abs(P.p - want) <= 5e-4,
                          f"p = {P.p:.7f}, expected {want} +- 5e-4"))
        out.append(Clause(f"runtime {mn}", dt < 10, f"{dt:.2f} s"))
    return out


def criterion_2():
    val, dt = timed(p_max)
    return [Clause("zero of 2E/K - 1", abs(val - 0.9089085) <= 1e-6, f"p_max = {val:.9f}"),
            Clause("runtime", dt < 1, f"{dt:.3f} s")]


def _near(roots, target, tol=2e-3):
    best = min(roots, key=lambda r: abs(r.sigma_root - target))
    s = best.sigma_root
    return abs(s.real - target.real) <= tol and abs(s.imag - target.imag) <= tol, s


def criterion_3():
    t0 = time.perf_counter()
    P13 = find_torus_rod(1, 3)
    found = {k: find_floquet_roots(P13, k=k) for k in (2, 4, 8)}
    out = []
    ok, s = _near(found[4], 1.2283 + 0.9688j)
    out.append(Clause("(1,3) k=4 root", ok, f"closest sigma = {s:.5f}"))
    r25 = find_floquet_roots(find_torus_rod(2, 5), k=2)
    for target in (0.8982 + 0.8714j, 0.8821 + 0.6716j, 0.9067 + 0.9697j):
        ok, s = _near(r25, target)
        out.append(Clause(f"(2,5) k=2 root {target:.4f}", ok, f"closest sigma = {s:.5f}"))
    seen, new = [], []
    for k in (2, 4, 8):
        fresh = [r for r in found[k] if all(abs(r.sigma_root - q) > 1e-6 for q in seen)]
        new.append(len(fresh))
        seen += [r.sigma_root for r in found[k]]
    out.append(Clause("new roots at k = 2/4/8", new == [1, 2, 4], f"{new[0]}/{new[1]}/{new[2]}"))
    dt = time.perf_counter() - t0
    out.append(Clause("runtime", dt < 120, f"{dt:.1f} s"))
    return out


def _helix(kappa0, tau, length):
    return integrate_frenet(lambda s: np.full_like(s, kappa0), tau, length, SAMPLES)


def criterion_4():
    out = []
    kappa0, tau, C = 1.0, 0.5, 0.5
    h = _helix(kappa0, tau, 2 * math.pi / math.hypot(kappa0, tau))
    b = solve_beta(lambda s: np.full_like(s, kappa0), C, 0.3, h.s)
    hb = single_bt(h, SingleBTSpec(C, tau, 0.3), b)
    dtau, dv = torsion_speed(hb, tau)
    out.append(Clause("helix torsion and speed", dtau < TORSION_TOL and dv < SPEED_TOL,
                      f"torsion {dtau:.1e}, speed {dv:.1e}"))
    # measured new curvature against kappa - 2 C sin(beta), within ds^2
    kerr = [(kappa_error(hb, h.kappa - 2 * C * np.sin(b.beta)), h.ds)]
    for mn in ((1, 3), (2, 5)):
        P, r = rod(*mn)
        bt = closed_single_bt_rod(r, P, C)
        dtau, dv = torsion_speed(bt, P.tau.real)
        out.append(Clause(f"{mn} torsion and speed", dtau < TORSION_TOL and dv < SPEED_TOL,
                          f"torsion {dtau:.1e}, speed {dv:.1e}"))
        kerr.append((kappa_error(bt, r.kappa - 2 * C * np.sin(bt.meta["beta"])), r.ds))
    worst = max(e / (ds * ds) for e, ds in kerr)
    out.append(Clause("curvature formula within ds^2", worst <= 1.0,
                      f"largest deviation / ds^2 = {worst:.1e}"))
    # helix at C = kappa0, quoted closed form
    beta0 = 0.3
    h = _helix(kappa0, tau, 20.0)
    b = solve_beta(lambda s: np.full_like(s, kappa0), kappa0, beta0, h.s)
    hb = single_bt(h, SingleBTSpec(kappa0, tau, beta0), b)
    x = kappa0 * h.s + 1.0 / math.tan((beta0 - math.pi / 2) / 2)
    quoted = float(np.max(np.abs(hb.kappa - kappa0 * (1 - x ** 2) / (1 + x ** 2))))
    derived = float(np.max(np.abs(hb.kappa - kappa0 * (3 - x ** 2) / (1 + x ** 2))))
    out.append(Clause("helix at C = kappa0 gives kappa0 (1 - x^2)/(1 + x^2)", quoted < 1e-8,
                      f"deviation {quoted:.2e}; kappa0 (3 - x^2)/(1 + x^2) deviates {derived:.1e}"))
    return out


def criterion_5():
    out = []
    for mn in ((1, 3), (2, 5)):
        P, r = rod(*mn)
        x = r.s / (2 * P.p)
        C = 0.5
        q = 2 * C
        bt = closed_single_bt_rod(r, P, C)
        a = bt.meta["a"]
        cn_a = float(jacobi(a, P.modulus).cn)
        cn_want = (P.p ** -2 - q * q) / (P.p ** -2 + q * q)
        err = kappa_error(bt, jacobi(x - a, P.modulus).cn)
        out.append(Clause(f"{mn} single: cn(x - a)", err < 1e-5 and abs(cn_a - cn_want) < 1e-12,
                          f"max deviation {err:.1e}, cn a off by {abs(cn_a - cn_want):.0e}"))
        nu = 0.3 + 0.2j
        d = case_a_double_bt(r, P, nu)
        a = d.meta["a"]
        err = kappa_error(d, jacobi(x - 2 * a.real, P.modulus).cn)
        out.append(Clause(f"{mn} eigenvector double: cn(x - a - conj a)", err < 1e-5 and d.closed,
                          f"max deviation {err:.1e}"))
    return out


def criterion_6():
    out = []
    rng = np.random.default_rng(7)
    for mn in ((1, 3), (2, 5)):
        P, r = rod(*mn)
        worst = 0.0
        for C in (0.3, 0.7):
            a = closed_single_bt_rod(r, P, C, source="closed_form_rod").meta["beta"]
            b = closed_single_bt_rod(r, P, C, source="ode").meta["beta"]
            worst = max(worst, float(np.max(np.abs(a - b))))
        out.append(Clause(f"{mn} angle: closed form vs ODE", worst < 1e-7, f"max difference {worst:.1e}"))
        nu = 0.3 + 0.25j
        a = a_from_nu(P, nu)
        x = rng.uniform(-4 * P.K, 4 * P.K, 1000)
        z = riccati_rod_closed_form(P, a, x)
        m = P.modulus
        res = float(np.max(np.abs(jacobi(x.astype(complex), m).cn + 1j * nu * (z - 1 / z)
                                  - jacobi((x - a).astype(complex), m).cn)))
        out.append(Clause(f"{mn} Riccati identity at 1000 points", res < 1e-9, f"residual {res:.1e}"))
    return out


def criterion_7():
    out = []
    for mn, C in (((1, 4), 0.01), ((2, 5), 0.01)):
        P, r = rod(*mn)
        chk, dt = timed(verify_linking_theorem, r, P, C)
        exact = chk.lk_rounded == chk.sl_rounded - chk.n / 2
        ok = chk.residual < 0.05 and exact and not chk.inconclusive
        if mn == (1, 4):
            ok = ok and chk.lk_rounded == 0
        out.append(Clause(f"{mn} Lk = SL - n/2", ok,
                          f"Lk {chk.lk:.5f}, SL {chk.sl:.5f}, n {chk.n}, residual {chk.residual:.1e}"))
        out.append(Clause(f"{mn} runtime", dt < 180, f"{dt:.1f} s"))
    return out


def _census(curve):
    census = crossing_census(curve)
    best = min(census, key=lambda c: c.count)
    return best


@lru_cache(maxsize=None)
def _roots25():
    return find_floquet_roots(find_torus_rod(2, 5), k=2)


def criterion_8():
    out = []
    P, r = rod(1, 3, 3000)
    roots = find_floquet_roots(P, k=4)
    root = min(roots, key=lambda q: abs(q.sigma_root - (1.2283 + 0.9688j)))
    d = closed_double_bt(r, P, root, omega=1.0)
    sd = min_self_distance(d).distance
    best = _census(d)
    out.append(Clause("(1,3) k=4 embedded", d.closed and sd > 10 * d.ds,
                      f"min self-distance {sd / d.length:.1e} L"))
    out.append(Clause("(1,3) k=4 at least 12 crossings of one sign",
                      best.count >= 12 and best.all_same_sign,
                      f"{best.count} crossings, same sign {best.all_same_sign}"))
    P, r = rod(2, 5)
    roots = _roots25()

    def transform(target, omega=1.0):
        q = min(roots, key=lambda t: abs(t.sigma_root - target))
        return closed_double_bt(r, P, q, omega=omega)

    # regression values frozen at the first correct run
    first, second = _census(transform(0.8982 + 0.8714j)), _census(transform(0.8821 + 0.6716j))
    out.append(Clause("(2,5) first two transforms: small, mixed crossings",
                      (first.count, second.count) == (1, 3) and not second.all_same_sign,
                      f"{first.count} and {second.count} crossings, second mixed {not second.all_same_sign}"))
    at1 = transform(0.9067 + 0.9697j, 1.0)
    f1 = min_self_distance(at1).distance / at1.length
    out.append(Clause("third root, omega = 1: near self-intersection", f1 < 1e-2, f"min self-distance {f1:.1e} L"))
    at3 = transform(0.9067 + 0.9697j, np.exp(1j * math.pi / 3))
    f3 = min_self_distance(at3).distance / at3.length
    out.append(Clause("third root, omega = exp(i pi/3): self-distance >= 1e-2 L", f3 >= 1e-2,
                      f"min self-distance {f3:.1e} L ({f3 / f1:.0f}x the omega = 1 value)"))
    return out


def criterion_9():
    out = []
    for mn in ((1, 3), (2, 5), (1, 4)):
        fit = killing_residual_order1(rod(*mn)[1])
        out.append(Clause(f"{mn} residual", fit.residual < 1e-4, f"{fit.residual:.1e}"))
    # 1% curvature perturbation, one wave per 2K segment
    P, r = rod(1, 3)
    L, n = r.length, P.n_periods
    c = integrate_frenet(lambda s: rod_curvature(s / (2 * P.p), P) * (1 + 0.01 * np.cos(2 * math.pi * n * s / L)),
                         float(P.tau.real), L, SAMPLES)
    fit = killing_residual_order1(c)
    out.append(Clause("perturbed control", fit.residual > 1e-2, f"{fit.residual:.1e}"))
    return out


def criterion_10():
    out = []
    rng = np.random.default_rng(10)
    worst = {"sn2_cn2": 0.0, "dn2_sn2": 0.0, "legendre": 0.0}
    for p in rng.uniform(0.02, 0.98, 100):
        m = make_modulus(p)
        u = rng.uniform(-4 * m.K, 4 * m.K, 100) + 1j * rng.uniform(-0.9, 0.9, 100) * m.K_prime
        for k, v in identity_residuals(u, m).items():
            worst[k] = max(worst[k], v)
    ok = worst["sn2_cn2"] < IDENTITY_TOL and worst["dn2_sn2"] < IDENTITY_TOL and worst["legendre"] < LEGENDRE_TOL
    out.append(Clause("elliptic identities on 10^4 inputs", ok,
                      ", ".join(f"{k} {v:.1e}" for k, v in worst.items())))
    P = find_torus_rod(1, 3)
    p = P.p
    errs = []
    for spp in (250, 500):
        c = integrate_frenet(lambda s: rod_curvature(s / (2 * p), P), float(P.tau.real), P.length, 3 * spp,
                             closed=True, parity="odd")
        F0 = np.stack(rod_frame(np.array(0.0), P))
        T, N, B = rod_frame(c.s / (2 * p), P)
        ferr = max(np.abs(c.T @ F0 - T).max(), np.abs(c.N @ F0 - N).max(), np.abs(c.B @ F0 - B).max())
        errs.append((ferr, kappa_error(c, rod_curvature(c.s / (2 * p), P))))
    rf, rk = errs[0][0] / errs[1][0], errs[0][1] / errs[1][1]
    out.append(Clause("halving the step", rf >= 3.5 and rk >= 3.5, f"frames x{rf:.1f}, curvature x{rk:.1f}"))
    return out


CHECKS = {n: globals()[f"criterion_{n}"] for n in TITLES}
RESULTS: dict[int, list[Clause]] = {}


def results(n: int) -> list[Clause]:
    if n not in RESULTS:
        RESULTS[n] = CHECKS[n]()
    return RESULTS[n]


def report_lines(done_only: bool = False) -> list[str]:
    lines = []
    for n, title in TITLES.items():
        if done_only and n not in RESULTS:
            continue
        clauses = results(n)
        verdict = "PASS" if all(c.ok for c in clauses) else "FAIL"
        failed = [c for c in clauses if not c.ok]
        note = "; ".join(f"{c.name}: {c.detail}" for c in failed) if failed else \
            "; ".join(c.detail for c in clauses[:2])
        lines.append(f"{verdict} criterion {n:>2} {title}: {note}")
    return lines


# -- pytest entry points ----------------------------------------------------------

def _clause_ids():
    # clause names are fixed by the check functions; listed here so tests collect without running them
    return {
        1: ["modulus (1, 3)", "runtime (1, 3)", "modulus (2, 5)", "runtime (2, 5)"],
        2: ["zero of 2E/K - 1", "runtime"],
        3: ["(1,3) k=4 root", "(2,5) k=2 root 0.8982+0.8714j", "(2,5) k=2 root 0.8821+0.6716j",
            "(2,5) k=2 root 0.9067+0.9697j", "new roots at k = 2/4/8", "runtime"],
        4: ["helix torsion and speed", "(1, 3) torsion and speed", "(2, 5) torsion and speed",
            "curvature formula within ds^2", "helix at C = kappa0 gives kappa0 (1 - x^2)/(1 + x^2)"],
        5: ["(1, 3) single: cn(x - a)", "(1, 3) eigenvector double: cn(x - a - conj a)",
            "(2, 5) single: cn(x - a)", "(2, 5) eigenvector double: cn(x - a - conj a)"],
        6: ["(1, 3) angle: closed form vs ODE", "(1, 3) Riccati identity at 1000 points",
            "(2, 5) angle: closed form vs ODE", "(2, 5) Riccati identity at 1000 points"],
        7: ["(1, 4) Lk = SL - n/2", "(1, 4) runtime", "(2, 5) Lk = SL - n/2", "(2, 5) runtime"],
        8: ["(1,3) k=4 embedded", "(1,3) k=4 at least 12 crossings of one sign",
            "(2,5) first two transforms: small, mixed crossings", "third root, omega = 1: near self-intersection",
            "third root, omega = exp(i pi/3): self-distance >= 1e-2 L"],
        9: ["(1, 3) residual", "(2, 5) residual", "(1, 4) residual", "perturbed control"],
        10: ["elliptic identities on 10^4 inputs", "halving the step"],
    }


CASES = [(n, name) for n, names in _clause_ids().items() for name in names]


@pytest.mark.parametrize("criterion, clause", CASES, ids=[f"c{n}-{name}" for n, name in CASES])
def test_acceptance(criterion, clause):
    found = {c.name: c for c in results(criterion)}
    assert clause in found, f"no clause {clause!r}; have {sorted(found)}"
    c = found[clause]
    assert c.ok, c.detail


if __name__ == "__main__":
    for line in report_lines():
        print(line, flush=True)
    sys.exit(0 if all(c.ok for n in TITLES for c in results(n)) else 1)
