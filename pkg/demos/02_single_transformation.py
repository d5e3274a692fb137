"""
Single transformations
======================

A transformation with parameter C moves each point a fixed distance
2C/(C^2 + tau^2) in the osculating plane, at an angle beta that solves
beta' = C sin(beta) - kappa.  Torsion is preserved.

On a helix with C equal to its curvature, beta has a closed form and the
new curve carries a single loop.  On a rod, starting beta from a
transfer-matrix eigenvector gives a closed curve congruent to the rod.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from pathlib import Path

from rodknots.backlund import SingleBTSpec, closed_single_bt_rod, single_bt, solve_beta
from rodknots.curves import integrate_frenet, measure_geometry
from rodknots.elliptic import jacobi
from rodknots.invariants import verify_linking_theorem
from rodknots.rod import build_rod, find_torus_rod

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)

# helix with kappa0 = 1, tau = 0.5
kappa0, tau = 1.0, 0.5
helix = integrate_frenet(lambda s: np.full_like(s, kappa0), tau, 25.0, 5000)
beta0 = 0.0
beta = solve_beta(lambda s: np.full_like(s, kappa0), kappa0, beta0, helix.s)
loop = single_bt(helix, SingleBTSpec(kappa0, tau, beta0), beta)

# cot((beta - pi/2) / 2) runs linearly in s, which gives the curvature in closed form
x = kappa0 * helix.s + 1 / math.tan((beta0 - math.pi / 2) / 2)
print("helix loop, curvature vs kappa0 (3 - x^2)/(1 + x^2):",
      np.abs(loop.kappa - kappa0 * (3 - x ** 2) / (1 + x ** 2)).max())

fig = plt.figure(figsize=(9, 4))
ax = fig.add_subplot(1, 2, 1, projection="3d")
ax.plot(*helix.position.T, lw=0.8, c="gray")
ax.plot(*loop.position.T, lw=1.2)
ax.set_axis_off()
ax = fig.add_subplot(1, 2, 2)
ax.plot(helix.s, loop.kappa)
ax.set_xlabel("s")
ax.set_ylabel("new curvature")
fig.tight_layout()
fig.savefig(out / "helix_loop.png", dpi=120)

# closed transformation of the (1,3) rod: curvature cn(x - a)
P = find_torus_rod(1, 3)
rod = build_rod(1, 3, 1334, params=P)
C = 0.5
bt = closed_single_bt_rod(rod, P, C)
g = measure_geometry(bt)
xr = rod.s / (2 * P.p)
print(f"shift a = {bt.meta['a']:.6f}")
print("measured curvature vs cn(x - a):", np.abs(g.kappa - jacobi(xr - bt.meta["a"], P.modulus).cn).max())
print("measured torsion deviation:", np.abs(g.tau[g.reliable] - P.tau.real).max())

# for small C the pair (rod, transform) links as SL - n/2
chk = verify_linking_theorem(build_rod(1, 3, 400, params=P), P, 0.01)
print(f"Lk = {chk.lk:.4f}, SL = {chk.sl:.4f}, n = {chk.n}")
