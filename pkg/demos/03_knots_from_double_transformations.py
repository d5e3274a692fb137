"""
Knots from double transformations
=================================

A pair of transformations with complex conjugate parameters nu and conj nu
gives a real curve of the same torsion.  It closes after k circuits of the
rod when sigma = 2 i nu is a root of sin(k n K Lambda(sigma)); at those
roots every solution of the linear system is periodic, and a second complex
number omega picks which one is used.

This walks through the roots of the (1,3) rod, the k = 4 knot with many
crossings of one sign, and the effect of omega on a (2,5) transform.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from pathlib import Path

from rodknots.backlund import closed_double_bt
from rodknots.invariants import crossing_census, min_self_distance
from rodknots.rod import build_rod, find_torus_rod
from rodknots.spectral import find_floquet_roots

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)

P = find_torus_rod(1, 3)
seen = []
for k in (2, 4, 8):
    roots = find_floquet_roots(P, k=k)
    new = [r.sigma_root for r in roots if all(abs(r.sigma_root - q) > 1e-6 for q in seen)]
    seen += [r.sigma_root for r in roots]
    print(f"k = {k}: {len(roots)} roots, new:", ", ".join(f"{s:.4f}" for s in new))

rod = build_rod(1, 3, 1000, params=P)
root = min(find_floquet_roots(P, k=4), key=lambda r: abs(r.sigma_root - (1.2283 + 0.9688j)))
knot = closed_double_bt(rod, P, root, omega=1.0)
best = min(crossing_census(knot), key=lambda c: c.count)
print(f"(1,3), k = 4: closed {knot.closed}, fewest crossings {best.count}, one sign {best.all_same_sign}")

fig = plt.figure(figsize=(5, 5))
ax = fig.add_subplot(projection="3d")
ax.plot(*knot.position.T, lw=0.8)
ax.set_axis_off()
fig.savefig(out / "knot_13_k4.png", dpi=120)

# omega moves the curve through a self-intersection
P25 = find_torus_rod(2, 5)
rod25 = build_rod(2, 5, 800, params=P25)
third = min(find_floquet_roots(P25, k=2), key=lambda r: abs(r.sigma_root - (0.9067 + 0.9697j)))
fig = plt.figure(figsize=(9, 4))
for i, omega in enumerate([1.0, np.exp(1j * math.pi / 3)]):
    c = closed_double_bt(rod25, P25, third, omega=omega)
    sd = min_self_distance(c)
    print(f"omega = {omega:.3f}: min self-distance {sd.distance / c.length:.1e} L")
    ax = fig.add_subplot(1, 2, i + 1, projection="3d")
    ax.plot(*c.position.T, lw=0.8)
    ax.scatter(*c.position[list(sd.pair)].T, c="r", s=12)
    ax.set_title(f"omega = {omega:.2f}")
    ax.set_axis_off()
fig.tight_layout()
fig.savefig(out / "omega_25.png", dpi=120)
