"""
Closed elastic rods with constant torsion
=========================================

The rods have curvature cn(x, p) and constant torsion.  Each 2K segment
turns the rod by an angle Delta theta about its axis, and the rod closes
when Delta theta / 2 pi = m / n.  Below we find the moduli of a few torus
knots, look at the closure-fraction curve, and draw the (1,3) and (2,5)
rods.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from pathlib import Path

from rodknots.curves import closure_defect
from rodknots.rod import build_rod, dtheta_fraction, find_torus_rod, p_max

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)

# the closure fraction grows from 0 to 1/2 as p runs up to p_max,
# where the torsion vanishes and the rod becomes a planar figure eight
pm = p_max()
print(f"p_max = {pm:.7f}")
ps = np.linspace(0.02, pm - 1e-6, 200)
frac = [dtheta_fraction(p) for p in ps]

for m, n in [(1, 3), (2, 5), (1, 4), (3, 7)]:
    P = find_torus_rod(m, n)
    print(f"({m},{n}) torus rod: p = {P.p:.6f}, tau = {P.tau.real:.6f}")

fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(ps, frac)
for m, n in [(1, 3), (2, 5)]:
    ax.axhline(m / n, ls=":", c="gray")
ax.set_xlabel("p")
ax.set_ylabel(r"$|\Delta\theta| / 2\pi$")
fig.tight_layout()
fig.savefig(out / "closure_fraction.png", dpi=120)

# an odd number of 2K segments gives an odd curve: after one circuit the
# frame comes back with N and B flipped
fig = plt.figure(figsize=(8, 4))
for i, (m, n) in enumerate([(1, 3), (2, 5)]):
    rod = build_rod(m, n, 800)
    gap = closure_defect(rod)
    print(f"({m},{n}): length {rod.length:.4f}, parity {rod.parity}, closure gap {gap.position_gap:.1e}")
    ax = fig.add_subplot(1, 2, i + 1, projection="3d")
    ax.plot(*rod.position.T, lw=1)
    ax.set_title(f"({m},{n})")
    ax.set_axis_off()
fig.tight_layout()
fig.savefig(out / "torus_rods.png", dpi=120)
