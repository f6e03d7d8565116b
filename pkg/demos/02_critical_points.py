"""Stationary points of the mean-field energy and how they move with tilt.

The energy lives on (n1, n3, phi12, phi32). Points with an empty well sit on
the edge of the occupation simplex and are picked up by a separate
constrained search.
"""
from threewell import critical as cr
from threewell.qham import ModelParams

# %% Untilted wells: a symmetric landscape.
for c in cr.find_critical_points(ModelParams(0.7, 1.0, 0.0, 100)):
    n1, n3, a, b = c.point.as_tuple()
    edge = " (edge)" if c.on_boundary else ""
    print(f"{c.classification:16s} e={c.energy:+.5f}  n1={n1:.4f} n3={n3:.4f} "
          f"phi=({a:+.3f}, {b:+.3f}){edge}")

# %% The chaotic point: the saddle that seeds the separatrix.
cp = cr.unstable_critical_point(ModelParams(0.7, 1.0, 1.5, 100))
print("\nunstable saddle at eps=1.5:", [round(float(v), 4) for v in cp.point.as_tuple()])
print(f"E_c = {cp.energy:.5f}, growth rate {cp.spectral_abscissa:.3f}")

# %% Critical energy along the tilt sweep. At large tilt every saddle is
# elliptic and the lowest-energy saddle stands in for E_c.
print("\n  eps     E_c      kind")
for eps in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 5.0, 30.0):
    c = cr.unstable_critical_point(ModelParams(0.7, 1.0, eps, 100))
    print(f"{eps:5.1f}  {c.energy:+.4f}  {c.classification}")
