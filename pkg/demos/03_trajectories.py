"""Classical trajectories: a Rabi check, a chaotic orbit, and its density.

Histograms print as coarse ASCII maps with n1 down the rows and n3 across.
"""
import math

import numpy as np

from threewell import classical as cl
from threewell.qham import ModelParams

SHADES = " .:-=+*#%@"


def ascii_map(m):
    top = m.max()
    for row in m[::-1]:
        print("".join(SHADES[min(9, int(9.999 * v / top))] for v in row))


# %% Non-interacting, untilted: the occupations follow cos^4 and sin^4.
free = ModelParams(0.0, 1.0, 0.0, 100)
tr = cl.integrate(cl.ReducedPhasePoint(1.0, 0.0, 0.0, 0.0), free, 2 * math.pi)
for k in range(0, len(tr.times), 16):
    t = tr.times[k]
    n1, n2, n3 = tr.occupations[k]
    print(f"t={t:5.2f}  n1={n1:.4f} ({math.cos(t / 2) ** 4:.4f})  n3={n3:.4f} ({math.sin(t / 2) ** 4:.4f})")

# %% One long orbit at the critical energy of the chaotic point.
chaotic = ModelParams(0.7, 1.0, 1.5, 100)
ic = cl.sample_initial_conditions(chaotic, 0.0752, 1, seed=1)[0]
tr = cl.integrate(ic, chaotic, 2000.0)
print(f"\n{len(tr.times)} samples, energy drift {tr.energy_drift:.1e}, norm drift {tr.norm_drift:.1e}")
ascii_map(cl.occupation_histogram(tr, 30).masses.T)

# %% At zero tilt the same recipe gives a mirror-symmetric density.
flat = ModelParams(0.7, 1.0, 0.0, 100)
trs = [cl.integrate(p, flat, 300.0) for p in cl.sample_initial_conditions(flat, 0.075, 16, seed=2)]
h = cl.occupation_histogram(trs, 30)
print(f"\nmirror asymmetry {h.mirror_asymmetry():.4f}")
ascii_map(h.masses.T)
print("charge spread along one orbit:",
      np.ptp(cl.classical_charge(trs[0].states, 1 / math.sqrt(2), 1 / math.sqrt(2))))
