"""Quantum and classical pictures side by side at the chaotic point.

A Husimi window of eigenstates near each energy is compared with the
time-averaged occupation density of trajectories at that energy. The
Bhattacharyya overlap scores how alike they are. N=60 keeps it quick.
"""
import numpy as np

from threewell import classical as cl
from threewell import eig, pipelines
from threewell import quantum_obs as qo
from threewell.config import SCAN_ENERGIES, RunConfig
from threewell.qham import ModelParams

p = ModelParams(0.7, 1.0, 1.5, 60)
s, _ = eig.get_spectrum(p)
W = qo.default_window(s.D)

# %% Participation ratio: eigenstates spread most near the critical energy.
curve = qo.participation_ratio(s)
print(f"D={s.D}, window={W}, smoothed PR peak at e={qo.pr_peak_energy(curve, 50):.3f}")

# %% Overlap matrix: rows are quantum energies, columns classical ones.
cfg = RunConfig(bins=30, t_max_single=3000.0)
quantum = [qo.husimi_at_energy(s, e, W).resample(cfg.bins) for e in SCAN_ENERGIES]
classical = [pipelines.classical_histogram(p, e, e != -0.9, cfg, k)[0] for k, e in enumerate(SCAN_ENERGIES)]
M = np.array([[cl.bhattacharyya(q, c) for c in classical] for q in quantum])
print("         " + " ".join(f"{e:6.3f}" for e in SCAN_ENERGIES))
for e, row in zip(SCAN_ENERGIES, M):
    best = int(np.argmax(row))
    print(f"{e:6.3f}  " + " ".join(f"{v:6.3f}" + ("*" if j == best else " ") for j, v in enumerate(row)))
print("rows whose best match is their own energy:", sum(np.argmax(M, axis=1) == np.arange(len(M))))
