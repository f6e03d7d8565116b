"""Quantum side in small pieces: the Fock basis, the Hamiltonian, and the
charge that stops commuting once the wells are tilted.

Run with ``python3 demos/01_spectrum_and_integrability.py``.
"""
import math

import numpy as np

from threewell import eig
from threewell.fock import dimension, enumerate_states
from threewell.qham import ModelParams, build_charge, build_reduced, commutator_frobenius

# %% One particle: the Hamiltonian is a three-site chain.
p = ModelParams(U=0.7, J=1.0, eps=0.0, N=1)
print("basis:", enumerate_states(1))
print(build_reduced(p).to_dense().round(5))
s = eig.diagonalize(build_reduced(p), p)
print("eigenvalues:", s.eigenvalues, "expected U-J, U, U+J")

# %% The basis grows quadratically with N.
for N in (10, 60, 100, 150, 300):
    print(f"N={N:4d}  D={dimension(N)}")

# %% Without tilt the charge Q commutes with H. The tilt breaks it.
Q = build_charge(1 / math.sqrt(2), 1 / math.sqrt(2), 20)
for eps in (0.0, 0.1, 1.5):
    H = build_reduced(ModelParams(0.7, 1.0, eps, 20))
    rel = commutator_frobenius(H, Q) / (H.frobenius_norm() * Q.frobenius_norm())
    print(f"eps={eps:4.1f}  |[H,Q]|/(|H||Q|) = {rel:.2e}")

# %% Per-particle spectrum at the chaotic point, N=40.
p = ModelParams(0.7, 1.0, 1.5, 40)
s = eig.diagonalize(build_reduced(p), p)
e = eig.normalized_energies(s)
print(f"D={s.D}, e in [{e[0]:.3f}, {e[-1]:.3f}]")
counts, edges = np.histogram(e, bins=12)
for c, lo in zip(counts, edges):
    print(f"{lo:7.3f} {'#' * (c // 8)}")
