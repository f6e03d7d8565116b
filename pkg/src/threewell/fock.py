"""Fock basis for N bosons in three wells.

States are ordered with n1 running from N down to 0 and, inside each n1
block, n3 running up from 0 to N - n1. For N = 1 this gives (1,0,0),
(0,1,0), (0,0,1), so the single-particle Hamiltonian is a tridiagonal chain.
The linear index has the closed form ``T(N - n1) + n3`` with
``T(k) = k (k + 1) / 2``.
"""
from __future__ import annotations

from math import isqrt
from typing import NamedTuple

import numpy as np


class FockState(NamedTuple):
    n1: int
    n2: int
    n3: int

    @property
    def total(self) -> int:
        return self.n1 + self.n2 + self.n3


def _tri(k):
    return k * (k + 1) // 2


def dimension(N: int) -> int:
    """Number of Fock states, (N + 1)(N + 2) / 2."""
    if N < 0:
        raise ValueError(f"particle number must be non-negative, got {N}")
    return (N + 1) * (N + 2) // 2


def enumerate_states(N: int) -> list[FockState]:
    """All Fock states of the N-particle block in canonical order."""
    dimension(N)
    out = []
    for n1 in range(N, -1, -1):
        for n3 in range(N - n1 + 1):
            out.append(FockState(n1, N - n1 - n3, n3))
    return out


def basis_array(N: int) -> np.ndarray:
    """Canonical basis as a ``(D, 3)`` integer array of occupations."""
    D = dimension(N)
    idx = np.arange(D, dtype=np.int64)
    k = (np.sqrt(8.0 * idx + 1.0).astype(np.int64) - 1) // 2
    # float sqrt can be off by one for large idx
    k = np.where(_tri(k) > idx, k - 1, k)
    k = np.where(_tri(k + 1) <= idx, k + 1, k)
    n3 = idx - _tri(k)
    return np.stack([N - k, k - n3, n3], axis=1)


def index_of(state, N: int | None = None) -> int:
    """Linear index of ``state`` in the canonical ordering.

    ``N`` defaults to the state's own total; passing it checks consistency.
    """
    n1, n2, n3 = (int(x) for x in state)
    if min(n1, n2, n3) < 0:
        raise ValueError(f"negative occupation in {tuple(state)}")
    total = n1 + n2 + n3
    if N is not None and total != N:
        raise ValueError(f"occupations {tuple(state)} do not sum to N={N}")
    return _tri(total - n1) + n3


def index_array(states, N: int) -> np.ndarray:
    """Vectorized :func:`index_of` for rows of a ``(M, 3)`` array, unchecked."""
    b = np.asarray(states)
    return _tri(N - b[..., 0]) + b[..., 2]


def state_of(idx: int, N: int) -> FockState:
    """Inverse of :func:`index_of` for the N-particle block."""
    D = dimension(N)
    if not 0 <= idx < D:
        raise ValueError(f"index {idx} outside [0, {D}) for N={N}")
    k = (isqrt(8 * idx + 1) - 1) // 2
    n3 = idx - _tri(k)
    return FockState(N - k, k - n3, n3)


def mirror_permutation(N: int) -> np.ndarray:
    """Index map of the well 1 <-> well 3 relabeling."""
    return index_array(basis_array(N)[:, ::-1], N)
