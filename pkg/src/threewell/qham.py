"""Quantum Hamiltonians and the conserved charge on the Fock basis.

Two builders are provided. :func:`build_reduced` is the tilted integrable
form used throughout the package; :func:`build_generic` is the
long-range three-site Bose-Hubbard model with explicit couplings.

The reduced form hops with ``+J/sqrt(2)`` and the generic one with
``-J1, -J3``. The spectra are related by ``J -> -J``, which is the gauge
``a_2 -> -a_2`` (a diagonal sign change ``(-1)^n2`` of the basis).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import basis_array, index_array


@dataclass(frozen=True)
class ModelParams:
    U: float
    J: float
    eps: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        for name in ("U", "J", "eps"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def with_eps(self, eps: float) -> "ModelParams":
        return ModelParams(self.U, self.J, eps, self.N)


@dataclass(frozen=True)
class GenericParams:
    U0: float
    U12: float
    U13: float
    U23: float
    J1: float
    J3: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        for name in ("U0", "U12", "U13", "U23", "J1", "J3"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


class SymmetricOperator:
    """Real symmetric matrix stored as upper-triangle triplets (i <= j)."""

    def __init__(self, D: int, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("triplet arrays must have equal length")
        if np.any(rows > cols):
            raise ValueError("triplets must satisfy i <= j")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite matrix entry")
        keep = vals != 0.0
        self.D = int(D)
        self.rows, self.cols, self.vals = rows[keep], cols[keep], vals[keep]
        for a in (self.rows, self.cols, self.vals):
            a.flags.writeable = False

    def __repr__(self):
        return f"SymmetricOperator(D={self.D}, nnz_upper={self.vals.size})"

    @property
    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.D)
        on = self.rows == self.cols
        np.add.at(d, self.rows[on], self.vals[on])
        return d

    def to_sparse(self) -> sp.csr_matrix:
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.vals, self.vals[off]])
        return sp.csr_matrix((v, (r, c)), shape=(self.D, self.D))

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.zeros(self.D)
        np.add.at(y, self.rows, self.vals * x[self.cols])
        off = self.rows != self.cols
        np.add.at(y, self.cols[off], self.vals[off] * x[self.rows[off]])
        return y

    def entry(self, i: int, j: int) -> float:
        i, j = min(i, j), max(i, j)
        hit = (self.rows == i) & (self.cols == j)
        return float(self.vals[hit].sum())

    def frobenius_norm(self) -> float:
        off = self.rows != self.cols
        return float(np.sqrt(np.sum(self.vals**2) + np.sum(self.vals[off] ** 2)))

    def max_row_nnz(self) -> int:
        m = self.to_sparse()
        return int(np.diff(m.indptr).max()) if self.D else 0


def _hop_targets(b, N):
    """Indices of (n1-1, n2+1, n3) and (n1, n2+1, n3-1) for every basis row."""
    return index_array(b + (-1, 1, 0), N), index_array(b + (0, 1, -1), N)


def _assemble(N, diag, amp_12, amp_32):
    b = basis_array(N)
    D = b.shape[0]
    to_12, to_32 = _hop_targets(b, N)
    src = np.arange(D)
    m12 = b[:, 0] > 0
    m32 = b[:, 2] > 0
    r = np.concatenate([src, src[m12], src[m32]])
    c = np.concatenate([src, to_12[m12], to_32[m32]])
    v = np.concatenate([diag, amp_12[m12], amp_32[m32]])
    lo, hi = np.minimum(r, c), np.maximum(r, c)
    return SymmetricOperator(D, lo, hi, v)


def build_reduced(p: ModelParams) -> SymmetricOperator:
    """Tilted reduced Hamiltonian for parameters ``p``."""
    N = p.N
    b = basis_array(N).astype(np.float64)
    n1, n2, n3 = b[:, 0], b[:, 1], b[:, 2]
    diag = (p.U / N) * (n1 - n2 + n3) ** 2 + p.eps * (n3 - n1)
    t = p.J / math.sqrt(2.0)
    return _assemble(N, diag, t * np.sqrt(n1 * (n2 + 1)), t * np.sqrt(n3 * (n2 + 1)))


def build_generic(g: GenericParams) -> SymmetricOperator:
    """Three-site Bose-Hubbard Hamiltonian with long-range couplings."""
    N = g.N
    b = basis_array(N).astype(np.float64)
    n1, n2, n3 = b[:, 0], b[:, 1], b[:, 2]
    diag = (
        0.5 * g.U0 * (n1 * (n1 - 1) + n2 * (n2 - 1) + n3 * (n3 - 1))
        + g.U12 * n1 * n2
        + g.U13 * n1 * n3
        + g.U23 * n2 * n3
    )
    return _assemble(N, diag, -g.J1 * np.sqrt(n1 * (n2 + 1)), -g.J3 * np.sqrt(n3 * (n2 + 1)))


def build_charge(J1: float, J3: float, N: int) -> SymmetricOperator:
    """Charge ``J1^2 N3 + J3^2 N1 - J1 J3 (a1^+ a3 + a3^+ a1)``."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    b = basis_array(N)
    D = b.shape[0]
    n1, n2, n3 = (b[:, k].astype(np.float64) for k in range(3))
    diag = J1**2 * n3 + J3**2 * n1
    tgt = index_array(b + (-1, 0, 1), N)
    m = b[:, 0] > 0
    src = np.arange(D)
    amp = -J1 * J3 * np.sqrt(n1 * (n3 + 1))
    r = np.concatenate([src, src[m]])
    c = np.concatenate([src, tgt[m]])
    v = np.concatenate([diag, amp[m]])
    return SymmetricOperator(D, np.minimum(r, c), np.maximum(r, c), v)


def _as_sparse(A):
    if isinstance(A, SymmetricOperator):
        return A.to_sparse()
    return sp.csr_matrix(np.asarray(A, dtype=np.float64))


def commutator_frobenius(A, B) -> float:
    """Frobenius norm of ``AB - BA``."""
    a, b = _as_sparse(A), _as_sparse(B)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    c = (a @ b - b @ a).tocsr()
    return float(spla.norm(c)) if c.nnz else 0.0
