"""Full diagonalization and a binary spectrum cache.

Cache layout (all little-endian)::

    0   4s   magic  b"TW3W"
    4   u32  format version
    8   u32  N
    12  u64  D
    20  f64  U
    28  f64  J
    36  f64  eps
    44  8s   parameter checksum (blake2b-64 of U, J, eps, N, ordering version)
    52  12x  reserved, zero
    64  D    f64 eigenvalues
        D*D  f64 eigenvectors, column-major
        8s   payload checksum (blake2b-64 of the two arrays)
"""
from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fock import dimension
from .qham import ModelParams, SymmetricOperator, build_reduced

MAGIC = b"TW3W"
FORMAT_VERSION = 1
ORDERING_VERSION = 2
_HEADER = struct.Struct("<4sIIQddd8s12x")
assert _HEADER.size == 64


class DiagonalizationError(RuntimeError):
    pass


class CacheError(Exception):
    code = "cache"


class CacheVersionError(CacheError):
    code = "version"


class ParameterMismatchError(CacheError):
    code = "parameter-mismatch"


class TruncatedCacheError(CacheError):
    code = "truncated"


class ChecksumError(CacheError):
    code = "checksum"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""

    params: ModelParams
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def D(self) -> int:
        return self.eigenvalues.size


def diagonalize(H: SymmetricOperator, p: ModelParams) -> Spectrum:
    if H.D != dimension(p.N):
        raise ValueError(f"operator dimension {H.D} does not match N={p.N}")
    a = H.to_dense()
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(
            f"eigh failed for D={H.D}, U={p.U}, J={p.J}, eps={p.eps}: {exc}"
        ) from exc
    w.flags.writeable = False
    v.flags.writeable = False
    return Spectrum(p, w, v)


def normalized_energies(s: Spectrum) -> np.ndarray:
    """Energies per particle, directly comparable with the classical energy."""
    return s.eigenvalues / s.params.N


def residuals(H: SymmetricOperator, s: Spectrum) -> np.ndarray:
    """Column norms of ``H C - C diag(E)``."""
    r = H.to_sparse() @ s.eigenvectors - s.eigenvectors * s.eigenvalues
    return np.linalg.norm(r, axis=0)


def _digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=8).digest()


def _param_digest(U, J, eps, N) -> bytes:
    return _digest(struct.pack("<dddII", U, J, eps, N, ORDERING_VERSION))


def cache_store(s: Spectrum, path) -> Path:
    path = Path(path)
    p = s.params
    D = s.D
    vals = np.ascontiguousarray(s.eigenvalues, dtype="<f8").tobytes()
    vecs = np.asarray(s.eigenvectors, dtype="<f8").tobytes(order="F")
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, p.N, D, p.U, p.J, p.eps, _param_digest(p.U, p.J, p.eps, p.N)
    )
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(vals)
        fh.write(vecs)
        fh.write(_digest(vals + vecs))
    os.replace(tmp, path)
    return path


def cache_load(path, expected: ModelParams | None = None) -> Spectrum:
    """Read a spectrum written by :func:`cache_store`.

    Raises a :class:`CacheError` subclass for a bad magic/version, header or
    parameter mismatch, short file, or payload checksum failure.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise TruncatedCacheError(f"{path}: {len(raw)} bytes, header needs {_HEADER.size}")
    magic, version, N, D, U, J, eps, pdig = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CacheVersionError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CacheVersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    if pdig != _param_digest(U, J, eps, N) or D != dimension(N):
        raise ParameterMismatchError(f"{path}: header checksum does not match its parameters")
    if expected is not None and (N, U, J, eps) != (expected.N, expected.U, expected.J, expected.eps):
        raise ParameterMismatchError(
            f"{path}: cached (N={N}, U={U}, J={J}, eps={eps}) != requested "
            f"(N={expected.N}, U={expected.U}, J={expected.J}, eps={expected.eps})"
        )
    n_vals, n_vecs = 8 * D, 8 * D * D
    need = _HEADER.size + n_vals + n_vecs + 8
    if len(raw) != need:
        raise TruncatedCacheError(f"{path}: {len(raw)} bytes, expected {need}")
    body = raw[_HEADER.size : need - 8]
    if _digest(body) != raw[need - 8 :]:
        raise ChecksumError(f"{path}: payload checksum mismatch")
    w = np.frombuffer(body, dtype="<f8", count=D).astype(np.float64)
    v = np.frombuffer(body, dtype="<f8", offset=n_vals).reshape((D, D), order="F").astype(np.float64)
    w.flags.writeable = False
    v.flags.writeable = False
    return Spectrum(ModelParams(U, J, eps, N), w, v)


def cache_name(p: ModelParams) -> str:
    return f"tw3w_N{p.N}_U{p.U!r}_J{p.J!r}_eps{p.eps!r}.bin"


def get_spectrum(p: ModelParams, cache_dir=None) -> tuple[Spectrum, bool]:
    """Load ``p``'s spectrum from ``cache_dir`` or diagonalize and store it.

    Returns the spectrum and whether it came from the cache.
    """
    if cache_dir is not None:
        path = Path(cache_dir) / cache_name(p)
        if path.exists():
            return cache_load(path, expected=p), True
    s = diagonalize(build_reduced(p), p)
    if cache_dir is not None:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        cache_store(s, path)
    return s, False
