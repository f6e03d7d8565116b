"""Window-averaged Husimi projections and participation ratios."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import export
from .eig import Spectrum, normalized_energies
from .fock import basis_array

FULL_WINDOW = 200


def default_window(D: int) -> int:
    """200 states, reduced to a tenth of the basis for small N."""
    return max(1, min(FULL_WINDOW, D // 10))


@dataclass(frozen=True, eq=False)
class HusimiGrid:
    """Probability mass on the (N1, N3) grid; ``values[N1, N3]``.

    Cells with N1 + N3 > N are outside the basis and hold zero.
    """

    N: int
    values: np.ndarray
    center_index: int
    window: int
    center_energy: float
    start: int
    stop: int

    @property
    def mask(self) -> np.ndarray:
        i = np.arange(self.N + 1)
        return i[:, None] + i[None, :] <= self.N

    def total(self) -> float:
        return float(self.values.sum())

    def mirror_asymmetry(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)))

    def center_of_mass(self) -> tuple[float, float]:
        """Mean (N1/N, N3/N)."""
        i = np.arange(self.N + 1) / self.N
        w = self.values
        return float((w.sum(axis=1) * i).sum()), float((w.sum(axis=0) * i).sum())

    def resample(self, bins: int) -> np.ndarray:
        """Mass binned on a ``bins x bins`` grid over (N1/N, N3/N) in [0, 1]^2."""
        b = basis_array(self.N)
        ix = np.minimum(b[:, 0] * bins // self.N, bins - 1)
        iy = np.minimum(b[:, 2] * bins // self.N, bins - 1)
        out = np.zeros((bins, bins))
        np.add.at(out, (ix, iy), self.values[b[:, 0], b[:, 2]])
        return out

    def to_csv(self, path):
        return export.write_matrix_csv(path, self.values, self.mask)

    def to_pgm(self, path):
        return export.write_pgm(path, np.where(self.mask, self.values, 0.0))


def husimi_window(s: Spectrum, m: int, window: int) -> HusimiGrid:
    """Average Fock-basis probability of the ``window`` eigenstates around ``m``.

    The index range is ``[m - window//2, m - window//2 + window)``, clipped to
    the spectrum and normalized by the number of states actually used.
    """
    D = s.D
    if not 0 <= m < D:
        raise ValueError(f"center index {m} outside [0, {D})")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    start = max(0, m - window // 2)
    stop = min(D, m - window // 2 + window)
    # column-by-column accumulation keeps the summation order fixed, so
    # results do not depend on memory alignment (einsum's SIMD paths do)
    mass = np.zeros(D)
    for j in range(start, stop):
        v = s.eigenvectors[:, j]
        mass += v * v
    mass /= stop - start
    N = s.params.N
    b = basis_array(N)
    grid = np.zeros((N + 1, N + 1))
    grid[b[:, 0], b[:, 2]] = mass
    return HusimiGrid(N, grid, m, window, float(s.eigenvalues[m] / N), start, stop)


def nearest_index(s: Spectrum, e_target: float) -> int:
    """Index of the eigenvalue whose per-particle energy is closest; ties go low."""
    return int(np.argmin(np.abs(normalized_energies(s) - e_target)))


def husimi_at_energy(s: Spectrum, e_target: float, window: int) -> HusimiGrid:
    if not np.isfinite(e_target):
        raise ValueError("target energy must be finite")
    return husimi_window(s, nearest_index(s, e_target), window)


@dataclass(frozen=True, eq=False)
class PrCurve:
    energies: np.ndarray
    pr: np.ndarray
    D: int

    @property
    def scaled(self) -> np.ndarray:
        """PR relative to the GOE expectation D/3."""
        return self.pr / (self.D / 3.0)

    def to_csv(self, path):
        return export.write_columns_csv(path, ["e", "pr_scaled"], [self.energies, self.scaled])


def participation_ratio(s: Spectrum) -> PrCurve:
    C = s.eigenvectors
    # row-by-row accumulation for the same reason as in husimi_window
    p4 = np.zeros(C.shape[1])
    for row in C:
        sq = row * row
        p4 += sq * sq
    return PrCurve(normalized_energies(s).copy(), 1.0 / p4, s.D)


def smooth(values, width: int) -> np.ndarray:
    """Centered moving average over index; the window shrinks at the ends."""
    v = np.asarray(values, dtype=np.float64)
    if width < 1:
        raise ValueError(f"smoothing width must be >= 1, got {width}")
    kernel = np.ones(width)
    total = np.convolve(v, kernel, mode="full")
    count = np.convolve(np.ones_like(v), kernel, mode="full")
    lo = width // 2
    # full convolution index k covers v[k - width + 1 .. k]; center it
    sl = slice(width - 1 - lo, width - 1 - lo + v.size)
    return total[sl] / count[sl]


def pr_peak_energy(curve: PrCurve, smoothing_width: int = 50) -> float:
    """Energy at the maximum of the smoothed PR curve (first index on ties)."""
    if curve.pr.size == 0:
        raise ValueError("empty PR curve")
    sm = smooth(curve.pr, smoothing_width)
    return float(curve.energies[int(np.argmax(sm))])
