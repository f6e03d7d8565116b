"""Stationary points of the classical energy surface.

Interior points are found by Newton's method on the gradient of the reduced
energy in ``(n1, n3, phi12, phi32)``. Points on the faces of the occupation
simplex are invisible to that chart (the square roots are singular there), so
a second search solves the Lagrange-multiplier system for real amplitudes
``x`` on the unit sphere,

    grad E(x) = 2 lam x,   |x|^2 = 1,

and keeps the solutions with a vanishing occupation.

Stability comes from the linearized flow in the frame co-rotating with the
global phase. The two trivial directions (norm and gauge) are projected out,
leaving a 4x4 block whose eigenvalues decide stability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import classical as cl
from .export import write_columns_csv

SQRT2 = math.sqrt(2.0)
INTERIOR_GUARD = 1e-9
DEDUP_TOL = 1e-6
UNSTABLE_TOL = 1e-8

MINIMUM = "minimum"
MAXIMUM = "maximum"
SADDLE_UNSTABLE = "saddle-unstable"
SADDLE_STABLE = "saddle-stable"
DEGENERATE = "degenerate"


class CriticalPointNotFound(LookupError):
    pass


@dataclass(frozen=True)
class CriticalPoint:
    point: cl.ReducedPhasePoint
    energy: float
    classification: str
    hessian_eigenvalues: tuple
    spectral_abscissa: float
    gradient_norm: float
    on_boundary: bool = False

    @property
    def unstable(self) -> bool:
        return self.spectral_abscissa > UNSTABLE_TOL


def reduced_gradient(x, params) -> np.ndarray:
    n1, n3, a, b = (float(v) for v in x)
    U, eps, K = params.U, params.eps, params.J * SQRT2
    s = n1 + n3
    r2 = math.sqrt(1.0 - s)
    ra, rb = math.sqrt(n1), math.sqrt(n3)
    c1, c3, s1, s3 = math.cos(a), math.cos(b), math.sin(a), math.sin(b)
    B = ra * c1 + rb * c3
    common = 4.0 * U * (2.0 * s - 1.0) - K * B / (2.0 * r2)
    return np.array(
        [
            common - eps + K * r2 * c1 / (2.0 * ra),
            common + eps + K * r2 * c3 / (2.0 * rb),
            -K * r2 * ra * s1,
            -K * r2 * rb * s3,
        ]
    )


def reduced_hessian(x, params) -> np.ndarray:
    n1, n3, a, b = (float(v) for v in x)
    U, K = params.U, params.J * SQRT2
    s = n1 + n3
    r2 = math.sqrt(1.0 - s)
    ra, rb = math.sqrt(n1), math.sqrt(n3)
    c1, c3, s1, s3 = math.cos(a), math.cos(b), math.sin(a), math.sin(b)
    B = ra * c1 + rb * c3
    t = B / (4.0 * r2**3)
    h = np.empty((4, 4))
    h[0, 0] = 8 * U - K * (c1 / (2 * ra * r2) + t + r2 * c1 / (4 * ra**3))
    h[1, 1] = 8 * U - K * (c3 / (2 * rb * r2) + t + r2 * c3 / (4 * rb**3))
    h[0, 1] = h[1, 0] = 8 * U - K * (c1 / (4 * ra * r2) + c3 / (4 * rb * r2) + t)
    h[0, 2] = h[2, 0] = K * (ra * s1 / (2 * r2) - r2 * s1 / (2 * ra))
    h[1, 2] = h[2, 1] = K * ra * s1 / (2 * r2)
    h[0, 3] = h[3, 0] = K * rb * s3 / (2 * r2)
    h[1, 3] = h[3, 1] = K * (rb * s3 / (2 * r2) - r2 * s3 / (2 * rb))
    h[2, 2] = -K * r2 * ra * c1
    h[3, 3] = -K * r2 * rb * c3
    h[2, 3] = h[3, 2] = 0.0
    return h


def _inside(x) -> bool:
    return x[0] > INTERIOR_GUARD and x[1] > INTERIOR_GUARD and x[0] + x[1] < 1.0 - INTERIOR_GUARD


def newton_reduced(x0, params, tol: float = 1e-10, max_iter: int = 60):
    """Newton iteration on the reduced gradient; None if it fails."""
    x = np.array(x0, dtype=np.float64)
    if not _inside(x):
        return None
    for _ in range(max_iter):
        g = reduced_gradient(x, params)
        gn = np.linalg.norm(g)
        if gn <= tol * 1e-3:
            break
        try:
            step = np.linalg.solve(reduced_hessian(x, params), -g)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(40):
            y = x + lam * step
            if _inside(y):
                break
            lam *= 0.5
        else:
            return None
        if np.linalg.norm(lam * step) < 1e-15:
            x = y
            break
        x = y
    if not _inside(x) or np.linalg.norm(reduced_gradient(x, params)) > tol:
        return None
    return x


def _amp_energy_grad_hess(x, params):
    U, eps, K = params.U, params.eps, params.J * SQRT2
    x1, x2, x3 = x
    S = x1 * x1 - x2 * x2 + x3 * x3
    sig = np.array([1.0, -1.0, 1.0])
    tau = np.array([-1.0, 0.0, 1.0])
    hop = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    grad = 4 * U * S * sig * x + 2 * eps * tau * x + K * (hop @ x)
    hess = 8 * U * np.outer(sig * x, sig * x) + np.diag(4 * U * S * sig + 2 * eps * tau) + K * hop
    return grad, hess


def newton_lagrange(x0, params, tol: float = 1e-12, max_iter: int = 60):
    """Solve grad E = 2 lam x on the unit sphere; returns x or None."""
    x = np.asarray(x0, dtype=np.float64)
    x = x / np.linalg.norm(x)
    g, _ = _amp_energy_grad_hess(x, params)
    lam = 0.5 * float(x @ g)
    for _ in range(max_iter):
        g, h = _amp_energy_grad_hess(x, params)
        F = np.concatenate([g - 2 * lam * x, [x @ x - 1.0]])
        if np.linalg.norm(F) < tol:
            return x
        Jm = np.zeros((4, 4))
        Jm[:3, :3] = h - 2 * lam * np.eye(3)
        Jm[:3, 3] = -2 * x
        Jm[3, :3] = 2 * x
        try:
            d = np.linalg.solve(Jm, -F)
        except np.linalg.LinAlgError:
            return None
        x = x + d[:3]
        lam += d[3]
    g, _ = _amp_energy_grad_hess(x, params)
    F = np.concatenate([g - 2 * lam * x, [x @ x - 1.0]])
    return x if np.linalg.norm(F) < tol else None


def _amplitudes_to_reduced(x) -> cl.ReducedPhasePoint:
    x = np.asarray(x, dtype=np.float64)
    # fix the global sign by the first non-negligible amplitude in (x2, x1, x3)
    for k in (1, 0, 2):
        if abs(x[k]) > 1e-12:
            x = x * np.sign(x[k])
            break
    n = x * x / (x @ x)
    n[n < 1e-20] = 0.0
    if n[1] == 0.0:
        n[2] = 1.0 - n[0]
    ph = np.where(x < 0, np.pi, 0.0)
    return cl.ReducedPhasePoint(float(n[0]), float(n[2]), float(ph[0]), float(ph[2]))


def _tangent_basis(z):
    z = np.asarray(z, dtype=np.float64)
    oz = cl._OMEGA @ z
    q, _ = np.linalg.qr(np.column_stack([z, oz, np.eye(6)]))
    return q[:, 2:6]


def linearized_spectrum(c, params):
    """(projected Hessian eigenvalues, eigenvalues of the reduced flow Jacobian)."""
    z = np.asarray(c, dtype=np.float64)
    mu = cl.chemical_potential(z, params)
    hm = cl.hessian(z, params) - mu * np.eye(6)
    T = _tangent_basis(z)
    jac = T.T @ cl._OMEGA @ hm @ T
    return np.linalg.eigvalsh(T.T @ hm @ T), np.linalg.eigvals(jac)


def classify(p: cl.ReducedPhasePoint, params, on_boundary: bool = False) -> CriticalPoint:
    """Classify a stationary point.

    Signs come from the Hessian projected on the reduced phase space (well
    scaled everywhere, including the faces); the reported eigenvalues are
    those of the chart Hessian for interior points.
    """
    x = np.array(p.as_tuple())
    c = cl.to_cartesian(p)
    proj_h, jac_ev = linearized_spectrum(c, params)
    abscissa = float(np.max(jac_ev.real))
    if on_boundary:
        hev = proj_h
        gnorm = cl.gauge_residual(c, params)
    else:
        hev = np.linalg.eigvalsh(reduced_hessian(x, params))
        gnorm = float(np.linalg.norm(reduced_gradient(x, params)))
    scale = max(1.0, float(np.max(np.abs(proj_h))))
    if np.min(np.abs(proj_h)) < 1e-9 * scale:
        kind = DEGENERATE
    elif np.all(proj_h > 0):
        kind = MINIMUM
    elif np.all(proj_h < 0):
        kind = MAXIMUM
    elif abscissa > UNSTABLE_TOL:
        kind = SADDLE_UNSTABLE
    else:
        kind = SADDLE_STABLE
    return CriticalPoint(
        p, cl.energy_reduced(p, params), kind, tuple(float(v) for v in hev), abscissa, gnorm, on_boundary
    )


def _key(p: cl.ReducedPhasePoint) -> np.ndarray:
    a, b = p.phi12, p.phi32
    if p.n2 < INTERIOR_GUARD:
        # well 2 empty: only the 1-3 phase difference is physical
        a, b = 0.0, b - a
    return np.array([p.n1, p.n3, math.cos(a), math.sin(a), math.cos(b), math.sin(b)])


def _seeds(grid_density: int, rng):
    g = grid_density
    base = [(0.0, 0.0), (0.0, np.pi), (np.pi, 0.0), (np.pi, np.pi)]
    for i in range(g):
        for j in range(g - i):
            n1 = (i + 0.5) / (g + 1)
            n3 = (j + 0.5) / (g + 1)
            if n1 + n3 >= 1:
                continue
            for a, b in base:
                yield (n1, n3, a, b)
                yield (n1, n3, a + rng.normal(0, 0.1), b + rng.normal(0, 0.1))


def _sphere_seeds(grid_density: int):
    g = max(grid_density, 4)
    for i in range(g):
        th = (i + 0.5) * np.pi / g
        for j in range(2 * g):
            ph = j * np.pi / g
            yield np.array([np.sin(th) * np.cos(ph), np.cos(th), np.sin(th) * np.sin(ph)])


def find_critical_points(params, grid_density: int = 8, seed: int = 0) -> list[CriticalPoint]:
    """All stationary points found from a seed grid, sorted by energy."""
    if grid_density < 4:
        raise ValueError("grid_density must be >= 4")
    rng = np.random.default_rng(seed)
    found: list[cl.ReducedPhasePoint] = []
    flags: list[bool] = []

    def add(p, boundary):
        k = _key(p)
        if all(np.linalg.norm(k - _key(q)) > DEDUP_TOL for q in found):
            found.append(p)
            flags.append(boundary)

    for s in _seeds(grid_density, rng):
        x = newton_reduced(s, params)
        if x is not None:
            add(cl.ReducedPhasePoint(*x), False)

    for s in _sphere_seeds(grid_density):
        x = newton_lagrange(s, params)
        if x is None:
            continue
        occ = x * x
        if occ.min() < INTERIOR_GUARD:
            add(_amplitudes_to_reduced(x), True)
        else:
            # polish in the reduced chart so the gradient bound is met there
            p = _amplitudes_to_reduced(x)
            y = newton_reduced(p.as_tuple(), params)
            if y is not None:
                add(cl.ReducedPhasePoint(*y), False)

    out = [classify(p, params, b) for p, b in zip(found, flags)]
    out.sort(key=lambda c: (c.energy, c.point.n1, c.point.n3))
    return out


def _pick_unstable(points, params) -> CriticalPoint:
    # Linearly unstable saddles first, largest growth rate wins. When every
    # saddle is elliptic (large tilts), the energy saddle is used instead.
    unstable = [c for c in points if c.classification == SADDLE_UNSTABLE]
    if unstable:
        return max(unstable, key=lambda c: (c.spectral_abscissa, -c.energy))
    saddles = [c for c in points if c.classification == SADDLE_STABLE]
    if saddles:
        return min(saddles, key=lambda c: c.energy)
    raise CriticalPointNotFound(f"no saddle point for U={params.U}, J={params.J}, eps={params.eps}")


def unstable_critical_point(params, grid_density: int = 8, points=None) -> CriticalPoint:
    """The saddle that organizes the chaotic layer at these parameters."""
    pts = find_critical_points(params, grid_density) if points is None else points
    return _pick_unstable(pts, params)


def unstable_critical_energy(params, grid_density: int = 8, points=None) -> float:
    return unstable_critical_point(params, grid_density, points).energy


def write_table(points, path):
    cols = list(zip(*[(c.point.n1, c.point.n3, c.point.phi12, c.point.phi32, c.energy, c.classification)
                      for c in points])) or [[]] * 6
    return write_columns_csv(path, ["n1", "n3", "phi12", "phi32", "e", "class"], cols)
