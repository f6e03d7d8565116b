"""Mean-field limit of the three-well model.

Two charts are used. The reduced chart ``(n1, n3, phi12, phi32)`` holds
fractional occupations and relative phases with the phase of well 2 fixed at
zero. The Cartesian chart ``z = (Q1, P1, Q2, P2, Q3, P3)`` has
``Q_k + i P_k = sqrt(2 n_k) exp(i phi_k)`` and carries the dynamics.
Energies are per particle and times are in units of 1/J.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _dopri, export

SQRT2 = math.sqrt(2.0)
# well signs in (n1 - n2 + n3) and in the tilt (n3 - n1)
_SIGMA = np.array([1.0, 1.0, -1.0, -1.0, 1.0, 1.0])
_TAU = np.array([-1.0, -1.0, 0.0, 0.0, 1.0, 1.0])
_HOP = np.zeros((6, 6))
for _a, _b in ((0, 2), (1, 3), (2, 4), (3, 5)):
    _HOP[_a, _b] = _HOP[_b, _a] = 1.0
_OMEGA = np.kron(np.eye(3), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class DomainError(ValueError):
    pass


class EnergyOutOfRangeError(ValueError):
    pass


class StiffnessError(RuntimeError):
    def __init__(self, msg, t, state):
        super().__init__(msg)
        self.t = t
        self.state = state


def wrap_phase(phi):
    """Map angles into (-pi, pi]."""
    return phi - 2.0 * np.pi * np.ceil((phi - np.pi) / (2.0 * np.pi))


@dataclass(frozen=True)
class ReducedPhasePoint:
    n1: float
    n3: float
    phi12: float
    phi32: float

    def __post_init__(self):
        if self.n1 < 0 or self.n3 < 0 or self.n1 + self.n3 > 1 + 1e-12:
            raise DomainError(f"occupations ({self.n1}, {self.n3}) outside the simplex")
        if not (math.isfinite(self.phi12) and math.isfinite(self.phi32)):
            raise DomainError("phases must be finite")
        object.__setattr__(self, "phi12", float(wrap_phase(self.phi12)))
        object.__setattr__(self, "phi32", float(wrap_phase(self.phi32)))

    @property
    def n2(self) -> float:
        return max(0.0, 1.0 - self.n1 - self.n3)

    def as_tuple(self):
        return (self.n1, self.n3, self.phi12, self.phi32)

    def mirrored(self) -> "ReducedPhasePoint":
        return ReducedPhasePoint(self.n3, self.n1, self.phi32, self.phi12)


class CartesianPhasePoint(NamedTuple):
    Q1: float
    P1: float
    Q2: float
    P2: float
    Q3: float
    P3: float


def _z(c) -> np.ndarray:
    z = np.asarray(c, dtype=np.float64)
    if z.shape != (6,):
        raise ValueError(f"expected 6 Cartesian coordinates, got shape {z.shape}")
    return z


def energy_reduced(p, params) -> float:
    """Per-particle energy in the reduced chart."""
    n1, n3, a, b = p.as_tuple() if isinstance(p, ReducedPhasePoint) else p
    s = n1 + n3
    if n1 < 0 or n3 < 0 or s > 1 + 1e-12:
        raise DomainError(f"occupations ({n1}, {n3}) outside the simplex")
    U, J, eps = params.U, params.J, params.eps
    r2 = math.sqrt(max(0.0, 1.0 - s))
    return (
        U * (2.0 * s - 1.0) ** 2
        + eps * (n3 - n1)
        + J * SQRT2 * r2 * (math.sqrt(n1) * math.cos(a) + math.sqrt(n3) * math.cos(b))
    )


def energy_reduced_array(n1, n3, phi12, phi32, params) -> np.ndarray:
    """Vectorized :func:`energy_reduced` without domain checks."""
    s = n1 + n3
    r2 = np.sqrt(np.clip(1.0 - s, 0.0, None))
    return (
        params.U * (2.0 * s - 1.0) ** 2
        + params.eps * (n3 - n1)
        + params.J * SQRT2 * r2 * (np.sqrt(n1) * np.cos(phi12) + np.sqrt(n3) * np.cos(phi32))
    )


def to_cartesian(p: ReducedPhasePoint) -> CartesianPhasePoint:
    """Lift with the well-2 phase fixed to zero."""
    a1 = math.sqrt(2.0 * p.n1)
    a3 = math.sqrt(2.0 * p.n3)
    return CartesianPhasePoint(
        a1 * math.cos(p.phi12),
        a1 * math.sin(p.phi12),
        math.sqrt(2.0 * p.n2),
        0.0,
        a3 * math.cos(p.phi32),
        a3 * math.sin(p.phi32),
    )


def to_reduced(c) -> ReducedPhasePoint:
    """Project onto the reduced chart; the total norm is divided out."""
    z = _z(c)
    occ = 0.5 * (z[0::2] ** 2 + z[1::2] ** 2)
    tot = occ.sum()
    if tot <= 0:
        raise DomainError("zero-norm point has no reduced coordinates")
    ph = np.arctan2(z[1::2], z[0::2])
    return ReducedPhasePoint(occ[0] / tot, occ[2] / tot, ph[0] - ph[1], ph[2] - ph[1])


def energy_cartesian(c, params) -> float:
    return float(_dopri.energy(_z(c), float(params.U), float(params.J), float(params.eps)))


def energy_cartesian_array(z, params) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    s1 = z[..., 0] ** 2 + z[..., 1] ** 2
    s2 = z[..., 2] ** 2 + z[..., 3] ** 2
    s3 = z[..., 4] ** 2 + z[..., 5] ** 2
    S = s1 - s2 + s3
    hop = z[..., 0] * z[..., 2] + z[..., 1] * z[..., 3] + z[..., 2] * z[..., 4] + z[..., 3] * z[..., 5]
    return 0.25 * params.U * S**2 + 0.5 * params.eps * (s3 - s1) + params.J / SQRT2 * hop


def occupations(z) -> np.ndarray:
    """Fractional occupations (N1/N, N2/N, N3/N) from Cartesian coordinates."""
    z = np.asarray(z, dtype=np.float64)
    return 0.5 * (z[..., 0::2] ** 2 + z[..., 1::2] ** 2)


def gradient(c, params) -> np.ndarray:
    """Gradient of the Cartesian energy."""
    z = _z(c)
    S = float(np.sum(_SIGMA * z * z))
    return params.U * S * _SIGMA * z + params.eps * _TAU * z + params.J / SQRT2 * (_HOP @ z)


def flow(c, params) -> np.ndarray:
    """Time derivative (dQ/dt, dP/dt) = (dH/dP, -dH/dQ)."""
    out = np.empty(6)
    _dopri.flow(_z(c), float(params.U), float(params.J), float(params.eps), out)
    return out


def hessian(c, params) -> np.ndarray:
    z = _z(c)
    S = float(np.sum(_SIGMA * z * z))
    sz = _SIGMA * z
    return (
        2.0 * params.U * np.outer(sz, sz)
        + np.diag(params.U * S * _SIGMA + params.eps * _TAU)
        + params.J / SQRT2 * _HOP
    )


def chemical_potential(c, params) -> float:
    """Best-fit rate of global phase rotation, (z . grad H) / (z . z)."""
    z = _z(c)
    return float(z @ gradient(z, params) / (z @ z))


def gauge_residual(c, params) -> float:
    """Norm of the flow once the global phase rotation is removed.

    Zero exactly at relative equilibria, i.e. at critical points of the
    reduced energy lifted to Cartesian coordinates.
    """
    z = _z(c)
    return float(np.linalg.norm(gradient(z, params) - chemical_potential(z, params) * z))


def flow_jacobian(c, params, mu: float = 0.0) -> np.ndarray:
    """Jacobian of the flow of ``H - mu * norm`` (``mu=0``: the plain flow)."""
    return _OMEGA @ (hessian(c, params) - mu * np.eye(6))


def classical_charge(z, J1: float, J3: float) -> np.ndarray:
    """``J1^2 n3 + J3^2 n1 - 2 J1 J3 sqrt(n1 n3) cos(phi1 - phi3)``."""
    z = np.asarray(z, dtype=np.float64)
    n1 = 0.5 * (z[..., 0] ** 2 + z[..., 1] ** 2)
    n3 = 0.5 * (z[..., 4] ** 2 + z[..., 5] ** 2)
    # sqrt(n1 n3) cos(phi1 - phi3) = Re(alpha1 conj(alpha3)) / 2 in z units
    cross = 0.5 * (z[..., 0] * z[..., 4] + z[..., 1] * z[..., 5])
    return J1**2 * n3 + J3**2 * n1 - 2.0 * J1 * J3 * cross


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    n_steps: int = 0
    n_rejected: int = 0
    step_energy_drift: float = 0.0
    energy_scale: float = 1.0

    @property
    def occupations(self) -> np.ndarray:
        return occupations(self.states)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    @property
    def energy_drift(self) -> float:
        """Largest deviation of the sampled energy from its start, relative to
        ``max(|e0|, energy_scale)`` so that orbits with e0 near zero stay
        meaningful."""
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / max(abs(e0), self.energy_scale))

    @property
    def norm_drift(self) -> float:
        tot = occupations(self.states).sum(axis=1)
        return float(np.max(np.abs(tot - tot[0])))

    def to_csv(self, path):
        occ = self.occupations
        return export.write_columns_csv(
            path, ["t", "n1", "n2", "n3", "e"], [self.times, occ[:, 0], occ[:, 1], occ[:, 2], self.energies]
        )


def integrate(c0, params, t_max: float, rel_tol: float = 1e-10, dt_sample: float = 0.05,
              abs_tol: float | None = None, max_steps: int = 2_000_000_000) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration with uniform dense sampling.

    Raises :class:`StiffnessError` with the last accepted state if the step
    size underflows or the step budget runs out.
    """
    if isinstance(c0, ReducedPhasePoint):
        c0 = to_cartesian(c0)
    z0 = _z(c0).copy()
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if not 1e-14 <= rel_tol <= 1e-4:
        raise ValueError(f"rel_tol {rel_tol} outside [1e-14, 1e-4]")
    if not dt_sample > 0:
        raise ValueError("dt_sample must be positive")
    atol = rel_tol * 1e-3 if abs_tol is None else abs_tol
    U, J, eps = float(params.U), float(params.J), float(params.eps)
    samples, filled, status, t_end, n_acc, n_rej, dev = _dopri.integrate(
        z0, U, J, eps, float(t_max), float(dt_sample), float(rel_tol), float(atol), 0.0, int(max_steps), True
    )
    if status != _dopri.STATUS_OK:
        what = "step size underflow" if status == _dopri.STATUS_STEP_UNDERFLOW else "step budget exhausted"
        last = samples[filled - 1].copy()
        raise StiffnessError(f"{what} at t={t_end:.6g}", t_end, last)
    states = samples[:filled]
    times = np.arange(filled) * dt_sample
    e = energy_cartesian_array(states, params)
    unit = abs(J) or 1.0
    return Trajectory(times, states, e, n_acc, n_rej, dev / max(abs(e[0]), unit), unit)


def sample_initial_conditions(params, e_target: float, count: int, seed: int = 0,
                              batch: int = 4096, max_batches: int = 400) -> list[ReducedPhasePoint]:
    """Random reduced points on the energy shell ``e_target``.

    (n1, n3) is uniform on the simplex and one phase uniform; the cosine of
    the other phase then follows in closed form and the draw is kept when it
    is a valid cosine. Which phase is solved for is itself random, so the
    accepted set respects the well 1 <-> 3 mirror symmetry.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    U, J = params.U, params.J
    out: list[ReducedPhasePoint] = []
    for _ in range(max_batches):
        u = rng.random(batch)
        v = rng.random(batch)
        flip = u + v > 1.0
        na = np.where(flip, 1.0 - u, u)
        nb = np.where(flip, 1.0 - v, v)
        phi_a = np.pi - 2.0 * np.pi * rng.random(batch)
        sign = np.where(rng.random(batch) < 0.5, 1.0, -1.0)
        mirror = rng.random(batch) < 0.5
        # in the mirrored frame wells 1 and 3 swap and the tilt changes sign
        eps = np.where(mirror, -params.eps, params.eps)
        s = na + nb
        r2 = np.sqrt(np.clip(1.0 - s, 0.0, None))
        base = U * (2 * s - 1) ** 2 + eps * (nb - na) + J * SQRT2 * r2 * np.sqrt(na) * np.cos(phi_a)
        amp = J * SQRT2 * r2 * np.sqrt(nb)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (e_target - base) / amp
        ok = np.flatnonzero((amp > 1e-12) & (np.abs(c) <= 1.0))
        for k in ok:
            phi_b = sign[k] * math.acos(float(c[k]))
            x = (float(na[k]), float(nb[k]), float(phi_a[k]), phi_b)
            if mirror[k]:
                x = (x[1], x[0], x[3], x[2])
            p = _polish(x, params, e_target, solve_phi32=not mirror[k])
            if abs(energy_reduced(p, params) - e_target) <= 1e-10:
                out.append(p)
                if len(out) == count:
                    return out
    raise EnergyOutOfRangeError(
        f"only {len(out)} of {count} points found at e={e_target} after {max_batches * batch} draws"
    )


def _polish(x, params, e_target, solve_phi32: bool) -> ReducedPhasePoint:
    """A few Newton steps on the solved-for phase to land on the shell."""
    n1, n3 = x[0], x[1]
    k = 3 if solve_phi32 else 2
    amp = params.J * SQRT2 * math.sqrt(max(0.0, 1.0 - n1 - n3)) * math.sqrt(n3 if solve_phi32 else n1)
    x = list(x)
    for _ in range(3):
        f = energy_reduced(x, params) - e_target
        d = -amp * math.sin(x[k])
        if abs(f) < 1e-15 or abs(d) < 1e-8:
            break
        x[k] -= f / d
    return ReducedPhasePoint(*x)


@dataclass(frozen=True, eq=False)
class OccupationHistogram:
    """Normalized mass over a ``bins x bins`` grid of (N1/N, N3/N); ``masses[i1, i3]``."""

    masses: np.ndarray
    bins: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "bins", self.masses.shape[0])

    def total(self) -> float:
        return float(self.masses.sum())

    def mirror_asymmetry(self) -> float:
        return float(np.max(np.abs(self.masses - self.masses.T)))

    def center_of_mass(self) -> tuple[float, float]:
        c = (np.arange(self.bins) + 0.5) / self.bins
        return float((self.masses.sum(axis=1) * c).sum()), float((self.masses.sum(axis=0) * c).sum())

    def to_csv(self, path):
        return export.write_matrix_csv(path, self.masses)

    def to_pgm(self, path):
        return export.write_pgm(path, self.masses)


def occupation_histogram(trajs, bins: int) -> OccupationHistogram:
    """Time-weighted 2D histogram of (N1/N, N3/N) over one or more trajectories."""
    if isinstance(trajs, Trajectory):
        trajs = [trajs]
    if not trajs:
        raise ValueError("need at least one trajectory")
    edges = np.linspace(0.0, 1.0, bins + 1)
    acc = np.zeros((bins, bins))
    for tr in trajs:
        occ = tr.occupations
        norm = occ.sum(axis=1)
        h, _, _ = np.histogram2d(occ[:, 0] / norm, occ[:, 2] / norm, bins=(edges, edges))
        w = tr.dt if tr.dt > 0 else 1.0
        acc += w * h
    return OccupationHistogram(acc / acc.sum())


def bhattacharyya(h1, h2) -> float:
    """Overlap sum(sqrt(p q)) of two normalized distributions on the same grid."""
    a = h1.masses if isinstance(h1, OccupationHistogram) else np.asarray(h1, dtype=np.float64)
    b = h2.masses if isinstance(h2, OccupationHistogram) else np.asarray(h2, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.sqrt(np.clip(a, 0, None) * np.clip(b, 0, None))))
