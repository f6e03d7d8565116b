import math

import numpy as np
import pytest
from scipy import stats

from threewell import classical as cl
from threewell.critical import unstable_critical_point
from threewell.qham import ModelParams

CHAOTIC = ModelParams(0.7, 1.0, 1.5, 100)
FLAT = ModelParams(0.7, 1.0, 0.0, 100)
FREE = ModelParams(0.0, 1.0, 0.0, 100)


def random_points(rng, n):
    u, v = rng.random(n), rng.random(n)
    flip = u + v > 1
    n1, n3 = np.where(flip, 1 - u, u), np.where(flip, 1 - v, v)
    ph = rng.uniform(-np.pi, np.pi, (2, n))
    return [cl.ReducedPhasePoint(a, b, c, d) for a, b, c, d in zip(n1, n3, *ph)]


def random_cartesian(rng, n):
    z = rng.normal(size=(n, 6))
    return z / np.linalg.norm(z, axis=1, keepdims=True) * math.sqrt(2.0)


def test_energy_reduced_known_values():
    assert cl.energy_reduced((0.081, 0.294, 0.0, math.pi), CHAOTIC) == pytest.approx(0.0752, abs=5e-4)
    assert cl.energy_reduced((0.0, 0.0, 0.3, -1.0), CHAOTIC) == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(cl.DomainError):
        cl.energy_reduced((0.7, 0.5, 0, 0), CHAOTIC)
    with pytest.raises(cl.DomainError):
        cl.ReducedPhasePoint(-0.1, 0.2, 0, 0)


def test_energy_mirror_symmetry():
    rng = np.random.default_rng(1)
    minus = ModelParams(0.7, 1.0, -1.5, 100)
    for p in random_points(rng, 200):
        assert cl.energy_reduced(p, CHAOTIC) == pytest.approx(cl.energy_reduced(p.mirrored(), minus), abs=1e-13)


def test_chart_conversions():
    c = cl.to_cartesian(cl.ReducedPhasePoint(0.5, 0.5, 0.0, 0.0))
    assert np.allclose(c, [1, 0, 0, 0, 1, 0], atol=1e-15)
    rng = np.random.default_rng(2)
    for p in random_points(rng, 300):
        q = cl.to_reduced(cl.to_cartesian(p))
        assert np.allclose(q.as_tuple()[:2], p.as_tuple()[:2], atol=1e-13)
        dphi = cl.wrap_phase(np.array(q.as_tuple()[2:]) - np.array(p.as_tuple()[2:]))
        assert np.abs(dphi).max() < 1e-9


def test_wrap_phase_range():
    x = np.array([-np.pi, np.pi, 3 * np.pi, -3.5 * np.pi, 0.2])
    w = cl.wrap_phase(x)
    assert np.all(w > -np.pi) and np.all(w <= np.pi)
    assert np.allclose(np.cos(w), np.cos(x)) and np.allclose(np.sin(w), np.sin(x))


@pytest.mark.parametrize("params", [CHAOTIC, FLAT])
def test_charts_agree_on_energy(params):
    rng = np.random.default_rng(3)
    pts = random_points(rng, 1000)
    for p in pts:
        assert abs(cl.energy_reduced(p, params) - cl.energy_cartesian(cl.to_cartesian(p), params)) <= 1e-12
    arr = np.array([p.as_tuple() for p in pts]).T
    z = np.array([cl.to_cartesian(p) for p in pts])
    assert np.allclose(cl.energy_reduced_array(*arr, params), cl.energy_cartesian_array(z, params), atol=1e-12)


def test_energy_cartesian_values():
    assert cl.energy_cartesian(np.zeros(6), CHAOTIC) == 0.0
    assert cl.energy_cartesian([0, 0, math.sqrt(2), 0, 0, 0], CHAOTIC) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        cl.energy_cartesian(np.zeros(5), CHAOTIC)


def test_flow_matches_finite_differences():
    rng = np.random.default_rng(4)
    h = 1e-6
    worst = 0.0
    for z in random_cartesian(rng, 1000):
        g = np.empty(6)
        for k in range(6):
            e = np.zeros(6)
            e[k] = h
            g[k] = (cl.energy_cartesian(z + e, CHAOTIC) - cl.energy_cartesian(z - e, CHAOTIC)) / (2 * h)
        expected = np.array([g[1], -g[0], g[3], -g[2], g[5], -g[4]])
        worst = max(worst, np.abs(cl.flow(z, CHAOTIC) - expected).max())
        assert np.allclose(cl.gradient(z, CHAOTIC), g, atol=1e-6)
    assert worst <= 1e-6


def test_hessian_matches_finite_differences():
    rng = np.random.default_rng(5)
    h = 1e-6
    for z in random_cartesian(rng, 50):
        num = np.empty((6, 6))
        for k in range(6):
            e = np.zeros(6)
            e[k] = h
            num[:, k] = (cl.gradient(z + e, CHAOTIC) - cl.gradient(z - e, CHAOTIC)) / (2 * h)
        assert np.allclose(cl.hessian(z, CHAOTIC), num, atol=1e-7)


def test_free_flow_is_linear():
    rng = np.random.default_rng(6)
    a, b = random_cartesian(rng, 2)
    assert np.allclose(cl.flow(2 * a - 3 * b, FREE), 2 * cl.flow(a, FREE) - 3 * cl.flow(b, FREE))


def test_flow_at_critical_point_is_pure_phase_rotation():
    cp = unstable_critical_point(CHAOTIC)
    z = np.array(cl.to_cartesian(cp.point))
    mu = cl.chemical_potential(z, CHAOTIC)
    assert cl.gauge_residual(z, CHAOTIC) <= 1e-6
    omega_z = np.array([z[1], -z[0], z[3], -z[2], z[5], -z[4]])
    assert np.allclose(cl.flow(z, CHAOTIC), mu * omega_z, atol=1e-9)
    assert abs(mu) > 0.1


def test_rabi_oscillation():
    t_end = 10 * math.pi
    tr = cl.integrate(cl.ReducedPhasePoint(1.0, 0.0, 0.0, 0.0), FREE, t_end, rel_tol=1e-10)
    occ, t = tr.occupations, tr.times
    assert t[-1] == pytest.approx(t_end, abs=0.05)
    assert np.abs(occ[:, 0] - np.cos(t / 2) ** 4).max() <= 1e-6
    assert np.abs(occ[:, 2] - np.sin(t / 2) ** 4).max() <= 1e-6
    assert np.abs(occ[:, 1] - 0.5 * np.sin(t) ** 2).max() <= 1e-6
    k = int(round(math.pi / tr.dt))
    assert occ[k, 2] == pytest.approx(np.sin(t[k] / 2) ** 4, abs=1e-6)


def reduced_distance(states, point):
    occ = cl.occupations(states)
    ph = np.arctan2(states[:, 1::2], states[:, 0::2])
    d = np.stack([occ[:, 0] - point.n1, occ[:, 2] - point.n3,
                  cl.wrap_phase(ph[:, 0] - ph[:, 1] - point.phi12),
                  cl.wrap_phase(ph[:, 2] - ph[:, 1] - point.phi32)], axis=1)
    return np.abs(d).max()


def test_critical_point_is_a_relative_equilibrium():
    # a linearly unstable point amplifies round-off as exp(0.43 t); 40/J keeps it below 1e-4
    cp = unstable_critical_point(CHAOTIC)
    tr = cl.integrate(cp.point, CHAOTIC, 40.0, rel_tol=1e-13)
    assert reduced_distance(tr.states, cp.point) < 1e-4
    ground = cl.ReducedPhasePoint(0.25, 0.25, math.pi, math.pi)
    tr = cl.integrate(ground, FLAT, 100.0, rel_tol=1e-12)
    assert reduced_distance(tr.states, ground) < 1e-4


def test_energy_and_norm_conservation_short():
    ics = cl.sample_initial_conditions(CHAOTIC, 0.075, 4, seed=9)
    for ic in ics:
        tr = cl.integrate(ic, CHAOTIC, 500.0, rel_tol=1e-12)
        assert tr.energy_drift <= 1e-9
        assert tr.norm_drift <= 1e-9
        assert tr.step_energy_drift <= 1e-9


def test_charge_conserved_only_without_tilt():
    J = 1 / math.sqrt(2)
    ic = cl.sample_initial_conditions(FLAT, 0.075, 1, seed=3)[0]
    q = cl.classical_charge(cl.integrate(ic, FLAT, 200.0, rel_tol=1e-12).states, J, J)
    assert np.ptp(q) <= 1e-8
    ic = cl.sample_initial_conditions(CHAOTIC, 0.075, 1, seed=3)[0]
    q = cl.classical_charge(cl.integrate(ic, CHAOTIC, 200.0).states, J, J)
    assert np.ptp(q) > 1e-2


def test_integrate_argument_checks():
    p = cl.ReducedPhasePoint(0.3, 0.3, 0.0, 0.0)
    with pytest.raises(ValueError):
        cl.integrate(p, CHAOTIC, -1.0)
    with pytest.raises(ValueError):
        cl.integrate(p, CHAOTIC, 1.0, rel_tol=1e-2)
    with pytest.raises(cl.StiffnessError) as info:
        cl.integrate(p, CHAOTIC, 100.0, max_steps=5)
    assert info.value.state.shape == (6,) and 0 < info.value.t < 100


def test_sampler_hits_energy_shell():
    pts = cl.sample_initial_conditions(CHAOTIC, 0.075, 64, seed=0)
    assert len(pts) == 64
    assert max(abs(cl.energy_reduced(p, CHAOTIC) - 0.075) for p in pts) <= 1e-10
    again = cl.sample_initial_conditions(CHAOTIC, 0.075, 64, seed=0)
    assert [p.as_tuple() for p in pts] == [p.as_tuple() for p in again]


def test_sampler_rejects_unreachable_energy():
    with pytest.raises(cl.EnergyOutOfRangeError):
        cl.sample_initial_conditions(CHAOTIC, 50.0, 1, max_batches=5)
    with pytest.raises(ValueError):
        cl.sample_initial_conditions(CHAOTIC, 0.0, 0)


def test_sampler_is_mirror_symmetric_without_tilt():
    pts = cl.sample_initial_conditions(FLAT, 0.075, 800, seed=2)
    n1 = [p.n1 for p in pts]
    n3 = [p.n3 for p in pts]
    assert stats.ks_2samp(n1, n3).pvalue > 0.01


def test_histogram_of_stationary_orbit():
    ground = cl.ReducedPhasePoint(0.25, 0.25, math.pi, math.pi)
    tr = cl.integrate(ground, FLAT, 20.0, rel_tol=1e-12)
    h = cl.occupation_histogram(tr, 7)
    assert h.masses.max() == pytest.approx(1.0, abs=1e-12)
    assert h.total() == pytest.approx(1.0, abs=1e-12)


def test_histogram_normalization_and_exports(tmp_path):
    ics = cl.sample_initial_conditions(CHAOTIC, 0.075, 3, seed=1)
    trs = [cl.integrate(ic, CHAOTIC, 50.0) for ic in ics]
    h = cl.occupation_histogram(trs, 20)
    assert abs(h.total() - 1) <= 1e-12
    assert h.bins == 20
    h.to_csv(tmp_path / "h.csv")
    h.to_pgm(tmp_path / "h.pgm")
    trs[0].to_csv(tmp_path / "t.csv")
    head = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert head == "t,n1,n2,n3,e"
    with pytest.raises(ValueError):
        cl.occupation_histogram([], 10)


def test_bhattacharyya():
    rng = np.random.default_rng(0)
    p = rng.random((5, 5))
    p /= p.sum()
    assert cl.bhattacharyya(p, p) == pytest.approx(1.0)
    a = np.zeros((4, 4))
    b = np.zeros((4, 4))
    a[0, 0] = b[3, 3] = 1.0
    assert cl.bhattacharyya(a, b) == 0.0
    with pytest.raises(ValueError):
        cl.bhattacharyya(a, p)


def test_mirror_dynamics_without_tilt():
    ic = cl.sample_initial_conditions(FLAT, 0.3, 1, seed=11)[0]
    a = cl.integrate(ic, FLAT, 100.0, rel_tol=1e-12)
    b = cl.integrate(ic.mirrored(), FLAT, 100.0, rel_tol=1e-12)
    oa, ob = a.occupations, b.occupations
    assert np.abs(oa[:, 0] - ob[:, 2]).max() <= 1e-6
    assert np.abs(oa[:, 2] - ob[:, 0]).max() <= 1e-6
    assert np.abs(oa[:, 1] - ob[:, 1]).max() <= 1e-6
