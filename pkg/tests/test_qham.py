import math

import numpy as np
import pytest

from threewell.fock import basis_array, index_of, mirror_permutation
from threewell.qham import (GenericParams, ModelParams, build_charge, build_generic, build_reduced,
                            commutator_frobenius)

R2 = math.sqrt(2.0)


def test_three_by_three_chain():
    H = build_reduced(ModelParams(0.7, 1.0, 0.0, 1)).to_dense()
    h = 1 / R2
    expected = np.array([[0.7, h, 0.0], [h, 0.7, h], [0.0, h, 0.7]])
    assert np.allclose(H, expected, atol=1e-15)
    # chain eigenvalues U + sqrt(2) * (J/sqrt2) * {-1, 0, 1}
    assert np.allclose(np.linalg.eigvalsh(H), [-0.3, 0.7, 1.7], atol=1e-12)


def test_hopping_element_ladder():
    N = 2
    H = build_reduced(ModelParams(0.7, 1.0, 0.0, N))
    i, j = index_of((1, 1, 0), N), index_of((2, 0, 0), N)
    assert H.entry(i, j) == pytest.approx(1.0, abs=1e-14)
    assert H.entry(j, i) == H.entry(i, j)


def test_diagonal_formula():
    p = ModelParams(0.7, 1.0, 0.9, 6)
    b = basis_array(6)
    n1, n2, n3 = b.T
    expected = p.U / p.N * (n1 - n2 + n3) ** 2 + p.eps * (n3 - n1)
    assert np.allclose(build_reduced(p).diagonal, expected, atol=1e-13)


@pytest.mark.parametrize("N", [1, 4, 11])
def test_mirror_symmetry_at_zero_tilt(N):
    H = build_reduced(ModelParams(0.7, 1.0, 0.0, N)).to_dense()
    P = mirror_permutation(N)
    assert np.array_equal(H[np.ix_(P, P)], H)


def test_tilt_breaks_mirror_but_flips_sign():
    N = 5
    P = mirror_permutation(N)
    Hp = build_reduced(ModelParams(0.7, 1.0, 1.5, N)).to_dense()
    Hm = build_reduced(ModelParams(0.7, 1.0, -1.5, N)).to_dense()
    assert not np.allclose(Hp[np.ix_(P, P)], Hp)
    assert np.allclose(Hp[np.ix_(P, P)], Hm, atol=1e-14)


def test_sparsity_and_symmetry():
    H = build_reduced(ModelParams(0.7, 1.0, 1.5, 30))
    S = H.to_sparse()
    assert abs(S - S.T).max() == 0
    assert H.max_row_nnz() <= 5
    x = np.random.default_rng(0).normal(size=H.D)
    assert np.allclose(H.matvec(x), S @ x)


def test_generic_zero():
    g = GenericParams(0, 0, 0, 0, 0, 0, 3)
    assert np.count_nonzero(build_generic(g).to_dense()) == 0


def test_generic_single_particle():
    H = build_generic(GenericParams(0.3, 0.2, 0.1, 0.4, 0.6, 0.8, 1)).to_dense()
    assert np.allclose(np.diag(H), 0.0)
    # basis (1,0,0), (0,1,0), (0,0,1)
    assert H[0, 1] == pytest.approx(-0.6) and H[1, 2] == pytest.approx(-0.8)
    assert H[0, 2] == 0


def test_generic_onsite():
    H = build_generic(GenericParams(1.0, 0, 0, 0, 0, 0, 2))
    assert H.entry(index_of((2, 0, 0), 2), index_of((2, 0, 0), 2)) == pytest.approx(1.0)


def test_generic_reproduces_reduced_spectrum():
    # reduced model: U0 = U/N * 1, U12 = U23 = -2U/N, U13 = 2U/N; hopping sign gauged by (-1)^n2
    N, U, J = 6, 0.7, 1.0
    g = GenericParams(U / N * 2, -U / N * 2, U / N * 2, -U / N * 2, J / R2, J / R2, N)
    Hg = np.linalg.eigvalsh(build_generic(g).to_dense())
    Hr = np.linalg.eigvalsh(build_reduced(ModelParams(U, J, 0.0, N)).to_dense())
    # U0/2 * n(n-1) summed over wells leaves a constant -U0 N / 2 = -U
    assert np.allclose(Hg + U, Hr, atol=1e-10)


def test_charge_small():
    Q = build_charge(1 / R2, 1 / R2, 1).to_dense()
    assert np.allclose(np.diag(Q), [0.5, 0.0, 0.5])
    assert Q[0, 2] == pytest.approx(-0.5) and Q[0, 1] == 0


def test_charge_diagonal_when_j1_zero():
    N = 4
    Q = build_charge(0.0, 0.8, N)
    assert np.allclose(Q.to_dense(), np.diag(0.64 * basis_array(N)[:, 0]))


def test_commutator_basics():
    H = build_reduced(ModelParams(0.7, 1.0, 0.3, 6))
    assert commutator_frobenius(H, H) == 0.0
    with pytest.raises(ValueError):
        commutator_frobenius(H, build_reduced(ModelParams(0.7, 1.0, 0.3, 5)))


def test_charge_conserved_only_without_tilt():
    J1 = J3 = 1 / R2
    Q = build_charge(J1, J3, 10)
    H0 = build_reduced(ModelParams(0.7, 1.0, 0.0, 10))
    H1 = build_reduced(ModelParams(0.7, 1.0, 1.5, 10))
    assert commutator_frobenius(H0, Q) <= 1e-10 * H0.frobenius_norm() * Q.frobenius_norm()
    assert commutator_frobenius(H1, Q) > 1e-3 * H1.frobenius_norm()


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.7, 1.0, 0.0, 0)
    with pytest.raises(ValueError):
        ModelParams(float("nan"), 1.0, 0.0, 3)
