import warnings

import numpy as np
import pytest

from shgcat.exceptions import DegenerateGap
from shgcat.fock import sector_basis
from shgcat.hamiltonian import (
    EffectiveForm,
    build_blocks,
    build_sector_block,
    effective_sector_diagonal,
    kerr_coefficient,
    second_order_pt_diagonal,
    small_rotation_transform,
)
from shgcat.linalg import tridiag_eigen


def ladder(n):
    return np.diag(np.sqrt(np.arange(1, n)), 1)


def full_hamiltonian(na_max, nb_max, k, D):
    a = np.kron(ladder(na_max + 1), np.eye(nb_max + 1))
    b = np.kron(np.eye(na_max + 1), ladder(nb_max + 1))
    ad, bd = a.T, b.T
    n_a, n_b = ad @ a, bd @ b
    ak = np.linalg.matrix_power(a, k)
    return D / (k + 1) * (n_b - n_a) + ak @ bd + ak.T @ b


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("D", [0.0, 1.7, -4.0])
def test_blocks_match_kronecker_hamiltonian(k, D):
    na_max, nb_max = 14, 8
    h = full_hamiltonian(na_max, nb_max, k, D)
    for N in range(na_max + 1):
        block = build_sector_block(sector_basis(N, k), D)
        idx = [na * (nb_max + 1) + nb for na, nb in block.basis.pairs]
        assert np.allclose(block.dense(), h[np.ix_(idx, idx)], atol=1e-12)


def test_blocks_exhaust_the_hamiltonian():
    # nothing couples different sectors
    k, na_max, nb_max = 2, 10, 5
    h = full_hamiltonian(na_max, nb_max, k, 3.0)
    charge = np.array([na + k * nb for na in range(na_max + 1) for nb in range(nb_max + 1)])
    assert np.all(h[charge[:, None] != charge[None, :]] == 0)


def test_known_coupling_values():
    b = build_sector_block(sector_basis(4, 2), 0.0)
    assert np.allclose(b.offdiag, [np.sqrt(12.0), np.sqrt(4.0)])
    b3 = build_sector_block(sector_basis(6, 3), 0.0)
    assert np.allclose(b3.offdiag, [np.sqrt(120.0), np.sqrt(12.0)])


def test_pt_closed_form_shg():
    D = 40.0
    for N in range(0, 21):
        basis = sector_basis(N, 2)
        block = build_sector_block(basis, D)
        pt = second_order_pt_diagonal(block, gap_ratio=0.0)
        na, nb = basis.n_a.astype(float), basis.n_b.astype(float)
        ref = D / 3 * (nb - na) + (4 * na * nb - na**2 + na + 2 * nb) / D
        assert np.allclose(pt, ref, atol=1e-12)


def test_pt_closed_form_thg():
    D = 60.0
    for N in range(0, 19):
        basis = sector_basis(N, 3)
        pt = second_order_pt_diagonal(build_sector_block(basis, D), gap_ratio=0.0)
        na, nb = basis.n_a.astype(float), basis.n_b.astype(float)
        shift = (9 * nb * (na**2 + na) + 6 * nb - na**3 + 3 * na**2 - 2 * na) / D
        assert np.allclose(pt, D / 4 * (nb - na) + shift, atol=1e-10)


def test_pt_shift_of_lowest_coupled_pair():
    # (2, 0) couples only to (0, 1): shift is -2 g^2 / Delta
    D = 30.0
    block = build_sector_block(sector_basis(2, 2), D)
    pt = second_order_pt_diagonal(block, gap_ratio=0.0)
    assert pt[0] - block.diag[0] == pytest.approx(-2.0 / D)


def test_quoted_shg_form_has_opposite_sign_to_pt():
    D = 50.0
    basis = sector_basis(2, 2)
    quoted = effective_sector_diagonal(basis, D, "eq12")
    assert quoted[0] - build_sector_block(basis, D).diag[0] == pytest.approx(4.0 / D)


def test_degenerate_gap_raises():
    with pytest.raises(DegenerateGap):
        second_order_pt_diagonal(build_sector_block(sector_basis(4, 2), 0.0))
    # default threshold rejects weakly detuned blocks too
    with pytest.raises(DegenerateGap):
        second_order_pt_diagonal(build_sector_block(sector_basis(12, 2), 5.0))
    second_order_pt_diagonal(build_sector_block(sector_basis(4, 2), 200.0))


def test_effective_forms():
    basis = sector_basis(7, 2)
    na, nb = basis.n_a.astype(float), basis.n_b.astype(float)
    assert np.allclose(effective_sector_diagonal(basis, 10.0, EffectiveForm.KERR), na**2 / 10.0)
    shg = effective_sector_diagonal(basis, 10.0, "eq12")
    assert np.allclose(shg, 10.0 / 3 * (nb - na) - (4 * na * nb - na**2) / 10.0)
    b3 = sector_basis(9, 3)
    na, nb = b3.n_a.astype(float), b3.n_b.astype(float)
    bare = (9 * nb * (na**2 + na) - na**3 - 6 * na**2) / 10.0
    assert np.allclose(effective_sector_diagonal(b3, 10.0, "eq21", include_detuning=False), bare)
    assert np.allclose(effective_sector_diagonal(b3, 10.0, "eq21"), bare + 2.5 * (nb - na))
    with pytest.raises(ValueError):
        effective_sector_diagonal(basis, 0.0, "pt")
    with pytest.raises(ValueError):
        effective_sector_diagonal(basis, 10.0, "eq21")
    with pytest.raises(ValueError):
        EffectiveForm.parse("nope")


def test_form_aliases():
    assert EffectiveForm.parse("eq12") is EffectiveForm.DISPERSIVE_SHG
    assert EffectiveForm.parse("PT") is EffectiveForm.PERTURBATIVE
    assert EffectiveForm.parse("kerr") is EffectiveForm.KERR


def max_pt_error(D, N_max=20):
    err = 0.0
    for block in build_blocks(N_max, 2, D):
        exact = tridiag_eigen(block).eigenvalues
        pt = np.sort(second_order_pt_diagonal(block, gap_ratio=0.0))
        err = max(err, float(np.max(np.abs(exact - pt))))
    return err


def test_pt_error_falls_as_inverse_cube():
    # third order vanishes on a chain, so the residual is fourth order
    errs = [max_pt_error(D) for D in (100.0, 200.0, 400.0)]
    for a, b in zip(errs, errs[1:]):
        assert 7.0 < a / b < 9.0


def test_pt_error_vanishes_monotonically_in_decoupling_limit():
    errs = [max_pt_error(D, 12) for D in (50.0, 100.0, 1e3, 1e4, 1e5)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-9


def test_small_rotation_removes_first_order_coupling():
    D = 200.0
    block = build_sector_block(sector_basis(12, 2), D)
    rotated = small_rotation_transform(block, 1.0 / D)
    off = rotated - np.diag(np.diag(rotated))
    # remaining couplings are O(g / Delta) times the bare ones
    assert np.max(np.abs(off)) < 0.2 * np.max(np.abs(block.offdiag))
    assert np.allclose(np.linalg.eigvalsh(rotated), tridiag_eigen(block).eigenvalues, atol=1e-9)
    pt = np.sort(second_order_pt_diagonal(block, gap_ratio=0.0))
    assert np.max(np.abs(np.sort(np.diag(rotated)) - pt)) < 0.05


def test_small_rotation_warns_when_not_small():
    block = build_sector_block(sector_basis(6, 2), 2.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        small_rotation_transform(block, 0.5)
    assert caught


def test_kerr_coefficient():
    assert kerr_coefficient(50.0) == pytest.approx(0.02)
    with pytest.raises(ValueError):
        kerr_coefficient(0.0)
