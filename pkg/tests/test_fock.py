import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from shgcat.fock import (
    BlockedState,
    ModeAmplitudes,
    choose_cutoffs,
    coherent_amplitudes,
    embed_product_state,
    fock_amplitudes,
    poisson_tail,
    sector_basis,
    sector_size,
)


def test_sector_basis_shg():
    b = sector_basis(5, 2)
    assert b.pairs == ((5, 0), (3, 1), (1, 2))
    assert len(b) == sector_size(5, 2) == 3


def test_sector_basis_thg():
    assert sector_basis(6, 3).pairs == ((6, 0), (3, 1), (0, 2))


def test_sector_basis_rejects_bad_order():
    with pytest.raises(ValueError):
        sector_basis(4, 4)
    with pytest.raises(ValueError):
        sector_basis(-1, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 60), st.sampled_from([2, 3]))
def test_sectors_partition_the_charge(N, k):
    b = sector_basis(N, k)
    assert all(a + k * j == N and a >= 0 and j >= 0 for a, j in b.pairs)
    assert len(set(b.pairs)) == len(b) == N // k + 1
    assert list(b.n_a) == sorted(b.n_a, reverse=True)


def test_coherent_against_direct_formula():
    alpha = 1.3 - 0.7j
    c = coherent_amplitudes(alpha, 30).values
    n = np.arange(31)
    ref = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt([float(math.factorial(int(k))) for k in n])
    assert np.allclose(c, ref, atol=1e-15)


def test_coherent_large_amplitude_log_path():
    c = coherent_amplitudes(40.0, 2200)
    assert np.all(np.isfinite(c.values))
    assert abs(c.norm_squared() - 1.0) < 1e-9


def test_fock_amplitudes():
    f = fock_amplitudes(2, 4)
    assert f.values.tolist() == [0, 0, 1, 0, 0]
    with pytest.raises(ValueError):
        fock_amplitudes(5, 4)


@pytest.mark.parametrize("nbar", [0.5, 1.0, 4.0, 10.0, 25.0])
def test_poisson_tail_matches_scipy(nbar):
    for n in range(0, int(nbar + 10 * math.sqrt(nbar)) + 5):
        ref = poisson.sf(n, nbar)
        assert poisson_tail(nbar, n) == pytest.approx(ref, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("nbar", [1.0, 4.0, 10.0, 16.0])
def test_cutoff_is_smallest_meeting_budget(nbar):
    eps = 1e-10
    n, _, _ = choose_cutoffs(nbar, 0.0, eps)
    assert poisson.sf(n, nbar) < eps
    assert poisson.sf(n - 1, nbar) >= eps


def test_cutoff_for_default_scale():
    n_a, n_b, N = choose_cutoffs(10.0, 0.0)
    assert (n_a, n_b, N) == (36, 0, 36)


def test_cutoffs_split_budget_when_both_modes_populated():
    eps = 1e-10
    n_a, n_b, N = choose_cutoffs(10.0, 1.0, eps)
    assert N == n_a + 2 * n_b
    kept = (1 - poisson.sf(n_a, 10.0)) * (1 - poisson.sf(n_b, 1.0))
    assert 1 - kept < eps


def test_choose_cutoffs_validation():
    with pytest.raises(ValueError):
        choose_cutoffs(1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        choose_cutoffs(-1.0, 0.0)


def test_embed_product_state_roundtrip():
    a = coherent_amplitudes(1.2, 12)
    b = coherent_amplitudes(0.5j, 4)
    s = embed_product_state(a, b, 2)
    assert s.N_max == 12 + 8
    grid = s.to_grid()
    ref = np.zeros_like(grid)
    ref[:13, :5] = np.outer(a.values, b.values)
    assert np.allclose(grid, ref)
    assert s.amplitude(3, 2) == pytest.approx(a.values[3] * b.values[2])
    assert s.amplitude(100, 0) == 0
    assert s.norm_deficit == pytest.approx(1 - a.norm_squared() * b.norm_squared(), abs=1e-15)
    back = BlockedState.from_grid(grid, 2, s.N_max)
    for x, y in zip(back.amplitudes, s.amplitudes):
        assert np.array_equal(x, y)


def test_embed_rejects_nonfinite():
    with pytest.raises(ValueError):
        embed_product_state(ModeAmplitudes([np.nan, 1.0]), ModeAmplitudes([1.0]))


def test_blocked_state_checks_sector_sizes():
    with pytest.raises(ValueError):
        BlockedState(2, [np.ones(1), np.ones(2)])
