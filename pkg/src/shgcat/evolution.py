"""Time evolution of blocked two-mode states.

Exact dynamics diagonalizes every sector once and then only applies phases,
so the cost of reaching a time ``gt`` does not depend on ``gt``. Times are
the dimensionless ``g t``; the Kerr coefficient is ``lambda / g = g / Delta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .exceptions import SectorMismatch
from .fock import (
    DEFAULT_EPSILON,
    BlockedState,
    ModeAmplitudes,
    SingleModeDensity,
    choose_cutoffs,
    coherent_amplitudes,
    sector_basis,
)
from .hamiltonian import (
    EffectiveForm,
    build_sector_block,
    effective_sector_diagonal,
)
from .linalg import EigenDecomposition, tridiag_eigen

__all__ = [
    "SpectralPropagator",
    "evolve_exact",
    "evolve_effective",
    "kerr_propagate",
    "analytic_rho_a",
    "interaction_energy",
    "mode_a_linear_frequency",
    "dressed_energies",
    "dressed_kerr_coefficient",
]


def _diagonalize(args) -> EigenDecomposition:
    N, k, detuning_over_g = args
    return tridiag_eigen(build_sector_block(sector_basis(N, k), detuning_over_g))


@dataclass(frozen=True)
class SpectralPropagator:
    """Eigendecompositions of every sector block up to ``N_max``."""

    decompositions: tuple
    detuning_over_g: float
    k: int

    @classmethod
    def build(cls, N_max: int, k: int, detuning_over_g: float, workers=None) -> "SpectralPropagator":
        jobs = [(N, k, float(detuning_over_g)) for N in range(N_max + 1)]
        return cls(tuple(parallel_map(_diagonalize, jobs, workers)), float(detuning_over_g), k)

    @classmethod
    def for_state(cls, state: BlockedState, detuning_over_g: float, workers=None) -> "SpectralPropagator":
        return cls.build(state.N_max, state.k, detuning_over_g, workers)

    @property
    def N_max(self) -> int:
        return len(self.decompositions) - 1

    def check_covers(self, state: BlockedState) -> None:
        if state.k != self.k:
            raise SectorMismatch(f"state has order k={state.k}, propagator k={self.k}")
        if state.N_max > self.N_max:
            raise SectorMismatch(
                f"state reaches sector {state.N_max}, propagator only {self.N_max}"
            )

    def project(self, state: BlockedState) -> list:
        """Amplitudes in each sector's eigenbasis (``V^T psi``)."""
        self.check_covers(state)
        return [dec.eigenvectors.T @ amp for dec, amp in zip(self.decompositions, state.amplitudes)]


def evolve_exact(state: BlockedState, prop: SpectralPropagator, gt: float) -> BlockedState:
    """Apply ``exp(-i H_int t)`` sector by sector."""
    prop.check_covers(state)
    out = []
    for dec, amp in zip(prop.decompositions, state.amplitudes):
        v = dec.eigenvectors
        out.append(v @ (np.exp(-1j * dec.eigenvalues * gt) * (v.T @ amp)))
    return state.with_amplitudes(out)


def evolve_effective(
    state: BlockedState,
    form,
    detuning_over_g: float,
    gt: float,
    include_detuning: bool = True,
) -> BlockedState:
    """Evolve under a diagonal effective Hamiltonian; populations never change."""
    form = EffectiveForm.parse(form)
    if form is EffectiveForm.KERR:
        for N, amp in enumerate(state.amplitudes):
            if np.any(amp[1:] != 0):
                raise ValueError("the KERR form requires the harmonic mode in vacuum")
    out = []
    for basis, amp in zip(state.bases, state.amplitudes):
        energies = effective_sector_diagonal(
            basis, detuning_over_g, form, include_detuning=include_detuning
        )
        out.append(np.exp(-1j * energies * gt) * amp)
    return state.with_amplitudes(out)


def kerr_propagate(a: ModeAmplitudes, lambda_t: float, sign: int = 1) -> ModeAmplitudes:
    """``values[n] -> exp(-i sign lambda_t n^2) values[n]``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = np.arange(a.n_max + 1, dtype=float)
    phase = np.exp(-1j * sign * np.mod(lambda_t * n * n, 2.0 * np.pi))
    return ModeAmplitudes(a.values * phase)


def analytic_rho_a(
    alpha: complex,
    beta: complex,
    lambda_t: float,
    convention: int = 1,
    n_max: int | None = None,
    epsilon: float = DEFAULT_EPSILON,
    variant: str = "derived",
) -> SingleModeDensity:
    """Closed-form reduced density of the fundamental mode for ``|alpha>|beta>``.

    Under ``H = s * lambda * (n_a^2 - 4 n_a n_b)`` (``s`` = ``convention``)
    the harmonic photons imprint an ``n_a``-dependent phase, and tracing them
    out gives

        rho[n, m] = c_n c_m^* exp(-i s lambda_t (n^2 - m^2))
                    * exp(|beta|^2 (exp(4 i s lambda_t (n - m)) - 1))

    with ``c_n`` the coherent amplitudes of ``alpha``. ``variant="printed"``
    instead uses ``exp(|beta|^2 (1 - exp(4 i s lambda_t (n - m))))`` for the
    overlap factor, the form commonly quoted in print; it is not a valid
    density matrix for ``beta != 0`` and is kept only for comparison.

    The matrix is renormalized to unit trace; the truncated weight is stored
    in ``discarded``.
    """
    if convention not in (1, -1):
        raise ValueError("convention must be +1 or -1")
    if variant not in ("derived", "printed"):
        raise ValueError(f"unknown variant {variant!r}")
    if n_max is None:
        n_max = choose_cutoffs(abs(alpha) ** 2, 0.0, epsilon)[0]
    c = coherent_amplitudes(alpha, n_max).values
    n = np.arange(n_max + 1, dtype=float)
    diff = n[:, None] - n[None, :]
    sq = n[:, None] ** 2 - n[None, :] ** 2
    s = convention
    phase = np.exp(-1j * s * lambda_t * sq)
    b2 = abs(beta) ** 2
    if variant == "derived":
        overlap = np.exp(b2 * (np.exp(4j * s * lambda_t * diff) - 1.0))
    else:
        overlap = np.exp(b2 * (1.0 - np.exp(4j * s * lambda_t * diff)))
    rho = np.outer(c, c.conj()) * phase * overlap
    tr = float(np.real(np.trace(rho)))
    return SingleModeDensity(rho / tr, 0.0, max(0.0, 1.0 - tr))


def interaction_energy(state: BlockedState, detuning_over_g: float) -> float:
    """``<psi| H_int |psi> / g``."""
    total = 0.0
    for basis, amp in zip(state.bases, state.amplitudes):
        block = build_sector_block(basis, detuning_over_g)
        h_amp = block.diag * amp
        if len(amp) > 1:
            h_amp[:-1] += block.offdiag * amp[1:]
            h_amp[1:] += block.offdiag * amp[:-1]
        total += float(np.real(np.vdot(amp, h_amp)))
    return total


def mode_a_linear_frequency(form, detuning_over_g: float, k: int = 2, include_detuning: bool = True) -> float:
    """Coefficient of the term linear in ``n_a`` (alone) in an effective diagonal.

    That term only rotates the fundamental mode in phase space; removing the
    rotation ``exp(-i w n_a t)`` puts the mode in its co-rotating frame.
    """
    form = EffectiveForm.parse(form)
    D = float(detuning_over_g)
    detuning_part = -D / (k + 1)
    if form is EffectiveForm.KERR:
        return 0.0
    if form is EffectiveForm.DISPERSIVE_SHG:
        return detuning_part
    if form is EffectiveForm.DISPERSIVE_THG:
        return detuning_part if include_detuning else 0.0
    # second-order shifts: k=2 gives (g/D)(... + n_a), k=3 gives (g/D)(... - 2 n_a)
    return detuning_part + (1.0 if k == 2 else -2.0) / D


def dressed_energies(prop: SpectralPropagator) -> np.ndarray:
    """Exact energy of the eigenstate connected to ``(n_a = N, n_b = 0)`` in each sector.

    The connected eigenvector is the one with the largest weight on the
    first pair of the sector.
    """
    out = np.empty(len(prop.decompositions))
    for N, dec in enumerate(prop.decompositions):
        j = int(np.argmax(np.abs(dec.eigenvectors[0, :])))
        out[N] = dec.eigenvalues[j]
    return out


def dressed_kerr_coefficient(prop: SpectralPropagator, n: int) -> float:
    """Effective ``lambda / g`` at photon number ``n`` from exact dressed energies.

    Minus half the second difference of :func:`dressed_energies`, so that it
    equals ``g / Delta`` to leading order in the dispersive limit.
    """
    if not 1 <= n < prop.N_max:
        raise ValueError(f"need 1 <= n < {prop.N_max}, got {n}")
    e = dressed_energies(prop)
    return float(-(e[n + 1] - 2.0 * e[n] + e[n - 1]) / 2.0)
