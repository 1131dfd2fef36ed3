"""Per-sector interaction Hamiltonians and their diagonal effective forms.

Energies are in units of the coupling ``g`` (and hbar = 1). The free part
proportional to the conserved charge is dropped, leaving

    H_int / g = (D / (k + 1)) (n_b - n_a) + (a^k b^dag + a^dag^k b)

with ``D = Delta / g`` and ``Delta = omega_b - k omega_a``. Inside a sector
the coupling only links neighbouring pairs, so every block is a real
symmetric tridiagonal matrix.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .exceptions import DegenerateGap
from .fock import SectorBasis, sector_basis

__all__ = [
    "TridiagonalBlock",
    "EffectiveForm",
    "build_sector_block",
    "build_blocks",
    "detuning_diagonal",
    "effective_sector_diagonal",
    "second_order_pt_diagonal",
    "small_rotation_transform",
    "dispersive_ratio",
    "kerr_coefficient",
]


@dataclass(frozen=True)
class TridiagonalBlock:
    basis: SectorBasis
    diag: np.ndarray
    offdiag: np.ndarray
    detuning_over_g: float

    def __len__(self) -> int:
        return self.diag.shape[0]

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if len(self.offdiag):
            m += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return m


class EffectiveForm(enum.Enum):
    """Diagonal effective Hamiltonians available for dispersive propagation.

    DISPERSIVE_SHG
        ``(D/3)(n_b - n_a) - (g/D)[4 n_a n_b - n_a^2]``, the closed form usually
        quoted for second-harmonic generation.
    DISPERSIVE_THG
        ``(g/D){9 n_b (n_a^2 + n_a) - n_a^3 - 6 n_a^2}`` plus, optionally, the
        ``(D/4)(n_b - n_a)`` detuning diagonal.
    PERTURBATIVE
        Second-order perturbation theory on the exact block, no closed form.
    KERR
        ``(g/D) n_a^2`` alone; only meaningful with the harmonic in vacuum.
    """

    DISPERSIVE_SHG = "eq12"
    DISPERSIVE_THG = "eq21"
    PERTURBATIVE = "pt"
    KERR = "kerr"

    @classmethod
    def parse(cls, value) -> "EffectiveForm":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "eq12": cls.DISPERSIVE_SHG,
            "shg": cls.DISPERSIVE_SHG,
            "dispersive_shg": cls.DISPERSIVE_SHG,
            "eq21": cls.DISPERSIVE_THG,
            "thg": cls.DISPERSIVE_THG,
            "dispersive_thg": cls.DISPERSIVE_THG,
            "pt": cls.PERTURBATIVE,
            "perturbative": cls.PERTURBATIVE,
            "kerr": cls.KERR,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown effective form {value!r}") from None


def detuning_diagonal(basis: SectorBasis, detuning_over_g: float) -> np.ndarray:
    return detuning_over_g / (basis.k + 1) * (basis.n_b - basis.n_a).astype(float)


def _coupling(n_a: int, n_b: int, k: int) -> float:
    # <n_a - k, n_b + 1| a^k b^dag |n_a, n_b>
    if n_a < k:
        return 0.0
    prod = float(n_b + 1)
    for i in range(k):
        prod *= n_a - i
    return math.sqrt(prod)


def build_sector_block(basis: SectorBasis, detuning_over_g: float) -> TridiagonalBlock:
    """``H_int / g`` restricted to one sector."""
    diag = detuning_diagonal(basis, float(detuning_over_g))
    offdiag = np.array(
        [_coupling(n_a, n_b, basis.k) for n_a, n_b in basis.pairs[:-1]], dtype=float
    )
    return TridiagonalBlock(basis, diag, offdiag, float(detuning_over_g))


def build_blocks(N_max: int, k: int, detuning_over_g: float) -> list:
    return [build_sector_block(sector_basis(N, k), detuning_over_g) for N in range(N_max + 1)]


def second_order_pt_diagonal(block: TridiagonalBlock, gap_ratio: float = 10.0) -> np.ndarray:
    """Diagonal corrected to second order in the couplings.

    ``E_j + sum_i offdiag_ij^2 / (E_j - E_i)`` over the (at most two)
    neighbours ``i`` of ``j``.

    Parameters
    ----------
    gap_ratio : float
        Every coupled gap must exceed ``gap_ratio * max|offdiag|``. Pass 0 to
        only reject exact degeneracies.

    Raises
    ------
    DegenerateGap
        When a coupled gap is below the threshold.
    """
    e = block.diag
    out = e.astype(float).copy()
    off = block.offdiag
    if len(off) == 0:
        return out
    threshold = gap_ratio * float(np.max(np.abs(off)))
    for j, v in enumerate(off):
        if v == 0.0:
            continue
        gap = e[j] - e[j + 1]
        if gap == 0.0 or abs(gap) <= threshold:
            raise DegenerateGap(
                f"sector N={block.basis.N}: gap {abs(gap):.4g} between entries {j} and {j + 1} "
                f"is below {threshold:.4g}"
            )
        shift = v * v / gap
        out[j] += shift
        out[j + 1] -= shift
    return out


def effective_sector_diagonal(
    basis: SectorBasis,
    detuning_over_g: float,
    form,
    include_detuning: bool = True,
    gap_ratio: float = 0.0,
) -> np.ndarray:
    """Diagonal effective energies (units of g) for every pair of a sector.

    ``include_detuning`` only affects ``DISPERSIVE_THG``, whose usual closed
    form is quoted without the detuning diagonal. ``gap_ratio`` is forwarded
    to :func:`second_order_pt_diagonal` for the perturbative form.
    """
    form = EffectiveForm.parse(form)
    D = float(detuning_over_g)
    if D == 0.0:
        raise ValueError("effective forms need a non-zero detuning")
    n_a = basis.n_a.astype(float)
    n_b = basis.n_b.astype(float)
    lam = 1.0 / D

    if form is EffectiveForm.DISPERSIVE_SHG:
        if basis.k != 2:
            raise ValueError("DISPERSIVE_SHG needs harmonic order 2")
        return detuning_diagonal(basis, D) - lam * (4.0 * n_b * n_a - n_a**2)
    if form is EffectiveForm.DISPERSIVE_THG:
        if basis.k != 3:
            raise ValueError("DISPERSIVE_THG needs harmonic order 3")
        out = lam * (9.0 * n_b * (n_a**2 + n_a) - n_a**3 - 6.0 * n_a**2)
        if include_detuning:
            out = out + detuning_diagonal(basis, D)
        return out
    if form is EffectiveForm.PERTURBATIVE:
        return second_order_pt_diagonal(build_sector_block(basis, D), gap_ratio=gap_ratio)
    return lam * n_a**2


def small_rotation_transform(block: TridiagonalBlock, g_over_delta: float) -> np.ndarray:
    """Conjugate a block by ``U = exp[(g/Delta)(a^k b^dag - a^dag^k b)]``.

    Returns the dense ``U H U^T``; to first order it removes the couplings,
    leaving off-diagonal remainders of order ``g/Delta``.
    """
    if abs(g_over_delta) > 0.1:
        warnings.warn(
            f"g/Delta = {g_over_delta} is not small; the rotation is not perturbative",
            stacklevel=2,
        )
    h = block.dense()
    if g_over_delta == 0.0 or len(block) == 1:
        return h
    n = len(block)
    gen = np.zeros((n, n))
    idx = np.arange(n - 1)
    gen[idx + 1, idx] = g_over_delta * block.offdiag
    gen[idx, idx + 1] = -g_over_delta * block.offdiag
    u = expm(gen)
    out = u @ h @ u.T
    return 0.5 * (out + out.T)


def dispersive_ratio(detuning_over_g: float, nbar_a: float, nbar_b: float = 0.0) -> float:
    """``|Delta| / (g (nbar_a + 1)(nbar_b + 1))``; the dispersive limit wants this >> 1."""
    return abs(detuning_over_g) / ((nbar_a + 1.0) * (nbar_b + 1.0))


def kerr_coefficient(detuning_over_g: float) -> float:
    """``lambda / g = g / Delta``."""
    if detuning_over_g == 0:
        raise ValueError("Kerr coefficient undefined at zero detuning")
    return 1.0 / detuning_over_g
