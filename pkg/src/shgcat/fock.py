"""Fock-space bookkeeping for the two-mode problem.

The interaction conserves ``N = n_a + k * n_b`` (k = 2 for second-harmonic
generation, k = 3 for third). States are therefore stored sector by sector:
sector ``N`` holds the pairs ``(N - k*j, j)`` for ``j = 0 .. N // k``, ordered
by descending ``n_a`` so that the coupling only links neighbouring entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModeAmplitudes",
    "SectorBasis",
    "BlockedState",
    "DEFAULT_EPSILON",
    "coherent_amplitudes",
    "fock_amplitudes",
    "poisson_tail",
    "choose_cutoffs",
    "sector_basis",
    "sector_size",
    "embed_product_state",
    "SingleModeDensity",
]

DEFAULT_EPSILON = 1e-10
SUPPORTED_ORDERS = (2, 3)


@dataclass(frozen=True)
class ModeAmplitudes:
    """Single-mode amplitudes ``values[n]`` for ``n = 0 .. n_max``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.shape[0] == 0:
            raise ValueError("amplitudes must be a non-empty 1-D array")
        object.__setattr__(self, "values", values)

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def padded(self, n_max: int) -> np.ndarray:
        """Values zero-padded (or truncated) to length ``n_max + 1``."""
        out = np.zeros(n_max + 1, dtype=complex)
        m = min(n_max, self.n_max) + 1
        out[:m] = self.values[:m]
        return out


@dataclass(frozen=True)
class SectorBasis:
    N: int
    k: int
    pairs: tuple

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def n_a(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=int)

    @property
    def n_b(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=int)


def sector_size(N: int, k: int) -> int:
    return N // k + 1


def sector_basis(N: int, k: int = 2) -> SectorBasis:
    """Two-mode occupations ``(n_a, n_b)`` with ``n_a + k*n_b == N``."""
    if k not in SUPPORTED_ORDERS:
        raise ValueError(f"harmonic order must be one of {SUPPORTED_ORDERS}, got {k}")
    if N < 0:
        raise ValueError(f"sector index must be >= 0, got {N}")
    pairs = tuple((N - k * j, j) for j in range(N // k + 1))
    return SectorBasis(N=int(N), k=int(k), pairs=pairs)


def coherent_amplitudes(alpha: complex, n_max: int) -> ModeAmplitudes:
    """Truncated coherent state ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``.

    The result is not renormalized; the missing weight is the Poisson tail
    beyond ``n_max``.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    values = np.zeros(n_max + 1, dtype=complex)
    head = math.exp(-0.5 * r2)
    if head > 0.0:
        values[0] = head
        for n in range(n_max):
            values[n + 1] = values[n] * alpha / math.sqrt(n + 1)
    else:
        # exp(-|alpha|^2/2) underflows; work with log-magnitudes instead
        n = np.arange(n_max + 1)
        log_mag = -0.5 * r2 + n * math.log(abs(alpha)) - 0.5 * np.array(
            [math.lgamma(k + 1) for k in n]
        )
        values = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return ModeAmplitudes(values)


def fock_amplitudes(n: int, n_max: int) -> ModeAmplitudes:
    if not 0 <= n <= n_max:
        raise ValueError(f"need 0 <= n <= n_max, got n={n}, n_max={n_max}")
    values = np.zeros(n_max + 1, dtype=complex)
    values[n] = 1.0
    return ModeAmplitudes(values)


def poisson_tail(nbar: float, n: int) -> float:
    """P(X > n) for X ~ Poisson(nbar), summed from the small end of the tail."""
    if nbar <= 0.0:
        return 0.0
    # summing far enough that the remaining terms are below double precision
    upper = int(nbar + 40.0 * math.sqrt(nbar) + 60)
    if n >= upper:
        return 0.0
    log_nbar = math.log(nbar)
    total = 0.0
    for j in range(upper, n, -1):
        total += math.exp(-nbar + j * log_nbar - math.lgamma(j + 1))
    return total


def _cutoff(nbar: float, budget: float) -> int:
    if nbar <= 0.0:
        return 0
    n = max(0, int(nbar))
    while poisson_tail(nbar, n) >= budget:
        n += 1
    # walk back down in case the starting guess was already past the minimum
    while n > 0 and poisson_tail(nbar, n - 1) < budget:
        n -= 1
    return n


def choose_cutoffs(nbar_a: float, nbar_b: float, epsilon: float = DEFAULT_EPSILON, k: int = 2):
    """Smallest photon-number cutoffs keeping the truncated weight below ``epsilon``.

    The retained probability of the product state is
    ``(1 - tail_a)(1 - tail_b)``; when both modes are populated the budget is
    split evenly so that the discarded weight stays below ``epsilon``.

    Returns
    -------
    (n_max_a, n_max_b, N_max)
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if nbar_a < 0 or nbar_b < 0:
        raise ValueError("mean photon numbers must be non-negative")
    if k not in SUPPORTED_ORDERS:
        raise ValueError(f"harmonic order must be one of {SUPPORTED_ORDERS}, got {k}")
    budget = epsilon / 2.0 if (nbar_a > 0 and nbar_b > 0) else epsilon
    n_a = _cutoff(nbar_a, budget)
    n_b = _cutoff(nbar_b, budget)
    return n_a, n_b, n_a + k * n_b


@dataclass
class BlockedState:
    """Pure two-mode state stored as one amplitude array per conserved sector."""

    k: int
    amplitudes: list
    norm_deficit: float = 0.0
    bases: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.bases is None:
            self.bases = [sector_basis(N, self.k) for N in range(len(self.amplitudes))]
        for N, amp in enumerate(self.amplitudes):
            if len(amp) != sector_size(N, self.k):
                raise ValueError(
                    f"sector {N} needs {sector_size(N, self.k)} amplitudes, got {len(amp)}"
                )

    @property
    def N_max(self) -> int:
        return len(self.amplitudes) - 1

    @property
    def n_a_max(self) -> int:
        return self.N_max

    @property
    def n_b_max(self) -> int:
        return self.N_max // self.k

    def norm_squared(self) -> float:
        return float(sum(np.sum(np.abs(a) ** 2) for a in self.amplitudes))

    def with_amplitudes(self, amplitudes) -> "BlockedState":
        return BlockedState(self.k, list(amplitudes), self.norm_deficit, self.bases)

    def amplitude(self, n_a: int, n_b: int) -> complex:
        N = n_a + self.k * n_b
        if N > self.N_max or n_a < 0 or n_b < 0:
            return 0j
        return complex(self.amplitudes[N][n_b])

    def to_grid(self) -> np.ndarray:
        """Dense ``psi[n_a, n_b]`` array covering every retained pair."""
        out = np.zeros((self.n_a_max + 1, self.n_b_max + 1), dtype=complex)
        for N, amp in enumerate(self.amplitudes):
            j = np.arange(len(amp))
            out[N - self.k * j, j] = amp
        return out

    @classmethod
    def from_grid(cls, psi, k: int, N_max: int, norm_deficit: float = 0.0) -> "BlockedState":
        psi = np.asarray(psi, dtype=complex)
        amps = []
        for N in range(N_max + 1):
            amp = np.zeros(sector_size(N, k), dtype=complex)
            for j in range(len(amp)):
                n_a = N - k * j
                if n_a < psi.shape[0] and j < psi.shape[1]:
                    amp[j] = psi[n_a, j]
            amps.append(amp)
        return cls(k, amps, norm_deficit)


def embed_product_state(a: ModeAmplitudes, b: ModeAmplitudes, k: int = 2) -> BlockedState:
    """Write ``|a> (x) |b>`` into the sector layout.

    Sectors run up to ``N_max = a.n_max + k * b.n_max`` so that every
    retained product amplitude has a home; pairs beyond either input cutoff
    start empty but remain available to the dynamics.
    """
    if k not in SUPPORTED_ORDERS:
        raise ValueError(f"harmonic order must be one of {SUPPORTED_ORDERS}, got {k}")
    if not (np.all(np.isfinite(a.values)) and np.all(np.isfinite(b.values))):
        raise ValueError("amplitudes must be finite")
    N_max = a.n_max + k * b.n_max
    amps = []
    for N in range(N_max + 1):
        j = np.arange(N // k + 1)
        n_a = N - k * j
        keep = (n_a <= a.n_max) & (j <= b.n_max)
        amp = np.zeros(j.shape[0], dtype=complex)
        amp[keep] = a.values[n_a[keep]] * b.values[j[keep]]
        amps.append(amp)
    state = BlockedState(k, amps)
    state.norm_deficit = max(0.0, 1.0 - state.norm_squared())
    return state


@dataclass(frozen=True)
class SingleModeDensity:
    """Reduced density matrix of one mode.

    ``trace_deficit`` is the probability lost to truncation that the matrix
    does not carry; ``discarded`` records weight that was truncated and then
    restored by renormalization.
    """

    matrix: np.ndarray
    trace_deficit: float = 0.0
    discarded: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def n_max(self) -> int:
        return self.matrix.shape[0] - 1

    @classmethod
    def from_amplitudes(cls, amps: ModeAmplitudes) -> "SingleModeDensity":
        v = amps.values
        return cls(np.outer(v, v.conj()), max(0.0, 1.0 - amps.norm_squared()))

    def padded(self, n_max: int) -> np.ndarray:
        out = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        m = min(n_max, self.n_max) + 1
        out[:m, :m] = self.matrix[:m, :m]
        return out
