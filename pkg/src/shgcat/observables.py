"""Measurements on the fundamental mode."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .evolution import kerr_propagate
from .fock import (
    DEFAULT_EPSILON,
    BlockedState,
    ModeAmplitudes,
    SingleModeDensity,
    choose_cutoffs,
    coherent_amplitudes,
)

__all__ = [
    "SingleModeDensity",
    "GridSpec",
    "QGrid",
    "Peak",
    "CatMatch",
    "VarianceParams",
    "reduce_mode_a",
    "rotate_density",
    "q_function",
    "cat_state",
    "fidelity",
    "best_cat_fidelity",
    "quadrature_variance",
    "min_quadrature_variance",
    "variance_formula",
    "purity",
    "mean_photons",
    "find_peaks",
    "squeezing_death_threshold",
]


@dataclass(frozen=True)
class GridSpec:
    lo: float = -6.0
    hi: float = 6.0
    n: int = 121

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 points per axis")
        if not self.hi > self.lo:
            raise ValueError("grid upper bound must exceed the lower bound")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"MIN:MAX:N"``."""
        try:
            lo, hi, n = text.split(":")
            return cls(float(lo), float(hi), int(n))
        except ValueError as exc:
            raise ValueError(f"grid spec must look like MIN:MAX:N, got {text!r}") from exc

    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class QGrid:
    """Q function sampled on ``values[i, j] = Q(re_axis[i] + 1j * im_axis[j])``."""

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray

    @property
    def cell_area(self) -> float:
        return float((self.re_axis[1] - self.re_axis[0]) * (self.im_axis[1] - self.im_axis[0]))

    def total(self) -> float:
        return float(np.sum(self.values) * self.cell_area)

    def rows(self):
        """``(re, im, q)`` triples, real part varying slowest."""
        for i, re in enumerate(self.re_axis):
            for j, im in enumerate(self.im_axis):
                yield float(re), float(im), float(self.values[i, j])


@dataclass(frozen=True)
class Peak:
    re: float
    im: float
    height: float

    @property
    def position(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class CatMatch:
    """Best overlap with a cat over conventions and phase-space orientation."""

    fidelity: float
    convention: int
    rotation: float
    by_convention: dict


@dataclass(frozen=True)
class VarianceParams:
    T: float
    z2: float
    Omega: float

    @classmethod
    def from_amplitudes(cls, alpha: float, beta: float, T: float) -> "VarianceParams":
        a2, b2 = float(alpha) ** 2, float(beta) ** 2
        return cls(float(T), a2 + 4.0 * b2, 4.0 * a2 - 8.0 * b2)


def reduce_mode_a(state: BlockedState) -> SingleModeDensity:
    """Partial trace over the harmonic mode."""
    psi = state.to_grid()
    rho = psi @ psi.conj().T
    return SingleModeDensity(rho, state.norm_deficit)


def rotate_density(rho: SingleModeDensity, theta: float) -> SingleModeDensity:
    """Apply ``exp(-i theta a^dag a)``: a coherent ``alpha`` becomes ``alpha e^{-i theta}``."""
    n = np.arange(rho.n_max + 1)
    ph = np.exp(-1j * theta * n)
    return SingleModeDensity(rho.matrix * np.outer(ph, ph.conj()), rho.trace_deficit, rho.discarded)


def _coherent_rows(points: np.ndarray, n_max: int) -> np.ndarray:
    # c[p, n] = exp(-|g_p|^2/2) g_p^n / sqrt(n!)
    out = np.empty((points.shape[0], n_max + 1), dtype=complex)
    out[:, 0] = np.exp(-0.5 * np.abs(points) ** 2)
    for n in range(n_max):
        out[:, n + 1] = out[:, n] * points / math.sqrt(n + 1)
    return out


def q_function(rho: SingleModeDensity, grid: GridSpec | None = None, im_grid: GridSpec | None = None) -> QGrid:
    """Husimi ``Q(gamma) = <gamma|rho|gamma> / pi`` on a rectangular grid."""
    grid = grid or GridSpec()
    im_grid = im_grid or grid
    re_axis, im_axis = grid.axis(), im_grid.axis()
    pts = (re_axis[:, None] + 1j * im_axis[None, :]).ravel()
    c = _coherent_rows(pts, rho.n_max)
    # <gamma|rho|gamma> = sum_nm conj(c_n) rho_nm c_m
    q = np.real(np.sum(c.conj() * (c @ rho.matrix.T), axis=1)) / math.pi
    q = np.maximum(q, 0.0).reshape(re_axis.shape[0], im_axis.shape[0])
    return QGrid(re_axis, im_axis, q)


def cat_state(alpha: complex, M: int = 2, convention: int = 1, n_max: int | None = None,
              epsilon: float = DEFAULT_EPSILON) -> ModeAmplitudes:
    """Normalized Kerr image of ``|alpha>`` at ``lambda t = pi / M``.

    For ``M = 2`` and ``convention = -1`` this is
    ``(e^{i pi/4}|alpha> + e^{-i pi/4}|-alpha>) / sqrt(2)``; ``convention = +1``
    gives the complex-conjugate superposition.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if n_max is None:
        n_max = choose_cutoffs(abs(alpha) ** 2, 0.0, epsilon)[0]
    out = kerr_propagate(coherent_amplitudes(alpha, n_max), math.pi / M, convention)
    return ModeAmplitudes(out.values / math.sqrt(out.norm_squared()))


def _common(rho: SingleModeDensity, psi: ModeAmplitudes):
    n = max(rho.n_max, psi.n_max)
    return rho.padded(n), psi.padded(n)


def fidelity(rho: SingleModeDensity, psi: ModeAmplitudes) -> float:
    """``<psi| rho |psi>``, unclamped."""
    m, v = _common(rho, psi)
    return float(np.real(np.vdot(v, m @ v)))


def _rotation_profile(m: np.ndarray, v: np.ndarray):
    # F(theta) = sum_d f_d exp(-i theta d), f_d = sum_{n-m=d} conj(v_n) rho_nm v_m
    w = v.conj()[:, None] * m * v[None, :]
    size = m.shape[0]
    offsets = np.arange(-(size - 1), size)
    coeffs = np.array([np.trace(w, offset=-d) for d in offsets])

    def f(theta):
        return float(np.real(np.sum(coeffs * np.exp(-1j * theta * offsets))))

    return offsets, coeffs, f


def best_cat_fidelity(
    rho: SingleModeDensity,
    alpha: complex,
    M: int = 2,
    conventions=(1, -1),
    optimize_rotation: bool = True,
    samples: int = 720,
) -> CatMatch:
    """Maximize the cat fidelity over conventions and (optionally) a phase-space rotation.

    ``rotation`` is the angle ``theta`` such that ``rotate_density(rho, theta)``
    best matches the cat built on ``alpha``. Linear-in-``n_a`` phases from
    free rotation of the mode are thereby absorbed.
    """
    best = None
    by_convention = {}
    for conv in conventions:
        psi = cat_state(alpha, M, conv, n_max=rho.n_max)
        m, v = _common(rho, psi)
        if not optimize_rotation:
            value, theta = float(np.real(np.vdot(v, m @ v))), 0.0
        else:
            offsets, coeffs, f = _rotation_profile(m, v)
            thetas = np.arange(samples) * (2.0 * math.pi / samples)
            profile = np.real(np.exp(-1j * np.outer(thetas, offsets)) @ coeffs)
            i = int(np.argmax(profile))
            step = 2.0 * math.pi / samples
            res = minimize_scalar(
                lambda t: -f(t),
                bounds=(thetas[i] - step, thetas[i] + step),
                method="bounded",
                options={"xatol": 1e-10},
            )
            theta, value = float(res.x), -float(res.fun)
            if value < profile[i]:
                theta, value = float(thetas[i]), float(profile[i])
            theta = math.remainder(theta, 2.0 * math.pi)
        by_convention[conv] = (value, theta)
        if best is None or value > best[0]:
            best = (value, conv, theta)
    return CatMatch(best[0], best[1], best[2], by_convention)


def _moments(rho: SingleModeDensity):
    m = rho.matrix
    tr = float(np.real(np.trace(m)))
    n = np.arange(m.shape[0])
    a1 = np.sum(np.sqrt(n[1:]) * np.diagonal(m, offset=-1)) / tr
    a2 = np.sum(np.sqrt(n[2:] * n[1:-1]) * np.diagonal(m, offset=-2)) / tr
    nbar = float(np.real(np.sum(n * np.diagonal(m)))) / tr
    return a1, a2, nbar


def quadrature_variance(rho: SingleModeDensity, theta: float = 0.0) -> float:
    """Variance of ``x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)``."""
    a1, a2, nbar = _moments(rho)
    rot = np.exp(-1j * theta)
    return float(nbar + 0.5 + np.real(rot * rot * (a2 - a1 * a1)) - np.abs(a1) ** 2)


def min_quadrature_variance(rho: SingleModeDensity):
    """Smallest quadrature variance over all angles, and the minimizing angle."""
    a1, a2, nbar = _moments(rho)
    c = a2 - a1 * a1
    value = float(nbar + 0.5 - np.abs(a1) ** 2 - np.abs(c))
    theta = 0.5 * (float(np.angle(c)) + math.pi)
    return value, theta


def variance_formula(params: VarianceParams, alpha: float) -> float:
    """Short-time closed form for the x-quadrature variance with coherent inputs."""
    T, z2, Om = params.T, params.z2, params.Omega
    a2 = float(alpha) ** 2
    e8 = math.exp(-8.0 * z2 * T * T)
    e4 = math.exp(-4.0 * z2 * T * T)
    c, s = math.cos(Om * T), math.sin(Om * T)
    return (
        0.5
        + a2 * (e8 - e4) * c
        - 2.0 * a2 * T * T * (4.0 * e8 - e4) * c
        - 2.0 * a2 * T * (2.0 * e8 - e4) * s
        + a2 * (1.0 - e4) * c
    )


def purity(rho: SingleModeDensity) -> float:
    m = rho.matrix
    return float(np.real(np.sum(m * m.T)))


def mean_photons(rho: SingleModeDensity) -> float:
    n = np.arange(rho.n_max + 1)
    return float(np.real(np.sum(n * np.diagonal(rho.matrix))))


def find_peaks(grid: QGrid, floor: float = 0.05, merge_cells: float = 1.0) -> list:
    """Strict local maxima of a Q grid, highest first.

    A node is a peak if it exceeds all eight neighbours and ``floor`` times
    the global maximum. Peaks within ``merge_cells`` grid spacings of a
    higher one are dropped.
    """
    v = grid.values
    top = float(np.max(v)) if v.size else 0.0
    if top <= 0.0:
        return []
    padded = np.pad(v, 1, mode="constant", constant_values=-np.inf)
    core = padded[1:-1, 1:-1]
    is_max = np.ones_like(v, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neigh = padded[1 + di : 1 + di + v.shape[0], 1 + dj : 1 + dj + v.shape[1]]
            is_max &= core > neigh
    is_max &= v >= floor * top
    idx = np.argwhere(is_max)
    cand = sorted(((float(v[i, j]), int(i), int(j)) for i, j in idx), key=lambda t: (-t[0], t[1], t[2]))
    kept = []
    for h, i, j in cand:
        if any(math.hypot(i - ki, j - kj) <= merge_cells for _, ki, kj in kept):
            continue
        kept.append((h, i, j))
    return [Peak(float(grid.re_axis[i]), float(grid.im_axis[j]), h) for h, i, j in kept]


def squeezing_death_threshold(alpha: float, t_max: float, samples: int = 201, tol: float = 1e-6,
                              iterations: int = 60) -> float:
    """Smallest ``beta^2`` for which the closed-form variance never drops below 1/2.

    Scans ``T`` on ``samples`` points in ``[0, t_max]`` and bisects on
    ``beta^2`` in ``[0, 2 alpha^2]``. Much larger ``beta^2`` flips the sign of the
    rotation frequency and squeezes the opposite quadrature, so the search
    stops there.
    """
    ts = np.linspace(0.0, t_max, samples)

    def squeezed(b2: float) -> bool:
        b = math.sqrt(b2)
        return min(variance_formula(VarianceParams.from_amplitudes(alpha, b, t), alpha) for t in ts) < 0.5 - tol

    lo, hi = 0.0, 2.0 * float(alpha) ** 2
    if not squeezed(lo):
        return 0.0
    if squeezed(hi):
        raise ValueError("squeezing persists over the whole beta^2 search range")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if squeezed(mid):
            lo = mid
        else:
            hi = mid
    return hi
