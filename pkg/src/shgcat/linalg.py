"""Real symmetric eigensolvers.

``tridiag_eigen`` is the production path used to diagonalize every sector
block (implicit-shift QL with Wilkinson-style shifts, eigenvectors
accumulated). ``dense_eigen`` is a cyclic Jacobi solver kept independent of
it so that tests can use one as the oracle of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NoConvergence, NotSymmetric

__all__ = ["EigenDecomposition", "tridiag_eigen", "dense_eigen", "matrix_norm"]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def matrix_norm(matrix: np.ndarray) -> float:
    """Max absolute row sum (the infinity norm)."""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(matrix), axis=1)))


def _canonical_order(values: np.ndarray, vectors: np.ndarray) -> EigenDecomposition:
    # fix the sign so the largest-magnitude component of each column is positive
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            vectors[:, j] = -col
    # exact ties broken by descending lexicographic order of the eigenvector
    keys = sorted(
        range(values.shape[0]),
        key=lambda j: (values[j], tuple(-vectors[:, j])),
    )
    order = np.array(keys, dtype=int)
    return EigenDecomposition(values[order].copy(), vectors[:, order].copy())


def tridiag_eigen(block, offdiag=None, max_sweeps: int = 50) -> EigenDecomposition:
    """Diagonalize a real symmetric tridiagonal matrix.

    Parameters
    ----------
    block : TridiagonalBlock or array_like
        Either an object with ``diag`` and ``offdiag`` attributes, or the
        diagonal itself (then ``offdiag`` must be given).
    offdiag : array_like, optional
        Off-diagonal, length ``len(diag) - 1``.
    max_sweeps : int
        Iteration cap per eigenvalue.

    Returns
    -------
    EigenDecomposition

    Raises
    ------
    NoConvergence
        If an eigenvalue needs more than ``max_sweeps`` QL iterations.
    """
    if offdiag is None:
        diag, offdiag = block.diag, block.offdiag
    else:
        diag = block
    d = np.array(diag, dtype=float)
    n = d.shape[0]
    e = np.zeros(n, dtype=float)
    if n > 1:
        e[: n - 1] = np.asarray(offdiag, dtype=float)
    elif np.size(offdiag) != 0:
        raise ValueError("offdiag must have length len(diag) - 1")
    if n > 1 and np.size(offdiag) != n - 1:
        raise ValueError("offdiag must have length len(diag) - 1")
    z = np.eye(n)
    if n == 0:
        return EigenDecomposition(d, z)

    for l in range(n):
        iteration = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if iteration == max_sweeps:
                raise NoConvergence(
                    f"eigenvalue {l} not converged after {max_sweeps} QL iterations"
                )
            iteration += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                zi1 = z[:, i + 1]
                z[:, i] = c * zi - s * zi1
                z[:, i + 1] = s * zi + c * zi1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    return _canonical_order(d, z)


def dense_eigen(matrix, max_sweeps: int = 50, symmetry_tol: float = 1e-12) -> EigenDecomposition:
    """Cyclic Jacobi diagonalization of a dense real symmetric matrix.

    Slow (O(n^3) per sweep in Python loops) and only meant for small
    matrices: test oracles and checks on rotated sector blocks.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = max(1.0, matrix_norm(a))
    if n and np.max(np.abs(a - a.T)) > symmetry_tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n <= 1:
        return EigenDecomposition(np.diag(a).copy(), v)

    tol = _EPS * scale
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)))
        if off > tol:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    return _canonical_order(np.diag(a).copy(), v)
