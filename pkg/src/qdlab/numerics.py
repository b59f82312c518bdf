"""Small dense kernels: Hermitian eigensystems, singular values, entropy."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NotHermitian

HERMITIAN_TOL = 1e-8


class Eigensystem(NamedTuple):
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eigensystem(a) -> Eigensystem:
    """Eigen-decompose a small Hermitian (or real symmetric) matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Matrix with ``||a - a^H|| <= 1e-8``.

    Returns
    -------
    Eigensystem
        Eigenvalues sorted descending; ``eigenvectors[:, k]`` belongs to
        ``eigenvalues[k]``.

    Raises
    ------
    NotHermitian
        If the matrix is not square or not Hermitian within tolerance.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    dev = np.linalg.norm(a - a.conj().T)
    if dev > HERMITIAN_TOL:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    return Eigensystem(w[::-1].copy(), v[:, ::-1].copy())


def singular_values(a) -> np.ndarray:
    """Singular values of a small real matrix, descending and non-negative."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy ``-Tr[rho log2 rho]`` in bits.

    Eigenvalues in ``[-1e-10, 0)`` are treated as zero, and ``0 log 0 = 0``.
    """
    w = np.linalg.eigvalsh(np.asarray(rho))
    w = w[w > 0]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def binary_entropy_of_bloch(r):
    """Entropy in bits of a qubit whose Bloch vector has length ``r``.

    Vectorized; ``r`` is clipped to ``[0, 1]``.
    """
    r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
    a = 0.5 * (1.0 + r)
    b = 0.5 * (1.0 - r)
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0, a * np.log2(np.where(a > 0, a, 1.0)), 0.0)
        tb = np.where(b > 0, b * np.log2(np.where(b > 0, b, 1.0)), 0.0)
    return -(ta + tb)
