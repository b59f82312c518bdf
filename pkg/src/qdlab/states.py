"""Two-qubit states in density-matrix, Bloch and expectation-matrix form.

Pauli convention: ``sigma_3 |0> = |0>``, qubit A is the left tensor factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import NotPhysical

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)

# PAULI_PAIRS[i, j] = sigma_i (x) sigma_j
PAULI_PAIRS = np.array([[np.kron(a, b) for b in PAULIS] for a in PAULIS])

SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated 4x4 two-qubit density matrix.

    Construction checks Hermiticity, unit trace and positivity, then stores
    the Hermitian part as an immutable array.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.shape != (4, 4):
            raise NotPhysical(f"density matrix must be 4x4, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NotPhysical("density matrix has non-finite entries")
        herm = np.max(np.abs(a - a.conj().T))
        if herm > HERMITIAN_TOL:
            raise NotPhysical(f"not Hermitian: max |rho - rho^H| = {herm:.3e}")
        a = 0.5 * (a + a.conj().T)
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise NotPhysical(f"trace is {tr!r}, expected 1")
        wmin = np.linalg.eigvalsh(a)[0]
        if wmin < -PSD_TOL:
            raise NotPhysical(
                f"not positive semidefinite: most negative eigenvalue {wmin:.6g}"
            )
        object.__setattr__(self, "entries", _readonly(a))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def reduced(self, keep: str) -> np.ndarray:
        """Single-qubit reduced state of subsystem ``keep`` ('A' or 'B')."""
        t = self.entries.reshape(2, 2, 2, 2)
        if keep == "A":
            return np.einsum("ajbj->ab", t)
        if keep == "B":
            return np.einsum("jajb->ab", t)
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")

    def swapped(self) -> "DensityMatrix":
        """The same state with the qubits exchanged."""
        return DensityMatrix(SWAP @ self.entries @ SWAP)


def as_density_matrix(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(np.asarray(rho))


@dataclass(frozen=True, eq=False)
class BlochForm:
    """Local Bloch vectors ``x`` (qubit A), ``y`` (qubit B) and correlations ``R``."""

    x: np.ndarray
    y: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly(np.asarray(self.x, dtype=float).reshape(3)))
        object.__setattr__(self, "y", _readonly(np.asarray(self.y, dtype=float).reshape(3)))
        object.__setattr__(self, "R", _readonly(np.asarray(self.R, dtype=float).reshape(3, 3)))

    def K(self) -> np.ndarray:
        """``x x^T + R R^T``."""
        return np.outer(self.x, self.x) + self.R @ self.R.T


@dataclass(frozen=True, eq=False)
class ExpectationMatrix:
    """Real 4x4 matrix of Pauli-pair expectations ``Tr[rho sigma_i (x) sigma_j]``."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.shape != (4, 4):
            raise ValueError(f"expectation matrix must be 4x4, got {a.shape}")
        object.__setattr__(self, "entries", _readonly(a))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    @property
    def x(self) -> np.ndarray:
        return self.entries[1:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.entries[0, 1:]

    @property
    def R(self) -> np.ndarray:
        return self.entries[1:, 1:]

    def to_bloch(self) -> BlochForm:
        return BlochForm(self.x, self.y, self.R)


@dataclass(frozen=True)
class BellDiagonalParams:
    c: tuple[float, float, float]
    d: float = 0.0


def is_physical_bell_diagonal(c) -> bool:
    """Whether ``c`` lies in the tetrahedron of physical Bell-diagonal states."""
    c = [float(v) for v in c]
    eps = 1e-12

    def inside(v):
        return -3.0 - eps <= v <= 1.0 + eps

    if not inside(sum(c)):
        return False
    for i, j, k in itertools.permutations(range(3)):
        if not inside(c[i] - c[j] - c[k]):
            return False
    return True


def from_bloch(b: BlochForm) -> DensityMatrix:
    """Assemble ``rho = 1/4 [1 + x.sigma (x) 1 + 1 (x) y.sigma + sum R_ij sigma_i (x) sigma_j]``.

    Raises NotPhysical if the result is not positive semidefinite.
    """
    r = np.zeros((4, 4))
    r[0, 0] = 1.0
    r[1:, 0] = b.x
    r[0, 1:] = b.y
    r[1:, 1:] = b.R
    return from_expectation(ExpectationMatrix(r))


def from_expectation(r: ExpectationMatrix) -> DensityMatrix:
    rho = 0.25 * np.einsum("ij,ijkl->kl", np.asarray(r, dtype=float), PAULI_PAIRS)
    return DensityMatrix(rho)


def expectation_matrix(rho) -> ExpectationMatrix:
    rho = np.asarray(rho)
    # Tr[rho P] = sum_kl rho_kl P_lk
    r = np.einsum("kl,ijlk->ij", rho, PAULI_PAIRS).real
    r[0, 0] = 1.0
    return ExpectationMatrix(r)


def to_bloch(rho) -> BlochForm:
    return expectation_matrix(rho).to_bloch()


def reduced_expectation(r: ExpectationMatrix) -> np.ndarray:
    """Rows 1..3 of the expectation matrix, i.e. the 3x4 block ``(x, R)``."""
    return np.array(np.asarray(r)[1:, :])


def bell_diagonal(c, d: float = 0.0) -> DensityMatrix:
    """``1/4 (1 + sum c_i sigma_i (x) sigma_i + d sigma_3 (x) 1 + d 1 (x) sigma_3)``."""
    c = np.asarray(c, dtype=float).reshape(3)
    x = np.array([0.0, 0.0, d])
    return from_bloch(BlochForm(x, x, np.diag(c)))


def random_state(rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random state ``A A^H / Tr(A A^H)`` with complex Gaussian ``A``."""
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = a @ a.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_bell_diagonal_c(rng: np.random.Generator) -> np.ndarray:
    """Uniform sample from the tetrahedron of physical Bell-diagonal ``c``."""
    vertices = np.array([[-1, -1, -1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]], dtype=float)
    w = rng.dirichlet(np.ones(4))
    return w @ vertices


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex).reshape(4)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def product_state(rho_a, rho_b) -> DensityMatrix:
    return DensityMatrix(np.kron(np.asarray(rho_a), np.asarray(rho_b)))


def qubit_state(bloch) -> np.ndarray:
    """2x2 density matrix ``(1 + r.sigma)/2``."""
    r = np.asarray(bloch, dtype=float).reshape(3)
    return 0.5 * (I2 + r[0] * SX + r[1] * SY + r[2] * SZ)


MAXIMALLY_MIXED = DensityMatrix(np.eye(4) / 4)


def state_from_json(obj: Mapping[str, Any]) -> DensityMatrix:
    """Build a state from its JSON description.

    Accepted forms::

        {"type": "bell_diagonal", "c": [c1, c2, c3], "d": 0.0}
        {"type": "matrix", "re": [[...]], "im": [[...]]}
    """
    kind = obj.get("type")
    if kind == "bell_diagonal":
        c = obj.get("c")
        if c is None or len(c) != 3:
            raise NotPhysical("bell_diagonal state needs a 3-component 'c'")
        return bell_diagonal(c, float(obj.get("d", 0.0)))
    if kind == "matrix":
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != (4, 4) or im.shape != (4, 4):
            raise NotPhysical("matrix state needs 4x4 're' and 'im'")
        return DensityMatrix(re + 1j * im)
    raise NotPhysical(f"unknown state type {kind!r}")


def state_to_json(rho) -> dict:
    a = np.asarray(rho)
    return {"type": "matrix", "re": a.real.tolist(), "im": a.imag.tolist()}
