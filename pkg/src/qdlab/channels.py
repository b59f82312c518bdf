"""Single-qubit decoherence channels in the Kraus and Heisenberg pictures.

A channel acts on observables through ``E^dag(A) = sum_mu K_mu^dag A K_mu``;
its transmission matrix ``M`` is defined by ``E^dag(sigma_i) = sum_j M_ij sigma_j``,
so local channels evolve the expectation matrix as ``M_A R0 M_B^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .states import PAULIS, SX, SY, SZ, DensityMatrix, ExpectationMatrix

COMPLETENESS_TOL = 1e-10

KET0 = np.array([[1, 0], [0, 0]], dtype=complex)  # |0><0|
KET1 = np.array([[0, 0], [0, 1]], dtype=complex)  # |1><1|
LOWER = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A qubit channel given by its Kraus operators.

    ``p`` is the channel strength for the built-in families and ``None``
    for user-supplied channels.
    """

    operators: tuple
    name: str = "custom"
    p: float | None = None

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex).reshape(2, 2) for k in self.operators)
        if not ops:
            raise DomainError("a channel needs at least one Kraus operator")
        for k in ops:
            k.setflags(write=False)
        dev = np.max(np.abs(sum(k.conj().T @ k for k in ops) - np.eye(2)))
        if dev > COMPLETENESS_TOL:
            raise DomainError(f"Kraus operators are not complete: deviation {dev:.3e}")
        object.__setattr__(self, "operators", ops)

    @property
    def s(self) -> float | None:
        return None if self.p is None else 1.0 - self.p

    def heisenberg(self, a) -> np.ndarray:
        """Adjoint map ``sum K^dag a K``."""
        a = np.asarray(a)
        return sum(k.conj().T @ a @ k for k in self.operators)

    def apply(self, rho) -> np.ndarray:
        """Schroedinger-picture action on a 2x2 operator."""
        rho = np.asarray(rho)
        return sum(k @ rho @ k.conj().T for k in self.operators)

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """The composition ``other o self`` (apply ``self`` first)."""
        ops = [b @ a for b in other.operators for a in self.operators]
        return KrausChannel(tuple(ops), name=f"{other.name}*{self.name}")


def _check_p(p) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"channel strength p must lie in [0, 1], got {p!r}")
    return p


def adc(p: float) -> KrausChannel:
    """Amplitude damping: ``{sqrt(s)|0><0| + |1><1|, sqrt(p)|1><0|}``."""
    p = _check_p(p)
    s = 1.0 - p
    return KrausChannel((np.sqrt(s) * KET0 + KET1, np.sqrt(p) * LOWER), "adc", p)


def pdc(p: float) -> KrausChannel:
    """Phase damping: ``{sqrt(s) 1, sqrt(p)|0><0|, sqrt(p)|1><1|}``."""
    p = _check_p(p)
    s = 1.0 - p
    return KrausChannel(
        (np.sqrt(s) * np.eye(2), np.sqrt(p) * KET0, np.sqrt(p) * KET1), "pdc", p
    )


def dpc(p: float) -> KrausChannel:
    """Depolarizing: ``{sqrt(1+3s)/2 1, sqrt(p)/2 sigma_x, sqrt(p)/2 sigma_y, sqrt(p)/2 sigma_z}``."""
    p = _check_p(p)
    s = 1.0 - p
    q = 0.5 * np.sqrt(p)
    return KrausChannel(
        (0.5 * np.sqrt(1.0 + 3.0 * s) * np.eye(2), q * SX, q * SY, q * SZ), "dpc", p
    )


BUILTIN = {"adc": adc, "pdc": pdc, "dpc": dpc}


def identity_channel() -> KrausChannel:
    return KrausChannel((np.eye(2),), "identity")


def custom(kraus: Sequence) -> KrausChannel:
    return KrausChannel(tuple(kraus), "custom")


def make_channel(name: str, p: float) -> KrausChannel:
    try:
        factory = BUILTIN[name]
    except KeyError:
        raise DomainError(f"unknown channel {name!r}; expected one of {sorted(BUILTIN)}")
    return factory(p)


def transmission_matrix(ch: KrausChannel) -> np.ndarray:
    """``M_ij = 1/2 Tr[E^dag(sigma_i) sigma_j]``, real 4x4."""
    m = np.empty((4, 4))
    for i, si in enumerate(PAULIS):
        hi = ch.heisenberg(si)
        for j, sj in enumerate(PAULIS):
            m[i, j] = 0.5 * np.trace(hi @ sj).real
    return m


def apply_local(ch_a: KrausChannel, ch_b: KrausChannel, rho) -> DensityMatrix:
    """``sum_{mu,nu} (K_mu (x) K_nu) rho (K_mu (x) K_nu)^dag``."""
    rho = np.asarray(rho)
    out = np.zeros((4, 4), dtype=complex)
    for ka in ch_a.operators:
        for kb in ch_b.operators:
            k = np.kron(ka, kb)
            out += k @ rho @ k.conj().T
    return DensityMatrix(out)


def evolve_expectation(m_a, r0, m_b) -> ExpectationMatrix:
    """``M_A R0 M_B^T``."""
    return ExpectationMatrix(np.asarray(m_a) @ np.asarray(r0) @ np.asarray(m_b).T)


def channel_from_json(obj: Mapping[str, Any]) -> KrausChannel:
    """Parse ``{"name": "adc"|"pdc"|"dpc", "p": 0.3}`` or
    ``{"name": "custom", "kraus": [{"re": [[..]], "im": [[..]]}, ...]}``."""
    name = obj.get("name")
    if name == "custom":
        ops = []
        for k in obj.get("kraus", []):
            re = np.asarray(k["re"], dtype=float)
            im = np.asarray(k.get("im", np.zeros_like(re)), dtype=float)
            ops.append(re + 1j * im)
        return custom(ops)
    if "p" not in obj:
        raise DomainError(f"channel {name!r} needs a strength 'p'")
    return make_channel(name, obj["p"])


def channel_to_json(ch: KrausChannel) -> dict:
    if ch.name in BUILTIN and ch.p is not None:
        return {"name": ch.name, "p": ch.p}
    return {
        "name": "custom",
        "kraus": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in ch.operators],
    }
