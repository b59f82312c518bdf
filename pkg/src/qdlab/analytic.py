"""Closed-form geometric discord for Bell-diagonal inputs under identical local channels.

For input ``c = (c1, c2, c3)`` and channel strength ``p`` (``s = 1 - p``) the
evolved 3x4 block ``(x, R)`` has mutually orthogonal rows, so its squared
singular values are the squared row norms and the geometric discord is a
quarter of (sum minus max) of those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

PDC_EXAMPLE_CROSSING = 1.0 - math.sqrt(3.0 / 5.0)
ADC_BELL_CROSSING = 0.5


def _check(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    return p


def _quarter_sum_minus_max(terms) -> float:
    return 0.25 * (sum(terms) - max(terms))


def gmqd_adc(c, p: float) -> float:
    """Amplitude damping on both qubits."""
    p = _check(p)
    c1, c2, c3 = (float(v) for v in c)
    s = 1.0 - p
    z = p * p + (p * p + c3 * s * s) ** 2
    return _quarter_sum_minus_max(((s * c1) ** 2, (s * c2) ** 2, z))


def gmqd_pdc(c, p: float) -> float:
    """Phase damping on both qubits."""
    p = _check(p)
    c1, c2, c3 = (float(v) for v in c)
    s2 = (1.0 - p) ** 2
    return _quarter_sum_minus_max(((s2 * c1) ** 2, (s2 * c2) ** 2, c3 * c3))


def gmqd_dpc(c, p: float) -> float:
    """Depolarizing noise on both qubits."""
    p = _check(p)
    s2 = (1.0 - p) ** 2
    return _quarter_sum_minus_max(tuple((s2 * float(v)) ** 2 for v in c))


@dataclass(frozen=True)
class BranchPair:
    """Two competing branches of a piecewise formula; ``active`` is the argmin (1 or 2)."""

    d1: float
    d2: float

    @property
    def active(self) -> int:
        # ties go to the lower index
        return 1 if self.d1 <= self.d2 else 2

    @property
    def value(self) -> float:
        return min(self.d1, self.d2)


def pdc_example_branches(p: float) -> BranchPair:
    """Input ``c = (1, -0.6, 0.6)`` under phase damping."""
    s4 = (1.0 - _check(p)) ** 4
    return BranchPair(17.0 / 50.0 * s4, 9.0 / 100.0 * (1.0 + s4))


def adc_bell_branches(p: float) -> BranchPair:
    """Bell state ``c = (-1, -1, -1)`` under amplitude damping."""
    p = _check(p)
    return BranchPair(0.5 * (1.0 - 3.0 * p + 3.0 * p * p), 0.5 * (1.0 - p) ** 2)


def third_example_gmqd(p: float) -> float:
    """``c = (0.5, 0, 0.5)``, ``d = -0.5`` under phase damping: ``(1 - p)^4 / 16``."""
    return (1.0 - _check(p)) ** 4 / 16.0


FORMULAS = {"adc": gmqd_adc, "pdc": gmqd_pdc, "dpc": gmqd_dpc}
