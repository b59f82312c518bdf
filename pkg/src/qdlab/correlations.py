"""Correlation measures for two-qubit states.

Mutual information, measurement-based classical correlation and quantum
discord (projective measurements on one qubit), the geometric discord by
three independent routes, and the Wootters concurrence.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import OptimizerFailure
from .numerics import (
    binary_entropy_of_bloch,
    hermitian_eigensystem,
    singular_values,
    von_neumann_entropy,
)
from .simplex import minimize_batch
from .states import (
    I2,
    SX,
    SY,
    SZ,
    DensityMatrix,
    as_density_matrix,
    expectation_matrix,
    qubit_state,
    reduced_expectation,
    to_bloch,
)

PROB_FLOOR = 1e-14
TIE_TOL = 1e-12
DEGENERACY_GAP = 1e-6
FLAT_TOL = 1e-12
DISCORD_CLAMP = 1e-9

YY = np.kron(SY, SY)


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings shared by the measurement optimizer and the brute-force search.

    ``grid_theta`` x ``grid_phi`` is the coarse grid over measurement
    directions, refined coordinate-wise down to ``refine_tol`` radians.
    ``restarts``, ``seed`` and ``tolerance`` drive the brute-force nearest
    zero-discord search; ``max_iter`` caps every local search.
    """

    grid_theta: int = 64
    grid_phi: int = 128
    refine_tol: float = 1e-10
    restarts: int = 32
    seed: int = 0
    max_iter: int = 4000
    tolerance: float = 1e-4

    @classmethod
    def from_json(cls, obj: Mapping[str, Any] | None) -> "OptimizerConfig":
        if not obj:
            return cls()
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown optimizer settings: {sorted(unknown)}")
        return cls(**obj)

    def to_json(self) -> dict:
        return asdict(self)


DEFAULT_CONFIG = OptimizerConfig()


@dataclass(frozen=True)
class MeasurementBasis:
    """Projective qubit measurement along ``n(theta, phi)``."""

    theta: float
    phi: float

    @property
    def n(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        e1 = 0.5 * (I2 + n[0] * SX + n[1] * SY + n[2] * SZ)
        return e1, I2 - e1

    def canonical(self) -> "MeasurementBasis":
        """Equivalent basis with ``theta`` in ``[0, pi/2]`` and ``phi`` in ``[0, 2 pi)``.

        ``n`` and ``-n`` describe the same measurement with outcomes relabeled.
        """
        theta, phi = self.theta % (2 * math.pi), self.phi
        if theta > math.pi:
            theta = 2 * math.pi - theta
            phi += math.pi
        if theta > math.pi / 2:
            theta = math.pi - theta
            phi += math.pi
        return MeasurementBasis(theta, phi % (2 * math.pi))

    @classmethod
    def from_vector(cls, n) -> "MeasurementBasis":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        theta = math.acos(max(-1.0, min(1.0, n[2])))
        phi = math.atan2(n[1], n[0]) % (2 * math.pi)
        return cls(theta, phi)


def _side_state(rho, side: str) -> DensityMatrix:
    rho = as_density_matrix(rho)
    if side == "A":
        return rho
    if side == "B":
        return rho.swapped()
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def mutual_information(rho) -> float:
    """``H(rho_A) + H(rho_B) - H(rho)`` in bits."""
    rho = as_density_matrix(rho)
    i = (
        von_neumann_entropy(rho.reduced("A"))
        + von_neumann_entropy(rho.reduced("B"))
        - von_neumann_entropy(rho)
    )
    return max(0.0, i)


def measured_mutual_information(rho, basis: MeasurementBasis, side: str = "A") -> float:
    """Mutual information left after measuring ``basis`` on one qubit.

    Computed directly from the post-measurement states
    ``rho_{B|k} = Tr_A[(E_k (x) 1) rho] / p_k``.
    """
    rho = _side_state(rho, side)
    a = np.asarray(rho).reshape(2, 2, 2, 2)
    value = von_neumann_entropy(rho.reduced("B"))
    for e in basis.projectors():
        # Tr_A[(E (x) 1) rho] with a[a, b, a', b']
        cond = np.einsum("ac,cbad->bd", e, a)
        pk = np.trace(cond).real
        if pk < PROB_FLOOR:
            continue
        value -= pk * von_neumann_entropy(cond / pk)
    return float(value)


def _grid_mi(r: np.ndarray, theta, phi) -> np.ndarray:
    """Measured mutual information on arrays of angles, via Bloch vectors.

    For outcome ``+-n`` the conditional B state has Bloch vector
    ``(y +- R^T n) / (1 +- n.x)`` and probability ``(1 +- n.x)/2``.
    """
    x, y, rc = r[1:, 0], r[0, 1:], r[1:, 1:]
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st = np.sin(theta)
    n = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
    nx = n @ x
    v = n @ rc
    out = np.full(theta.shape, float(binary_entropy_of_bloch(np.linalg.norm(y))))
    for sign in (1.0, -1.0):
        pk = 0.5 * (1.0 + sign * nx)
        ok = pk >= PROB_FLOOR
        length = np.linalg.norm(y + sign * v, axis=-1) / np.where(ok, 2.0 * pk, 1.0)
        out = out - np.where(ok, pk * binary_entropy_of_bloch(length), 0.0)
    return out


@dataclass(frozen=True)
class MeasurementOptimum:
    value: float
    basis: MeasurementBasis
    flat: bool


def _pick_starts(values: np.ndarray, count: int) -> list[tuple[int, int]]:
    """Indices of the best grid points that are at least two cells apart."""
    nt, nph = values.shape
    order = np.argsort(values, axis=None)[::-1]
    picked: list[tuple[int, int]] = []
    for flat_idx in order[: 64 * count]:
        i, j = divmod(int(flat_idx), nph)
        close = any(
            abs(i - a) <= 2 and min(abs(j - b), nph - abs(j - b)) <= 2 for a, b in picked
        )
        if not close:
            picked.append((i, j))
            if len(picked) == count:
                break
    return picked


def optimize_measurement(rho, side: str = "A", cfg: OptimizerConfig | None = None) -> MeasurementOptimum:
    """Maximize the measured mutual information over projective measurements.

    A coarse ``grid_theta x grid_phi`` scan is followed by alternating
    one-dimensional bounded searches in ``theta`` and ``phi`` from the best
    few grid points. The returned value is never below any grid sample.
    """
    cfg = cfg or DEFAULT_CONFIG
    rho = _side_state(rho, side)
    r = np.asarray(expectation_matrix(rho))

    thetas = np.linspace(0.0, math.pi, cfg.grid_theta)
    phis = np.linspace(0.0, 2 * math.pi, cfg.grid_phi, endpoint=False)
    grid = _grid_mi(r, thetas[:, None], phis[None, :])
    gmax, gmin = float(grid.max()), float(grid.min())
    if gmax - gmin < FLAT_TOL:
        return MeasurementOptimum(gmax, MeasurementBasis(0.0, 0.0), True)

    dtheta = thetas[1] - thetas[0]
    dphi = phis[1] - phis[0]

    def f(t, p):
        return float(_grid_mi(r, t, p))

    best_val = gmax
    i0, j0 = np.unravel_index(int(np.argmax(grid)), grid.shape)
    best = (float(thetas[i0]), float(phis[j0]))
    for i, j in _pick_starts(grid, 3):
        t, p = float(thetas[i]), float(phis[j])
        val = float(grid[i, j])
        converged = False
        for _ in range(cfg.max_iter):
            t_old, p_old, v_old = t, p, val
            res = minimize_scalar(
                lambda u: -f(u, p),
                bounds=(max(0.0, t - dtheta), min(math.pi, t + dtheta)),
                method="bounded",
                options={"xatol": cfg.refine_tol},
            )
            if -res.fun > val:
                t, val = float(res.x), -float(res.fun)
            res = minimize_scalar(
                lambda u: -f(t, u),
                bounds=(p - dphi, p + dphi),
                method="bounded",
                options={"xatol": cfg.refine_tol},
            )
            if -res.fun > val:
                p, val = float(res.x), -float(res.fun)
            if max(abs(t - t_old), abs(p - p_old)) < cfg.refine_tol or val - v_old <= 1e-15:
                converged = True
                break
        if not converged:
            raise OptimizerFailure(
                f"measurement refinement did not converge within {cfg.max_iter} rounds"
            )
        if val > best_val:
            best_val, best = val, (t, p)
    basis = MeasurementBasis(*best).canonical()
    return MeasurementOptimum(best_val, basis, False)


def classical_correlation(
    rho, side: str = "A", cfg: OptimizerConfig | None = None
) -> tuple[float, MeasurementBasis]:
    """Maximal measured mutual information and a maximizing basis."""
    opt = optimize_measurement(rho, side, cfg)
    return opt.value, opt.basis


def quantum_discord(
    rho, side: str = "A", cfg: OptimizerConfig | None = None
) -> tuple[float, MeasurementBasis]:
    """Mutual information minus classical correlation, in bits."""
    c, basis = classical_correlation(rho, side, cfg)
    d = mutual_information(rho) - c
    if -DISCORD_CLAMP <= d < 0.0:
        d = 0.0
    return d, basis


def _first_max_index(values: np.ndarray) -> int:
    values = np.asarray(values)
    return int(np.flatnonzero(values >= values.max() - TIE_TOL)[0])


def gmqd_svd(rho, side: str = "A") -> tuple[float, np.ndarray]:
    """Geometric discord from the singular values ``l_k`` of the 3x4 block ``(x, R)``:
    ``(sum l_k^2 - max l_k^2) / 4``."""
    rho = _side_state(rho, side)
    sv = singular_values(reduced_expectation(expectation_matrix(rho)))
    lam2 = sv**2
    value = 0.25 * (float(np.sum(lam2)) - float(lam2[_first_max_index(lam2)]))
    return max(0.0, value), sv


@dataclass(frozen=True, eq=False)
class TopDirection:
    """Largest eigenpair of ``K = x x^T + R R^T``."""

    k_max: float
    e_tilde: np.ndarray
    gap: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def degenerate(self) -> bool:
        return self.gap < DEGENERACY_GAP

    @property
    def branch(self) -> int:
        """1-based index of the coordinate axis closest to ``e_tilde``."""
        return _first_max_index(np.abs(self.e_tilde)) + 1


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


def top_direction(rho, side: str = "A") -> TopDirection:
    b = to_bloch(_side_state(rho, side))
    w, v = hermitian_eigensystem(b.K())
    e = _fix_sign(np.real(v[:, 0]))
    return TopDirection(float(w[0]), e, float(w[0] - w[1]), w, np.real(v))


def gmqd_eig(rho, side: str = "A") -> tuple[float, np.ndarray]:
    """Geometric discord ``(|x|^2 + |R|^2 - k_max) / 4`` and the top eigenvector of ``K``."""
    b = to_bloch(_side_state(rho, side))
    top = top_direction(rho, side)
    value = 0.25 * (float(b.x @ b.x) + float(np.sum(b.R**2)) - top.k_max)
    return max(0.0, value), top.e_tilde


@dataclass(frozen=True, eq=False)
class ZeroDiscordCandidate:
    """``chi = p1 Pi_1 (x) rho1 + (1 - p1) Pi_2 (x) rho2`` with ``Pi_1 = (1 + e.sigma)/2``."""

    p1: float
    e: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray

    def matrix(self) -> np.ndarray:
        return _chi(self.p1, self.e, self.rho1, self.rho2)

    def state(self) -> DensityMatrix:
        return DensityMatrix(self.matrix())


def _chi(p1, e, rho1, rho2) -> np.ndarray:
    pi1 = qubit_state(e)
    pi2 = I2 - pi1
    return p1 * np.kron(pi1, rho1) + (1.0 - p1) * np.kron(pi2, rho2)


PAULI3 = np.array([SX, SY, SZ])


def _unpack(u: np.ndarray):
    """Map raw parameters ``(theta, phi, p1, r1[3], r2[3])`` (rows of ``u``) into
    a unit direction, ``p1`` clipped to [0, 1] and Bloch vectors projected into the unit ball."""
    u = np.atleast_2d(u)
    theta, phi = u[:, 0], u[:, 1]
    st = np.sin(theta)
    e = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=1)
    p1 = np.clip(u[:, 2], 0.0, 1.0)
    r = u[:, 3:9].reshape(-1, 2, 3)
    r = r / np.maximum(1.0, np.linalg.norm(r, axis=2))[:, :, None]
    return p1, e, r[:, 0], r[:, 1]


def _chi_batch(p1, e, r1, r2) -> np.ndarray:
    """Stack of ``p1 Pi_1 (x) rho1 + (1 - p1) Pi_2 (x) rho2`` matrices."""
    pi1 = 0.5 * (I2 + np.einsum("bk,kij->bij", e, PAULI3))
    pi2 = I2 - pi1
    rho1 = 0.5 * (I2 + np.einsum("bk,kij->bij", r1, PAULI3))
    rho2 = 0.5 * (I2 + np.einsum("bk,kij->bij", r2, PAULI3))
    b = len(p1)
    t1 = (pi1[:, :, None, :, None] * rho1[:, None, :, None, :]).reshape(b, 4, 4)
    t2 = (pi2[:, :, None, :, None] * rho2[:, None, :, None, :]).reshape(b, 4, 4)
    return p1[:, None, None] * t1 + (1.0 - p1)[:, None, None] * t2


def gmqd_bruteforce(
    rho, cfg: OptimizerConfig | None = None, side: str = "A"
) -> tuple[float, ZeroDiscordCandidate]:
    """Minimize ``||rho - chi||^2`` directly over zero-discord states ``chi``.

    Nine parameters (direction angles, ``p1`` and two qubit Bloch vectors)
    are searched by Nelder-Mead from ``cfg.restarts`` seeded random starts,
    all advanced together at a loose tolerance; the best result is then
    polished with fresh simplices until it stops improving.
    """
    cfg = cfg or DEFAULT_CONFIG
    target = np.asarray(_side_state(rho, side))
    rng = np.random.default_rng(cfg.seed)

    def objective(u):
        d = target[None] - _chi_batch(*_unpack(u))
        return np.sum(d.real**2 + d.imag**2, axis=(1, 2))

    m = cfg.restarts
    u0 = np.column_stack(
        [
            rng.uniform(0.0, math.pi, m),
            rng.uniform(0.0, 2 * math.pi, m),
            rng.uniform(0.0, 1.0, m),
            rng.uniform(-0.6, 0.6, (m, 6)),
        ]
    )
    res = minimize_batch(objective, u0, xatol=1e-4, fatol=1e-10, max_iter=cfg.max_iter)
    if not res.converged.any():
        raise OptimizerFailure(
            f"no Nelder-Mead restart converged within {cfg.max_iter} iterations"
        )
    k = int(np.argmin(res.fun))
    x, f = res.x[k], float(res.fun[k])
    for _ in range(5):
        again = minimize_batch(objective, x[None], xatol=1e-9, fatol=1e-14, max_iter=cfg.max_iter)
        if again.fun[0] < f - 1e-16:
            x, f = again.x[0], float(again.fun[0])
        else:
            break
    p1, e, r1, r2 = (a[0] for a in _unpack(x))
    cand = ZeroDiscordCandidate(float(p1), e, qubit_state(r1), qubit_state(r2))
    return f, cand


def concurrence(rho) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` (square roots of the eigenvalues of
    ``rho (sy (x) sy) rho* (sy (x) sy)``) are obtained as singular values of
    ``tau_kl = <u_k| sy (x) sy |u_l*>`` with ``|u_k> = sqrt(w_k) |v_k>`` from the
    spectral decomposition of ``rho``; this avoids square roots of
    near-zero eigenvalues.
    """
    rho = as_density_matrix(rho)
    w, v = np.linalg.eigh(np.asarray(rho))
    u = v * np.sqrt(np.clip(w, 0.0, None))
    tau = u.conj().T @ YY @ u.conj()
    lam = np.linalg.svd(tau, compute_uv=False)
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(1.0, max(0.0, c)))


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    mutual_info: float
    classical_corr: float
    discord: float
    gmqd: float
    concurrence: float
    optimal_theta: float
    optimal_phi: float
    e_tilde: np.ndarray
    singular_values: np.ndarray
    k_max: float
    side: str = "A"
    e_degenerate: bool = False
    measurement_flat: bool = False

    def to_json(self) -> dict:
        out = asdict(self)
        out["e_tilde"] = [float(v) for v in self.e_tilde]
        out["singular_values"] = [float(v) for v in self.singular_values]
        return out


def correlation_report(rho, side: str = "A", cfg: OptimizerConfig | None = None) -> CorrelationReport:
    rho = as_density_matrix(rho)
    opt = optimize_measurement(rho, side, cfg)
    mi = mutual_information(rho)
    d = mi - opt.value
    if -DISCORD_CLAMP <= d < 0.0:
        d = 0.0
    g, sv = gmqd_svd(rho, side)
    top = top_direction(rho, side)
    return CorrelationReport(
        mutual_info=mi,
        classical_corr=opt.value,
        discord=d,
        gmqd=g,
        concurrence=concurrence(rho),
        optimal_theta=opt.basis.theta,
        optimal_phi=opt.basis.phi,
        e_tilde=top.e_tilde,
        singular_values=sv,
        k_max=top.k_max,
        side=side,
        e_degenerate=top.degenerate,
        measurement_flat=opt.flat,
    )
