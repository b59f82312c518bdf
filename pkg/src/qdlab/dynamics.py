"""Channel-strength sweeps and sudden-change (kink) detection.

A sweep evaluates the evolved state on a uniform ``p`` grid and records the
geometric discord, discord, concurrence, singular values, the GMQD branch
and the optimal measurement angles. Three detectors then look for sudden
changes in decay rate: a normalized second-difference detector, a branch
switch detector (which family of singular values is largest) and an
angle-jump detector on the optimal measurement direction.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channels import apply_local, make_channel
from .correlations import (
    DISCORD_CLAMP,
    OptimizerConfig,
    _grid_mi,
    _side_state,
    concurrence,
    gmqd_svd,
    mutual_information,
    optimize_measurement,
    top_direction,
)
from .errors import DomainError, GridTooCoarse
from .states import DensityMatrix, expectation_matrix, state_from_json

ALL_QUANTITIES = ("gmqd", "discord", "concurrence", "branches", "angles")
SV_TIE = 1e-12
ANGLE_HOLD_TOL = 1e-12

# bits of the CSV ``degenerate`` column
DEG_SV = 1  # top two squared singular values tie within 1e-12
DEG_DIRECTION = 2  # eigenvalue gap of K below 1e-6, e_tilde ill defined
DEG_FLAT = 4  # measured mutual information independent of the direction
DEG_ALL_TIED = 8  # all three squared singular values tie

CSV_HEADER = "p,gmqd,discord,concurrence,sv1,sv2,sv3,branch,theta,phi,e1,e2,e3,degenerate"


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines a sweep; two equal configs give identical output."""

    state: dict
    channel: str
    p_start: float = 0.0
    p_end: float = 1.0
    steps: int = 201
    quantities: tuple = ALL_QUANTITIES
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    threshold: float = 10.0
    contrast: float = 8.0
    angle_tol: float = 0.25
    side: str = "A"
    workers: int = 1

    def __post_init__(self):
        if not (0.0 <= self.p_start < self.p_end <= 1.0):
            raise DomainError(
                f"need 0 <= p_start < p_end <= 1, got {self.p_start}, {self.p_end}"
            )
        if int(self.steps) < 3:
            raise DomainError(f"steps must be at least 3, got {self.steps}")
        bad = set(self.quantities) - set(ALL_QUANTITIES)
        if bad:
            raise DomainError(f"unknown quantities {sorted(bad)}")
        make_channel(self.channel, 0.0)
        object.__setattr__(self, "quantities", tuple(self.quantities))

    def initial_state(self) -> DensityMatrix:
        return state_from_json(self.state)

    def grid(self) -> np.ndarray:
        return np.linspace(self.p_start, self.p_end, int(self.steps))

    def to_json(self) -> dict:
        return {
            "state": self.state,
            "channel": self.channel,
            "p_start": self.p_start,
            "p_end": self.p_end,
            "steps": int(self.steps),
            "quantities": list(self.quantities),
            "optimizer": self.optimizer.to_json(),
            "threshold": self.threshold,
            "contrast": self.contrast,
            "angle_tol": self.angle_tol,
            "side": self.side,
            "workers": self.workers,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SweepConfig":
        obj = dict(obj)
        obj["optimizer"] = OptimizerConfig.from_json(obj.get("optimizer"))
        if "quantities" in obj:
            obj["quantities"] = tuple(obj["quantities"])
        return cls(**obj)


@dataclass(frozen=True, eq=False)
class SweepRow:
    p: float
    gmqd: float
    discord: float
    concurrence: float
    sv: tuple
    branch: int
    theta: float
    phi: float
    e_tilde: tuple
    degenerate: int = 0
    branch_set: frozenset = frozenset()

    @property
    def flat(self) -> bool:
        return bool(self.degenerate & DEG_FLAT)

    @property
    def all_tied(self) -> bool:
        return bool(self.degenerate & DEG_ALL_TIED)


@dataclass(frozen=True)
class KinkReport:
    quantity: str
    p_kink: float
    kind: str  # "branch-switch" | "angle-jump" | "second-difference"
    magnitude: float


def _branch_family(eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> tuple[int, frozenset]:
    """Which coordinate family carries the largest eigenvalue of ``K``.

    Each axis is weighted by its squared projection onto the top eigenspace
    (eigenvalues within 1e-12 of the maximum); the family set holds every
    axis of maximal weight and the reported branch is its smallest index.
    """
    top = eigenvalues >= eigenvalues[0] - SV_TIE
    weights = np.sum(np.abs(eigenvectors[:, top]) ** 2, axis=1)
    members = np.flatnonzero(weights >= weights.max() - 1e-9)
    return int(members[0]) + 1, frozenset(int(k) + 1 for k in members)


def _evolve(rho0: DensityMatrix, channel: str, p: float) -> DensityMatrix:
    ch = make_channel(channel, p)
    return apply_local(ch, ch, rho0)


def _compute_row(args) -> SweepRow:
    rho0, cfg, p = args
    rho = _evolve(rho0, cfg.channel, p)
    want = set(cfg.quantities)
    g, sv = gmqd_svd(rho, cfg.side)
    top = top_direction(rho, cfg.side)
    sv = np.pad(sv, (0, 3 - len(sv)))
    lam2 = np.sort(sv**2)[::-1]
    flags = 0
    if lam2[0] - lam2[1] < SV_TIE:
        flags |= DEG_SV
    if lam2[0] - lam2[2] < SV_TIE:
        flags |= DEG_ALL_TIED
    if top.degenerate:
        flags |= DEG_DIRECTION
    branch, family = _branch_family(top.eigenvalues, top.eigenvectors)

    discord = theta = phi = math.nan
    if want & {"discord", "angles"}:
        opt = optimize_measurement(rho, cfg.side, cfg.optimizer)
        discord = mutual_information(rho) - opt.value
        if -DISCORD_CLAMP <= discord < 0.0:
            discord = 0.0
        theta, phi = opt.basis.theta, opt.basis.phi
        if opt.flat:
            flags |= DEG_FLAT
    conc = concurrence(rho) if "concurrence" in want else math.nan
    return SweepRow(
        p=float(p),
        gmqd=float(g),
        discord=float(discord),
        concurrence=float(conc),
        sv=tuple(float(x) for x in sv),
        branch=branch,
        theta=float(theta),
        phi=float(phi),
        e_tilde=tuple(float(x) for x in top.e_tilde),
        degenerate=flags,
        branch_set=family,
    )


def _mi_at(rho: DensityMatrix, side: str, theta: float, phi: float) -> float:
    r = np.asarray(expectation_matrix(_side_state(rho, side)))
    return float(_grid_mi(r, theta, phi))


def _angle_continuity(rows: list[SweepRow], rho0: DensityMatrix, cfg: SweepConfig) -> list[SweepRow]:
    """Choose, among equally optimal measurement angles, the ones closest to the previous row.

    Flat rows (every direction optimal) inherit the neighbouring angles;
    otherwise the previous ``(theta, phi)`` or ``(theta, phi_prev)`` is kept
    whenever it is optimal within 1e-12 bits.
    """
    out = list(rows)
    prev = None
    pending = []
    for i, row in enumerate(out):
        if math.isnan(row.theta):
            continue
        if row.flat:
            if prev is None:
                pending.append(i)
            else:
                out[i] = replace(row, theta=prev[0], phi=prev[1])
            continue
        if prev is not None:
            rho = _evolve(rho0, cfg.channel, row.p)
            best = _mi_at(rho, cfg.side, row.theta, row.phi)
            for cand in ((prev[0], prev[1]), (row.theta, prev[1])):
                if _mi_at(rho, cfg.side, *cand) >= best - ANGLE_HOLD_TOL:
                    out[i] = row = replace(row, theta=cand[0], phi=cand[1])
                    break
        prev = (out[i].theta, out[i].phi)
        for j in pending:
            out[j] = replace(out[j], theta=prev[0], phi=prev[1])
        pending = []
    return out


def sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Evaluate every grid point of the sweep.

    Rows are computed independently (optionally in ``cfg.workers``
    processes) and then passed once, in order, through the angle continuity
    convention, so the result depends only on ``cfg``.
    """
    rho0 = cfg.initial_state()
    jobs = [(rho0, cfg, float(p)) for p in cfg.grid()]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_compute_row, jobs))
    else:
        rows = [_compute_row(j) for j in jobs]
    return _angle_continuity(rows, rho0, cfg)


def _as_series(series) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a sequence of (p, value) pairs")
    return arr[:, 0], arr[:, 1]


def normalized_second_difference(ps, values) -> np.ndarray:
    """``|v[i+1] - 2 v[i] + v[i-1]| / (h^2 * scale)`` for interior points.

    ``scale`` is the largest slope magnitude ``|v[i+1] - v[i]| / h`` of the
    series. Entry ``k`` belongs to grid point ``k + 1``.
    """
    ps = np.asarray(ps, dtype=float)
    v = np.asarray(values, dtype=float)
    h = ps[1] - ps[0]
    scale = np.max(np.abs(np.diff(v))) / h
    d2 = np.abs(v[2:] - 2.0 * v[1:-1] + v[:-2])
    if scale == 0.0:
        return np.zeros_like(d2)
    return d2 / (h * h * scale)


def detect_kinks(
    series,
    threshold: float = 10.0,
    *,
    contrast: float = 8.0,
    quantity: str = "value",
    atol: float = 1e-10,
) -> list[KinkReport]:
    """Find jumps in the first derivative of a sampled curve.

    A grid point is flagged when its normalized second difference exceeds
    ``threshold`` and also ``contrast`` times the larger of the values two
    grid steps to either side, so slowly varying curvature (such as the
    ``p log p`` behaviour of entropies near an endpoint) is not mistaken for
    a kink. Second differences below ``atol`` are ignored. Runs of adjacent
    flags collapse to one report at their largest value.
    """
    ps, v = _as_series(series)
    if len(ps) < 5:
        raise GridTooCoarse(f"need at least 5 points, got {len(ps)}")
    h = np.diff(ps)
    if np.any(h <= 0) or np.max(np.abs(h - h[0])) > 1e-9 * max(1.0, abs(h[0])):
        raise ValueError("series must be on a strictly increasing uniform grid")
    if not np.all(np.isfinite(v)):
        raise ValueError("series contains non-finite values")

    q = normalized_second_difference(ps, v)
    d2 = np.abs(v[2:] - 2.0 * v[1:-1] + v[:-2])
    m = len(q)
    flagged = []
    for k in range(m):
        if q[k] <= threshold or d2[k] <= atol:
            continue
        around = [q[j] for j in (k - 2, k + 2) if 0 <= j < m]
        if around and q[k] <= contrast * max(around):
            continue
        flagged.append(k)

    reports = []
    group: list[int] = []
    for k in flagged + [None]:
        if k is not None and (not group or k == group[-1] + 1):
            group.append(k)
            continue
        if group:
            best = max(group, key=lambda j: q[j])
            reports.append(KinkReport(quantity, float(ps[best + 1]), "second-difference", float(q[best])))
        group = [k] if k is not None else []
    return reports


def detect_branch_switch(rows: Sequence[SweepRow]) -> list[KinkReport]:
    """Report where the family of the largest singular value changes.

    Rows whose three squared singular values all tie are skipped; a switch
    is reported at the midpoint between consecutive usable rows whose branch
    families have no axis in common.
    """
    usable = [r for r in rows if not r.all_tied]
    out = []
    for a, b in zip(usable, usable[1:]):
        # rows parsed back from CSV only carry the branch index
        fa = a.branch_set or frozenset([a.branch])
        fb = b.branch_set or frozenset([b.branch])
        if fa.isdisjoint(fb):
            ea, eb = np.asarray(a.e_tilde), np.asarray(b.e_tilde)
            angle = math.acos(min(1.0, abs(float(ea @ eb))))
            out.append(KinkReport("gmqd", 0.5 * (a.p + b.p), "branch-switch", angle))
    return out


def fold_theta(theta: float) -> float:
    """Map ``theta`` into ``[0, pi/2]`` using ``n ~ -n``."""
    t = theta % math.pi
    return min(t, math.pi - t)


def detect_angle_jump(rows: Sequence[SweepRow], tol_rad: float = 0.25) -> list[KinkReport]:
    """Report adjacent usable rows whose folded optimal ``theta`` differs by more than ``tol_rad``."""
    usable = [r for r in rows if not r.flat and not math.isnan(r.theta)]
    out = []
    for a, b in zip(usable, usable[1:]):
        jump = abs(fold_theta(b.theta) - fold_theta(a.theta))
        if jump > tol_rad:
            out.append(KinkReport("discord", 0.5 * (a.p + b.p), "angle-jump", jump))
    return out


def analyze(rows: Sequence[SweepRow], cfg: SweepConfig) -> list[KinkReport]:
    """All kink reports for a finished sweep, in a fixed order."""
    ps = [r.p for r in rows]
    want = set(cfg.quantities)
    reports: list[KinkReport] = []
    if len(rows) < 5:
        return reports
    for name in ("gmqd", "discord", "concurrence"):
        if name not in want:
            continue
        values = [getattr(r, name) for r in rows]
        if not all(math.isfinite(v) for v in values):
            continue
        reports += detect_kinks(
            list(zip(ps, values)), cfg.threshold, contrast=cfg.contrast, quantity=name
        )
    if "branches" in want:
        reports += detect_branch_switch(rows)
    if "angles" in want:
        reports += detect_angle_jump(rows, cfg.angle_tol)
    return reports


@dataclass(frozen=True, eq=False)
class SweepTable:
    rows: list
    kinks: list

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def kinks_for(self, quantity: str, kind: str | None = None) -> list[KinkReport]:
        return [k for k in self.kinks if k.quantity == quantity and (kind is None or k.kind == kind)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            vals = [r.p, r.gmqd, r.discord, r.concurrence, *r.sv]
            fields_ = [_fmt(x) for x in vals]
            fields_.append(str(r.branch))
            fields_ += [_fmt(r.theta), _fmt(r.phi), *(_fmt(x) for x in r.e_tilde)]
            fields_.append(str(r.degenerate))
            buf.write(",".join(fields_) + "\n")
        for k in self.kinks:
            buf.write(f"# kink,{k.quantity},{_fmt(k.p_kink)},{k.kind}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepTable":
        rows, kinks = [], []
        lines = text.splitlines()
        if not lines or lines[0].strip() != CSV_HEADER:
            raise ValueError("not a sweep CSV: header mismatch")
        for line in lines[1:]:
            if not line.strip():
                continue
            if line.startswith("#"):
                parts = line[1:].strip().split(",")
                if parts[0] == "kink":
                    kinks.append(KinkReport(parts[1], float(parts[2]), parts[3], math.nan))
                continue
            f = line.split(",")
            rows.append(
                SweepRow(
                    p=float(f[0]),
                    gmqd=float(f[1]),
                    discord=float(f[2]),
                    concurrence=float(f[3]),
                    sv=tuple(float(x) for x in f[4:7]),
                    branch=int(f[7]),
                    theta=float(f[8]),
                    phi=float(f[9]),
                    e_tilde=tuple(float(x) for x in f[10:13]),
                    degenerate=int(f[13]),
                )
            )
        return cls(rows, kinks)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def run_sweep(cfg: SweepConfig) -> SweepTable:
    rows = sweep(cfg)
    return SweepTable(rows, analyze(rows, cfg))

