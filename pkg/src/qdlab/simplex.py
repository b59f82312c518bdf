"""Batched Nelder-Mead: many independent simplex descents advanced in lockstep.

The objective takes an ``(m, n)`` array of points and returns ``m`` values,
so every restart shares one vectorized call per step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True)
class BatchResult:
    x: np.ndarray  # (batch, n) best vertex of each simplex
    fun: np.ndarray  # (batch,)
    converged: np.ndarray  # (batch,) bool
    iterations: int


def _initial_simplices(x0: np.ndarray) -> np.ndarray:
    # scipy-style: 5% perturbation per coordinate, 0.00025 for zero entries
    b, n = x0.shape
    sim = np.repeat(x0[:, None, :], n + 1, axis=1)
    for k in range(n):
        col = sim[:, k + 1, k]
        sim[:, k + 1, k] = np.where(col != 0.0, 1.05 * col, 0.00025)
    return sim


def minimize_batch(
    fun: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    xatol: float = 1e-8,
    fatol: float = 1e-12,
    max_iter: int = 4000,
    patience: int | None = None,
) -> BatchResult:
    """Run one Nelder-Mead descent from each row of ``x0``.

    A simplex is converged once all vertices lie within ``xatol`` of the
    best (max-norm) and their values within ``fatol``. A simplex whose
    values have stayed within ``fatol`` for ``patience`` consecutive
    iterations (default ``20 n``) also counts as converged; this covers flat
    directions introduced by clipped parametrizations. Converged simplices
    are frozen while the rest continue, up to ``max_iter`` iterations.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    b, n = x0.shape
    sim = _initial_simplices(x0)
    fsim = fun(sim.reshape(-1, n)).reshape(b, n + 1)
    patience = 20 * n if patience is None else patience
    done = np.zeros(b, dtype=bool)
    flat_for = np.zeros(b, dtype=int)
    rows = np.arange(b)

    it = 0
    for it in range(1, max_iter + 1):
        order = np.argsort(fsim, axis=1)
        sim = np.take_along_axis(sim, order[:, :, None], axis=1)
        fsim = np.take_along_axis(fsim, order, axis=1)

        spread_x = np.max(np.abs(sim[:, 1:] - sim[:, :1]), axis=(1, 2))
        spread_f = np.max(np.abs(fsim[:, 1:] - fsim[:, :1]), axis=1)
        flat_for = np.where(spread_f <= fatol, flat_for + 1, 0)
        done |= ((spread_x <= xatol) & (spread_f <= fatol)) | (flat_for >= patience)
        if done.all():
            break
        act = ~done

        worst = sim[:, -1]
        centroid = sim[:, :-1].mean(axis=1)
        xr = centroid + REFLECT * (centroid - worst)
        xe = centroid + EXPAND * (centroid - worst)
        fr = fun(xr)
        fe = fun(xe)
        f0, fsecond, fworst = fsim[:, 0], fsim[:, -2], fsim[:, -1]

        outside = fr < fworst
        xc = np.where(
            outside[:, None],
            centroid + CONTRACT * (xr - centroid),
            centroid + CONTRACT * (worst - centroid),
        )
        fc = fun(xc)

        new_x = worst.copy()
        new_f = fworst.copy()
        shrink = np.zeros(b, dtype=bool)

        expand = act & (fr < f0)
        use_e = expand & (fe < fr)
        use_r = (expand & ~use_e) | (act & (fr >= f0) & (fr < fsecond))
        contract = act & (fr >= fsecond)
        ok_c = contract & np.where(outside, fc <= fr, fc < fworst)

        new_x[use_e], new_f[use_e] = xe[use_e], fe[use_e]
        new_x[use_r], new_f[use_r] = xr[use_r], fr[use_r]
        new_x[ok_c], new_f[ok_c] = xc[ok_c], fc[ok_c]
        shrink = contract & ~ok_c

        replace = use_e | use_r | ok_c
        sim[replace, -1] = new_x[replace]
        fsim[replace, -1] = new_f[replace]

        if shrink.any():
            idx = rows[shrink]
            best = sim[idx, :1]
            shrunk = best + SHRINK * (sim[idx, 1:] - best)
            sim[idx, 1:] = shrunk
            fsim[idx, 1:] = fun(shrunk.reshape(-1, n)).reshape(len(idx), n)

    k = np.argmin(fsim, axis=1)
    return BatchResult(sim[rows, k], fsim[rows, k], done, it)
