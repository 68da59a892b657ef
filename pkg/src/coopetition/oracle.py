"""Brute-force grid verification.

Everything here is built from the vectorized profit evaluation in
:mod:`coopetition.market` and plain ``argmax`` over price grids. It never
calls the line-search or gradient-ascent code it is meant to check.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .market import MarketParams, period1_threshold, period2_profit_grid

PROFIT_TIE = 1e-12


class OracleVerdict(NamedTuple):
    passed: bool
    worst_gain: float
    worst_company: str | None
    worst_price: float | None
    grid_n: int
    tolerance: float

    def to_dict(self) -> dict:
        return dict(self._asdict())


class GridEquilibria(NamedTuple):
    """Pure equilibria of the price game restricted to a grid."""

    grid_I: np.ndarray
    grid_E: np.ndarray
    p_I2: np.ndarray
    p_E2: np.ndarray
    W_I2: np.ndarray
    W_E2: np.ndarray
    degenerate: bool

    @property
    def count(self) -> int:
        return int(self.p_I2.size)

    def closest(self, p_I2: float, p_E2: float) -> tuple[float, float]:
        k = int(np.argmin(np.hypot(self.p_I2 - p_I2, self.p_E2 - p_E2)))
        return float(self.p_I2[k]), float(self.p_E2[k])


class GridOptimum(NamedTuple):
    p_I1: float
    W_I: float
    theta1: float
    collaborate: bool
    grid_n: int


def price_grid(params: MarketParams, company: str, quality: float, n: int) -> np.ndarray:
    lo = params.cost(company)
    hi = max(params.price_cap(quality), lo)
    return np.linspace(lo, hi, n)


def verify_no_deviation(params, dist, q_pair, theta1, candidate, grid_n=2000, tol=1e-4) -> OracleVerdict:
    """Check that no unilateral move to a grid price gains more than ``tol``."""
    q_I2, q_E2 = q_pair
    p_I2, p_E2 = (float(v) for v in candidate)
    base_I, base_E = period2_profit_grid(params, dist, q_I2, q_E2, p_I2, p_E2, theta1)
    g_I = price_grid(params, "I", q_I2, grid_n)
    g_E = price_grid(params, "E", q_E2, grid_n)
    dev_I, _ = period2_profit_grid(params, dist, q_I2, q_E2, g_I, p_E2, theta1)
    _, dev_E = period2_profit_grid(params, dist, q_I2, q_E2, p_I2, g_E, theta1)
    gain_I = dev_I - float(base_I)
    gain_E = dev_E - float(base_E)
    k_I, k_E = int(np.argmax(gain_I)), int(np.argmax(gain_E))
    if gain_I[k_I] >= gain_E[k_E]:
        worst, who, where = float(gain_I[k_I]), "I", float(g_I[k_I])
    else:
        worst, who, where = float(gain_E[k_E]), "E", float(g_E[k_E])
    passed = worst <= tol
    return OracleVerdict(passed, max(worst, 0.0), None if passed else who,
                         None if passed else where, grid_n, tol)


def grid_price_equilibrium(params, dist, q_pair, theta1, grid_n=2000, block=250) -> GridEquilibria:
    """Enumerate every grid price pair and keep the mutual best responses."""
    q_I2, q_E2 = q_pair
    g_I = price_grid(params, "I", q_I2, grid_n)
    g_E = price_grid(params, "E", q_E2, grid_n)
    W_I = np.empty((grid_n, grid_n))
    W_E = np.empty((grid_n, grid_n))
    for s in range(0, grid_n, block):
        rows = slice(s, min(s + block, grid_n))
        W_I[rows], W_E[rows] = period2_profit_grid(
            params, dist, q_I2, q_E2, g_I[rows, None], g_E[None, :], theta1)
    best_I = W_I.max(axis=0, keepdims=True)  # I deviates along rows
    best_E = W_E.max(axis=1, keepdims=True)
    mask = (W_I >= best_I - PROFIT_TIE) & (W_E >= best_E - PROFIT_TIE)
    i, j = np.nonzero(mask)
    wi, we = W_I[i, j], W_E[i, j]
    degenerate = bool(i.size and np.all(wi <= PROFIT_TIE) and np.all(we <= PROFIT_TIE))
    return GridEquilibria(g_I, g_E, g_I[i], g_E[j], wi, we, degenerate)


def _grid_best_response(params, dist, q_I2, q_E2, company, other, theta1, n_coarse, n_fine, passes):
    """Argmax over a coarse grid, then over successively finer windows.

    ``other`` and ``theta1`` are 1-D arrays of equal length; the search is
    vectorized across them. Ties resolve to the lowest price.
    """
    quality = q_I2 if company == "I" else q_E2
    lo = params.cost(company)
    hi = max(params.price_cap(quality), lo)
    m = other.shape[0]
    left = np.full(m, lo)
    width = np.full(m, hi - lo)
    n = n_coarse
    best = np.full(m, lo)
    for _ in range(passes):
        cand = left[:, None] + width[:, None] * np.linspace(0.0, 1.0, n)[None, :]
        cand = np.clip(cand, lo, hi)
        if company == "I":
            w, _ = period2_profit_grid(params, dist, q_I2, q_E2, cand, other[:, None], theta1[:, None])
        else:
            _, w = period2_profit_grid(params, dist, q_I2, q_E2, other[:, None], cand, theta1[:, None])
        k = np.argmax(w, axis=1)
        best = cand[np.arange(m), k]
        cell = width / (n - 1)
        left = np.maximum(best - 2 * cell, lo)
        width = np.minimum(best + 2 * cell, hi) - left
        n = n_fine
    return best


def grid_br_equilibrium(params, dist, q_pair, theta1, n_coarse=200, n_fine=41, passes=7,
                        max_iter=300, tol=1e-8):
    """Discrete best-response dynamics, vectorized over an array of thresholds.

    Starts from the midpoint of each price domain with I moving first, the
    same convention as the line-search solver, so both land on the same
    member of an equilibrium continuum when one exists. The window passes
    shrink the price cell to a few 1e-9, below ``tol``; a coarser cell lets
    the grid argmax creep along such a continuum round after round.

    Returns ``(p_I2, p_E2, W_I2, W_E2, unsettled)`` arrays; ``unsettled``
    marks entries whose prices were still moving after ``max_iter`` rounds.
    """
    q_I2, q_E2 = q_pair
    theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    m = theta1.shape[0]
    p_I = np.full(m, 0.5 * (params.c_I + max(params.price_cap(q_I2), params.c_I)))
    p_E = np.full(m, 0.5 * (params.c_E + max(params.price_cap(q_E2), params.c_E)))
    moving = np.ones(m, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(moving)
        new_I = _grid_best_response(params, dist, q_I2, q_E2, "I", p_E[idx], theta1[idx],
                                    n_coarse, n_fine, passes)
        new_E = _grid_best_response(params, dist, q_I2, q_E2, "E", new_I, theta1[idx],
                                    n_coarse, n_fine, passes)
        still = (np.abs(new_I - p_I[idx]) > tol) | (np.abs(new_E - p_E[idx]) > tol)
        p_I[idx], p_E[idx] = new_I, new_E
        moving[idx] = still
        if not moving.any():
            break
    W_I, W_E = period2_profit_grid(params, dist, q_I2, q_E2, p_I, p_E, theta1)
    return p_I, p_E, W_I, W_E, moving


def grid_total_profit(scenario, p_I1, **grid_kw):
    """Incumbent's two-period profit at each p_I1, equilibria found by grid dynamics."""
    params, dist, q = scenario.params, scenario.dist, scenario.qualities
    p_I1 = np.atleast_1d(np.asarray(p_I1, dtype=float))
    theta1 = np.array([period1_threshold(params, q.q_I1, float(p)) for p in p_I1])
    W_I1 = (p_I1 - params.c_I) * dist.cdf_array(theta1)
    fl = grid_br_equilibrium(params, dist, q.q_fl, theta1, **grid_kw)
    loc = grid_br_equilibrium(params, dist, q.q_local, theta1, **grid_kw)
    collab = (fl[2] >= loc[2]) & (fl[3] >= loc[3])
    W_I2 = np.where(collab, fl[2], loc[2])
    return W_I1 + W_I2, theta1, collab


def period1_grid(params: MarketParams, q_I1: float, grid_n: int, margin: float = 0.05) -> np.ndarray:
    """``grid_n`` equal cells on [0, cap + margin] plus the two region boundaries.

    Using cells rather than points makes the grid for ``2 * grid_n`` contain
    the one for ``grid_n``, so refining can never lose the best point.
    """
    cap = params.price_cap(q_I1)
    grid = np.linspace(0.0, cap + margin, grid_n + 1)
    full = (params.w_q * q_I1 - params.w_phi) / params.w_p
    extra = [cap] + ([full] if full > 0 else [])
    return np.unique(np.concatenate([grid, extra]))


def grid_period1_optimum(scenario, grid_n=2000, margin=0.05, **grid_kw) -> GridOptimum:
    """Exhaustive search over p_I1; ties go to the smaller price."""
    grid = period1_grid(scenario.params, scenario.qualities.q_I1, grid_n, margin)
    W, theta1, collab = grid_total_profit(scenario, grid, **grid_kw)
    k = int(np.flatnonzero(W >= W.max() - PROFIT_TIE)[0])
    return GridOptimum(float(grid[k]), float(W[k]), float(theta1[k]), bool(collab[k]), grid_n)
