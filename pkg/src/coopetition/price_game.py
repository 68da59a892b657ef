"""Period-2 price competition between I and E.

Each company's profit is single-peaked in its own price when the preference
density has an increasing hazard rate, so a best response is a bracketed
golden-section search over ``[cost, w_q * quality / w_p]``. Alternating best
responses are iterated to a fixed point.
"""
from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

from . import oracle
from .errors import ConvergenceError
from .linesearch import scan_then_golden
from .market import (MarketParams, period2_demand, period2_profit, period2_profit_grid,
                     period2_profit_slope)
from .settings import SolverSettings

log = logging.getLogger(__name__)

UNIMODAL_TOL = 1e-10
POLISH_WIDTH = 1e-6


class BestResponse(NamedTuple):
    price: float
    profit: float
    degenerate: bool = False
    zero_demand: bool = False


class PriceEquilibrium(NamedTuple):
    p_I2: float
    p_E2: float
    W_I2: float
    W_E2: float
    demand_I2: float
    demand_E2: float
    iterations: int
    residual: float
    zero_demand: bool
    verdict: oracle.OracleVerdict | None

    @property
    def verified(self) -> bool | None:
        return None if self.verdict is None else self.verdict.passed

    def to_dict(self) -> dict:
        d = self._asdict()
        d["verdict"] = None if self.verdict is None else self.verdict.to_dict()
        d["verified"] = self.verified
        return d


def price_domain(params: MarketParams, company: str, quality: float) -> tuple[float, float]:
    """Prices worth considering: from marginal cost up to the zero-demand cap."""
    return params.cost(company), params.price_cap(quality)


def best_response(params, dist, q_pair, company, other_price, theta1,
                  settings: SolverSettings = SolverSettings()) -> BestResponse:
    """Profit-maximizing own price against a fixed rival price."""
    q_I2, q_E2 = q_pair
    lo, hi = price_domain(params, company, q_I2 if company == "I" else q_E2)
    if hi <= lo:
        return BestResponse(lo, 0.0, degenerate=True, zero_demand=True)

    if company == "I":
        def f(p):
            return period2_profit(params, dist, "I", q_I2, q_E2, p, other_price, theta1)

        def f_vec(ps):
            return period2_profit_grid(params, dist, q_I2, q_E2, ps, other_price, theta1)[0]

        def slope(p):
            return period2_profit_slope(params, dist, "I", q_I2, q_E2, p, other_price, theta1)
    else:
        def f(p):
            return period2_profit(params, dist, "E", q_I2, q_E2, other_price, p, theta1)

        def f_vec(ps):
            return period2_profit_grid(params, dist, q_I2, q_E2, other_price, ps, theta1)[1]

        def slope(p):
            return period2_profit_slope(params, dist, "E", q_I2, q_E2, other_price, p, theta1)

    price, profit = scan_then_golden(f, f_vec, lo, hi, settings.scan_points,
                                     settings.line_search_tolerance)
    if profit <= 0.0:
        # no price earns anything; report the canonical midpoint
        return BestResponse(0.5 * (lo + hi), 0.0, zero_demand=True)
    return BestResponse(*_polish(f, slope, price, profit, lo, hi))


def _polish(f, slope, x, fx, lo, hi):
    """Bisect on the sign of the right derivative around the golden-section answer.

    Golden section only pins a smooth maximum down to about sqrt(machine eps)
    because profit is flat there. The derivative is exact, so bisecting on its
    sign reaches the maximum (or the kink holding it) to the last few ulps.
    Falls back to ``x`` when the bracket does not straddle a sign change.
    """
    width = POLISH_WIDTH * (hi - lo)
    a, b = max(lo, x - width), min(hi, x + width)
    if not (slope(a) > 0.0 and slope(b) <= 0.0):
        return x, fx
    while True:
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        if slope(m) > 0.0:
            a = m
        else:
            b = m
    fb = f(b)
    if fb < fx - 1e-14:
        return x, fx
    return b, fb


def price_equilibrium(params, dist, q_pair, theta1, settings: SolverSettings = SolverSettings(),
                      init=None, order="IE", verify=True) -> PriceEquilibrium:
    """Alternating best-response iteration to a Nash equilibrium in prices.

    ``order`` picks who moves first in each round. ``init`` overrides the
    default start at the midpoint of each price domain. Raises
    :class:`ConvergenceError` with the full trajectory if prices are still
    moving after ``settings.max_br_iterations`` rounds.
    """
    q_I2, q_E2 = q_pair
    dom_I = price_domain(params, "I", q_I2)
    dom_E = price_domain(params, "E", q_E2)
    if init is None:
        p_I, p_E = 0.5 * sum(dom_I), 0.5 * sum(dom_E)
    else:
        p_I, p_E = (float(v) for v in init)
    d = settings.damping
    trajectory = [(p_I, p_E)]

    def step_I(p_I, p_E):
        br = best_response(params, dist, q_pair, "I", p_E, theta1, settings).price
        return d * p_I + (1 - d) * br

    def step_E(p_I, p_E):
        br = best_response(params, dist, q_pair, "E", p_I, theta1, settings).price
        return d * p_E + (1 - d) * br

    for k in range(1, settings.max_br_iterations + 1):
        if order == "IE":
            new_I = step_I(p_I, p_E)
            new_E = step_E(new_I, p_E)
        else:
            new_E = step_E(p_I, p_E)
            new_I = step_I(p_I, new_E)
        done = abs(new_I - p_I) < settings.br_tolerance and abs(new_E - p_E) < settings.br_tolerance
        p_I, p_E = new_I, new_E
        trajectory.append((p_I, p_E))
        if done:
            break
    else:
        raise ConvergenceError(
            f"price_game: best response still moving after {settings.max_br_iterations} rounds "
            f"(theta1={theta1:.6g}, qualities={q_pair})", trajectory)

    br_I = best_response(params, dist, q_pair, "I", p_E, theta1, settings)
    br_E = best_response(params, dist, q_pair, "E", p_I, theta1, settings)
    residual = max(abs(br_I.price - p_I), abs(br_E.price - p_E))
    m_I, m_E = period2_demand(params, dist, q_I2, q_E2, p_I, p_E, theta1)
    verdict = None
    if verify:
        verdict = oracle.verify_no_deviation(params, dist, q_pair, theta1, (p_I, p_E),
                                             settings.oracle_grid_n, settings.deviation_tolerance)
    return PriceEquilibrium(
        p_I2=p_I, p_E2=p_E,
        W_I2=(p_I - params.c_I) * m_I, W_E2=(p_E - params.c_E) * m_E,
        demand_I2=m_I, demand_E2=m_E,
        iterations=k, residual=residual,
        zero_demand=(m_I == 0.0 and m_E == 0.0),
        verdict=verdict,
    )


def unimodality_scan(params, dist, q_pair, company, other_price, theta1, grid_n=500,
                     tol=UNIMODAL_TOL) -> tuple[bool, int]:
    """Count rises-after-a-fall in the own-price profit slice on a grid."""
    if grid_n < 100:
        raise ValueError("unimodality_scan: grid_n must be >= 100")
    q_I2, q_E2 = q_pair
    lo, hi = price_domain(params, company, q_I2 if company == "I" else q_E2)
    if hi <= lo:
        return True, 0
    ps = np.linspace(lo, hi, grid_n)
    if company == "I":
        w = period2_profit_grid(params, dist, q_I2, q_E2, ps, other_price, theta1)[0]
    else:
        w = period2_profit_grid(params, dist, q_I2, q_E2, other_price, ps, theta1)[1]
    violations = 0
    falling = False
    for prev, cur in zip(w[:-1], w[1:]):
        if cur < prev - tol:
            falling = True
        elif falling and cur > prev + tol:
            violations += 1
    return violations == 0, violations
