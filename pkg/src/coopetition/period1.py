"""Incumbent's period-1 pricing.

The two-period profit is not concave in p_I1, but it is on each of three
price regions:

* A: every user buys in period 1 (theta1 = 1), profit is p_I1 - c_I;
* B: a proper prefix of users buys in period 1;
* C: nobody buys in period 1, profit does not depend on p_I1.

Each region is optimized separately and the best regional optimum wins.
"""
from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np

from .collab_game import CollaborationOutcome, collaboration_equilibrium
from .market import MarketParams, period1_threshold
from .settings import SolverSettings

log = logging.getLogger(__name__)


class RegionSpec(NamedTuple):
    label: str
    lo: float
    hi: float
    empty: bool = False

    @property
    def width(self) -> float:
        return self.hi - self.lo


class TotalProfit(NamedTuple):
    p_I1: float
    theta1: float
    W_I1: float
    W_I2: float
    W_E2: float
    outcome: CollaborationOutcome

    @property
    def W_I(self) -> float:
        return self.W_I1 + self.W_I2


class RegionOptimum(NamedTuple):
    label: str
    p_I1: float
    W_I: float
    iterations: int
    converged: bool
    trajectory: tuple


class Period1Solution(NamedTuple):
    p_I1: float
    W_I: float
    region: str
    regions: tuple
    at_optimum: TotalProfit

    @property
    def outcome(self) -> CollaborationOutcome:
        return self.at_optimum.outcome


def region_bounds(params: MarketParams, q_I1: float) -> tuple[RegionSpec, RegionSpec, RegionSpec]:
    cap = params.price_cap(q_I1)
    full = (params.w_q * q_I1 - params.w_phi) / params.w_p
    a = RegionSpec("A", 0.0, full) if full > 0 else RegionSpec("A", 0.0, 0.0, empty=True)
    b = RegionSpec("B", max(0.0, full), cap)
    c = RegionSpec("C", cap, math.inf)
    return a, b, c


def total_profit(scenario, p_I1: float, settings: SolverSettings | None = None,
                 verify=False) -> TotalProfit:
    """Two-period profit of I at ``p_I1`` with period 2 played in equilibrium."""
    settings = settings or scenario.settings
    params, dist, q = scenario.params, scenario.dist, scenario.qualities
    outcome = collaboration_equilibrium(scenario, p_I1, settings, verify=verify)
    theta1 = period1_threshold(params, q.q_I1, p_I1)
    W_I1 = (p_I1 - params.c_I) * dist.mass(0.0, theta1)
    eq = outcome.equilibrium
    return TotalProfit(p_I1, theta1, W_I1, eq.W_I2, eq.W_E2, outcome)


class _Objective:
    """Memoized W_I(p_I1).

    Every price game starts cold from the domain midpoints. Warm starts would
    make the selected equilibrium depend on the ascent path whenever the
    price game has a continuum of equilibria.
    """

    def __init__(self, scenario, settings):
        self.scenario = scenario
        self.settings = settings
        self.cache = {}

    def __call__(self, p: float) -> float:
        if p not in self.cache:
            self.cache[p] = total_profit(self.scenario, p, self.settings).W_I
        return self.cache[p]


def optimize_region(scenario, region: RegionSpec, settings: SolverSettings | None = None) -> RegionOptimum:
    """Projected gradient ascent on one region.

    Starts from the best of a few evenly spaced seed points, uses a central
    finite-difference gradient, halves the step whenever a move fails to
    improve and lengthens it by ``step_growth`` after each accepted move.
    Region C is constant, so it is evaluated once at its left end.
    """
    settings = settings or scenario.settings
    if region.empty:
        raise ValueError(f"region {region.label} is empty")
    f = _Objective(scenario, settings)
    lo, hi = region.lo, region.hi
    if region.label == "C" or hi <= lo:
        return RegionOptimum(region.label, lo, f(lo), 0, True, ((lo, f(lo)),))

    seeds = np.linspace(lo, hi, settings.seed_points) if settings.seed_points > 1 else np.array([lo])
    values = [f(float(s)) for s in seeds]
    k = int(np.argmax(values))
    p, w = float(seeds[k]), values[k]
    trajectory = [(p, w)]
    step = settings.step_fraction * (hi - lo)
    h = settings.fd_step
    converged = False
    it = 0
    for it in range(1, settings.region_max_iterations + 1):
        a, b = max(p - h, lo), min(p + h, hi)
        grad = (f(b) - f(a)) / (b - a)
        moved = False
        while step >= settings.step_floor:
            cand = min(max(p + step * grad, lo), hi)
            if abs(cand - p) < settings.region_tolerance:
                break
            wc = f(cand)
            if wc > w:
                p, w, moved = cand, wc, True
                step *= settings.step_growth
                break
            step *= 0.5
        trajectory.append((p, w))
        if not moved:
            converged = True
            break
    if not converged:
        log.warning("region %s: ascent hit %d iterations without settling", region.label, it)
    return RegionOptimum(region.label, p, w, it, converged, tuple(trajectory))


def optimize(scenario, settings: SolverSettings | None = None) -> Period1Solution:
    """Best period-1 price over the three regions, with period 2 solved at the optimum."""
    settings = settings or scenario.settings
    results = []
    for region in region_bounds(scenario.params, scenario.qualities.q_I1):
        if region.empty:
            continue
        results.append(optimize_region(scenario, region, settings))
    best = results[0]
    for r in results[1:]:
        if r.W_I > best.W_I:
            best = r
    at_opt = total_profit(scenario, best.p_I1, settings, verify=True)
    return Period1Solution(best.p_I1, at_opt.W_I, best.label, tuple(results), at_opt)
