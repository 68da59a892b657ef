import math

import numpy as np

import pytest

from coopetition.distributions import TruncatedGaussian
from coopetition.market import MarketParams
from coopetition.oracle import grid_period1_optimum
from coopetition.period1 import optimize, optimize_region, region_bounds, total_profit

from conftest import UNIT, make_scenario


def test_region_bounds_when_full_coverage_impossible():
    a, b, c = region_bounds(UNIT, 0.72)
    assert a.empty
    assert (b.lo, b.hi) == (0.0, 0.72)
    assert c.lo == 0.72 and math.isinf(c.hi)


def test_region_bounds_with_full_coverage():
    a, b, c = region_bounds(UNIT, 1.5)
    assert not a.empty and (a.lo, a.hi) == (0.0, 0.5)
    assert (b.lo, b.hi) == (0.5, 1.5)
    a, b, _ = region_bounds(MarketParams(w_q=2.0, w_p=4.0, w_phi=0.5), 1.0)
    assert a.hi == pytest.approx(0.375) and b.hi == pytest.approx(0.5)


def test_region_c_is_flat(example):
    w = [total_profit(example, p).W_I for p in (0.72, 0.9, 5.0)]
    assert w[0] == w[1] == w[2]
    assert total_profit(example, 0.72).W_I1 == 0.0


def test_two_period_monopolist_closed_form():
    # entrant has zero quality in both profiles, so I is alone in both periods:
    # W = (q - t) t + ((q - t) / 2)^2 peaks at t = q / 3 with W = q^2 / 3
    q = 0.9
    s = make_scenario(q, (q, 0.0), (q, 0.0))
    sol = optimize(s)
    assert sol.p_I1 == pytest.approx(2 * q / 3, abs=1e-4)
    assert sol.at_optimum.theta1 == pytest.approx(q / 3, abs=1e-4)
    assert sol.W_I == pytest.approx(q * q / 3, abs=1e-8)
    assert sol.region == "B"


@pytest.mark.parametrize("s", [
    make_scenario(0.72, (0.72, 0.73), (0.75, 0.75)),
    make_scenario(1.4, (1.4, 1.2), (1.5, 1.5)),
    make_scenario(0.6, (0.6, 0.8), (0.85, 0.85), dist=TruncatedGaussian()),
    make_scenario(0.8, (0.8, 0.5), (0.9, 0.9), params=MarketParams(c_I=0.05, c_E=0.08)),
], ids=["example", "region-A", "gaussian", "costs"])
def test_optimize_matches_grid_oracle(s):
    sol = optimize(s)
    g = grid_period1_optimum(s, grid_n=2000)
    assert abs(sol.W_I - g.W_I) <= 1e-3
    assert sol.W_I >= g.W_I - 1e-7  # the continuous search should not lose to the grid


def test_region_a_used_when_it_wins():
    # I is strong in period 1 but the entrant takes the whole period-2 market,
    # so I sells to everyone while it can: W = p_I1 up to p_I1 = 2
    s = make_scenario(3.0, (0.1, 3.0), (0.1, 3.0))
    sol = optimize(s)
    assert sol.region == "A"
    assert sol.p_I1 == pytest.approx(2.0, abs=1e-6)
    assert sol.at_optimum.theta1 == pytest.approx(1.0, abs=1e-6)


def test_optimize_region_rejects_empty():
    s = make_scenario(0.72, (0.72, 0.73), (0.75, 0.75))
    a, _, _ = region_bounds(s.params, 0.72)
    with pytest.raises(ValueError):
        optimize_region(s, a)


def test_ascent_converges_and_records_trajectory():
    s = make_scenario(0.72, (0.72, 0.73), (0.75, 0.75))
    _, b, _ = region_bounds(s.params, 0.72)
    r = optimize_region(s, b)
    assert r.converged and r.iterations < 100
    ws = [w for _, w in r.trajectory]
    assert all(y >= x for x, y in zip(ws, ws[1:]))


def test_deterministic():
    s = make_scenario(0.6081, (0.6081, 0.5756), (0.6981, 0.6981))
    assert optimize(s) == optimize(s)


def _single_peaked(ws, tol=1e-10):
    falling = False
    for a, b in zip(ws, ws[1:]):
        if b < a - tol:
            falling = True
        elif falling and b > a + tol:
            return False
    return True


@pytest.mark.parametrize("s", [
    make_scenario(0.72, (0.72, 0.73), (0.75, 0.75)),
    make_scenario(0.3923, (0.3923, 0.4817), (0.574, 0.574)),
    make_scenario(1.4, (1.4, 1.2), (1.5, 1.5)),
], ids=["example", "cifar10-beta0.1", "region-A"])
def test_objective_single_peaked_within_each_region(s):
    for region in region_bounds(s.params, s.qualities.q_I1)[:2]:
        if region.empty:
            continue
        ps = np.linspace(region.lo, region.hi, 121)
        ws = [total_profit(s, float(p)).W_I for p in ps]
        assert _single_peaked(ws), region.label


@pytest.mark.parametrize("s", [
    make_scenario(1.4, (1.4, 1.2), (1.5, 1.5)),
    make_scenario(0.72, (0.72, 0.73), (0.75, 0.75)),
    make_scenario(0.7637, (0.7637, 0.7367), (0.799, 0.799)),
], ids=["region-A", "example", "ham"])
def test_objective_continuous_across_region_boundaries(s):
    a, b, c = region_bounds(s.params, s.qualities.q_I1)
    cuts = [b.lo] if not a.empty else []
    cuts.append(c.lo)
    for x in cuts:
        left = total_profit(s, math.nextafter(x, -math.inf)).W_I
        right = total_profit(s, math.nextafter(x, math.inf)).W_I
        assert left == pytest.approx(right, abs=1e-9)
