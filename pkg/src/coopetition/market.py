"""Demand model: user payoffs, purchase segments and company profits.

Users sit at a location ``phi`` in [0, 1]; company I is at 0 and E at 1.
Period-1 buyers (``phi <= theta1``) leave the market, so period-2 demand is
drawn only from the residual interval ``(theta1, 1]``.

The scalar functions here are the hot path of the solver. The ``*_grid``
functions compute the same quantities over numpy arrays for brute-force
checks; ``tests/test_market.py`` pins the two paths together.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError


def _finite(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ValidationError(f"{name} must be a finite number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class MarketParams:
    w_q: float = 1.0
    w_p: float = 1.0
    w_phi: float = 1.0
    c_I: float = 0.0
    c_E: float = 0.0

    def __post_init__(self):
        for name in ("w_q", "w_p", "w_phi", "c_I", "c_E"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        for name in ("w_q", "w_p", "w_phi"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        for name in ("c_I", "c_E"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")

    def cost(self, company: str) -> float:
        return self.c_I if company == "I" else self.c_E

    def price_cap(self, quality: float) -> float:
        """Price above which nobody buys a service of this quality."""
        return self.w_q * quality / self.w_p


@dataclass(frozen=True)
class QualityProfile:
    """Service qualities: period 1 (I only) and period 2 per collaboration outcome."""

    q_I1: float
    q_local: tuple[float, float]
    q_fl: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "q_I1", _finite("q_I1", self.q_I1))
        for name in ("q_local", "q_fl"):
            pair = getattr(self, name)
            if pair is None or len(pair) != 2:
                raise ValidationError(f"qualities.{name} must be a pair (q_I2, q_E2)")
            object.__setattr__(self, name, tuple(_finite(f"qualities.{name}", v) for v in pair))
        for v in (self.q_I1, *self.q_local, *self.q_fl):
            if v < 0:
                raise ValidationError("qualities must be non-negative")

    def period2(self, collaborate: bool) -> tuple[float, float]:
        return self.q_fl if collaborate else self.q_local


@dataclass(frozen=True)
class CollaborationProfile:
    r_I: bool
    r_E: bool

    @property
    def effective(self) -> bool:
        # FL happens only if both sign up
        return bool(self.r_I and self.r_E)

    def as_tuple(self) -> tuple[int, int]:
        return int(self.r_I), int(self.r_E)


@dataclass(frozen=True)
class PriceProfile:
    p_I1: float
    p_I2: float
    p_E2: float

    def __post_init__(self):
        for name in ("p_I1", "p_I2", "p_E2"):
            if _finite(name, getattr(self, name)) < 0:
                raise ValidationError(f"{name} must be non-negative")


class Purchase(enum.Enum):
    NONE = "none"
    I = "I"
    E = "E"


class DemandSegments(NamedTuple):
    theta1: float
    phi_star: float
    seg_I2: tuple[float, float] | None
    seg_E2: tuple[float, float] | None
    mass_I1: float
    mass_I2: float
    mass_E2: float


class ProfitBreakdown(NamedTuple):
    W_I1: float
    W_I2: float
    W_E2: float

    @property
    def W_I(self) -> float:
        return self.W_I1 + self.W_I2


def user_payoff(params: MarketParams, quality: float, phi: float, decision: Purchase,
                price: float = 0.0) -> float:
    """Payoff of a user at ``phi`` who buys ``decision`` at ``price``."""
    if decision is Purchase.NONE:
        return 0.0
    distance = phi if decision is Purchase.I else 1.0 - phi
    return params.w_q * quality - params.w_phi * distance - params.w_p * price


def period1_threshold(params: MarketParams, q_I1: float, p_I1: float) -> float:
    """Location of the last period-1 buyer; users with phi <= theta1 buy from I."""
    t = (params.w_q * q_I1 - params.w_p * p_I1) / params.w_phi
    return min(max(t, 0.0), 1.0)


def indifference_point(params: MarketParams, q_I2, q_E2, p_I2, p_E2) -> float:
    """Location where buying from I and from E pay the same (may leave [0, 1])."""
    return 0.5 * (1.0 + (params.w_q * (q_I2 - q_E2) - params.w_p * (p_I2 - p_E2)) / params.w_phi)


def _raw_bounds(params, q_I2, q_E2, p_I2, p_E2):
    # I is chosen on [0, upper], E on [lower, 1]. The clamps are symmetric
    # under phi -> 1 - phi, so this also covers the mirrored ordering case.
    reach_I = (params.w_q * q_I2 - params.w_p * p_I2) / params.w_phi
    reach_E = (params.w_q * q_E2 - params.w_p * p_E2) / params.w_phi
    star = indifference_point(params, q_I2, q_E2, p_I2, p_E2)
    upper = max(min(reach_I, star, 1.0), 0.0)
    lower = min(max(1.0 - reach_E, star, 0.0), 1.0)
    return star, upper, lower


def period2_demand(params: MarketParams, dist, q_I2, q_E2, p_I2, p_E2, theta1) -> tuple[float, float]:
    """Masses of period-2 buyers from I and from E within the residual market."""
    _, upper, lower = _raw_bounds(params, q_I2, q_E2, p_I2, p_E2)
    m_I = dist.mass(theta1, upper) if upper > theta1 else 0.0
    lo_E = max(lower, theta1)
    m_E = dist.mass(lo_E, 1.0) if lo_E < 1.0 else 0.0
    return m_I, m_E


def period2_profit(params: MarketParams, dist, company: str, q_I2, q_E2, p_I2, p_E2, theta1) -> float:
    m_I, m_E = period2_demand(params, dist, q_I2, q_E2, p_I2, p_E2, theta1)
    if company == "I":
        return (p_I2 - params.c_I) * m_I
    return (p_E2 - params.c_E) * m_E


def period2_profit_slope(params: MarketParams, dist, company: str, q_I2, q_E2, p_I2, p_E2, theta1) -> float:
    """Right derivative of a company's period-2 profit in its own price.

    Demand is piecewise smooth: the boundary moves at rate w_p / w_phi while
    the reach constraint binds and at half that rate while the indifference
    point binds. Taking the right derivative picks the branch that is active
    just above a kink, so the sign of this function changes exactly at the
    profit maximum whether it is smooth or sits on a kink.
    """
    star, upper, lower = _raw_bounds(params, q_I2, q_E2, p_I2, p_E2)
    reach_I = (params.w_q * q_I2 - params.w_p * p_I2) / params.w_phi
    reach_E = (params.w_q * q_E2 - params.w_p * p_E2) / params.w_phi
    full = params.w_p / params.w_phi
    if company == "I":
        m = dist.mass(theta1, upper) if upper > theta1 else 0.0
        raw = min(reach_I, star)
        if raw > 1.0 or raw <= theta1:
            return m
        rate = full if reach_I <= star else 0.5 * full
        return m - (p_I2 - params.c_I) * rate * dist.pdf(raw)
    lo_E = max(lower, theta1)
    m = dist.mass(lo_E, 1.0) if lo_E < 1.0 else 0.0
    raw = max(1.0 - reach_E, star)
    if raw < theta1 or raw >= 1.0:
        return m
    rate = full if 1.0 - reach_E >= star else 0.5 * full
    return m - (p_E2 - params.c_E) * rate * dist.pdf(raw)


def period2_segments(params: MarketParams, dist, q_I2, q_E2, p_I2, p_E2, theta1) -> DemandSegments:
    """Full description of who buys what in period 2, given the period-1 threshold."""
    star, upper, lower = _raw_bounds(params, q_I2, q_E2, p_I2, p_E2)
    seg_I = (theta1, upper) if upper > theta1 else None
    lo_E = max(lower, theta1)
    seg_E = (lo_E, 1.0) if lo_E < 1.0 else None
    return DemandSegments(
        theta1=theta1,
        phi_star=star,
        seg_I2=seg_I,
        seg_E2=seg_E,
        mass_I1=dist.mass(0.0, theta1) if theta1 > 0 else 0.0,
        mass_I2=dist.mass(*seg_I) if seg_I else 0.0,
        mass_E2=dist.mass(*seg_E) if seg_E else 0.0,
    )


def period1_profit(params: MarketParams, dist, q_I1: float, p_I1: float) -> float:
    theta1 = period1_threshold(params, q_I1, p_I1)
    return (p_I1 - params.c_I) * dist.mass(0.0, theta1)


def profits(params: MarketParams, dist, qualities: QualityProfile, collab: CollaborationProfile,
            prices: PriceProfile) -> ProfitBreakdown:
    theta1 = period1_threshold(params, qualities.q_I1, prices.p_I1)
    q_I2, q_E2 = qualities.period2(collab.effective)
    m_I, m_E = period2_demand(params, dist, q_I2, q_E2, prices.p_I2, prices.p_E2, theta1)
    return ProfitBreakdown(
        W_I1=(prices.p_I1 - params.c_I) * dist.mass(0.0, theta1),
        W_I2=(prices.p_I2 - params.c_I) * m_I,
        W_E2=(prices.p_E2 - params.c_E) * m_E,
    )


def period2_profit_grid(params: MarketParams, dist, q_I2, q_E2, p_I2, p_E2, theta1):
    """Vectorized (W_I2, W_E2) over broadcastable price / threshold arrays."""
    p_I2 = np.asarray(p_I2, dtype=float)
    p_E2 = np.asarray(p_E2, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    reach_I = (params.w_q * q_I2 - params.w_p * p_I2) / params.w_phi
    reach_E = (params.w_q * q_E2 - params.w_p * p_E2) / params.w_phi
    star = 0.5 * (1.0 + (params.w_q * (q_I2 - q_E2) - params.w_p * (p_I2 - p_E2)) / params.w_phi)
    upper = np.clip(np.minimum(reach_I, star), 0.0, 1.0)
    lower = np.clip(np.maximum(1.0 - reach_E, star), 0.0, 1.0)
    m_I = dist.mass_array(theta1, upper)
    m_E = dist.mass_array(np.maximum(lower, theta1), 1.0)
    return (p_I2 - params.c_I) * m_I, (p_E2 - params.c_E) * m_E


def decide_period1(params: MarketParams, q_I1: float, p_I1: float, phi: float) -> Purchase:
    """Myopic period-1 choice; indifferent users buy."""
    u = user_payoff(params, q_I1, phi, Purchase.I, p_I1)
    return Purchase.I if u >= 0.0 else Purchase.NONE


def decide_period2(params: MarketParams, q_I2, q_E2, p_I2, p_E2, phi: float) -> Purchase:
    """Period-2 choice of a user still in the market; ties go to buying, then to I."""
    u_I = user_payoff(params, q_I2, phi, Purchase.I, p_I2)
    u_E = user_payoff(params, q_E2, phi, Purchase.E, p_E2)
    if u_I >= u_E and u_I >= 0.0:
        return Purchase.I
    if u_E >= 0.0:
        return Purchase.E
    return Purchase.NONE
