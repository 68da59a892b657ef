"""Period-2 collaboration game.

FL happens only when both companies opt in, so the mixed profiles (1, 0) and
(0, 1) play out exactly like (0, 0). Collaboration is the equilibrium iff
neither company earns less under the shared model than under local models.
"""
from __future__ import annotations

from typing import NamedTuple

from .errors import ConvergenceError
from .market import CollaborationProfile, period1_threshold
from .price_game import PriceEquilibrium, price_equilibrium
from .settings import SolverSettings

COLLABORATE = CollaborationProfile(True, True)
STAY_LOCAL = CollaborationProfile(False, False)


class CollaborationOutcome(NamedTuple):
    r_star: CollaborationProfile
    theta1: float
    fl: PriceEquilibrium
    local: PriceEquilibrium
    I_prefers_fl: bool
    E_prefers_fl: bool

    @property
    def collaborate(self) -> bool:
        return self.r_star.effective

    @property
    def equilibrium(self) -> PriceEquilibrium:
        return self.fl if self.collaborate else self.local

    def profit_table(self) -> dict:
        """Period-2 profits for every collaboration profile; mixed ones alias (0, 0)."""
        fl = (self.fl.W_I2, self.fl.W_E2)
        loc = (self.local.W_I2, self.local.W_E2)
        return {(1, 1): fl, (0, 0): loc, (1, 0): loc, (0, 1): loc}

    def to_dict(self) -> dict:
        return {
            "r_star": list(self.r_star.as_tuple()),
            "theta1": self.theta1,
            "I_prefers_fl": self.I_prefers_fl,
            "E_prefers_fl": self.E_prefers_fl,
            "profit_table": {f"{a}{b}": list(v) for (a, b), v in self.profit_table().items()},
            "fl": self.fl.to_dict(),
            "local": self.local.to_dict(),
        }


def decide(fl_profits, local_profits) -> tuple[CollaborationProfile, bool, bool]:
    """Apply the collaboration rule to ``(W_I2, W_E2)`` pairs; ties collaborate."""
    i_ok = fl_profits[0] >= local_profits[0]
    e_ok = fl_profits[1] >= local_profits[1]
    return (COLLABORATE if i_ok and e_ok else STAY_LOCAL), i_ok, e_ok


def collaboration_equilibrium(scenario, p_I1: float, settings: SolverSettings | None = None,
                              warm=None, verify=True) -> CollaborationOutcome:
    """Solve both price games induced by ``p_I1`` and pick the collaboration profile.

    ``warm`` may map ``"fl"`` / ``"local"`` to starting price pairs.
    """
    settings = settings or scenario.settings
    params, dist, q = scenario.params, scenario.dist, scenario.qualities
    theta1 = period1_threshold(params, q.q_I1, p_I1)
    warm = warm or {}
    eq = {}
    for name, pair in (("fl", q.q_fl), ("local", q.q_local)):
        try:
            eq[name] = price_equilibrium(params, dist, pair, theta1, settings,
                                         init=warm.get(name), verify=verify)
        except ConvergenceError as exc:
            exc.profile = (1, 1) if name == "fl" else (0, 0)
            raise
    r_star, i_ok, e_ok = decide((eq["fl"].W_I2, eq["fl"].W_E2), (eq["local"].W_I2, eq["local"].W_E2))
    return CollaborationOutcome(r_star, theta1, eq["fl"], eq["local"], i_ok, e_ok)
