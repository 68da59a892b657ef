"""Equilibrium solver for a two-period coopetition game between an incumbent
and an entrant that may train a shared model and then compete on price."""
from .collab_game import CollaborationOutcome, collaboration_equilibrium
from .distributions import (GaussianMixture, TruncatedGamma, TruncatedGaussian, Uniform,
                            hazard_monotone_check, valley_mixture)
from .errors import ConvergenceError, CoopetitionError, DomainError, ValidationError
from .market import CollaborationProfile, MarketParams, PriceProfile, QualityProfile, profits
from .period1 import optimize, total_profit
from .price_game import best_response, price_equilibrium
from .scenario_io import (AccuracyFixture, Scenario, load_accuracy_fixture, load_scenario,
                          run_sweep, scenario_from_fixture)
from .settings import SolverSettings

__version__ = "0.1.0"

__all__ = [
    "AccuracyFixture", "CollaborationOutcome", "CollaborationProfile", "ConvergenceError",
    "CoopetitionError", "DomainError", "GaussianMixture", "MarketParams", "PriceProfile",
    "QualityProfile", "Scenario", "SolverSettings", "TruncatedGamma", "TruncatedGaussian",
    "Uniform", "ValidationError", "best_response", "collaboration_equilibrium",
    "hazard_monotone_check", "load_accuracy_fixture", "load_scenario", "optimize",
    "price_equilibrium", "profits", "run_sweep", "scenario_from_fixture", "total_profit",
    "valley_mixture",
]
