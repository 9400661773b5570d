"""Approximate Nash equilibria of large nonconvex congestion-type aggregative games."""

from .disaggregation import (DisaggregationResult, MixedProfile, exact_argmin, purify,
                             randomized_disaggregate, sf_disaggregate)
from .envelope import Envelope, GeneratorWitness, build_envelope, caratheodory_reduce, eval_envelope
from .ev import EVParams, ExperimentResult, build_game, run_experiment, sample_instance
from .functions import FunctionSpec
from .game import AuxiliaryGame, Constants, Game, Profile, aggregate, auxiliary_cost, cost, derive_constants
from .metrics import (EquilibriumReport, additive_epsilon, best_response, mixed_bound, mixed_epsilon,
                      relative_epsilon, stability_slack, theorem_bound)
from .solver import SolveReport, SolverConfig, omega_bound, potential, proximal_step, run

__all__ = [
    "AuxiliaryGame", "Constants", "DisaggregationResult", "EVParams", "Envelope",
    "EquilibriumReport", "ExperimentResult", "FunctionSpec", "Game", "GeneratorWitness",
    "MixedProfile", "Profile", "SolveReport", "SolverConfig", "additive_epsilon", "aggregate",
    "auxiliary_cost", "best_response", "build_envelope", "build_game", "caratheodory_reduce",
    "cost", "derive_constants", "eval_envelope", "exact_argmin", "mixed_bound", "mixed_epsilon",
    "omega_bound", "potential", "proximal_step", "purify", "randomized_disaggregate",
    "relative_epsilon", "run", "run_experiment", "sample_instance", "sf_disaggregate",
    "stability_slack", "theorem_bound",
]
