"""
Subgradient-push: distributed nonsmooth optimization over time-varying
directed graphs, built on perturbed push-sum, with runtime checks of the
consensus and convergence-rate bounds.
"""

from .graph import Digraph, make_sequence, verify_b_connected, window_verdicts
from .mixing import ConnectivityParams, build_mixing, estimate_lambda, measure_delta, theoretical_params
from .objectives import ObjectiveSpec, grid_search_optimum
from .pushsum import (
    DecayingPerturbation,
    SubgradientPerturbation,
    ZeroPerturbation,
    corollary2_bound,
    lemma1_bounds,
    run_pushsum,
)
from .schedule import StepSchedule
from .sgp import lemma9_bound, run_sgp, theorem2_bound

__all__ = [
    "Digraph",
    "make_sequence",
    "verify_b_connected",
    "window_verdicts",
    "ConnectivityParams",
    "build_mixing",
    "estimate_lambda",
    "measure_delta",
    "theoretical_params",
    "ObjectiveSpec",
    "grid_search_optimum",
    "DecayingPerturbation",
    "SubgradientPerturbation",
    "ZeroPerturbation",
    "corollary2_bound",
    "lemma1_bounds",
    "run_pushsum",
    "StepSchedule",
    "lemma9_bound",
    "run_sgp",
    "theorem2_bound",
]
