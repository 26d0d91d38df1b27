"""Python bindings for the divest f-divergence estimators."""

import json as _json

from . import _divest
from ._divest import (
    DivestError,
    GaussianSpec,
    kth_distance,
    plugin_estimate,
    plugin_estimate_kernel,
    reference_curve,
    split_f2,
    unit_ball_volume,
)


def true_divergence(f1, f2, g="renyi:0.8", budget=100000, seed=1, threads=1):
    value, std_error, closed_form = _divest.true_divergence(f1, f2, g, budget, seed, threads)
    return {"value": value, "std_error": std_error, "closed_form": closed_form}


def solve_exact_weights(l, d):
    return _json.loads(_divest.solve_exact_weights(list(l), d))


def solve_relaxed_weights(l, d, T, eta=2.0):
    return _json.loads(_divest.solve_relaxed_weights(list(l), d, T, eta))


def ensemble_estimate(eval, ref, f1, l, weights, g="renyi:0.8"):
    functional, divergence, ks = _divest.ensemble_estimate(eval, ref, f1, list(l), list(weights), g)
    return {"functional": functional, "divergence": divergence, "k": ks}


def estimate(f1, f2, estimator="ensemble_relaxed", g="renyi:0.8", alpha_frac=0.5, seed=1, eta=2.0):
    return _json.loads(_divest.estimate(f1, f2, estimator, g, alpha_frac, seed, eta))


def run_experiment(config, out_dir=None):
    """Runs a study described by a dict; returns (records_csv, summary_csv) text."""
    return _divest.run_experiment(_json.dumps(config), out_dir)


__all__ = [
    "DivestError",
    "GaussianSpec",
    "ensemble_estimate",
    "estimate",
    "kth_distance",
    "plugin_estimate",
    "plugin_estimate_kernel",
    "reference_curve",
    "run_experiment",
    "solve_exact_weights",
    "solve_relaxed_weights",
    "split_f2",
    "true_divergence",
    "unit_ball_volume",
]
