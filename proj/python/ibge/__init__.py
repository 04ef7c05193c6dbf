"""Bayesian structure learning from mixed observational and interventional Gaussian data."""

from ._ibge import (
    CycleError,
    Dag,
    Scorer,
    ValidationError,
    bge_local,
    compare,
    cpdag,
    interventional_eg,
    posterior_effects,
    run_cli,
    simulate,
    total_effects,
)

__all__ = [
    "CycleError",
    "Dag",
    "Scorer",
    "ValidationError",
    "bge_local",
    "compare",
    "cpdag",
    "interventional_eg",
    "posterior_effects",
    "run_cli",
    "simulate",
    "total_effects",
]
