"""Python bindings for the thin-film minimising-movement library."""

from ._thinfilm import (
    GridDensity,
    JkoConfig,
    QuantileDensity,
    SmythHill,
    alpha,
    beta,
    crossvalidate,
    dissipation,
    energy,
    entropy,
    fdm_integrate,
    fit_rate,
    moment,
    parse_initial_condition,
    record,
    run,
    static_suite,
    w2,
    w2_bruteforce,
    w2_sq_atoms,
)

__all__ = [
    "GridDensity",
    "JkoConfig",
    "QuantileDensity",
    "SmythHill",
    "alpha",
    "beta",
    "crossvalidate",
    "dissipation",
    "energy",
    "entropy",
    "fdm_integrate",
    "fit_rate",
    "moment",
    "parse_initial_condition",
    "record",
    "run",
    "static_suite",
    "w2",
    "w2_bruteforce",
    "w2_sq_atoms",
]
