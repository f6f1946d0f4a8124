"""Voxel soft-actuator simulation with NEAT, HyperNEAT and GA controllers."""

from ._voxevo import (
    DEFAULT_BENCH_SEED,
    DIVERGENCE_PENALTY,
    MAX_PHASE,
    ConfigError,
    Controller,
    GenomeError,
    Morphology,
    MorphologyError,
    NumericalDivergence,
    SimParams,
    aptitude,
    displacement,
    evaluate,
    evaluate_robustness,
    generate_benchmark,
    load_morphology,
    parse_morphology,
    run_campaign,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BENCH_SEED",
    "DIVERGENCE_PENALTY",
    "MAX_PHASE",
    "ConfigError",
    "Controller",
    "GenomeError",
    "Morphology",
    "MorphologyError",
    "NumericalDivergence",
    "SimParams",
    "aptitude",
    "displacement",
    "evaluate",
    "evaluate_robustness",
    "generate_benchmark",
    "load_morphology",
    "parse_morphology",
    "run_campaign",
    "simulate",
]
