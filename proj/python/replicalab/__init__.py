"""Replicability experiments: seed keys, correlated sampling, composition
calculators and the config-driven experiment runner."""

import json as _json

from ._replicalab import (
    DEFAULT_ROOT_SEED,
    ConfigError,
    DomainError,
    Error,
    ExperimentConfig,
    IoError,
    ParameterError,
    ScaleError,
    SeedKey,
    ValidationError,
    compute_experiment,
    correlated_sample_index,
    disagreement_bound,
    experiment_kinds,
    pg_compose_het_params,
    pg_compose_simple,
    run_experiment,
    theorem1_params,
    validate_config,
)

__version__ = "0.1.0"


def run(text, overrides=(), write=True):
    """Validate a config document and run it. Returns the outcome dict with
    the parsed report under "report"."""
    cfg = validate_config(text, list(overrides))
    out = run_experiment(cfg) if write else compute_experiment(cfg)
    out["report"] = _json.loads(out["report_json"]) if out["report_json"] else None
    return out
