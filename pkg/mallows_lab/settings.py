import json
import logging
import re
from dataclasses import dataclass
from math import isfinite
from pathlib import Path

import config as app_config

from mallows_lab.models import LOCAL_KINDS, ExperimentConfig, ExperimentKind, SamplerKind
from mallows_lab.perm.mallows import ENUMERATION_MAX_N

SEED_LIMIT = 2**64


@dataclass(frozen=True)
class AppSettings:
    log_level: str
    log_verbose_events: bool
    default_seed: int
    log_dir: str = "logs"
    output_dir: str = "results"
    workers: int = 1
    explosion_cap: int = 10_000_000
    rate_singularity_eps: float = 1e-6
    series_switch: float = 1e-4
    envelope_segments: int = 32
    envelope_safety: float = 2.0
    window_extension_cap: int = 100_000
    certification_tol: float = 1e-9


def _valid_log_level(level_name: str) -> bool:
    return isinstance(getattr(logging, str(level_name).upper(), None), int)


def validate_settings(settings: AppSettings) -> AppSettings:
    """Validate startup configuration and raise a clear error on invalid values."""
    errors = []

    if not _valid_log_level(settings.log_level):
        errors.append("LOG_LEVEL must be one of DEBUG, INFO, WARNING, ERROR, CRITICAL (or equivalent).")
    if not str(settings.log_dir).strip():
        errors.append("LOG_DIR must be a non-empty path.")
    if not str(settings.output_dir).strip():
        errors.append("OUTPUT_DIR must be a non-empty path.")
    if not 0 <= int(settings.default_seed) < SEED_LIMIT:
        errors.append("DEFAULT_SEED must be a 64-bit unsigned integer.")
    if int(settings.workers) < 1:
        errors.append("WORKERS must be >= 1.")
    if int(settings.explosion_cap) < 1:
        errors.append("EXPLOSION_CAP must be >= 1.")

    eps = float(settings.rate_singularity_eps)
    if not isfinite(eps) or not 0.0 < eps < 1e-2:
        errors.append("RATE_SINGULARITY_EPS must lie in (0, 0.01).")
    switch = float(settings.series_switch)
    if not isfinite(switch) or not 0.0 < switch < 1e-1:
        errors.append("SERIES_SWITCH must lie in (0, 0.1).")
    if int(settings.envelope_segments) < 1:
        errors.append("ENVELOPE_SEGMENTS must be >= 1.")
    if not isfinite(float(settings.envelope_safety)) or float(settings.envelope_safety) < 1.0:
        errors.append("ENVELOPE_SAFETY must be a finite value >= 1.")
    if int(settings.window_extension_cap) < 16:
        errors.append("WINDOW_EXTENSION_CAP must be >= 16.")
    tol = float(settings.certification_tol)
    if not isfinite(tol) or not 0.0 < tol < 1.0:
        errors.append("CERTIFICATION_TOL must lie in (0, 1).")

    if errors:
        raise ValueError("Invalid configuration:\n- " + "\n- ".join(errors))
    return settings


def load_settings() -> AppSettings:
    try:
        settings = AppSettings(
            log_level=app_config.LOG_LEVEL,
            log_verbose_events=app_config.LOG_VERBOSE_EVENTS,
            default_seed=app_config.DEFAULT_SEED,
            log_dir=getattr(app_config, "LOG_DIR", "logs"),
            output_dir=getattr(app_config, "OUTPUT_DIR", "results"),
            workers=getattr(app_config, "WORKERS", 1),
            explosion_cap=getattr(app_config, "EXPLOSION_CAP", 10_000_000),
            rate_singularity_eps=getattr(app_config, "RATE_SINGULARITY_EPS", 1e-6),
            series_switch=getattr(app_config, "SERIES_SWITCH", 1e-4),
            envelope_segments=getattr(app_config, "ENVELOPE_SEGMENTS", 32),
            envelope_safety=getattr(app_config, "ENVELOPE_SAFETY", 2.0),
            window_extension_cap=getattr(app_config, "WINDOW_EXTENSION_CAP", 100_000),
            certification_tol=getattr(app_config, "CERTIFICATION_TOL", 1e-9),
        )
    except AttributeError as exc:
        attr_match = re.search(r"has no attribute '([^']+)'", str(exc))
        missing_attr = attr_match.group(1) if attr_match else str(exc)
        raise ValueError(f"Invalid configuration:\n- Missing required config setting: {missing_attr}") from exc
    return validate_settings(settings)


def validate_experiment_config(config: ExperimentConfig) -> ExperimentConfig:
    """Check every field against its documented range; returns the resolved config."""
    config = config.resolved()
    errors = []
    kind = config.kind

    if any(int(n) < 1 for n in config.n_values):
        errors.append("n must be >= 1")
    if kind is ExperimentKind.SAMPLE:
        if any(n > ENUMERATION_MAX_N for n in config.n_values):
            errors.append(f"n must be <= {ENUMERATION_MAX_N} for sample (exact oracle by enumeration)")
        if any(not isfinite(q) or q < 0 for q in config.q_values):
            errors.append("q must be a finite value >= 0")
        if config.sampler is SamplerKind.PROCESS and any(q <= 0 for q in config.q_values):
            errors.append("q must be > 0 for the process sampler")
    if config.T is None or not isfinite(config.T) or config.T <= 0:
        if kind is not ExperimentKind.SAMPLE and kind is not ExperimentKind.ORACLE_SUITE:
            errors.append("T must be > 0")
    elif kind in LOCAL_KINDS and config.T >= 1:
        errors.append("T must be < 1 for local kinds")
    if not 0.0 < config.alpha < 0.5:
        errors.append("alpha must lie in (0, 1/2)")
    if config.replicas < 1:
        errors.append("replicas must be >= 1")
    if config.t_grid_size < 1:
        errors.append("t_grid_size must be >= 1")
    if config.window_lo > config.window_hi:
        errors.append("window_lo must be <= window_hi")
    if kind is ExperimentKind.LOCAL_VERIFY and config.window_lo > 0:
        errors.append("window_lo must be <= 0 for local-verify")
    if config.k_n_rule != "half":
        try:
            if int(config.k_n_rule) < 0:
                errors.append("k_n_rule must be 'half' or an integer >= 0")
        except (TypeError, ValueError):
            errors.append("k_n_rule must be 'half' or an integer >= 0")
    if config.grid_k < 1:
        errors.append("grid_k must be >= 1")
    if not isfinite(config.beta):
        errors.append("beta must be finite")
    bad = [i for i in config.trajectory_elements if not 1 <= i <= min(config.n_values or (config.n,))]
    if bad:
        errors.append(f"trajectory_elements must lie in 1..n, got {bad}")
    if config.trajectory_elements and len(config.n_values) > 1:
        errors.append("trajectory_elements needs a single n")
    if not 0 <= int(config.master_seed) < SEED_LIMIT:
        errors.append("master_seed must be a 64-bit unsigned integer")
    if config.workers < 1:
        errors.append("workers must be >= 1")
    if not 0.0 < config.scale <= 1.0:
        errors.append("scale must lie in (0, 1]")
    if not 1 <= config.restriction_m <= ENUMERATION_MAX_N:
        errors.append(f"restriction_m must lie in 1..{ENUMERATION_MAX_N}")

    if errors:
        raise ValueError("Invalid experiment config:\n- " + "\n- ".join(errors))
    return config


def load_experiment_config(path: str | Path | None, overrides: dict, defaults: dict | None = None) -> ExperimentConfig:
    """Settings defaults, then the JSON file (if any), then command-line overrides; validated."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValueError(f"Invalid experiment config:\n- Cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"Invalid experiment config:\n- {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"Invalid experiment config:\n- {path} must hold a JSON object")
    data = {**(defaults or {}), **data}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return validate_experiment_config(ExperimentConfig.from_dict(data))
