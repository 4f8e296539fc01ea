#!/usr/bin/env python3
"""
Configuration for the security allocation toolkit.

Defaults come from config/settings.yaml; an optional user file (JSON or YAML)
and SECALLOC_* environment variables override them, and the command line
overrides everything.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from secalloc.errors import SchemaError

load_dotenv()
logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_PATH = Path(__file__).resolve().parent.parent / "config" / "settings.yaml"


class NetworkDefaults(BaseModel):
    theta_default: float = Field(0.5, gt=0)
    delta_default: float = Field(1.0, gt=0)


class GenerationSettings(BaseModel):
    q: float = Field(0.5, gt=0, le=1)
    max_attempts: int = Field(1000, ge=1)


class GameSettings(BaseModel):
    budget: int = Field(3, ge=1)
    kappa: float = Field(5.0, ge=0)
    belief: str = "uniform"
    margin: float = Field(0.1, gt=0)


class DynamicsSettings(BaseModel):
    markov_rtol: float = Field(1e-9, gt=0)
    zero_residual_tol: float = Field(1e-6, gt=0)
    faddeev_max_order: int = Field(20, ge=1)


class ImpactSettings(BaseModel):
    """Tolerances and grids of the semi-infinite LP solver."""

    eps_cert: float = Field(1e-9, gt=0)
    eps_gamma: float = Field(1e-9, gt=0)
    cut_tol: float = Field(1e-9, gt=0)
    max_cuts: int = Field(200, ge=1)
    grid_points: int = Field(64, ge=2)
    grid_min: float = Field(1e-6, gt=0)
    grid_max: float = Field(1e6, gt=0)
    search_points: int = Field(768, ge=16)
    sturm_max_degree: int = Field(16, ge=1)
    poly_max_degree: int = Field(48, ge=1)

    @field_validator("grid_max")
    @classmethod
    def _grid_ordered(cls, value: float, info) -> float:
        if value <= info.data.get("grid_min", 0.0):
            raise ValueError("grid_max must exceed grid_min")
        return value


class OracleSettings(BaseModel):
    sweep_points: int = Field(100_000, ge=100)
    sweep_min: float = Field(1e-6, gt=0)
    sweep_max: float = Field(1e6, gt=0)
    horizon_factor: float = Field(50.0, gt=0)
    output_steps: int = Field(2000, ge=10)
    hold: int = Field(5, ge=1)
    step_guard: float = Field(0.1, gt=0)


class SimulationSettings(BaseModel):
    duration: float = Field(200.0, gt=0)
    step_guard: float = Field(0.1, gt=0)
    headroom: float = Field(1e-3, gt=0, lt=1)


class ProcessingSettings(BaseModel):
    workers: int = Field(1, ge=1)
    seed: int = 1
    out_dir: str = "results"


class Settings(BaseModel):
    network: NetworkDefaults = NetworkDefaults()
    generation: GenerationSettings = GenerationSettings()
    game: GameSettings = GameSettings()
    dynamics: DynamicsSettings = DynamicsSettings()
    impact: ImpactSettings = ImpactSettings()
    oracle: OracleSettings = OracleSettings()
    simulation: SimulationSettings = SimulationSettings()
    processing: ProcessingSettings = ProcessingSettings()


class RunConfig(BaseModel):
    """Flattened view used by the command-line surface."""

    network_path: Optional[str] = None
    budget: int = Field(3, ge=1)
    kappa: float = Field(5.0, ge=0)
    belief: str = "uniform"
    margin: float = Field(0.1, gt=0)
    workers: int = Field(1, ge=1)
    seed: int = 1
    out_dir: str = "results"
    tune: Optional[bool] = None
    verify: bool = False
    require_bounded: bool = False
    settings: Settings = Settings()


def _read_document(path: Path) -> Dict[str, Any]:
    """Read a JSON or YAML mapping from disk."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise SchemaError(f"Cannot read config file {path}: {e}") from e

    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise SchemaError(f"Config file {path} is not valid: {e}") from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise SchemaError(f"Config file {path} must contain a mapping")
    return data


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _env_overrides() -> Dict[str, Any]:
    processing = {}
    if os.getenv("SECALLOC_WORKERS"):
        processing["workers"] = int(os.getenv("SECALLOC_WORKERS"))
    if os.getenv("SECALLOC_SEED"):
        processing["seed"] = int(os.getenv("SECALLOC_SEED"))
    if os.getenv("SECALLOC_OUT"):
        processing["out_dir"] = os.getenv("SECALLOC_OUT")
    return {"processing": processing} if processing else {}


def load_settings(path: Optional[Path] = None,
                  overrides: Optional[Dict[str, Any]] = None) -> Settings:
    """Load settings: YAML defaults < user file < environment < overrides."""
    data: Dict[str, Any] = {}
    if DEFAULT_SETTINGS_PATH.exists():
        data = _read_document(DEFAULT_SETTINGS_PATH)
    if path is not None:
        data = _merge(data, _nest(_read_document(Path(path)))[0])
    data = _merge(data, _env_overrides())
    if overrides:
        data = _merge(data, overrides)

    try:
        return Settings.model_validate(data)
    except ValidationError as e:
        raise SchemaError(f"Invalid settings: {e}") from e


# Flat flag names accepted in user config files and their home in Settings.
FLAG_SECTIONS = {
    "budget": ("game", "budget"),
    "kappa": ("game", "kappa"),
    "belief": ("game", "belief"),
    "margin": ("game", "margin"),
    "q": ("generation", "q"),
    "workers": ("processing", "workers"),
    "seed": ("processing", "seed"),
    "out": ("processing", "out_dir"),
    "out_dir": ("processing", "out_dir"),
}


def _nest(flat: Dict[str, Any]) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """Split flag-style keys into (nested settings, remaining extras)."""
    nested: Dict[str, Any] = {}
    extras: Dict[str, Any] = {}
    for key, value in flat.items():
        if key in FLAG_SECTIONS:
            section, field = FLAG_SECTIONS[key]
            nested.setdefault(section, {})[field] = value
        elif key in Settings.model_fields and isinstance(value, dict):
            nested = _merge(nested, {key: value})
        else:
            extras[key] = value
    return nested, extras


def build_run_config(config_path: Optional[str] = None,
                     flags: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Assemble a RunConfig: defaults < config file < environment < flags.

    The user config file speaks the same vocabulary as the command-line
    flags (``{"budget": 2, "kappa": 5, "workers": 4}``); nested sections such
    as ``impact`` are accepted too.
    """
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    file_extras: Dict[str, Any] = {}
    if config_path:
        _, file_extras = _nest(_read_document(Path(config_path)))
    flag_nested, flag_extras = _nest(flags)
    extras = {**file_extras, **flag_extras}

    settings = load_settings(Path(config_path) if config_path else None, flag_nested)
    try:
        return RunConfig(
            network_path=extras.get("network"),
            budget=settings.game.budget,
            kappa=settings.game.kappa,
            belief=settings.game.belief,
            margin=settings.game.margin,
            workers=settings.processing.workers,
            seed=settings.processing.seed,
            out_dir=settings.processing.out_dir,
            tune=None if extras.get("tune") is None else bool(extras["tune"]),
            verify=bool(extras.get("verify", False)),
            require_bounded=bool(extras.get("require_bounded", False)),
            settings=settings,
        )
    except ValidationError as e:
        raise SchemaError(f"Invalid configuration: {e}") from e
