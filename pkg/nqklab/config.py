#!/usr/bin/env python3
"""
Configuration for the neural quantum kernel laboratory.

Presets live in plain dictionaries with small accessor functions; the
pydantic models below validate them and any file or CLI overrides.
"""

import json
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from nqklab.errors import ConfigError

load_dotenv()

# Simulator guard rails
SIM_CONFIG = {
    # Dense statevectors above this size are refused
    'max_qubits': 12,

    # Tolerances shared by the simulator and kernel checks
    'norm_tol': 1e-10,
    'psd_tol': 1e-8,
    'clamp_tol': 1e-12,
}

# QNN training presets
TRAIN_PRESETS = {
    # Converged training
    'optimal': {
        'learning_rate': 0.01,
        'epochs': 10,
        'batch_size': 32,
    },

    # Truncated training for the kernel robustness runs
    'suboptimal': {
        'learning_rate': 0.001,
        'epochs': 2,
        'batch_size': 32,
    },

    # Iterative qubit scaling runs
    'scaling': {
        'learning_rate': 0.005,
        'epochs': 10,
        'batch_size': 32,
    },

    # No optimisation at all: the kernel is built from the random initial angles
    'untrained': {
        'learning_rate': 0.0,
        'epochs': 0,
        'batch_size': None,
    },
}

# SVC rows found by the randomized hyperparameter search
SVC_TABLE_PRESETS = {
    'p2': {'p': 2, 'kernel': 'linear', 'C': 9.53, 'gamma': 0.016},
    'p3': {'p': 3, 'kernel': 'linear', 'C': 10.09, 'gamma': 0.079},
    'p45': {'p': 45, 'kernel': 'linear', 'C': 10.04, 'gamma': 0.085},
}

# Experiment defaults per family
EXPERIMENT_DEFAULTS = {
    'one_to_n': {
        'n_samples': 2000,
        'k_folds': 10,
        'n_qubits': 2,
        'n_layers': 3,
        'train_preset': 'optimal',
    },
    'n_to_n': {
        'n_samples': 700,
        'n_train': 500,
        'n_test': 200,
        'repeats': 5,
        'n_max': 8,
        'n_layers': 6,
        'train_preset': 'scaling',
    },
    'classical': {
        'n_samples': 2000,
        'k_folds': 10,
        'search_iters': 0,
    },
}

# Named dataset split sizes
SPLIT_SIZES = {
    'one_to_n': 2000,
    'n_to_n': 700,
}


def get_max_qubits() -> int:
    """Get the qubit cap, NQK_MAX_QUBITS overriding the default."""
    env = os.getenv('NQK_MAX_QUBITS')
    if env:
        try:
            return int(env)
        except ValueError as e:
            raise ConfigError(f"NQK_MAX_QUBITS must be an integer, got {env!r}") from e
    return SIM_CONFIG['max_qubits']


def get_train_preset(name: str) -> Dict[str, Any]:
    """Get a copy of a named training preset."""
    if name not in TRAIN_PRESETS:
        raise ConfigError(f"Unknown training preset {name!r}; choose from {sorted(TRAIN_PRESETS)}")
    return dict(TRAIN_PRESETS[name])


def get_svc_preset(name: str) -> Dict[str, Any]:
    """Get a copy of a named SVC hyperparameter row."""
    if name not in SVC_TABLE_PRESETS:
        raise ConfigError(f"Unknown SVC preset {name!r}; choose from {sorted(SVC_TABLE_PRESETS)}")
    return dict(SVC_TABLE_PRESETS[name])


def get_experiment_defaults(kind: str) -> Dict[str, Any]:
    return dict(EXPERIMENT_DEFAULTS.get(kind, {}))


def resolve_threads(cli_threads: Optional[int] = None) -> int:
    """NQK_THREADS overrides --threads; at least one worker."""
    env = os.getenv('NQK_THREADS')
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise ConfigError(f"NQK_THREADS must be an integer, got {env!r}") from e
    return max(1, cli_threads or 1)


class TrainConfig(BaseModel):
    """Optimiser settings for fidelity-cost training."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    learning_rate: float = Field(0.01, ge=0.0)
    epochs: int = Field(10, ge=0)
    # None trains on the full set every step
    batch_size: Optional[int] = Field(None, ge=1)
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    gradient_method: Literal['finite-diff', 'parameter-shift'] = 'finite-diff'
    fd_step: float = 1e-5

    @field_validator('batch_size', mode='before')
    @classmethod
    def _full_batch(cls, value):
        if isinstance(value, str) and value.lower() == 'full':
            return None
        return value

    @field_validator('adam_beta1', 'adam_beta2')
    @classmethod
    def _open_unit_interval(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError('Adam betas must lie strictly between 0 and 1')
        return value

    @field_validator('adam_eps', 'fd_step')
    @classmethod
    def _positive(cls, value: float) -> float:
        if value <= 0.0:
            raise ValueError('must be positive')
        return value

    @field_validator('seed')
    @classmethod
    def _seed_64bit(cls, value: int) -> int:
        if not 0 <= value < 2 ** 64:
            raise ValueError('seed must be a non-negative 64-bit integer')
        return value

    @classmethod
    def from_preset(cls, name: str, **overrides) -> 'TrainConfig':
        values = get_train_preset(name)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return build(cls, values)


class ExperimentConfig(BaseModel):
    """Everything needed to reproduce one experiment family run."""

    model_config = ConfigDict(extra='forbid')

    kind: Literal['one_to_n', 'n_to_n', 'classical']
    # "circles", "blobs", "moons" or a path to a feature CSV
    dataset: str = 'circles'
    n_samples: int = Field(2000, ge=2)
    noise: float = Field(0.1, ge=0.0)
    p: int = Field(2, ge=1)
    reduction: Literal['pca', 'tsvd'] = 'pca'
    n_qubits: int = Field(2, ge=1)
    n_max: int = Field(4, ge=1)
    n_layers: int = Field(3, ge=1)
    train_preset: Literal['optimal', 'suboptimal', 'scaling', 'untrained', 'custom'] = 'optimal'
    train: Optional[TrainConfig] = None
    k_folds: int = Field(10, ge=2)
    repeats: int = Field(5, ge=1)
    n_train: Optional[int] = Field(None, ge=1)
    n_test: Optional[int] = Field(None, ge=1)
    C: float = Field(1.0, gt=0.0)
    bias: Literal['none', 'fitted'] = 'none'
    svc_preset: Optional[str] = None
    search_iters: int = Field(0, ge=0)
    seed: int = 0
    threads: int = Field(1, ge=1)
    output_dir: str = './nqk_results'
    # splits.json written by `prep --split-unet-train`; the run keeps only the named subset's ids
    split_file: Optional[str] = None
    split_name: Optional[Literal['unet_train', 'unet_test', 'one_to_n', 'n_to_n']] = None

    @model_validator(mode='after')
    def _check(self) -> 'ExperimentConfig':
        if self.train_preset == 'custom' and self.train is None:
            raise ValueError("train_preset 'custom' needs an explicit 'train' block")
        if self.n_qubits > get_max_qubits() or self.n_max > get_max_qubits():
            raise ValueError(f'qubit count exceeds the cap of {get_max_qubits()}')
        if self.svc_preset is not None and self.svc_preset not in SVC_TABLE_PRESETS:
            raise ValueError(f'unknown svc_preset {self.svc_preset!r}')
        if self.split_name is not None and self.split_file is None:
            raise ValueError('split_name needs a split_file')
        return self

    def resolved_train(self) -> TrainConfig:
        """Expand the preset into a concrete TrainConfig seeded from the experiment seed."""
        if self.train_preset == 'custom':
            return self.train
        return TrainConfig.from_preset(self.train_preset, seed=self.seed)

    def resolved_split_name(self) -> str:
        """The subset to run on; n_to_n runs default to 'n_to_n', the k-fold families to 'one_to_n'."""
        if self.split_name is not None:
            return self.split_name
        return 'n_to_n' if self.kind == 'n_to_n' else 'one_to_n'


def build(model: type, values: Dict[str, Any]):
    """Validate values into a model, translating pydantic errors into ConfigError."""
    try:
        return model(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid {model.__name__}: {e}") from e


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load a JSON, YAML or TOML config file into a dictionary.

    Args:
        path: File path; the suffix selects the parser

    Returns:
        Parsed mapping
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    suffix = path.suffix.lower()
    try:
        if suffix == '.json':
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        elif suffix in ('.yaml', '.yml'):
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        elif suffix == '.toml':
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        else:
            raise ConfigError(f"Unsupported config format {suffix!r} (use .json, .yaml or .toml)")
    except (json.JSONDecodeError, yaml.YAMLError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"Could not parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a mapping")
    return data


def load_experiment_config(path: Optional[Union[str, Path]] = None, kind: Optional[str] = None,
                           **overrides) -> ExperimentConfig:
    """File values first, then family defaults for anything missing, then non-None overrides."""
    values: Dict[str, Any] = load_config_file(path) if path else {}
    kind = overrides.pop('kind', None) or kind or values.get('kind')
    if kind is None:
        raise ConfigError("Experiment kind is required")
    merged = get_experiment_defaults(kind)
    merged.update(values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    merged['kind'] = kind
    return build(ExperimentConfig, merged)
