"""Handwriting-difficulty (SEMS) score engine."""

from ._semsnet import (
    ConfigError,
    DataError,
    TrainingError,
    classify,
    crossval,
    default_config,
    generate,
    importance,
    predict,
    rmse,
    train,
)

__all__ = [
    "ConfigError",
    "DataError",
    "TrainingError",
    "classify",
    "crossval",
    "default_config",
    "generate",
    "importance",
    "predict",
    "rmse",
    "train",
]
