"""Unsupervised skill discovery guided by a learned linear state projection."""

from ._core import (
    ArtifactError,
    Config,
    ConfigError,
    FiveNumberSummary,
    LinearProjection,
    MazeSession,
    NumericalError,
    Standardizer,
    ValidationError,
    collect_dataset,
    displacement_stats,
    fit_encoder,
    mi_lower_bound_check,
    train_reference,
    train_skills,
)

__all__ = [
    "ArtifactError",
    "Config",
    "ConfigError",
    "FiveNumberSummary",
    "LinearProjection",
    "MazeSession",
    "NumericalError",
    "Standardizer",
    "ValidationError",
    "collect_dataset",
    "displacement_stats",
    "fit_encoder",
    "mi_lower_bound_check",
    "train_reference",
    "train_skills",
]
