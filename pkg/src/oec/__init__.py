"""Optimal-margin evolutionary linear classifier."""

__version__ = "0.1.0"

from .classifier import (
    LinearModel,
    OvoModel,
    load_model,
    predict_binary,
    predict_multiclass,
    save_model,
    train_binary,
    train_multiclass,
)
from .data import LabeledDataset, SplitSpec, generate_synthetic, load_csv
from .discriminator import ThresholdRule, optimal_margin_threshold
from .optimizer import EAConfig, default_config, maximize

__all__ = [
    "EAConfig",
    "LabeledDataset",
    "LinearModel",
    "OvoModel",
    "SplitSpec",
    "ThresholdRule",
    "default_config",
    "generate_synthetic",
    "load_csv",
    "load_model",
    "maximize",
    "optimal_margin_threshold",
    "predict_binary",
    "predict_multiclass",
    "save_model",
    "train_binary",
    "train_multiclass",
]
