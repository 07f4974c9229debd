"""Fitness of a candidate projection direction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discriminator import ThresholdRule, optimal_margin_threshold

SEPARABLE_TOL = 1e-12


@dataclass(frozen=True)
class FitnessReport:
    z: float
    rule: ThresholdRule
    l1_penalty: float


def fitness_from_rule(rule: ThresholdRule, l1_penalty: float = 0.0) -> float:
    """Balanced accuracy below 1; once separable, 1 + margin. Minus the L1 term."""
    p = 1.0 if rule.p >= 1.0 - SEPARABLE_TOL else rule.p
    base = p if p < 1.0 else 1.0 + rule.r
    return base - l1_penalty


def evaluate_projection(features: np.ndarray, labels: np.ndarray, omega, alpha: float = 0.0) -> FitnessReport:
    """Fitness of `omega` on raw arrays (labels in {-1, +1}).

    This is the hot path of training; it skips dataset validation.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (features.shape[1],):
        raise ValueError(f"omega must have {features.shape[1]} entries, got {omega.shape}")
    if not np.any(omega):
        raise ValueError("omega must not be the zero vector")
    rule = optimal_margin_threshold(features @ omega, labels)
    penalty = alpha * float(np.abs(omega).sum())
    return FitnessReport(fitness_from_rule(rule, penalty), rule, penalty)


def evaluate(data, omega, alpha: float = 0.0) -> FitnessReport:
    """Fitness of `omega` on a two-class LabeledDataset with labels -1/+1."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if set(data.class_ids) != {-1, 1}:
        raise ValueError(f"expected classes -1 and +1, got {data.class_ids}")
    return evaluate_projection(data.features, data.labels, omega, alpha)
