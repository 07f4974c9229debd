"""Binary and one-vs-one multiclass linear classifiers trained by evolutionary
search over projection directions."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from .data import LabeledDataset, Normalizer, fit_normalizer
from .discriminator import ThresholdRule, optimal_margin_threshold
from .objective import evaluate_projection
from .optimizer import EAConfig, maximize

MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """A model file could not be parsed or has an unsupported version."""


@dataclass(frozen=True)
class LinearModel:
    """Separating hyperplane ``s * normalize(x) . omega - t_prime = 0``.

    `class_ids` maps the -1 side to ``class_ids[0]`` and the +1 side to
    ``class_ids[1]``.
    """

    omega: np.ndarray
    rule: ThresholdRule
    normalizer: Normalizer
    train_performance: float
    alpha: float = 0.0
    fitness: float = float("nan")
    evaluations: int = 0
    class_ids: Tuple[int, int] = (-1, 1)

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def margin(self) -> float:
        return self.rule.r

    def project(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.shape[-1] != self.n:
            raise ValueError(f"model expects {self.n} features, got {features.shape[-1]}")
        return self.normalizer.transform(features) @ self.omega

    def decision_values(self, features) -> np.ndarray:
        return self.rule.s * self.project(features) - self.rule.t_prime

    def predict(self, features) -> np.ndarray:
        """Signed labels: -1 where the decision value is <= 0."""
        return np.where(self.decision_values(features) <= 0, -1, 1)

    def predict_labels(self, features) -> np.ndarray:
        return np.where(self.predict(features) == -1, self.class_ids[0], self.class_ids[1])


@dataclass(frozen=True)
class OvoModel:
    class_ids: Tuple[int, ...]
    pair_models: Dict[Tuple[int, int], LinearModel]
    normalizer: Normalizer

    @property
    def n(self) -> int:
        return self.normalizer.means.shape[0]

    def votes(self, features) -> np.ndarray:
        """(rows, classes) vote counts; every row sums to c(c-1)/2."""
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.n:
            raise ValueError(f"model expects {self.n} features, got {features.shape[1]}")
        index = {c: k for k, c in enumerate(self.class_ids)}
        counts = np.zeros((features.shape[0], len(self.class_ids)), dtype=int)
        for (ci, cj), model in self.pair_models.items():
            plus = model.predict(features) == 1
            counts[:, index[cj]] += plus
            counts[:, index[ci]] += ~plus
        return counts

    def predict(self, features) -> np.ndarray:
        # argmax returns the first maximum: ties go to the lowest class index
        winners = np.argmax(self.votes(features), axis=1)
        return np.asarray(self.class_ids)[winners]


def signed_labels(data: LabeledDataset) -> np.ndarray:
    if len(data.class_ids) != 2:
        raise ValueError(f"binary training needs exactly 2 classes, got {len(data.class_ids)}")
    return np.where(data.labels == data.class_ids[0], -1, 1)


def _fit_direction(features, y, normalizer, config: EAConfig, class_ids, workers=1) -> LinearModel:
    xn = normalizer.transform(features)
    alpha = config.alpha

    def objective(omega):
        return evaluate_projection(xn, y, omega, alpha).z

    trace = maximize(objective, xn.shape[1], config, workers=workers)
    omega = trace.best_omega
    rule = optimal_margin_threshold(xn @ omega, y)
    return LinearModel(
        omega=omega,
        rule=rule,
        normalizer=normalizer,
        train_performance=rule.p,
        alpha=alpha,
        fitness=trace.best_fitness,
        evaluations=trace.evaluations,
        class_ids=tuple(int(c) for c in class_ids),
    )


def train_binary(train: LabeledDataset, config: EAConfig, workers: int = 1) -> LinearModel:
    """Fit a normalizer on `train`, search the best direction, and return the model.

    The first class id (-1 for signed data) is the negative side.
    """
    y = signed_labels(train)
    return _fit_direction(train.features, y, fit_normalizer(train), config, train.class_ids, workers)


def train_multiclass(train: LabeledDataset, config: EAConfig, workers: int = 1) -> OvoModel:
    """One binary model per class pair, sharing one normalizer.

    Pair k (in lexicographic order of class indices) uses seed
    ``config.seed + k``, so a two-class problem reproduces `train_binary`.
    Pairs are independent and may be fitted concurrently with `workers`.
    """
    counts = train.class_counts()
    if len(counts) < 2:
        raise ValueError("need at least 2 classes")
    small = [c for c, k in counts.items() if k < 2]
    if small:
        raise ValueError(f"classes {small} have fewer than 2 instances")
    normalizer = fit_normalizer(train)
    pairs = list(combinations(train.class_ids, 2))

    def fit(k):
        ci, cj = pairs[k]
        rows = (train.labels == ci) | (train.labels == cj)
        y = np.where(train.labels[rows] == ci, -1, 1)
        pair_config = config.replace(seed=config.seed + k)
        return _fit_direction(train.features[rows], y, normalizer, pair_config, (ci, cj))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            models = list(pool.map(fit, range(len(pairs))))
    else:
        models = [fit(k) for k in range(len(pairs))]
    return OvoModel(tuple(train.class_ids), dict(zip(pairs, models)), normalizer)


def decision_value(model: LinearModel, x) -> float:
    return float(model.decision_values(np.atleast_2d(x))[0])


def predict_binary(model: LinearModel, x) -> int:
    return -1 if decision_value(model, x) <= 0 else 1


def predict_multiclass(model: OvoModel, x) -> int:
    return int(model.predict(np.atleast_2d(x))[0])


# ---------------------------------------------------------------------------
# Persistence


def _model_fields(model: LinearModel) -> dict:
    return {
        "pair": list(model.class_ids),
        "omega": model.omega.tolist(),
        "s": model.rule.s,
        "t_prime": model.rule.t_prime,
        "margin": model.rule.r,
        "train_performance": model.train_performance,
        "alpha": model.alpha,
        "fitness": model.fitness,
        "evaluations": model.evaluations,
    }


def model_to_dict(model: Union[LinearModel, OvoModel]) -> dict:
    if isinstance(model, LinearModel):
        kind, class_ids, members = "binary", model.class_ids, [model]
    else:
        kind, class_ids, members = "ovo", model.class_ids, list(model.pair_models.values())
    return {
        "version": MODEL_FORMAT_VERSION,
        "kind": kind,
        "class_ids": list(class_ids),
        "normalizer": {
            "means": model.normalizer.means.tolist(),
            "stds": model.normalizer.stds.tolist(),
        },
        "models": [_model_fields(m) for m in members],
    }


def model_from_dict(doc: dict) -> Union[LinearModel, OvoModel]:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version!r} (expected {MODEL_FORMAT_VERSION})"
        )
    try:
        kind = doc["kind"]
        class_ids = tuple(int(c) for c in doc["class_ids"])
        normalizer = Normalizer(doc["normalizer"]["means"], doc["normalizer"]["stds"])
        members = []
        for entry in doc["models"]:
            rule = ThresholdRule(
                t_prime=float(entry["t_prime"]),
                s=int(entry["s"]),
                p=float(entry["train_performance"]),
                r=float(entry["margin"]),
            )
            members.append(
                LinearModel(
                    omega=np.asarray(entry["omega"], dtype=float),
                    rule=rule,
                    normalizer=normalizer,
                    train_performance=float(entry["train_performance"]),
                    alpha=float(entry["alpha"]),
                    fitness=float(entry.get("fitness", float("nan"))),
                    evaluations=int(entry.get("evaluations", 0)),
                    class_ids=tuple(int(c) for c in entry["pair"]),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    if kind == "binary":
        if len(members) != 1:
            raise ModelFormatError("a binary model holds exactly one linear model")
        return members[0]
    if kind == "ovo":
        expected = len(class_ids) * (len(class_ids) - 1) // 2
        if len(members) != expected:
            raise ModelFormatError(f"ovo model with {len(class_ids)} classes needs {expected} pair models")
        return OvoModel(class_ids, {m.class_ids: m for m in members}, normalizer)
    raise ModelFormatError(f"unknown model kind {kind!r}")


def save_model(model: Union[LinearModel, OvoModel], path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> Union[LinearModel, OvoModel]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"cannot parse model file {path}: {exc}") from exc
    return model_from_dict(doc)
