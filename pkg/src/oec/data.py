"""Datasets: CSV ingestion, z-score normalization, stratified splits,
noise injection and the synthetic scenario generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np


class DataError(ValueError):
    """Raised for malformed or unusable datasets."""


@dataclass(frozen=True)
class LabeledDataset:
    """An m x n feature matrix with one integer class label per row."""

    features: np.ndarray
    labels: np.ndarray
    class_ids: tuple = field(default=())

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DataError(
                f"expected {features.shape[0]} labels, got shape {labels.shape}"
            )
        if features.shape[0] < 2:
            raise DataError("a dataset needs at least 2 instances")
        if features.shape[1] < 1:
            raise DataError("a dataset needs at least 1 feature")
        if not np.all(np.isfinite(features)):
            row, col = np.argwhere(~np.isfinite(features))[0]
            raise DataError(f"non-finite feature value at row {row}, column {col}")
        labels = labels.astype(int)
        present = tuple(int(c) for c in np.unique(labels))
        class_ids = tuple(int(c) for c in self.class_ids) or present
        if set(present) != set(class_ids):
            raise DataError(
                f"class_ids {class_ids} do not match labels present {present}"
            )
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_ids", class_ids)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict:
        return {c: int(np.sum(self.labels == c)) for c in self.class_ids}

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows)
        return LabeledDataset(self.features[rows], self.labels[rows])

    def with_features(self, features) -> "LabeledDataset":
        return LabeledDataset(features, self.labels, self.class_ids)


# ---------------------------------------------------------------------------
# CSV


def read_csv_table(path) -> tuple[list, list]:
    """Return (header, rows) of a comma separated file with a header row."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(
                f"row {i + 1} has {len(row)} cells, header has {len(header)}"
            )
    return header, rows


def resolve_column(header: Sequence[str], column: Union[str, int]) -> int:
    if isinstance(column, int):
        if not -len(header) <= column < len(header):
            raise DataError(f"label column index {column} out of range")
        return column % len(header)
    if column in header:
        return header.index(column)
    if column.lstrip("-").isdigit():
        return resolve_column(header, int(column))
    raise DataError(f"label column {column!r} not found in header {header}")


def parse_features(header, rows, skip: Optional[int] = None) -> np.ndarray:
    """Parse every column except `skip` as finite floats."""
    cols = [j for j in range(len(header)) if j != skip]
    out = np.empty((len(rows), len(cols)))
    for i, row in enumerate(rows):
        for k, j in enumerate(cols):
            cell = row[j].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"non-numeric value {cell!r} at row {i + 1}, column {header[j]!r}"
                ) from None
            if not math.isfinite(value):
                raise DataError(
                    f"non-finite value {cell!r} at row {i + 1}, column {header[j]!r}"
                )
            out[i, k] = value
    return out


def _parse_labels(raw: Sequence[str]) -> np.ndarray:
    try:
        return np.array([int(v) for v in raw], dtype=int)
    except ValueError:
        pass
    codes: dict = {}
    return np.array([codes.setdefault(v, len(codes)) for v in raw], dtype=int)


def load_csv(path, label_column: Union[str, int] = "label") -> LabeledDataset:
    """Load a dataset; textual labels are enumerated in first-appearance order."""
    header, rows = read_csv_table(path)
    j = resolve_column(header, label_column)
    if len(header) < 2:
        raise DataError("need at least one feature column besides the label")
    features = parse_features(header, rows, skip=j)
    labels = _parse_labels([row[j].strip() for row in rows])
    if len(np.unique(labels)) < 2:
        raise DataError(f"{path} has fewer than 2 classes")
    return LabeledDataset(features, labels)


def save_csv(data: LabeledDataset, path) -> None:
    """Write columns f1..fn,label."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{j + 1}" for j in range(data.n)] + ["label"])
        for x, y in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


# ---------------------------------------------------------------------------
# Normalization


@dataclass(frozen=True)
class Normalizer:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "stds", np.asarray(self.stds, dtype=float))
        if self.means.shape != self.stds.shape or self.means.ndim != 1:
            raise DataError("means and stds must be vectors of equal length")
        if np.any(self.stds <= 0):
            raise DataError("stds must be positive")

    def transform(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.shape[-1] != self.means.shape[0]:
            raise DataError(
                f"expected {self.means.shape[0]} features, got {features.shape[-1]}"
            )
        return (features - self.means) / self.stds

    def inverse(self, features) -> np.ndarray:
        return np.asarray(features, dtype=float) * self.stds + self.means


def fit_normalizer(train: LabeledDataset) -> Normalizer:
    """Per-column mean and population std; constant columns keep std 1."""
    means = train.features.mean(axis=0)
    stds = train.features.std(axis=0)
    constant = np.ptp(train.features, axis=0) == 0
    means[constant] = train.features[0, constant]
    stds[constant | (stds == 0)] = 1.0
    return Normalizer(means, stds)


def apply_normalizer(norm: Normalizer, data: LabeledDataset) -> LabeledDataset:
    return data.with_features(norm.transform(data.features))


# ---------------------------------------------------------------------------
# Splitting and noise


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    per_class_fractions: Optional[Mapping[int, float]] = None
    seed: int = 0

    def __post_init__(self):
        fractions = [self.train_fraction, *(self.per_class_fractions or {}).values()]
        for f in fractions:
            if not 0 < f < 1:
                raise DataError(f"train fractions must lie in (0, 1), got {f}")

    def fraction_for(self, class_id: int) -> float:
        if self.per_class_fractions and class_id in self.per_class_fractions:
            return self.per_class_fractions[class_id]
        return self.train_fraction


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(data: LabeledDataset, spec: SplitSpec):
    """Split each class separately, returning (train, test).

    Class c contributes round_half_up(fraction * m_c) rows to train, clamped
    to [1, m_c - 1]. Rows keep their original relative order.
    """
    rng = np.random.default_rng(spec.seed)
    train_rows = []
    for c in data.class_ids:
        rows = np.flatnonzero(data.labels == c)
        if len(rows) < 2:
            raise DataError(f"class {c} has {len(rows)} instance; cannot split")
        k = _round_half_up(spec.fraction_for(c) * len(rows))
        k = min(max(k, 1), len(rows) - 1)
        train_rows.append(rng.choice(rows, size=k, replace=False))
    mask = np.zeros(data.m, dtype=bool)
    mask[np.concatenate(train_rows)] = True
    return data.subset(np.flatnonzero(mask)), data.subset(np.flatnonzero(~mask))


def noise_bounds(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = features.min(axis=0)
    hi = features.max(axis=0)
    spread = hi - lo
    return lo - 0.5 * spread, hi + 0.5 * spread


def inject_noise(data: LabeledDataset, target_class: int, fraction: float, seed=0):
    """Replace floor(fraction * m_target) rows of `target_class` by uniform
    draws over each feature's range widened by half its span on both sides."""
    if not 0 <= fraction <= 1:
        raise DataError(f"noise fraction must lie in [0, 1], got {fraction}")
    if target_class not in data.class_ids:
        raise DataError(f"unknown class {target_class}")
    rng = np.random.default_rng(seed)
    rows = np.flatnonzero(data.labels == target_class)
    k = int(math.floor(fraction * len(rows) + 1e-9))
    if k == 0:
        return data
    chosen = np.sort(rng.choice(rows, size=k, replace=False))
    lo, hi = noise_bounds(data.features)
    features = data.features.copy()
    features[chosen] = rng.uniform(lo, hi, size=(k, data.n))
    return data.with_features(features)


# ---------------------------------------------------------------------------
# Synthetic scenarios

# Instances are row vectors: x = mu + z @ A with z standard normal.
POSITIVE_FACTOR = np.array([[0.87, -0.5], [1.5, 2.6]])
NEGATIVE_FACTOR = np.array([[2.83, -2.83], [0.71, 0.71]])
OUTLIER_FACTOR = np.array([[8.66, -5.0], [15.0, 25.98]])
POSITIVE_MEAN = np.array([3.0, 6.0])
OVERLAP_POSITIVE_MEAN = np.array([-3.0, -6.0])
NEGATIVE_MEAN = np.array([-9.0, -3.0])
OUTLIER_MEAN = np.array([50.0, 50.0])

PRESETS = ("two_gaussians", "overlap", "outliers")


def sample_gaussian(rng, mean, factor, size) -> np.ndarray:
    z = rng.standard_normal((size, len(mean)))
    return np.asarray(mean) + z @ np.asarray(factor)


def generate_synthetic(
    preset: str, n_per_class: int, seed=0, n_outliers: Optional[int] = None
) -> LabeledDataset:
    """Two-class 2-D scenarios; rows are class -1 first, then class +1.

    ``outliers`` appends `n_outliers` extra class +1 rows (default
    n_per_class // 10, at least 1) drawn around (50, 50).
    """
    if preset not in PRESETS:
        raise DataError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    if n_per_class < 1:
        raise DataError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    pos_mean = OVERLAP_POSITIVE_MEAN if preset == "overlap" else POSITIVE_MEAN
    neg = sample_gaussian(rng, NEGATIVE_MEAN, NEGATIVE_FACTOR, n_per_class)
    pos = sample_gaussian(rng, pos_mean, POSITIVE_FACTOR, n_per_class)
    parts = [neg, pos]
    labels = [-np.ones(n_per_class, dtype=int), np.ones(n_per_class, dtype=int)]
    if preset == "outliers":
        k = max(1, n_per_class // 10) if n_outliers is None else n_outliers
        parts.append(sample_gaussian(rng, OUTLIER_MEAN, OUTLIER_FACTOR, k))
        labels.append(np.ones(k, dtype=int))
    return LabeledDataset(np.vstack(parts), np.concatenate(labels))


def gaussian_blobs(centers, n_per_class: int, scale: float = 1.0, seed=0) -> LabeledDataset:
    """Isotropic blobs labelled 0..c-1, used for multiclass scenarios."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=float)
    feats = [c + scale * rng.standard_normal((n_per_class, centers.shape[1])) for c in centers]
    labels = np.repeat(np.arange(len(centers)), n_per_class)
    return LabeledDataset(np.vstack(feats), labels)
