"""Evaluation measures, the repeated-split experiment runner and Welch's t-test."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .classifier import LinearModel, OvoModel, train_binary, train_multiclass
from .data import LabeledDataset, SplitSpec, inject_noise, stratified_split
from .optimizer import EAConfig

METRICS = ("train_auc", "test_auc", "train_bacc", "test_bacc", "fit_seconds")
RESULT_COLUMNS = ("run", "seed") + METRICS


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    # group boundaries of equal values
    starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
    ends = np.r_[starts[1:], len(values)]
    avg = (starts + ends + 1) / 2.0  # 1-based average rank of each tie group
    ranks = np.empty(len(values))
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def auc_roc(scores, labels) -> float:
    """Mann-Whitney AUC with midranks; positives are label +1."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    u = _midranks(scores)[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve(scores, labels):
    """(fpr, tpr) arrays, one point per distinct score plus the origin."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = (labels[order] == 1).astype(float)
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), len(s) - 1]
    tp = np.cumsum(pos)[last]
    fp = (last + 1) - tp
    tpr = np.r_[0.0, tp / pos.sum()]
    fpr = np.r_[0.0, fp / (len(s) - pos.sum())]
    return fpr, tpr


def balanced_accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    classes = np.unique(truth)
    if classes.size < 2:
        raise ValueError("balanced accuracy needs at least 2 classes in the truth labels")
    return float(np.mean([np.mean(pred[truth == c] == c) for c in classes]))


def confusion_counts(pred, truth, class_ids=None) -> np.ndarray:
    """Matrix[i, j] = number of instances of class i predicted as class j."""
    class_ids = list(np.unique(truth)) if class_ids is None else list(class_ids)
    index = {c: k for k, c in enumerate(class_ids)}
    out = np.zeros((len(class_ids), len(class_ids)), dtype=int)
    for p, t in zip(np.asarray(pred), np.asarray(truth)):
        out[index[t], index[p]] += 1
    return out


def pairwise_auc(model: OvoModel, data: LabeledDataset) -> float:
    """Mean over class pairs of the pair model's AUC on that pair's rows."""
    aucs = []
    for (ci, cj), pair in model.pair_models.items():
        rows = (data.labels == ci) | (data.labels == cj)
        y = np.where(data.labels[rows] == ci, -1, 1)
        if len(np.unique(y)) < 2:
            continue
        aucs.append(auc_roc(pair.decision_values(data.features[rows]), y))
    return float(np.mean(aucs))


def model_scores(model, data: LabeledDataset) -> tuple:
    """(auc, balanced accuracy) of a trained model on `data`."""
    if isinstance(model, LinearModel):
        y = np.where(data.labels == model.class_ids[0], -1, 1)
        auc = auc_roc(model.decision_values(data.features), y)
        return auc, balanced_accuracy(model.predict(data.features), y)
    return pairwise_auc(model, data), balanced_accuracy(model.predict(data.features), data.labels)


# ---------------------------------------------------------------------------
# Experiments


@dataclass
class RunResult:
    train_auc: float
    test_auc: float
    train_bacc: float
    test_bacc: float
    fit_seconds: float
    seed: int
    weights: List[np.ndarray] = field(default_factory=list, repr=False)
    test_scores: Optional[np.ndarray] = field(default=None, repr=False)
    test_labels: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class ExperimentSummary:
    runs: List[RunResult]

    @property
    def run_count(self) -> int:
        return len(self.runs)

    def values(self, metric: str) -> np.ndarray:
        if metric not in METRICS:
            raise KeyError(f"unknown metric {metric!r}")
        return np.array([getattr(r, metric) for r in self.runs])

    def mean(self, metric: str) -> float:
        return float(self.values(metric).mean())

    def std(self, metric: str) -> float:
        v = self.values(metric)
        return float(v.std(ddof=1)) if len(v) > 1 else 0.0

    def to_rows(self) -> list:
        return [
            [k, r.seed, r.train_auc, r.test_auc, r.train_bacc, r.test_bacc, r.fit_seconds]
            for k, r in enumerate(self.runs)
        ]

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULT_COLUMNS)
            for row in self.to_rows():
                writer.writerow([row[0], row[1], *(repr(float(v)) for v in row[2:])])


def derive_seeds(master_seed: int, count: int) -> list:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master_seed).spawn(count)]


def _single_run(data, spec, config, noise, noise_class, seed):
    train, test = stratified_split(
        data, SplitSpec(spec.train_fraction, spec.per_class_fractions, seed)
    )
    if noise > 0:
        train = inject_noise(train, noise_class, noise, seed=seed + 1)
    run_config = config.replace(seed=seed + 2)
    start = time.perf_counter()
    if len(data.class_ids) == 2:
        model = train_binary(train, run_config)
        weights = [model.omega]
    else:
        model = train_multiclass(train, run_config)
        weights = [m.omega for m in model.pair_models.values()]
    elapsed = time.perf_counter() - start
    train_auc, train_bacc = model_scores(model, train)
    test_auc, test_bacc = model_scores(model, test)
    result = RunResult(train_auc, test_auc, train_bacc, test_bacc, elapsed, seed, weights)
    if isinstance(model, LinearModel):
        result.test_scores = model.decision_values(test.features)
        result.test_labels = np.where(test.labels == model.class_ids[0], -1, 1)
    return result


def run_experiment(
    data: LabeledDataset,
    runs: int,
    spec: SplitSpec,
    config: EAConfig,
    noise: float = 0.0,
    noise_class: Optional[int] = None,
    workers: int = 1,
) -> ExperimentSummary:
    """Repeated stratified hold-out evaluation.

    Run k draws its seed from ``spec.seed`` and uses it for the split, for
    noise injection into the training slice (class `noise_class`, by default
    the last class id) and for the optimizer. Results are ordered by run
    index whatever `workers` is.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if not 0 <= noise <= 1:
        raise ValueError("noise fraction must lie in [0, 1]")
    target = data.class_ids[-1] if noise_class is None else noise_class
    seeds = derive_seeds(spec.seed, runs)

    def one(seed):
        return _single_run(data, spec, config, noise, target, seed)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    return ExperimentSummary(results)


# ---------------------------------------------------------------------------
# Welch's t-test

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 10000


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_continued_fraction(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_sided_pvalue(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def welch_t_test(a, b) -> tuple:
    """Welch's unequal-variance t statistic and two-sided p-value."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    diff = float(a.mean() - b.mean())
    se2 = va + vb
    if se2 == 0:
        if diff == 0:
            return 0.0, 1.0
        return math.copysign(math.inf, diff), 0.0
    t = diff / math.sqrt(se2)
    df = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return float(t), float(t_two_sided_pvalue(t, df))
