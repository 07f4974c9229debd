"""One-dimensional optimal-margin threshold discriminator.

The sweep scores every gap between consecutive distinct projected values by
the sum of per-class correct ratios (the complement of the prior-weighted 0-1
loss) and places the threshold half-way across the best gap. Scores are kept
as exact integers, ``correct_neg * k_pos + correct_pos * k_neg``, so ties are
resolved without rounding noise; the balanced accuracy is
``score / (2 * k_neg * k_pos)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class ThresholdRule:
    """Predicts -1 when ``s * x <= t_prime``, +1 otherwise.

    `p` is the balanced training accuracy in [0, 1] and `r` the half-width of
    the gap the threshold sits in.
    """

    t_prime: float
    s: int
    p: float
    r: float

    def predict(self, x):
        return np.where(self.s * np.asarray(x, dtype=float) <= self.t_prime, -1, 1)


@dataclass(frozen=True)
class LossSpec:
    kind: str = "zero_one_with_priors"
    n_neg: Optional[int] = None
    n_pos: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("zero_one", "zero_one_with_priors"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "zero_one_with_priors":
            if not self.n_neg or not self.n_pos or self.n_neg < 1 or self.n_pos < 1:
                raise ValueError("class counts must be >= 1 when priors are used")

    @classmethod
    def from_labels(cls, y) -> "LossSpec":
        y = np.asarray(y)
        return cls("zero_one_with_priors", int(np.sum(y == -1)), int(np.sum(y == 1)))


def loss_value(spec: LossSpec, y: int, decision: float) -> float:
    """0-1 loss of one instance; `decision` is y * (x . w + b)."""
    if y not in (-1, 1):
        raise ValueError(f"label must be -1 or +1, got {y}")
    if decision > 0:
        return 0.0
    if spec.kind == "zero_one":
        return 1.0
    return 1.0 / (spec.n_pos if y == 1 else spec.n_neg)


def total_loss(spec: LossSpec, features, labels, omega, b: float, alpha: float = 0.0) -> float:
    """Sum of per-instance losses plus ``alpha * ||omega||_1``."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    omega = np.asarray(omega, dtype=float)
    labels = np.asarray(labels)
    if features.shape[1] != omega.shape[0] or features.shape[0] != labels.shape[0]:
        raise ValueError("dimension mismatch between features, labels and omega")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    decisions = labels * (features @ omega + b)
    loss = sum(loss_value(spec, int(y), float(d)) for y, d in zip(labels, decisions))
    return loss + alpha * float(np.abs(omega).sum())


def _check_inputs(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y).ravel()
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 instances")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    k_neg = int(np.sum(y == -1))
    k_pos = x.shape[0] - k_neg
    if k_neg == 0 or k_pos == 0:
        raise ValueError("both classes must be present")
    return x, y, k_neg, k_pos


def _degenerate_rule(x) -> ThresholdRule:
    # every instance shares one coordinate; nothing can be separated
    return ThresholdRule(t_prime=float(x[0]), s=1, p=0.5, r=0.0)


def optimal_margin_threshold(x, y) -> ThresholdRule:
    """Best threshold on 1-D data, O(m log m).

    For gap i (between sorted x_i < x_{i+1}) the orientation s=+1 scores the
    -1 instances left of the gap plus the +1 instances right of it; s=-1 the
    reverse. The first strictly best (gap, orientation) in sweep order wins,
    with s=+1 examined before s=-1 at each gap.
    """
    x, y, k_neg, k_pos = _check_inputs(x, y)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    gaps = np.flatnonzero(xs[1:] != xs[:-1])
    if gaps.size == 0:
        return _degenerate_rule(xs)
    left_neg = np.cumsum(ys == -1)[gaps].astype(np.int64)
    left_pos = (gaps + 1) - left_neg
    # integer forms of l_-1 + (1 - l_+1) and l_+1 + (1 - l_-1), scaled by k_neg*k_pos
    score_neg_left = left_neg * k_pos + (k_pos - left_pos) * k_neg
    score_pos_left = left_pos * k_neg + (k_neg - left_neg) * k_pos
    interleaved = np.empty(2 * gaps.size, dtype=np.int64)
    interleaved[0::2] = score_neg_left
    interleaved[1::2] = score_pos_left
    best = int(np.argmax(interleaved))
    i = gaps[best // 2]
    mid = (xs[i] + xs[i + 1]) / 2.0
    s = 1 if best % 2 == 0 else -1
    p = interleaved[best] / (2 * k_neg * k_pos)
    return ThresholdRule(
        t_prime=float(s * mid), s=s, p=float(p), r=float(abs(xs[i] - xs[i + 1]) / 2.0)
    )


def brute_force_threshold(x, y) -> ThresholdRule:
    """Reference implementation: try every midpoint and both orientations,
    classify all points and count per-class hits directly. O(m^2)."""
    x, y, k_neg, k_pos = _check_inputs(x, y)
    values = np.unique(x)
    if values.size == 1:
        return _degenerate_rule(values)
    best_score, best_rule = -1, None
    for lo, hi in zip(values[:-1], values[1:]):
        mid = (lo + hi) / 2.0
        for s in (1, -1):
            pred = np.where(s * x <= s * mid, -1, 1)
            hits_neg = int(np.sum((pred == -1) & (y == -1)))
            hits_pos = int(np.sum((pred == 1) & (y == 1)))
            score = hits_neg * k_pos + hits_pos * k_neg
            if score > best_score:
                best_score = score
                best_rule = ThresholdRule(
                    t_prime=float(s * mid),
                    s=s,
                    p=float(score / (2 * k_neg * k_pos)),
                    r=float(abs(hi - lo) / 2.0),
                )
    return best_rule


def predict_1d(rule: ThresholdRule, x: float) -> int:
    return -1 if rule.s * x <= rule.t_prime else 1
