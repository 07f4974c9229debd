"""Evolutionary maximizers over unit-norm direction vectors.

Every candidate is scaled to unit L2 norm before it reaches the objective, so
an objective that depends on the direction only sees one point per ray. The
backends keep their internal state in the unprojected space.

Backends:
    ``cmaes``  covariance matrix adaptation ES, rank-one and rank-mu updates
    ``es``     (mu/mu, lambda)-ES with log-normal self-adaptive step size
    ``pso``    global-best particle swarm with constriction coefficients
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List

import numpy as np

BACKENDS = ("cmaes", "es", "pso")
NORM_FLOOR = 1e-12
PSO_INERTIA = 0.7298
PSO_ACCEL = 1.49618


class ObjectiveError(RuntimeError):
    """An objective call failed; the offending unit vector is in `candidate`."""

    def __init__(self, message, candidate):
        super().__init__(message)
        self.candidate = candidate


@dataclass(frozen=True)
class EAConfig:
    backend: str = "cmaes"
    population: int = 4
    parents: int = 2
    max_iterations: int = 100
    alpha: float = 0.0
    seed: int = 0
    initial_sigma: float = 0.5

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {BACKENDS}")
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not 1 <= self.parents <= self.population:
            raise ValueError("parents must lie in [1, population]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.initial_sigma <= 0:
            raise ValueError("initial_sigma must be > 0")

    def replace(self, **changes) -> "EAConfig":
        return replace(self, **changes)


def default_config(n: int, **overrides) -> EAConfig:
    """Population 4 + 3 ln n (floored, at least 4), half as many parents,
    ceil(150 ln(n + 1)) generations."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    population = max(4, int(math.floor(4 + 3 * math.log(n))))
    config = EAConfig(
        backend="cmaes",
        population=population,
        parents=population // 2,
        max_iterations=int(math.ceil(150 * math.log(n + 1))),
    )
    return config.replace(**overrides) if overrides else config


@dataclass
class OptimizationTrace:
    best_omega: np.ndarray
    best_fitness: float
    fitness_history: List[float] = field(default_factory=list)
    evaluations: int = 0


def zero_candidate_guard(omega, rng: np.random.Generator) -> np.ndarray:
    """Scale to unit norm; near-zero vectors become a random basis vector."""
    omega = np.asarray(omega, dtype=float)
    norm = float(np.linalg.norm(omega))
    if not norm >= NORM_FLOOR:
        unit = np.zeros(omega.shape[0])
        unit[int(rng.integers(omega.shape[0]))] = 1.0
        return unit
    return omega / norm


class _Evaluator:
    """Projects a batch of raw candidates and scores them, tracking the best."""

    def __init__(self, objective, rng, workers):
        self.objective = objective
        self.rng = rng
        self.workers = workers
        self.best_omega = None
        self.best_fitness = -math.inf
        self.evaluations = 0
        self.history: List[float] = []

    def _call(self, omega):
        try:
            value = float(self.objective(omega))
        except Exception as exc:
            raise ObjectiveError(f"objective failed at {omega.tolist()}: {exc}", omega) from exc
        if math.isnan(value):
            raise ObjectiveError(f"objective returned NaN at {omega.tolist()}", omega)
        return value

    def __call__(self, raw: np.ndarray) -> np.ndarray:
        # guard draws happen here, in order, before any concurrent evaluation
        units = [zero_candidate_guard(row, self.rng) for row in raw]
        if self.workers > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                values = list(pool.map(self._call, units))
        else:
            values = [self._call(u) for u in units]
        values = np.array(values)
        self.evaluations += len(units)
        k = int(np.argmax(values))
        if values[k] > self.best_fitness:
            self.best_fitness = float(values[k])
            self.best_omega = units[k]
        return values

    def end_generation(self):
        self.history.append(self.best_fitness)

    def trace(self) -> OptimizationTrace:
        return OptimizationTrace(self.best_omega, self.best_fitness, self.history, self.evaluations)


def _random_unit(rng, n):
    return zero_candidate_guard(rng.standard_normal(n), rng)


def _ranking(values):
    # descending, earlier index first among equals
    return np.argsort(-values, kind="stable")


def _run_cmaes(ev: _Evaluator, n: int, config: EAConfig, rng) -> None:
    lam, mu = config.population, config.parents
    weights = math.log((lam + 1) / 2) - np.log(np.arange(1, mu + 1))
    weights /= weights.sum()
    mueff = 1.0 / float(np.sum(weights**2))

    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))

    mean = _random_unit(rng, n)
    sigma = config.initial_sigma
    ps = np.zeros(n)
    pc = np.zeros(n)
    C = np.eye(n)
    B = np.eye(n)
    D = np.ones(n)

    for gen in range(config.max_iterations):
        z = rng.standard_normal((lam, n))
        y = (z * D) @ B.T
        x = mean + sigma * y
        values = ev(x)
        ev.end_generation()

        sel = _ranking(values)[:mu]
        y_sel = y[sel]
        y_w = weights @ y_sel
        mean = mean + sigma * y_w

        inv_sqrt_c = (B / D) @ B.T
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * (inv_sqrt_c @ y_w)
        ps_norm = float(np.linalg.norm(ps))
        hsig = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * (gen + 1))) / chi_n < 1.4 + 2 / (n + 1)
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * y_w

        rank_mu = (y_sel * weights[:, None]).T @ y_sel
        C = (
            (1 - c1 - cmu) * C
            + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
            + cmu * rank_mu
        )
        sigma *= math.exp((cs / damps) * (ps_norm / chi_n - 1))

        C = (C + C.T) / 2
        eigvals, B = np.linalg.eigh(C)
        # keep C positive definite and bounded in condition number
        floor = max(float(eigvals.max()), 1e-300) * 1e-14
        eigvals = np.maximum(eigvals, floor)
        C = (B * eigvals) @ B.T
        D = np.sqrt(eigvals)

        # the objective ignores the radial scale: re-anchor the mean on the
        # unit sphere so the step size stays meaningful
        scale = float(np.linalg.norm(mean))
        if scale >= NORM_FLOOR:
            mean = mean / scale
            sigma /= scale


def _run_es(ev: _Evaluator, n: int, config: EAConfig, rng) -> None:
    lam, mu = config.population, config.parents
    tau = 1 / math.sqrt(2 * n)
    mean = _random_unit(rng, n)
    sigma = config.initial_sigma
    for _ in range(config.max_iterations):
        sigmas = sigma * np.exp(tau * rng.standard_normal(lam))
        x = mean + sigmas[:, None] * rng.standard_normal((lam, n))
        values = ev(x)
        ev.end_generation()
        sel = _ranking(values)[:mu]
        mean = x[sel].mean(axis=0)
        sigma = float(np.exp(np.log(sigmas[sel]).mean()))
        scale = float(np.linalg.norm(mean))
        if scale >= NORM_FLOOR:
            mean = mean / scale
            sigma /= scale


def _run_pso(ev: _Evaluator, n: int, config: EAConfig, rng) -> None:
    size = config.population
    pos = rng.uniform(-1.0, 1.0, (size, n))
    vel = rng.uniform(-1.0, 1.0, (size, n)) * config.initial_sigma
    values = ev(pos)
    ev.end_generation()
    pbest, pbest_val = pos.copy(), values.copy()
    g = int(np.argmax(pbest_val))
    for _ in range(config.max_iterations - 1):
        r1 = rng.random((size, n))
        r2 = rng.random((size, n))
        vel = (
            PSO_INERTIA * vel
            + PSO_ACCEL * r1 * (pbest - pos)
            + PSO_ACCEL * r2 * (pbest[g] - pos)
        )
        pos = pos + vel
        values = ev(pos)
        ev.end_generation()
        improved = values > pbest_val
        pbest[improved] = pos[improved]
        pbest_val[improved] = values[improved]
        g = int(np.argmax(pbest_val))


_BACKEND_RUNNERS = {"cmaes": _run_cmaes, "es": _run_es, "pso": _run_pso}


def maximize(
    objective: Callable[[np.ndarray], float],
    n: int,
    config: EAConfig,
    workers: int = 1,
) -> OptimizationTrace:
    """Maximize `objective` over unit vectors in R^n.

    `workers` > 1 evaluates each generation on a thread pool; results are
    identical to the sequential run because sampling and selection never
    depend on completion order.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    rng = np.random.default_rng(config.seed)
    ev = _Evaluator(objective, rng, workers)
    _BACKEND_RUNNERS[config.backend](ev, n, config, rng)
    return ev.trace()
