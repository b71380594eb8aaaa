"""Continuous budget-fraction encoding.

A point on the probability simplex of dimension ``D = k * n_algorithms``
gives each algorithm up to ``k`` runs, each taking a fraction of ``T``.
Unconstrained search vectors are mapped onto the simplex by one of three
maps, then decoded by snapping every fraction down onto the budget grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .eaf import EafTensor
from .errors import ConfigError, DataError
from .perf import Portfolio, budget_cap, perf

__all__ = ["normalize_simple", "stick_breaking", "inverse_beta_a1", "project_simplex",
           "decode_cont", "genome_length", "ContResult", "continuous_search",
           "PROJECTIONS", "OPTIMIZERS"]

logger = logging.getLogger(__name__)

PROJECTIONS = ("simple", "dirichlet", "euclidean")
OPTIMIZERS = ("pattern", "es")


def normalize_simple(y, lenient: bool = False) -> np.ndarray:
    """Divide by the sum.

    An all-zero input has no direction; it raises unless ``lenient``, in
    which case the uniform point is returned.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DataError("simple normalization needs non-negative inputs")
    total = y.sum()
    if total <= 0:
        if not lenient:
            raise DataError("degenerate input: components sum to zero")
        logger.debug("all-zero vector normalized to the uniform point")
        return np.full(y.size, 1.0 / y.size)
    return y / total


def inverse_beta_a1(u, n):
    """Quantile function of Beta(1, n): ``1 - (1 - u) ** (1 / n)``."""
    return 1.0 - (1.0 - np.asarray(u, dtype=float)) ** (1.0 / n)


def stick_breaking(y) -> np.ndarray:
    """Map ``D - 1`` numbers in [0, 1] to ``D`` simplex weights.

    Stick ``i`` (1-based) takes a Beta(1, D - i + 1) quantile of what is
    left; the final weight is the remainder.
    """
    y = np.asarray(y, dtype=float).ravel()
    if np.any((y < 0) | (y > 1)) or np.isnan(y).any():
        raise DataError("stick-breaking inputs must lie in [0, 1]")
    d = y.size + 1
    q = inverse_beta_a1(y, np.arange(d, 1, -1))
    # t_i = t_{i-1} + (1 - t_{i-1}) q_i  <=>  1 - t_i = prod_{j <= i} (1 - q_j)
    left = np.concatenate(([1.0], np.cumprod(1.0 - q), [0.0]))
    return left[:-1] - left[1:]


def project_simplex(y) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}`` by sorting."""
    y = np.asarray(y, dtype=float).ravel()
    u = np.sort(y)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, y.size + 1)
    rho = ind[u - cssv / ind > 0][-1]
    theta = cssv[rho - 1] / rho
    return np.maximum(y - theta, 0.0)


def genome_length(k: int, n_algorithms: int, projection: str) -> int:
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if projection not in PROJECTIONS:
        raise ConfigError(f"unknown projection {projection!r}; choose from {PROJECTIONS}")
    d = k * n_algorithms
    return d - 1 if projection == "dirichlet" else d


def to_simplex(y, projection: str, lenient: bool = False) -> np.ndarray:
    if projection == "simple":
        return normalize_simple(y, lenient=lenient)
    if projection == "dirichlet":
        return stick_breaking(y)
    if projection == "euclidean":
        return project_simplex(y)
    raise ConfigError(f"unknown projection {projection!r}")


def decode_cont(x, k: int, algorithms, budgets, total_budget: int) -> Portfolio:
    """Turn budget fractions into a portfolio.

    ``x[a * k + i]`` is the share of ``total_budget`` for the ``i``-th run of
    algorithm ``a``. Shares are snapped down to grid budgets; shares below
    the smallest budget are dropped.
    """
    x = np.asarray(x, dtype=float).ravel()
    algorithms = list(algorithms)
    if x.size != k * len(algorithms):
        raise ConfigError(f"expected {k * len(algorithms)} fractions, got {x.size}")
    if abs(x.sum() - 1.0) > 1e-9:
        raise DataError(f"fractions sum to {x.sum()!r}, not 1")
    levels = np.asarray(sorted(b for b in budgets if b <= total_budget))
    # absorb rounding in x * T (0.4 * T may land a hair below the grid point)
    raw = x * total_budget + 1e-9 * total_budget
    pos = np.searchsorted(levels, raw, side="right") - 1
    counts: dict = {}
    for j in np.flatnonzero(pos >= 0):
        pair = (algorithms[j // k], int(levels[pos[j]]))
        counts[pair] = counts.get(pair, 0) + 1
    portfolio = Portfolio(counts)
    if portfolio.cost > total_budget:
        raise DataError(f"decoded cost {portfolio.cost} exceeds {total_budget}")
    return portfolio


@dataclass
class ContResult:
    portfolio: Portfolio
    perf: float
    y: np.ndarray
    history: list = field(default_factory=list)
    evaluations: int = 0


def _pattern_search(objective, y, budget, rng):
    """Coordinate pattern search; restarts from a random point once the
    step has shrunk below ``1e-6``."""
    fy = objective(y)
    best_y, best_f = y, fy
    used = 1
    step = 0.25
    while used < budget:
        improved = False
        for i in range(y.size):
            for sign in (1.0, -1.0):
                if used >= budget:
                    return best_y, best_f
                trial = y.copy()
                trial[i] = np.clip(trial[i] + sign * step, 0.0, 1.0)
                if trial[i] == y[i]:
                    continue
                ft = objective(trial)
                used += 1
                if ft > fy:
                    y, fy, improved = trial, ft, True
                    if ft > best_f:
                        best_y, best_f = trial, ft
                    break
        if not improved:
            step /= 2
            if step < 1e-6:
                if used >= budget:
                    break
                y = rng.random(y.size)
                fy = objective(y)
                used += 1
                if fy > best_f:
                    best_y, best_f = y, fy
                step = 0.25
    return best_y, best_f


def _one_plus_one_es(objective, y, budget, rng):
    fy = objective(y)
    best_y, best_f = y, fy
    sigma = 0.2
    for _ in range(budget - 1):
        trial = np.clip(y + sigma * rng.standard_normal(y.size), 0.0, 1.0)
        ft = objective(trial)
        if ft > fy:
            sigma = min(sigma * 1.5, 1.0)
        else:
            sigma = max(sigma * 1.5 ** -0.25, 1e-8)
        # ties are accepted to drift across plateaus
        if ft >= fy:
            y, fy = trial, ft
        if ft > best_f:
            best_y, best_f = trial, ft
    return best_y, best_f


def continuous_search(tensor: EafTensor, functions, budgets=None, total_budget=None,
                      k: int = 3, projection: str = "dirichlet", optimizer: str = "pattern",
                      eval_budget: int = 1000, seed: int = 0) -> ContResult:
    """Maximize ``perf(decode(to_simplex(y)))`` over ``y`` in the unit cube.

    ``optimizer="pattern"`` is a coordinate pattern search with step
    halving; ``"es"`` is a (1+1) evolution strategy with the 1/5 success
    rule. The first evaluation is always the seeded random starting point.
    ``history[i]`` is the best perf after ``i + 1`` evaluations.
    """
    if optimizer not in OPTIMIZERS:
        raise ConfigError(f"unknown optimizer {optimizer!r}; choose from {OPTIMIZERS}")
    if eval_budget < 1:
        raise ConfigError("eval_budget must be >= 1")
    total_budget = tensor.grid.total_budget if total_budget is None else total_budget
    budget_cap(tensor, total_budget)
    budgets = tensor.grid.feasible_budgets(total_budget) if budgets is None else budgets
    for b in budgets:
        tensor.budget_index(b)
    algorithms = sorted(tensor.algorithms)
    n = genome_length(k, len(algorithms), projection)
    rng = np.random.default_rng(seed)

    history: list[float] = []
    best = -1.0
    cache: dict = {}

    def objective(y):
        nonlocal best
        x = to_simplex(y, projection, lenient=True)
        portfolio = decode_cont(x, k, algorithms, budgets, total_budget)
        if portfolio not in cache:
            cache[portfolio] = perf(tensor, functions, portfolio)
        value = cache[portfolio]
        best = max(best, value)
        history.append(best)
        return value

    y0 = rng.random(n)
    if optimizer == "pattern":
        y, fy = _pattern_search(objective, y0, eval_budget, rng)
    else:
        y, fy = _one_plus_one_es(objective, y0, eval_budget, rng)
    portfolio = decode_cont(to_simplex(y, projection, lenient=True), k, algorithms,
                            budgets, total_budget)
    return ContResult(portfolio, fy, y, history, len(history))
