"""Multiplicity-vector encoding of portfolios and a (mu + lambda) genetic search.

A genome ``x`` holds one non-negative count per (algorithm, budget) pair,
algorithm-major: gene ``a * n_budgets + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .eaf import EafTensor
from .errors import ConfigError
from .perf import Portfolio, budget_cap

__all__ = ["IntSpace", "GaConfig", "GaResult", "decode_int", "encode_int", "perf_int",
           "repair", "mutate", "crossover", "random_maximal", "ga_run"]

CROSSOVERS = ("uniform", "npoint", "mean")


@dataclass(frozen=True)
class IntSpace:
    algorithms: tuple[str, ...]
    budgets: tuple[int, ...]
    total_budget: int

    @classmethod
    def from_tensor(cls, tensor: EafTensor, total_budget: int | None = None,
                    budgets=None) -> "IntSpace":
        total_budget = tensor.grid.total_budget if total_budget is None else total_budget
        budget_cap(tensor, total_budget)
        if budgets is None:
            budgets = tensor.grid.feasible_budgets(total_budget)
        budgets = tuple(sorted(int(b) for b in budgets if b <= total_budget))
        for b in budgets:
            tensor.budget_index(b)
        return cls(tuple(sorted(tensor.algorithms)), budgets, int(total_budget))

    @property
    def n_genes(self) -> int:
        return len(self.algorithms) * len(self.budgets)

    @cached_property
    def gene_costs(self) -> np.ndarray:
        return np.tile(np.asarray(self.budgets, dtype=np.int64), len(self.algorithms))

    def cost(self, x) -> int:
        return int(np.dot(np.asarray(x, dtype=np.int64), self.gene_costs))

    def survival(self, tensor: EafTensor, functions) -> np.ndarray:
        """``1 - eaf`` per gene, shaped (n_genes, F, E)."""
        fi = tensor.fn_indices(functions)
        a_idx = [tensor.alg_index(a) for a in self.algorithms]
        b_idx = [tensor.budget_index(b) for b in self.budgets]
        sub = tensor.values[np.ix_(fi, a_idx, b_idx)]  # F, A, B, E
        return 1.0 - sub.transpose(1, 2, 0, 3).reshape(self.n_genes, len(fi), -1)


def decode_int(x, space: IntSpace) -> Portfolio:
    x = np.asarray(x)
    nb = len(space.budgets)
    return Portfolio({
        (space.algorithms[j // nb], space.budgets[j % nb]): int(x[j])
        for j in np.flatnonzero(x)
    })


def encode_int(portfolio: Portfolio, space: IntSpace) -> np.ndarray:
    x = np.zeros(space.n_genes, dtype=np.int64)
    nb = len(space.budgets)
    for (alg, b), n in portfolio.items():
        x[space.algorithms.index(alg) * nb + space.budgets.index(b)] = n
    return x


def perf_int(survival: np.ndarray, x) -> float:
    """Performance written directly on the count vector:
    mean over (f, eps) of ``1 - prod_j (1 - eaf_j) ** x_j``."""
    x = np.asarray(x)
    fail = np.prod(survival ** x[:, None, None], axis=0)
    return float(np.mean(1.0 - fail))


def repair(x, space: IntSpace, rng: np.random.Generator) -> np.ndarray:
    """Decrement uniformly chosen nonzero genes until the cost fits."""
    x = np.array(x, dtype=np.int64)
    costs = space.gene_costs
    total = int(np.dot(x, costs))
    while total > space.total_budget:
        nz = np.flatnonzero(x)
        j = nz[rng.integers(len(nz))]
        x[j] -= 1
        total -= int(costs[j])
    return x


def mutate(x, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Each gene moves by +1 or -1 with probability ``rate``; never below 0."""
    if not 0 < rate <= 1:
        raise ConfigError(f"mutation rate must be in (0, 1], got {rate}")
    x = np.array(x, dtype=np.int64)
    hit = rng.random(x.size) < rate
    up = rng.random(x.size) < 0.5
    step = np.where(up, 1, -1) * hit
    return np.maximum(x + step, 0)


def crossover(a, b, kind: str, rng: np.random.Generator, n_points: int = 1) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ConfigError(f"parent lengths differ: {a.size} vs {b.size}")
    if kind == "uniform":
        return np.where(rng.random(a.size) < 0.5, a, b)
    if kind == "mean":
        # round half up
        return (a + b + 1) // 2
    if kind == "npoint":
        n = min(n_points, a.size - 1)
        if n <= 0:
            return a.copy()
        cuts = np.sort(rng.choice(np.arange(1, a.size), size=n, replace=False))
        segment = np.zeros(a.size, dtype=np.int64)
        segment[cuts] = 1
        from_b = np.cumsum(segment) % 2 == 1
        return np.where(from_b, b, a)
    raise ConfigError(f"unknown crossover {kind!r}; choose from {CROSSOVERS}")


def random_maximal(space: IntSpace, rng: np.random.Generator) -> np.ndarray:
    """Add uniformly drawn fitting pairs until no budget fits."""
    x = np.zeros(space.n_genes, dtype=np.int64)
    budgets = np.asarray(space.budgets)
    nb, na = len(budgets), len(space.algorithms)
    remaining = space.total_budget
    while True:
        n_fit = int(np.searchsorted(budgets, remaining, side="right"))
        if n_fit == 0:
            return x
        a = int(rng.integers(na))
        b = int(rng.integers(n_fit))
        x[a * nb + b] += 1
        remaining -= int(budgets[b])


@dataclass(frozen=True)
class GaConfig:
    """``mutation_rate=None`` means one expected flip per genome; 0 disables
    mutation."""

    mu: int = 10
    lam: int = 20
    mutation_rate: float | None = None
    crossover: str = "uniform"
    n_points: int = 1
    eval_budget: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise ConfigError("mu and lambda must be positive")
        if self.eval_budget < self.mu:
            raise ConfigError(f"eval_budget {self.eval_budget} < mu {self.mu}")
        if self.mutation_rate is not None and not 0 <= self.mutation_rate <= 1:
            raise ConfigError(f"mutation rate must be in [0, 1], got {self.mutation_rate}")
        if self.crossover not in CROSSOVERS:
            raise ConfigError(f"unknown crossover {self.crossover!r}")


@dataclass
class GaResult:
    portfolio: Portfolio
    perf: float
    history: list = field(default_factory=list)
    evaluations: int = 0


def ga_run(tensor: EafTensor, functions, budgets=None, total_budget: int | None = None,
           cfg: GaConfig | None = None, initial=None) -> GaResult:
    """Elitist (mu + lambda) search over count vectors.

    ``history[i]`` is the best perf after ``i + 1`` fitness evaluations.
    ``initial`` optionally seeds the first population member with a portfolio.
    """
    cfg = cfg or GaConfig()
    space = IntSpace.from_tensor(tensor, total_budget, budgets)
    survival = space.survival(tensor, functions)
    rate = 1.0 / space.n_genes if cfg.mutation_rate is None else cfg.mutation_rate
    rng = np.random.default_rng(cfg.seed)

    history: list[float] = []
    best = -1.0

    def evaluate(x):
        nonlocal best
        value = perf_int(survival, x)
        best = max(best, value)
        history.append(best)
        return value

    population = [random_maximal(space, rng) for _ in range(cfg.mu)]
    if initial is not None:
        population[0] = repair(encode_int(initial, space), space, rng)
    fitness = [evaluate(x) for x in population]
    evals = cfg.mu
    while evals < cfg.eval_budget:
        offspring, off_fit = [], []
        for _ in range(min(cfg.lam, cfg.eval_budget - evals)):
            i, j = rng.integers(cfg.mu, size=2)
            child = crossover(population[i], population[j], cfg.crossover, rng, cfg.n_points)
            if rate > 0:
                child = mutate(child, rate, rng)
            child = repair(child, space, rng)
            offspring.append(child)
            off_fit.append(evaluate(child))
            evals += 1
        pool = population + offspring
        pool_fit = fitness + off_fit
        # stable sort keeps parents ahead of equally fit offspring
        order = sorted(range(len(pool)), key=lambda k: -pool_fit[k])[:cfg.mu]
        population = [pool[k] for k in order]
        fitness = [pool_fit[k] for k in order]
    top = int(np.argmax(fitness))
    return GaResult(decode_int(population[top], space), fitness[top], history, evals)
