"""Portfolios, the portfolio performance metric and its reference baselines."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .eaf import EafTensor
from .errors import ConfigError, DataError, UnknownKeyError

__all__ = [
    "Portfolio",
    "PerfReport",
    "perf",
    "per_function_perf",
    "lower_baseline",
    "upper_baseline",
    "relative_improvement",
    "budget_cap",
    "make_report",
    "TIE_TOL",
]

Pair = tuple[str, int]

# perf values closer than this are treated as tied by every builder
TIE_TOL = 1e-12


class Portfolio(Mapping):
    """Multiset of (algorithm, budget) pairs stored as a multiplicity map.

    Immutable; ``add`` returns a new portfolio. Iteration is in canonical
    (algorithm, budget) order so every derived quantity is order independent.

    >>> p = Portfolio([("cma", 200), ("cma", 200), ("bfgs", 1000)])
    >>> p.cost, p.size
    (1400, 3)
    """

    __slots__ = ("_counts", "_key")

    def __init__(self, pairs: Mapping[Pair, int] | Iterable[Pair] | None = None):
        counts: dict[Pair, int] = {}
        if isinstance(pairs, Mapping):
            for (alg, budget), n in pairs.items():
                n = int(n)
                if n < 0:
                    raise ValueError(f"negative multiplicity for {(alg, budget)}")
                if n:
                    key = (alg, int(budget))
                    counts[key] = counts.get(key, 0) + n
        elif pairs is not None:
            for alg, budget in pairs:
                key = (alg, int(budget))
                counts[key] = counts.get(key, 0) + 1
        self._key = tuple(sorted(counts.items()))
        self._counts = dict(self._key)

    def __getitem__(self, pair):
        return self._counts[pair]

    def __iter__(self):
        return iter(self._counts)

    def __len__(self):
        return len(self._counts)

    def __eq__(self, other):
        if isinstance(other, Portfolio):
            return self._key == other._key
        return NotImplemented

    def __hash__(self):
        return hash(self._key)

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        body = ", ".join(f"({a!r}, {b}): {n}" for (a, b), n in self._key)
        return f"Portfolio({{{body}}})"

    @property
    def key(self) -> tuple:
        """Canonical sorted ``((alg, budget), count)`` tuple."""
        return self._key

    @property
    def cost(self) -> int:
        return sum(b * n for (_, b), n in self._key)

    @property
    def size(self) -> int:
        """Number of runs, counting multiplicity."""
        return sum(self._counts.values())

    @property
    def algorithms(self) -> tuple[str, ...]:
        return tuple(sorted({a for a, _ in self._counts}))

    def add(self, algorithm: str, budget: int, count: int = 1) -> "Portfolio":
        counts = dict(self._counts)
        key = (algorithm, int(budget))
        counts[key] = counts.get(key, 0) + count
        return Portfolio(counts)

    def remove(self, algorithm: str, budget: int, count: int = 1) -> "Portfolio":
        key = (algorithm, int(budget))
        if self._counts.get(key, 0) < count:
            raise KeyError(key)
        counts = dict(self._counts)
        counts[key] -= count
        return Portfolio(counts)

    def restrict(self, algorithms) -> "Portfolio":
        keep = set(algorithms)
        return Portfolio({p: n for p, n in self._counts.items() if p[0] in keep})

    def expand(self) -> list[Pair]:
        """One entry per run."""
        return [pair for pair, n in self._key for _ in range(n)]

    def format(self) -> str:
        return " + ".join(
            f"{n}x({a}, {b})" if n > 1 else f"({a}, {b})" for (a, b), n in self._key
        ) or "(empty)"


def _pair_indices(tensor: EafTensor, portfolio: Portfolio):
    out = []
    for (alg, budget), n in portfolio.key:
        try:
            out.append((tensor.alg_index(alg), tensor.budget_index(budget), n))
        except UnknownKeyError as exc:
            raise UnknownKeyError(f"pair ({alg!r}, {budget}): {exc}") from None
    return out


def failure_probabilities(tensor: EafTensor, fn_idx, portfolio: Portfolio) -> np.ndarray:
    """Probability that no run of ``portfolio`` attains each (function, eps)."""
    fail = np.ones((len(fn_idx), len(tensor.grid.precisions)))
    values = tensor.values[fn_idx]
    for a, b, n in _pair_indices(tensor, portfolio):
        fail *= (1.0 - values[:, a, b, :]) ** n
    return fail


def perf(tensor: EafTensor, functions, portfolio: Portfolio) -> float:
    """Expected fraction of (function, precision) targets hit by at least one
    run of the portfolio, assuming independent runs.

    ``functions=None`` means every function in the tensor.
    """
    fi = tensor.fn_indices(functions)
    if not len(portfolio):
        return 0.0
    return float(np.mean(1.0 - failure_probabilities(tensor, fi, portfolio)))


def per_function_perf(tensor: EafTensor, function, portfolio: Portfolio) -> float:
    return perf(tensor, [function], portfolio)


def budget_cap(tensor: EafTensor, total_budget: int) -> int:
    """Largest grid budget not above ``total_budget``."""
    feasible = tensor.grid.feasible_budgets(total_budget)
    if not feasible:
        raise ConfigError(
            f"no grid budget fits in {total_budget} (smallest is {tensor.grid.budgets[0]})"
        )
    return feasible[-1]


def lower_baseline(tensor: EafTensor, functions, total_budget: int) -> tuple[float, str]:
    """Single best solver: best algorithm given the whole budget in one run.

    Ties go to the lexicographically smallest algorithm identifier.
    """
    if not tensor.algorithms:
        raise ConfigError("no algorithms to choose from")
    b = budget_cap(tensor, total_budget)
    best = None
    for alg in sorted(tensor.algorithms):
        value = perf(tensor, functions, Portfolio({(alg, b): 1}))
        if best is None or value > best[0] + TIE_TOL:
            best = (value, alg)
    return best


def upper_baseline(tensor: EafTensor, functions) -> float:
    """Fraction of targets that some algorithm reaches with nonzero probability
    at the largest grid budget."""
    fi = tensor.fn_indices(functions)
    attainable = tensor.values[fi, :, -1, :] > 0
    per_fn = attainable.sum(axis=-1).max(axis=1)
    return float(per_fn.sum() / (len(fi) * len(tensor.grid.precisions)))


def relative_improvement(perf_value: float, lb: float, ub: float) -> float:
    if ub < lb:
        raise DataError(f"upper baseline {ub} below lower baseline {lb}")
    if ub == lb:
        return 0.0
    return (perf_value - lb) / (ub - lb)


@dataclass(frozen=True)
class PerfReport:
    perf: float
    lb: float
    ub: float
    relative_improvement: float
    per_function: dict
    portfolio: Portfolio
    cost: int
    sbs: str = ""

    def as_dict(self) -> dict:
        return {
            "perf": self.perf,
            "lb": self.lb,
            "ub": self.ub,
            "relative_improvement": self.relative_improvement,
            "sbs": self.sbs,
            "cost": self.cost,
            "size": self.portfolio.size,
            "portfolio": [[a, b, n] for (a, b), n in self.portfolio.key],
            "per_function": dict(self.per_function),
        }


def make_report(tensor: EafTensor, functions, portfolio: Portfolio,
                total_budget: int | None = None) -> PerfReport:
    """Evaluate ``portfolio`` against both baselines, enforcing the budget."""
    total_budget = tensor.grid.total_budget if total_budget is None else total_budget
    if portfolio.cost > total_budget:
        raise ConfigError(f"portfolio cost {portfolio.cost} exceeds total budget {total_budget}")
    fns = list(tensor.functions) if functions is None else list(functions)
    per_fn = {f: per_function_perf(tensor, f, portfolio) for f in fns}
    value = perf(tensor, fns, portfolio)
    lb, sbs = lower_baseline(tensor, fns, total_budget)
    ub = upper_baseline(tensor, fns)
    return PerfReport(value, lb, ub, relative_improvement(value, lb, ub), per_fn,
                      portfolio, portfolio.cost, sbs)
