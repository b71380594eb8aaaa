"""Exhaustive search over maximal portfolios."""

from __future__ import annotations

import itertools
from collections import Counter
from math import comb, prod

import numpy as np

from .eaf import EafTensor
from .errors import ConfigError, ResourceCapError
from .perf import TIE_TOL, Portfolio, perf

__all__ = ["enumerate_compositions", "count_portfolios", "iter_portfolios",
           "enumerate_portfolios", "DEFAULT_CAP"]

DEFAULT_CAP = 10_000_000


def enumerate_compositions(budgets, total_budget: int) -> list[tuple[int, ...]]:
    """All maximal multisets of budgets with sum ``<= total_budget``.

    A multiset is maximal when not even the smallest budget fits in what is
    left. Each composition is returned once, sorted non-increasing; the list
    itself is in descending lexicographic order.
    """
    levels = sorted({int(b) for b in budgets if b <= total_budget}, reverse=True)
    if not levels:
        raise ConfigError(f"no budget level fits in total budget {total_budget}")
    smallest = levels[-1]
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], start: int, remaining: int):
        if remaining < smallest:
            out.append(tuple(prefix))
            return
        for i in range(start, len(levels)):
            b = levels[i]
            if b <= remaining:
                prefix.append(b)
                extend(prefix, i, remaining - b)
                prefix.pop()

    extend([], 0, total_budget)
    return out


def _assignments(composition, algorithms):
    """Distinct ways to attach algorithms to the slots of ``composition``."""
    groups = sorted(Counter(composition).items(), reverse=True)
    per_level = [
        [(b, combo) for combo in itertools.combinations_with_replacement(algorithms, m)]
        for b, m in groups
    ]
    for choice in itertools.product(*per_level):
        counts: dict = {}
        for b, combo in choice:
            for alg in combo:
                counts[(alg, b)] = counts.get((alg, b), 0) + 1
        yield Portfolio(counts)


def count_portfolios(composition, n_algorithms: int) -> int:
    """Number of distinct pair multisets for one composition."""
    return prod(comb(n_algorithms + m - 1, m) for m in Counter(composition).values())


def iter_portfolios(composition, algorithms):
    """Yield every distinct portfolio for ``composition`` exactly once."""
    yield from _assignments(composition, sorted(algorithms))


def enumerate_portfolios(tensor: EafTensor, functions, budgets=None, total_budget=None,
                         max_size: int | None = None, cap: int = DEFAULT_CAP):
    """Best maximal portfolio by exhaustive evaluation.

    Returns ``(portfolio, perf, n_evaluated)``. Ties (within ``TIE_TOL``) are
    resolved toward the canonically smallest portfolio. Raises :class:`ResourceCapError` before
    doing any work if more than ``cap`` portfolios would be evaluated.
    """
    total_budget = tensor.grid.total_budget if total_budget is None else total_budget
    budgets = tensor.grid.budgets if budgets is None else budgets
    fi = tensor.fn_indices(functions)
    algorithms = sorted(tensor.algorithms)
    compositions = [
        c for c in enumerate_compositions(budgets, total_budget)
        if max_size is None or len(c) <= max_size
    ]
    total = sum(count_portfolios(c, len(algorithms)) for c in compositions)
    if total > cap:
        raise ResourceCapError(
            f"enumeration would evaluate {total} portfolios (cap {cap})"
        )
    survival = {
        (a, b): 1.0 - tensor.values[fi, tensor.alg_index(a), tensor.budget_index(b), :]
        for a in algorithms for b in {int(b) for c in compositions for b in c}
    }
    level_options: dict = {}

    def options(b, m):
        # every multiset of m algorithms running with budget b, with the
        # product of their failure probabilities
        if (b, m) not in level_options:
            opts = []
            for combo in itertools.combinations_with_replacement(algorithms, m):
                fail = survival[(combo[0], b)]
                for a in combo[1:]:
                    fail = fail * survival[(a, b)]
                opts.append((combo, fail))
            level_options[(b, m)] = opts
        return level_options[(b, m)]

    best_key, best_value, n = None, -1.0, 0
    for composition in compositions:
        levels = sorted(Counter(composition).items(), reverse=True)
        choice = [None] * len(levels)

        def walk(depth, fail):
            nonlocal best_key, best_value, n
            if depth == len(levels):
                value = float(np.mean(1.0 - fail))
                n += 1
                if value > best_value + TIE_TOL:
                    best_key, best_value = _portfolio_of(levels, choice), value
                elif value >= best_value - TIE_TOL:
                    key = _portfolio_of(levels, choice)
                    if key < best_key:
                        best_key, best_value = key, max(value, best_value)
                return
            b, m = levels[depth]
            for combo, level_fail in options(b, m):
                choice[depth] = combo
                walk(depth + 1, level_fail if fail is None else fail * level_fail)

        walk(0, None)
    if best_key is None:
        return Portfolio(), 0.0, 0
    return best_key, perf(tensor, functions, best_key), n


def _portfolio_of(levels, choice) -> Portfolio:
    counts: dict = {}
    for (b, _), combo in zip(levels, choice):
        for a in combo:
            counts[(a, b)] = counts.get((a, b), 0) + 1
    return Portfolio(counts)
