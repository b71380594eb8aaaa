"""Exact Shapley attribution of per-function portfolio performance."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np

from .eaf import EafTensor
from .errors import ConfigError, ResourceCapError
from .perf import Portfolio, per_function_perf

__all__ = ["ShapleyTable", "shapley_per_function", "shapley_table", "shapley_values",
           "permutation_shapley", "MAX_PLAYERS"]

MAX_PLAYERS = 20


def shapley_values(value, n: int) -> np.ndarray:
    """Exact Shapley values of the game ``value(frozenset_of_indices)``."""
    if n > MAX_PLAYERS:
        raise ResourceCapError(f"{n} players exceed the exact limit of {MAX_PLAYERS}")
    players = range(n)
    v = {}
    for size in range(n + 1):
        for coalition in combinations(players, size):
            s = frozenset(coalition)
            v[s] = value(s) if s else 0.0
    weight = [factorial(s) * factorial(n - s - 1) / factorial(n) for s in range(n)]
    phi = np.zeros(n)
    for s, vs in v.items():
        if len(s) == n:
            continue
        for i in players:
            if i not in s:
                phi[i] += weight[len(s)] * (v[s | {i}] - vs)
    return phi


def permutation_shapley(value, n: int, n_permutations: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo estimate from random orderings: (mean, standard error)."""
    samples = np.zeros((n_permutations, n))
    for m in range(n_permutations):
        order = rng.permutation(n)
        coalition: set = set()
        prev = 0.0
        for i in order:
            coalition.add(int(i))
            cur = value(frozenset(coalition))
            samples[m, i] = cur - prev
            prev = cur
    se = samples.std(axis=0, ddof=1) / np.sqrt(n_permutations) if n_permutations > 1 \
        else np.full(n, np.inf)
    return samples.mean(axis=0), se


def _players(portfolio: Portfolio, per_pair: bool):
    if per_pair:
        return [pair for pair in sorted(portfolio)]
    return list(portfolio.algorithms)


def _sub_portfolio(portfolio, players, coalition, per_pair):
    chosen = {players[i] for i in coalition}
    if per_pair:
        return Portfolio({p: n for p, n in portfolio.items() if p in chosen})
    return portfolio.restrict(chosen)


def shapley_per_function(tensor: EafTensor, function, portfolio: Portfolio,
                         per_pair: bool = False) -> tuple[dict, dict]:
    """Raw and normalized Shapley values for one function.

    Players are the distinct algorithms of the portfolio (all their runs
    join or leave together), or the distinct pairs if ``per_pair``.
    Normalization divides by the sum of raw values.
    """
    if not len(portfolio):
        raise ConfigError("portfolio is empty")
    players = _players(portfolio, per_pair)

    def value(coalition):
        return per_function_perf(tensor, function,
                                 _sub_portfolio(portfolio, players, coalition, per_pair))

    raw = shapley_values(value, len(players))
    total = raw.sum()
    norm = raw / total if total != 0 else np.zeros_like(raw)
    return (dict(zip(players, map(float, raw))), dict(zip(players, map(float, norm))))


@dataclass(frozen=True)
class ShapleyTable:
    values: dict
    raw: dict

    def rows(self):
        """``(function, player, raw, normalized)`` in insertion order."""
        for key, norm in self.values.items():
            yield key[0], key[1], self.raw[key], norm


def shapley_table(tensor: EafTensor, functions, portfolio: Portfolio,
                  per_pair: bool = False) -> ShapleyTable:
    functions = list(tensor.functions) if functions is None else list(functions)
    values, raw = {}, {}
    for f in functions:
        r, n = shapley_per_function(tensor, f, portfolio, per_pair)
        for player in r:
            raw[(f, player)] = r[player]
            values[(f, player)] = n[player]
    return ShapleyTable(values, raw)
