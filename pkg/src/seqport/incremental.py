"""Portfolios grown in fixed budget increments."""

from __future__ import annotations

from dataclasses import dataclass

from .eaf import EafTensor
from .errors import ConfigError
from .perf import TIE_TOL, Portfolio, perf

__all__ = ["IncrementalStep", "build_incremental"]


@dataclass(frozen=True)
class IncrementalStep:
    total: int
    portfolio: Portfolio
    perf: float
    move: str


def _moves(portfolio, algorithms, granularity, grid_budgets, add_run_only):
    # preference order: new runs by algorithm name, then extensions from the
    # longest run down
    for alg in algorithms:
        yield f"add ({alg}, {granularity})", portfolio.add(alg, granularity)
    if add_run_only:
        return
    for (alg, beta), _ in sorted(portfolio.key, key=lambda kv: (-kv[0][1], kv[0][0])):
        longer = beta + granularity
        if longer in grid_budgets:
            yield (f"extend ({alg}, {beta}) -> {longer}",
                   portfolio.remove(alg, beta).add(alg, longer))


def build_incremental(tensor: EafTensor, functions, granularity: int,
                      total_budget: int | None = None,
                      add_run_only: bool = False) -> list[IncrementalStep]:
    """Spend ``granularity`` evaluations per step, never revisiting earlier choices.

    Each step either starts a new run ``(alg, g)`` or lengthens an existing
    run ``(alg, beta)`` to ``(alg, beta + g)`` when that is a grid budget.
    The move with the highest perf wins; ties (within ``TIE_TOL``) keep the
    generation order of the candidate moves. ``add_run_only`` disables lengthening.
    """
    total_budget = tensor.grid.total_budget if total_budget is None else total_budget
    grid_budgets = set(tensor.grid.budgets)
    if granularity not in grid_budgets:
        raise ConfigError(f"granularity {granularity} is not a grid budget")
    if granularity > total_budget:
        raise ConfigError(f"granularity {granularity} exceeds total budget {total_budget}")
    algorithms = sorted(tensor.algorithms)
    portfolio = Portfolio()
    steps: list[IncrementalStep] = []
    for k in range(1, total_budget // granularity + 1):
        best = None
        for label, candidate in _moves(portfolio, algorithms, granularity, grid_budgets,
                                       add_run_only):
            value = perf(tensor, functions, candidate)
            if best is None or value > best[0] + TIE_TOL:
                best = (value, label, candidate)
        value, label, portfolio = best
        steps.append(IncrementalStep(k * granularity, portfolio, value, label))
    return steps
