"""Greedy portfolio construction with a budget penalty."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eaf import EafTensor
from .errors import ConfigError
from .perf import (TIE_TOL, Portfolio, budget_cap, lower_baseline, perf,
                   relative_improvement, upper_baseline)

__all__ = ["PenaltyConfig", "GreedyStep", "penalty", "score", "build_greedy",
           "grid_search_penalty"]

@dataclass(frozen=True)
class PenaltyConfig:
    weight: float = 0.1
    power: float = 2.0

    def __post_init__(self):
        if self.weight < 0:
            raise ConfigError(f"penalty weight must be >= 0, got {self.weight}")
        if self.power <= 0:
            raise ConfigError(f"penalty power must be > 0, got {self.power}")


@dataclass(frozen=True)
class GreedyStep:
    algorithm: str
    budget: int
    score: float
    perf: float


def penalty(budget: int, total_budget: int, cfg: PenaltyConfig) -> float:
    """``w * (b / T) ** p``."""
    if budget > total_budget:
        raise ConfigError(f"budget {budget} exceeds total budget {total_budget}")
    if budget <= 0:
        raise ConfigError(f"budget must be positive, got {budget}")
    return cfg.weight * (budget / total_budget) ** cfg.power


def score(tensor: EafTensor, functions, current: Portfolio, candidate, cfg: PenaltyConfig,
          total_budget: int) -> float:
    alg, budget = candidate
    if current.cost + budget > total_budget:
        raise ConfigError(
            f"candidate ({alg}, {budget}) does not fit: cost {current.cost} of {total_budget}"
        )
    return perf(tensor, functions, current.add(alg, budget)) - penalty(budget, total_budget, cfg)


def build_greedy(tensor: EafTensor, functions, total_budget: int,
                 cfg: PenaltyConfig | None = None) -> tuple[Portfolio, list[GreedyStep]]:
    """Grow a portfolio one pair at a time until no grid budget fits.

    At every step the feasible pair maximizing ``perf(M + pair) - penalty(b)``
    is added; ties (scores within ``TIE_TOL``) go to the smaller budget, then
    the smaller algorithm name.
    """
    cfg = cfg or PenaltyConfig()
    budget_cap(tensor, total_budget)
    fi = tensor.fn_indices(functions)
    algs = sorted(tensor.algorithms)
    a_idx = [tensor.alg_index(a) for a in algs]
    budgets = np.array(tensor.grid.feasible_budgets(total_budget))
    b_idx = [tensor.budget_index(int(b)) for b in budgets]
    # survival[f, b, a, e]: candidates ordered budget-major then by algorithm name
    survival = 1.0 - tensor.values[np.ix_(fi, a_idx, b_idx)].transpose(0, 2, 1, 3)
    penalties = np.array([penalty(int(b), total_budget, cfg) for b in budgets])

    portfolio = Portfolio()
    fail = np.ones((len(fi), len(tensor.grid.precisions)))
    trace: list[GreedyStep] = []
    remaining = total_budget
    while True:
        n_fit = int(np.searchsorted(budgets, remaining, side="right"))
        if n_fit == 0:
            break
        cand = 1.0 - (fail[:, None, None, :] * survival[:, :n_fit]).mean(axis=(0, 3))
        scores = cand - penalties[:n_fit, None]
        # first near-maximum in (budget, algorithm) order; scores equal up to
        # rounding count as tied
        flat = int(np.flatnonzero(scores.ravel() >= scores.max() - TIE_TOL)[0])
        bi, ai = divmod(flat, len(algs))
        budget = int(budgets[bi])
        fail = fail * survival[:, bi, ai, :]
        portfolio = portfolio.add(algs[ai], budget)
        remaining -= budget
        value = perf(tensor, functions, portfolio)
        trace.append(GreedyStep(algs[ai], budget, float(value - penalties[bi]), value))
    return portfolio, trace


def grid_search_penalty(tensor: EafTensor, functions, total_budget: int,
                        weights, powers) -> list[dict]:
    """Run the greedy builder for every (weight, power) cell."""
    weights, powers = list(weights), list(powers)
    if not weights or not powers:
        raise ConfigError("weights and powers must be non-empty")
    lb, _ = lower_baseline(tensor, functions, total_budget)
    ub = upper_baseline(tensor, functions)
    rows = []
    for w in weights:
        for p in powers:
            portfolio, _ = build_greedy(tensor, functions, total_budget, PenaltyConfig(w, p))
            value = perf(tensor, functions, portfolio)
            rows.append({
                "weight": w,
                "power": p,
                "perf": value,
                "relative_improvement": relative_improvement(value, lb, ub),
                "size": portfolio.size,
                "portfolio": portfolio,
            })
    return rows
