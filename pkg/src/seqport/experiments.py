"""Experiment drivers behind the command-line tool.

Each driver returns plain rows (lists of dicts) so the CLI only formats and
writes them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .continuous_space import continuous_search
from .eaf import EafTensor, mean_attainment
from .enumeration import enumerate_portfolios
from .errors import ConfigError
from .greedy import build_greedy, grid_search_penalty
from .incremental import build_incremental
from .integer_space import ga_run
from .perf import (Portfolio, budget_cap, lower_baseline, per_function_perf, perf,
                   relative_improvement, upper_baseline)
from .storage import Config

__all__ = ["METHODS", "MethodResult", "run_method", "compare", "sweep", "penalty_grid",
           "per_function_table", "eaf_summary"]

METHODS = ("greedy", "enum", "incremental", "ga", "cont")


@dataclass
class MethodResult:
    method: str
    portfolio: Portfolio
    perf: float
    evaluations: int = 0
    seconds: float = 0.0
    details: dict = field(default_factory=dict)


def _enum_size(cfg: Config, tensor: EafTensor):
    if cfg.enum_max_size is not None:
        return cfg.enum_max_size if cfg.enum_max_size > 0 else None
    return 10 if len(tensor.algorithms) == 1 else 5


def run_method(tensor: EafTensor, functions, total_budget: int, method: str,
               cfg: Config | None = None, variant: str | None = None,
               eval_budget: int | None = None) -> MethodResult:
    """Build one portfolio with ``method``.

    ``variant`` selects ``"1+1"`` / ``"10+20"`` for the GA and
    ``"pattern"`` / ``"es"`` for the continuous search.
    """
    cfg = cfg or Config()
    budget_cap(tensor, total_budget)
    if eval_budget is None:
        eval_budget = cfg.eval_budget or 1000 * len(tensor.algorithms)
    start = time.perf_counter()
    details: dict = {}
    if method == "greedy":
        portfolio, trace = build_greedy(tensor, functions, total_budget, cfg.penalty)
        evaluations = len(trace)
        value = perf(tensor, functions, portfolio)
        label = f"greedy(w={cfg.penalty.weight:g},p={cfg.penalty.power:g})"
        details["trace"] = trace
    elif method == "enum":
        size = _enum_size(cfg, tensor)
        portfolio, value, evaluations = enumerate_portfolios(
            tensor, functions, None, total_budget, max_size=size, cap=cfg.enum_cap)
        label = "enum" if size is None else f"enum(size<={size})"
    elif method == "incremental":
        g = cfg.granularity or tensor.grid.feasible_budgets(total_budget)[0]
        steps = build_incremental(tensor, functions, g, total_budget)
        portfolio, value = steps[-1].portfolio, steps[-1].perf
        evaluations = len(steps)
        label = f"incremental(g={g})"
        details["steps"] = steps
    elif method == "ga":
        variant = variant or "10+20"
        mu, lam = _plus_strategy(variant)
        res = ga_run(tensor, functions, None, total_budget,
                     cfg.ga_config(eval_budget, mu=mu, lam=lam))
        portfolio, value, evaluations = res.portfolio, res.perf, res.evaluations
        label = f"ga({variant})"
        details["history"] = res.history
    elif method == "cont":
        variant = variant or cfg.cont_optimizer
        res = continuous_search(tensor, functions, None, total_budget, cfg.k, cfg.projection,
                                variant, eval_budget, cfg.seed)
        portfolio, value, evaluations = res.portfolio, res.perf, res.evaluations
        label = f"cont({cfg.projection},k={cfg.k},{variant})"
        details["history"] = res.history
    else:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    return MethodResult(label, portfolio, value, evaluations,
                        time.perf_counter() - start, details)


def _plus_strategy(variant: str):
    try:
        mu, lam = (int(s) for s in variant.split("+"))
    except ValueError:
        raise ConfigError(f"GA variant must look like 'mu+lambda', got {variant!r}") from None
    return mu, lam


def compare(tensor: EafTensor, functions, total_budget: int, cfg: Config | None = None,
            eval_budget: int | None = None) -> list[dict]:
    """All construction methods on one instance, heuristics sharing one
    evaluation budget (``1000 * n_algorithms`` unless configured)."""
    cfg = cfg or Config()
    if eval_budget is None:
        eval_budget = cfg.eval_budget or 1000 * len(tensor.algorithms)
    lb, sbs = lower_baseline(tensor, functions, total_budget)
    ub = upper_baseline(tensor, functions)
    runs = [("enum", None), ("greedy", None), ("incremental", None), ("ga", "1+1"),
            ("ga", "10+20"), ("cont", "pattern"), ("cont", "es")]
    rows = []
    for method, variant in runs:
        res = run_method(tensor, functions, total_budget, method, cfg, variant, eval_budget)
        rows.append({
            "method": res.method,
            "perf": res.perf,
            "lb": lb,
            "ub": ub,
            "sbs": sbs,
            "relative_improvement_pct": 100.0 * relative_improvement(res.perf, lb, ub),
            "size": res.portfolio.size,
            "cost": res.portfolio.cost,
            "evaluations": res.evaluations,
            "seconds": res.seconds,
            "portfolio": res.portfolio,
        })
    return rows


def sweep(tensor: EafTensor, functions, totals, cfg: Config | None = None,
          incremental: bool = False, granularity: int | None = None) -> list[dict]:
    """Greedy portfolio and SBS for each total budget in ``totals``.

    Budget levels above the current total are removed before building. With
    ``incremental``, one incremental trajectory of step ``granularity`` is
    grown up to ``max(totals)`` and read off at each total.
    """
    cfg = cfg or Config()
    totals = sorted(int(t) for t in totals)
    steps_by_total = {}
    if incremental:
        g = granularity or cfg.granularity or totals[0]
        full = tensor.with_total_budget(totals[-1])
        for step in build_incremental(full, functions, g, totals[-1]):
            steps_by_total[step.total] = step
    rows = []
    for total in totals:
        sub = tensor.with_total_budget(total)
        portfolio, _ = build_greedy(sub, functions, total, cfg.penalty)
        value = perf(sub, functions, portfolio)
        lb, sbs = lower_baseline(sub, functions, total)
        ub = upper_baseline(sub, functions)
        row = {
            "total_budget": total,
            "lb": lb,
            "sbs": sbs,
            "ub": ub,
            "greedy_perf": value,
            "greedy_relative_improvement": relative_improvement(value, lb, ub),
            "greedy_size": portfolio.size,
            "greedy_portfolio": portfolio,
        }
        if incremental:
            step = steps_by_total.get(total)
            row["incremental_perf"] = step.perf if step else float("nan")
            row["incremental_portfolio"] = step.portfolio if step else Portfolio()
        rows.append(row)
    return rows


def penalty_grid(tensor: EafTensor, functions, total_budget: int, weights, powers) -> list[dict]:
    return grid_search_penalty(tensor, functions, total_budget, weights, powers)


def per_function_table(tensor: EafTensor, functions, portfolio: Portfolio,
                       total_budget: int) -> list[dict]:
    """Per function: best single algorithm at the full budget, the SBS and
    the portfolio."""
    functions = list(tensor.functions) if functions is None else list(functions)
    b = budget_cap(tensor, total_budget)
    _, sbs = lower_baseline(tensor, functions, total_budget)
    rows = []
    for f in functions:
        singles = {a: mean_attainment(tensor, f, a, b) for a in sorted(tensor.algorithms)}
        best_alg = min(singles, key=lambda a: -singles[a])
        rows.append({
            "function": f,
            "best_algorithm": best_alg,
            "best_algorithm_perf": singles[best_alg],
            "sbs": sbs,
            "sbs_perf": singles[sbs],
            "portfolio_perf": per_function_perf(tensor, f, portfolio),
        })
    return rows


def eaf_summary(tensor: EafTensor) -> list[dict]:
    """Mean attainment over precisions for every (function, algorithm, budget)."""
    rows = []
    for f in tensor.functions:
        for a in tensor.algorithms:
            for b in tensor.grid.budgets:
                rows.append({"function": f, "algorithm": a, "budget": b,
                             "mean_attainment": mean_attainment(tensor, f, a, b)})
    return rows
