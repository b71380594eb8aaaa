"""Sequential, budget-heterogeneous algorithm portfolios built from
benchmark run data."""

from .eaf import EafTensor, Grid, RunArchive, best_so_far, compute_eaf, mean_attainment
from .enumeration import enumerate_compositions, enumerate_portfolios
from .greedy import PenaltyConfig, build_greedy, grid_search_penalty, penalty
from .incremental import build_incremental
from .perf import (PerfReport, Portfolio, lower_baseline, make_report, per_function_perf, perf,
                   relative_improvement, upper_baseline)
from .shapley import shapley_per_function, shapley_table

__version__ = "0.1.0"
