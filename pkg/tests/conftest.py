import math
import time

import numpy as np
import pytest

from seqport.eaf import EafTensor, Grid, compute_eaf
from seqport.harness import builtin_functions, builtin_optimizers, run_experiment

ACCEPTANCE_LINES: list[str] = []
# wall-clock seconds spent building session fixtures
TIMINGS: dict[str, float] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_tensor(rng, n_functions=2, n_algorithms=2, budgets=(1, 2, 3), n_eps=3,
                  total_budget=None, runs=None, monotone=False) -> EafTensor:
    """Random attainment tensor; with ``monotone`` it is built from sorted
    random values so both monotonicity axes hold."""
    budgets = tuple(budgets)
    grid = Grid(budgets, tuple(10.0 ** -i for i in range(n_eps)),
                total_budget or budgets[-1])
    shape = (n_functions, n_algorithms, len(budgets), n_eps)
    if runs:
        values = rng.integers(0, runs + 1, size=shape) / runs
    else:
        values = rng.random(shape)
        # sprinkle exact zeros and ones so edge factors get exercised
        values[rng.random(shape) < 0.15] = 0.0
        values[rng.random(shape) < 0.05] = 1.0
    if monotone:
        values = np.sort(values, axis=2)
        values = np.sort(values, axis=3)[..., ::-1]
    algs = tuple(f"a{i}" for i in range(n_algorithms))
    fns = tuple(f"f{i}" for i in range(n_functions))
    return EafTensor(values, grid, algs, fns, runs or 1)


def constant_tensor(value, n_functions=1, algorithms=("a", "b"), budgets=(1, 2, 3), n_eps=4,
                    total_budget=None) -> EafTensor:
    grid = Grid(tuple(budgets), tuple(10.0 ** -i for i in range(n_eps)),
                total_budget or budgets[-1])
    values = np.full((n_functions, len(algorithms), len(budgets), n_eps), float(value))
    return EafTensor(values, grid, tuple(algorithms),
                     tuple(f"f{i}" for i in range(n_functions)))


def bernoulli_perf(tensor, functions, portfolio) -> float:
    """Independent oracle: one Bernoulli trial per run in the expanded
    multiset, plain Python arithmetic."""
    functions = list(tensor.functions) if functions is None else list(functions)
    runs = portfolio.expand()
    total = 0.0
    for f in functions:
        fi = tensor.functions.index(f)
        for e in range(len(tensor.grid.precisions)):
            fail = math.prod(
                1.0 - float(tensor.values[fi, tensor.algorithms.index(a),
                                          tensor.grid.budgets.index(b), e])
                for a, b in runs
            )
            total += 1.0 - fail
    return total / (len(functions) * len(tensor.grid.precisions))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def analysis_grid():
    return Grid.analysis()


@pytest.fixture(scope="session")
def toy_archive(analysis_grid):
    """Default toy archive: 4 functions x 4 optimizers x 20 runs, d = 10."""
    start = time.perf_counter()
    archive = run_experiment(builtin_functions(10), builtin_optimizers(), analysis_grid, 20, 0)
    TIMINGS["toy_archive"] = time.perf_counter() - start
    return archive


@pytest.fixture(scope="session")
def toy_tensor(toy_archive, analysis_grid):
    return compute_eaf(toy_archive, analysis_grid)
