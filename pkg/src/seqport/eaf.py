"""Run archives and the discretized empirical attainment tensor."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError, UnknownKeyError

__all__ = [
    "Grid",
    "RunArchive",
    "EafTensor",
    "best_so_far",
    "compute_eaf",
    "mean_attainment",
    "log_precisions",
]


def log_precisions(divisor: float, count: int, top_exponent: float = 2.0) -> tuple[float, ...]:
    """Targets ``10 ** (top_exponent - x / divisor)`` for ``x = 0 .. count - 1``."""
    return tuple(10.0 ** (top_exponent - x / divisor) for x in range(count))


@dataclass(frozen=True)
class Grid:
    """Budget levels, precision targets and the total budget ``T``.

    ``budgets`` are strictly increasing evaluation counts, ``precisions`` are
    strictly decreasing objective-gap thresholds.
    """

    budgets: tuple[int, ...]
    precisions: tuple[float, ...]
    total_budget: int

    def __post_init__(self):
        budgets = tuple(int(b) for b in self.budgets)
        precisions = tuple(float(e) for e in self.precisions)
        object.__setattr__(self, "budgets", budgets)
        object.__setattr__(self, "precisions", precisions)
        object.__setattr__(self, "total_budget", int(self.total_budget))
        if not budgets:
            raise ConfigError("grid needs at least one budget level")
        if not precisions:
            raise ConfigError("grid needs at least one precision level")
        if budgets[0] < 1 or any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
            raise ConfigError(f"budgets must be strictly increasing and >= 1: {budgets}")
        if precisions[-1] <= 0 or any(e2 >= e1 for e1, e2 in zip(precisions, precisions[1:])):
            raise ConfigError("precisions must be strictly decreasing and > 0")
        if self.total_budget < 1:
            raise ConfigError("total budget must be positive")
        if budgets[0] > self.total_budget:
            raise ConfigError(
                f"smallest budget {budgets[0]} exceeds total budget {self.total_budget}"
            )

    @classmethod
    def analysis(cls) -> "Grid":
        """B = {200 k : k = 1..50}, T = 10000, eps = 10^(2 - x/10), x = 0..100."""
        return cls(tuple(200 * k for k in range(1, 51)), log_precisions(10, 101), 10_000)

    @classmethod
    def coco(cls, k: int = 40) -> "Grid":
        """T_k = 500 k with B_k = {500 j : j <= k}, eps = 10^(2 - x/5), x = 0..50."""
        return cls(tuple(500 * j for j in range(1, k + 1)), log_precisions(5, 51), 500 * k)

    def feasible_budgets(self, limit: int | None = None) -> tuple[int, ...]:
        limit = self.total_budget if limit is None else limit
        return tuple(b for b in self.budgets if b <= limit)

    def with_total(self, total_budget: int) -> "Grid":
        """Same levels, different ``T`` (budgets above ``T`` are kept in the grid)."""
        return Grid(self.budgets, self.precisions, total_budget)


@dataclass(frozen=True, eq=False)
class RunArchive:
    """Best-so-far objective values of ``R`` runs per (function, algorithm).

    ``values[f, a, r, c]`` is the best value seen by run ``r`` of algorithm
    ``a`` on function ``f`` after ``checkpoints[c]`` evaluations. A run that
    stopped early is padded with NaN from its last checkpoint on.
    """

    algorithms: tuple[str, ...]
    functions: tuple[str, ...]
    f_opt: Mapping[str, float]
    checkpoints: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "checkpoints", tuple(int(c) for c in self.checkpoints))
        object.__setattr__(self, "f_opt", {f: float(self.f_opt[f]) for f in self.functions})
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        self.validate()

    @property
    def runs(self) -> int:
        return self.values.shape[2]

    def validate(self) -> None:
        if len(set(self.algorithms)) != len(self.algorithms) or not self.algorithms:
            raise DataError("algorithm identifiers must be non-empty and unique")
        if len(set(self.functions)) != len(self.functions) or not self.functions:
            raise DataError("function identifiers must be non-empty and unique")
        cps = self.checkpoints
        if not cps or cps[0] < 1 or any(c2 <= c1 for c1, c2 in zip(cps, cps[1:])):
            raise DataError("checkpoints must be strictly increasing positive integers")
        expected = (len(self.functions), len(self.algorithms), None, len(cps))
        shape = self.values.shape
        if self.values.ndim != 4 or shape[2] < 1 or any(
            e is not None and e != s for e, s in zip(expected, shape)
        ):
            raise DataError(f"values shape {shape} does not match (F, A, R>=1, C) = {expected}")
        # NaN padding may only appear as a suffix of a trajectory
        missing = np.isnan(self.values)
        if np.any(missing[..., :-1] & ~missing[..., 1:]):
            f, a, r, _ = np.argwhere(missing[..., :-1] & ~missing[..., 1:])[0]
            raise DataError(
                f"trajectory ({self.functions[f]}, {self.algorithms[a]}, run {r}) has a gap"
            )

    def covered_until(self) -> np.ndarray:
        """Largest checkpoint reached by each trajectory, 0 if none."""
        lengths = np.sum(~np.isnan(self.values), axis=-1)
        cps = np.array((0,) + self.checkpoints)
        return cps[lengths]

    def trajectory(self, function: str, algorithm: str, run: int) -> np.ndarray:
        f = _index(self.functions, function, "function")
        a = _index(self.algorithms, algorithm, "algorithm")
        return self.values[f, a, run]

    def subset(self, algorithms: Sequence[str] | None = None,
               functions: Sequence[str] | None = None) -> "RunArchive":
        algorithms = tuple(self.algorithms if algorithms is None else algorithms)
        functions = tuple(self.functions if functions is None else functions)
        ai = [_index(self.algorithms, a, "algorithm") for a in algorithms]
        fi = [_index(self.functions, f, "function") for f in functions]
        return RunArchive(algorithms, functions, {f: self.f_opt[f] for f in functions},
                          self.checkpoints, self.values[np.ix_(fi, ai)])


@dataclass(frozen=True, eq=False)
class EafTensor:
    """``values[f, a, b, e]``: fraction of runs within ``precisions[e]`` of the
    optimum after ``budgets[b]`` evaluations."""

    values: np.ndarray
    grid: Grid
    algorithms: tuple[str, ...]
    functions: tuple[str, ...]
    runs: int = 1
    _alg_pos: dict = field(init=False, repr=False)
    _fn_pos: dict = field(init=False, repr=False)
    _budget_pos: dict = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        shape = (len(self.functions), len(self.algorithms),
                 len(self.grid.budgets), len(self.grid.precisions))
        if values.shape != shape:
            raise DataError(f"tensor shape {values.shape} != {shape}")
        if np.any((values < 0) | (values > 1)) or np.isnan(values).any():
            raise DataError("attainment values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "_alg_pos", {a: i for i, a in enumerate(self.algorithms)})
        object.__setattr__(self, "_fn_pos", {f: i for i, f in enumerate(self.functions)})
        object.__setattr__(self, "_budget_pos", {b: i for i, b in enumerate(self.grid.budgets)})

    def alg_index(self, algorithm) -> int:
        try:
            return self._alg_pos[algorithm]
        except KeyError:
            raise UnknownKeyError(f"unknown algorithm {algorithm!r}") from None

    def fn_index(self, function) -> int:
        try:
            return self._fn_pos[function]
        except KeyError:
            raise UnknownKeyError(f"unknown function {function!r}") from None

    def budget_index(self, budget) -> int:
        try:
            return self._budget_pos[budget]
        except (KeyError, TypeError):
            raise UnknownKeyError(f"budget {budget!r} is not a grid level") from None

    def fn_indices(self, functions=None) -> list[int]:
        if functions is None:
            return list(range(len(self.functions)))
        idx = [self.fn_index(f) for f in functions]
        if not idx:
            raise ConfigError("function subset must not be empty")
        return idx

    def with_grid(self, grid: Grid) -> "EafTensor":
        """Restrict to ``grid`` (its levels must be a subset of ours)."""
        bi = [self.budget_index(b) for b in grid.budgets]
        pos = {e: i for i, e in enumerate(self.grid.precisions)}
        try:
            ei = [pos[e] for e in grid.precisions]
        except KeyError as exc:
            raise UnknownKeyError(f"precision {exc.args[0]!r} is not a grid level") from None
        values = self.values[:, :, bi][:, :, :, ei]
        return EafTensor(values, grid, self.algorithms, self.functions, self.runs)

    def with_total_budget(self, total_budget: int) -> "EafTensor":
        """Keep budget levels ``<= total_budget`` and set ``T`` accordingly."""
        grid = Grid(self.grid.feasible_budgets(total_budget), self.grid.precisions,
                    total_budget)
        return self.with_grid(grid)

    def subset(self, algorithms=None, functions=None) -> "EafTensor":
        algorithms = tuple(self.algorithms if algorithms is None else algorithms)
        functions = tuple(self.functions if functions is None else functions)
        ai = [self.alg_index(a) for a in algorithms]
        fi = [self.fn_index(f) for f in functions]
        return EafTensor(self.values[np.ix_(fi, ai)], self.grid, algorithms, functions,
                         self.runs)

    def checksum(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.values).tobytes())
        h.update(repr((self.grid, self.algorithms, self.functions)).encode())
        return h.hexdigest()


def _index(seq, key, kind):
    try:
        return seq.index(key)
    except ValueError:
        raise UnknownKeyError(f"unknown {kind} {key!r}") from None


def best_so_far(raw_values: Sequence[float]) -> np.ndarray:
    """Running minimum of a sequence of objective values."""
    raw = np.asarray(raw_values, dtype=float)
    if raw.size == 0:
        raise DataError("empty trajectory")
    return np.minimum.accumulate(raw.ravel())


def compute_eaf(archive: RunArchive, grid: Grid) -> EafTensor:
    """Estimate attainment probabilities on ``grid`` from ``archive``.

    The value at a grid budget is read from the last checkpoint at or below
    it; success uses the non-strict test ``best - f_opt <= eps``.
    """
    cps = np.asarray(archive.checkpoints)
    reached = archive.covered_until()
    short = np.argwhere(reached < grid.budgets[-1])
    if short.size:
        f, a, r = short[0]
        raise DataError(
            f"trajectory ({archive.functions[f]}, {archive.algorithms[a]}, run {r}) "
            f"ends at {reached[f, a, r]} evaluations, grid needs {grid.budgets[-1]}"
        )
    pos = np.searchsorted(cps, np.asarray(grid.budgets), side="right") - 1
    if pos[0] < 0:
        raise DataError(
            f"no checkpoint at or below budget {grid.budgets[0]} (first is {cps[0]})"
        )
    bsf = np.minimum.accumulate(archive.values, axis=-1)[..., pos]
    f_opt = np.array([archive.f_opt[f] for f in archive.functions])
    gap = bsf - f_opt[:, None, None, None]
    eps = np.asarray(grid.precisions)
    hits = gap[..., None] <= eps
    counts = hits.sum(axis=2)
    values = counts / archive.runs
    return EafTensor(values, grid, archive.algorithms, archive.functions, archive.runs)


def mean_attainment(tensor: EafTensor, function, algorithm, budget) -> float:
    """Average attainment over all precision levels for one (algorithm, budget)."""
    f = tensor.fn_index(function)
    a = tensor.alg_index(algorithm)
    b = tensor.budget_index(budget)
    return float(tensor.values[f, a, b].mean())
