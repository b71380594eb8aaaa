"""Toy benchmark: a few test functions, a few simple optimizers, and a runner
that records checkpointed best-so-far values into a :class:`RunArchive`.

Optimizers advance all ``R`` runs of one (function, optimizer) pair in
lockstep for speed, but every run draws only from its own generator, so a
run's trajectory does not depend on which other runs exist.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .eaf import Grid, RunArchive
from .errors import ConfigError

__all__ = ["ToyFunction", "ToyOptimizer", "RandomSearch", "HillClimber", "OnePlusOneES",
           "CoordinateSearch", "builtin_functions", "builtin_optimizers", "run_seed",
           "run_experiment"]


@dataclass(frozen=True)
class ToyFunction:
    """Shifted test function on the box ``[lower, upper] ** dim``.

    ``kind`` is one of ``sphere``, ``ellipsoid``, ``rastrigin``, ``step``.
    With ``rotated`` the shifted coordinates are turned by a fixed random
    orthogonal matrix, which breaks separability.
    """

    name: str
    kind: str
    dim: int = 10
    f_opt: float = 0.0
    lower: float = -5.0
    upper: float = 5.0
    shift_seed: int = 0
    rotated: bool = False

    @cached_property
    def x_opt(self) -> np.ndarray:
        rng = np.random.default_rng([self.shift_seed, zlib.crc32(self.name.encode())])
        return rng.uniform(0.8 * self.lower, 0.8 * self.upper, self.dim)

    @cached_property
    def rotation(self) -> np.ndarray:
        rng = np.random.default_rng([self.shift_seed, zlib.crc32(self.name.encode()), 1])
        q, r = np.linalg.qr(rng.standard_normal((self.dim, self.dim)))
        return q * np.sign(np.diag(r))

    def raw(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "sphere":
            return np.sum(z * z, axis=-1)
        if self.kind == "ellipsoid":
            scale = 10.0 ** (6.0 * np.arange(self.dim) / max(self.dim - 1, 1))
            return np.sum(scale * z * z, axis=-1)
        if self.kind == "rastrigin":
            return 10.0 * self.dim + np.sum(z * z - 10.0 * np.cos(2 * np.pi * z), axis=-1)
        if self.kind == "step":
            return np.sum(np.floor(np.abs(z) + 0.5) ** 2, axis=-1)
        raise ConfigError(f"unknown function kind {self.kind!r}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = x - self.x_opt
        if self.rotated:
            z = z @ self.rotation.T
        value = self.raw(z)
        if self.kind == "rastrigin":
            # cos(0) rounding can leave a tiny negative residue at the optimum
            value = np.maximum(value, 0.0)
        return value + self.f_opt


def builtin_functions(dim: int = 10) -> list[ToyFunction]:
    return [
        ToyFunction("sphere", "sphere", dim, f_opt=0.0),
        ToyFunction("ellipsoid", "ellipsoid", dim, f_opt=1.5),
        ToyFunction("rastrigin", "rastrigin", dim, f_opt=-3.25, rotated=True),
        ToyFunction("step", "step", dim, f_opt=10.0, rotated=True),
    ]


class ToyOptimizer:
    """Base class. ``run`` returns the raw objective value of every
    evaluation, shaped (runs, budget)."""

    name = "optimizer"

    def run(self, func: ToyFunction, budget: int, rngs) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


def _uniform_start(func, rngs):
    return np.stack([rng.uniform(func.lower, func.upper, func.dim) for rng in rngs])


class RandomSearch(ToyOptimizer):
    name = "random"

    def run(self, func, budget, rngs):
        return np.stack([func(rng.uniform(func.lower, func.upper, (budget, func.dim)))
                         for rng in rngs])


class HillClimber(ToyOptimizer):
    """(1+1) search with a fixed Gaussian step and no restarts.

    Once stuck in a local basin it never leaves, which makes many short runs
    better than one long run on multimodal functions.
    """

    name = "hillclimb"

    def __init__(self, step: float = 0.1):
        self.step = step

    def run(self, func, budget, rngs):
        x = _uniform_start(func, rngs)
        noise = np.stack([rng.standard_normal((budget - 1, func.dim)) for rng in rngs])
        out = np.empty((len(rngs), budget))
        fx = func(x)
        out[:, 0] = fx
        for t in range(budget - 1):
            trial = np.clip(x + self.step * noise[:, t], func.lower, func.upper)
            ft = func(trial)
            out[:, t + 1] = ft
            better = ft < fx
            x[better] = trial[better]
            fx = np.where(better, ft, fx)
        return out


class OnePlusOneES(ToyOptimizer):
    """(1+1)-ES with the 1/5 success rule; ties are accepted."""

    name = "es"

    def __init__(self, sigma0: float = 1.0):
        self.sigma0 = sigma0

    def run(self, func, budget, rngs):
        x = _uniform_start(func, rngs)
        noise = np.stack([rng.standard_normal((budget - 1, func.dim)) for rng in rngs])
        out = np.empty((len(rngs), budget))
        fx = func(x)
        out[:, 0] = fx
        sigma = np.full(len(rngs), self.sigma0)
        up, down = np.exp(1.0 / 3.0), np.exp(-1.0 / 12.0)
        for t in range(budget - 1):
            trial = np.clip(x + sigma[:, None] * noise[:, t], func.lower, func.upper)
            ft = func(trial)
            out[:, t + 1] = ft
            success = ft < fx
            accept = ft <= fx
            x[accept] = trial[accept]
            fx = np.where(accept, ft, fx)
            sigma = np.clip(np.where(success, sigma * up, sigma * down), 1e-12, 10.0)
        return out


class CoordinateSearch(ToyOptimizer):
    """Cyclic coordinate line search: try +s then -s along one axis; a
    success doubles that axis' step, two failures halve it."""

    name = "coord"

    def __init__(self, step0: float = 1.0):
        self.step0 = step0

    def run(self, func, budget, rngs):
        n = len(rngs)
        x = _uniform_start(func, rngs)
        out = np.empty((n, budget))
        fx = func(x)
        out[:, 0] = fx
        steps = np.full((n, func.dim), self.step0)
        axis = np.zeros(n, dtype=int)
        minus = np.zeros(n, dtype=bool)
        rows = np.arange(n)
        for t in range(1, budget):
            s = steps[rows, axis]
            trial = x.copy()
            trial[rows, axis] = np.clip(x[rows, axis] + np.where(minus, -s, s),
                                        func.lower, func.upper)
            ft = func(trial)
            out[:, t] = ft
            better = ft < fx
            x[better] = trial[better]
            fx = np.where(better, ft, fx)
            steps[rows, axis] = np.where(better, s * 2.0,
                                         np.where(minus, s * 0.5, s))
            advance = better | minus
            minus = ~advance
            axis = np.where(advance, (axis + 1) % func.dim, axis)
        return out


def builtin_optimizers() -> list[ToyOptimizer]:
    return [RandomSearch(), HillClimber(), OnePlusOneES(), CoordinateSearch()]


def run_seed(master_seed: int, function_id: str, optimizer_id: str,
             run: int) -> np.random.SeedSequence:
    """Order-independent per-run seed."""
    return np.random.SeedSequence([
        int(master_seed) & 0xFFFFFFFF,
        zlib.crc32(function_id.encode()),
        zlib.crc32(optimizer_id.encode()),
        int(run),
    ])


def _run_pair(func, opt, checkpoints, runs, master_seed):
    rngs = [np.random.default_rng(run_seed(master_seed, func.name, opt.name, r))
            for r in runs]
    raw = opt.run(func, checkpoints[-1], rngs)
    if raw.shape != (len(rngs), checkpoints[-1]):
        raise RuntimeError(f"{opt.name} returned {raw.shape}, expected "
                           f"{(len(rngs), checkpoints[-1])}")
    bsf = np.minimum.accumulate(raw, axis=1)
    return bsf[:, np.asarray(checkpoints) - 1]


def run_experiment(functions, optimizers, grid: Grid, runs: int = 20, master_seed: int = 0,
                   n_jobs: int = 1) -> RunArchive:
    """``runs`` seeded runs of every optimizer on every function, each of
    ``max(grid.budgets)`` evaluations, checkpointed at the grid budgets."""
    if runs < 1:
        raise ConfigError("need at least one run")
    functions, optimizers = list(functions), list(optimizers)
    names = [o.name for o in optimizers]
    if len(set(names)) != len(names):
        raise ConfigError(f"optimizer names must be unique: {names}")
    checkpoints = tuple(grid.budgets)
    jobs = [(f, o) for f in functions for o in optimizers]
    args = [(f, o, checkpoints, list(range(runs)), master_seed) for f, o in jobs]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_pair, *zip(*args)))
    else:
        results = [_run_pair(*a) for a in args]
    values = np.empty((len(functions), len(optimizers), runs, len(checkpoints)))
    for (f, o), res in zip(jobs, results):
        values[functions.index(f), optimizers.index(o)] = res
    return RunArchive(tuple(names), tuple(f.name for f in functions),
                      {f.name: f.f_opt for f in functions}, checkpoints, values)
