import numpy as np
import pytest

import seqport.harness as harness
from seqport.eaf import Grid, compute_eaf
from seqport.errors import ConfigError
from seqport.harness import (HillClimber, RandomSearch, ToyFunction, builtin_functions,
                             builtin_optimizers, run_experiment, run_seed)
from seqport.perf import Portfolio, perf

SMALL = Grid((10, 20, 50), (1.0, 0.1), 50)


def local_minima_1d(values):
    v = np.asarray(values)
    return int(np.sum((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])))


class TestFunctions:
    @pytest.mark.parametrize("func", builtin_functions(10), ids=lambda f: f.name)
    def test_optimum_and_lower_bound(self, func):
        assert func(func.x_opt) == func.f_opt
        rng = np.random.default_rng(0)
        xs = rng.uniform(func.lower, func.upper, (2000, func.dim))
        assert np.all(func(xs) >= func.f_opt)
        assert np.all(np.abs(func.x_opt) <= 0.8 * func.upper)

    def test_sphere_is_squared_distance(self):
        sphere = builtin_functions(5)[0]
        x = np.random.default_rng(3).uniform(-5, 5, (10, 5))
        np.testing.assert_allclose(sphere(x) - sphere.f_opt,
                                   np.sum((x - sphere.x_opt) ** 2, axis=1), rtol=1e-12)

    def test_rastrigin_axis_slices_are_multimodal(self):
        func = next(f for f in builtin_functions(10) if f.kind == "rastrigin")
        grid = np.linspace(func.lower, func.upper, 4001)
        for axis in range(func.dim):
            pts = np.repeat(func.x_opt[None, :], grid.size, axis=0)
            pts[:, axis] = grid
            assert local_minima_1d(func(pts)) >= 2

    def test_rotation_is_orthogonal(self):
        func = ToyFunction("r", "rastrigin", 6, rotated=True)
        np.testing.assert_allclose(func.rotation @ func.rotation.T, np.eye(6), atol=1e-12)

    def test_dimension_configurable(self):
        assert {f.dim for f in builtin_functions(3)} == {3}

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ToyFunction("x", "bogus")(np.zeros(10))


class TestOptimizers:
    @pytest.mark.parametrize("opt", builtin_optimizers(), ids=lambda o: o.name)
    def test_budget_consumed(self, opt):
        func = builtin_functions(4)[1]
        rngs = [np.random.default_rng(i) for i in range(3)]
        assert opt.run(func, 37, rngs).shape == (3, 37)

    def test_hill_climber_stays_at_optimum(self, monkeypatch):
        func = builtin_functions(5)[2]
        monkeypatch.setattr(harness, "_uniform_start",
                            lambda f, rngs: np.repeat(f.x_opt[None, :], len(rngs), axis=0))
        out = HillClimber().run(func, 200, [np.random.default_rng(1)])
        assert np.minimum.accumulate(out[0]).tolist() == [func.f_opt] * 200

    def test_split_budget_effect(self):
        # 100 seeded hill-climber runs on the rotated multimodal function
        func = next(f for f in builtin_functions(10) if f.kind == "rastrigin")
        grid = Grid((1000, 5000, 10000), Grid.analysis().precisions, 10000)
        arch = run_experiment([func], [HillClimber()], grid, runs=100, master_seed=11)
        t = compute_eaf(arch, grid)
        single = perf(t, None, Portfolio({("hillclimb", 10000): 1}))
        split = perf(t, None, Portfolio({("hillclimb", 1000): 10}))
        assert split > single


class TestRunExperiment:
    def test_single_run(self):
        arch = run_experiment(builtin_functions(3)[:2], [RandomSearch()], SMALL, runs=1)
        assert arch.values.shape == (2, 1, 1, 3)

    def test_determinism_and_workers(self):
        funcs, opts = builtin_functions(3), builtin_optimizers()
        a = run_experiment(funcs, opts, SMALL, runs=3, master_seed=5)
        b = run_experiment(funcs, opts, SMALL, runs=3, master_seed=5)
        c = run_experiment(funcs, opts, SMALL, runs=3, master_seed=5, n_jobs=2)
        assert a.values.tobytes() == b.values.tobytes() == c.values.tobytes()
        d = run_experiment(funcs, opts, SMALL, runs=3, master_seed=6)
        assert a.values.tobytes() != d.values.tobytes()

    def test_seed_isolation(self):
        funcs, opts = builtin_functions(3), builtin_optimizers()
        few = run_experiment(funcs, opts, SMALL, runs=2, master_seed=9)
        many = run_experiment(funcs, opts, SMALL, runs=5, master_seed=9)
        np.testing.assert_array_equal(few.values, many.values[:, :, :2])
        # neither the function list nor the optimizer order matters
        alone = run_experiment(funcs[2:], opts[::-1], SMALL, runs=2, master_seed=9)
        np.testing.assert_array_equal(alone.values[0, ::-1], few.values[2])

    def test_seed_derivation(self):
        s1 = run_seed(0, "f", "a", 0).generate_state(2)
        assert s1.tolist() == run_seed(0, "f", "a", 0).generate_state(2).tolist()
        assert s1.tolist() != run_seed(0, "f", "a", 1).generate_state(2).tolist()

    def test_validation(self):
        with pytest.raises(ConfigError):
            run_experiment(builtin_functions(2), builtin_optimizers(), SMALL, runs=0)
        with pytest.raises(ConfigError):
            run_experiment(builtin_functions(2), [RandomSearch(), RandomSearch()], SMALL)

    def test_default_archive_invariants(self, toy_archive):
        v = toy_archive.values
        assert v.shape == (4, 4, 20, 50)
        assert not np.isnan(v).any()
        assert np.all(np.diff(v, axis=-1) <= 0)
        for fi, f in enumerate(toy_archive.functions):
            assert np.all(v[fi] >= toy_archive.f_opt[f])
        assert toy_archive.checkpoints[-1] == 10000
