import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bernoulli_perf, constant_tensor, random_tensor
from seqport.eaf import EafTensor, Grid, mean_attainment
from seqport.errors import ConfigError, DataError, UnknownKeyError
from seqport.perf import (Portfolio, lower_baseline, make_report, per_function_perf, perf,
                          relative_improvement, upper_baseline)


@st.composite
def tensors_and_portfolios(draw, max_pairs=5):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    n_a = draw(st.integers(1, 3))
    budgets = (1, 2, 3, 5)
    t = random_tensor(rng, n_functions=draw(st.integers(1, 3)), n_algorithms=n_a,
                      budgets=budgets, n_eps=draw(st.integers(1, 4)))
    pairs = draw(st.lists(
        st.tuples(st.sampled_from(t.algorithms), st.sampled_from(budgets),
                  st.integers(1, 3)),
        max_size=max_pairs))
    counts: dict = {}
    for a, b, n in pairs:
        counts[(a, b)] = counts.get((a, b), 0) + n
    return t, Portfolio(counts)


class TestPortfolio:
    def test_canonical_and_immutable(self):
        p = Portfolio({("b", 2): 1, ("a", 3): 2})
        q = Portfolio({("a", 3): 2, ("b", 2): 1})
        assert p == q and hash(p) == hash(q)
        assert p.key == ((("a", 3), 2), (("b", 2), 1))
        assert p.cost == 8 and p.size == 3
        assert p.add("b", 2).key[-1] == (("b", 2), 2)
        assert p[("b", 2)] == 1

    def test_zero_counts_dropped(self):
        assert len(Portfolio({("a", 1): 0})) == 0

    def test_remove(self):
        p = Portfolio({("a", 1): 1})
        assert len(p.remove("a", 1)) == 0
        with pytest.raises(KeyError):
            p.remove("b", 1)

    def test_expand(self):
        p = Portfolio({("a", 1): 2, ("b", 4): 1})
        assert sorted(p.expand()) == [("a", 1), ("a", 1), ("b", 4)]


class TestPerf:
    def test_empty_portfolio(self):
        assert perf(constant_tensor(0.7), None, Portfolio()) == 0.0

    def test_certain_pair(self):
        assert perf(constant_tensor(1.0), None, Portfolio({("a", 1): 1})) == 1.0

    def test_two_halves(self):
        assert perf(constant_tensor(0.5), None, Portfolio({("a", 2): 2})) == 0.75

    def test_unknown_pair_named(self):
        t = constant_tensor(0.5)
        with pytest.raises(UnknownKeyError, match=r"\('zz', 1\)"):
            perf(t, None, Portfolio({("zz", 1): 1}))
        with pytest.raises(UnknownKeyError, match=r"\('a', 7\)"):
            perf(t, None, Portfolio({("a", 7): 1}))

    def test_empty_function_subset(self):
        with pytest.raises(ConfigError):
            perf(constant_tensor(0.5), [], Portfolio({("a", 1): 1}))

    @settings(max_examples=200, deadline=None)
    @given(tensors_and_portfolios())
    def test_matches_bernoulli_expansion(self, tp):
        t, p = tp
        assert abs(perf(t, None, p) - bernoulli_perf(t, None, p)) <= 1e-12

    @settings(max_examples=150, deadline=None)
    @given(tensors_and_portfolios(), st.data())
    def test_monotone_under_addition(self, tp, data):
        t, p = tp
        a = data.draw(st.sampled_from(t.algorithms))
        b = data.draw(st.sampled_from(t.grid.budgets))
        assert perf(t, None, p.add(a, b)) >= perf(t, None, p)

    @settings(max_examples=150, deadline=None)
    @given(tensors_and_portfolios())
    def test_bounds(self, tp):
        t, p = tp
        value = perf(t, None, p)
        assert 0.0 <= value <= 1.0
        # UB reads b_max; only meaningful when eaf is monotone in b
        mono = EafTensor(np.sort(t.values, axis=2), t.grid, t.algorithms, t.functions)
        assert perf(mono, None, p) <= upper_baseline(mono, None) + 1e-15

    @settings(max_examples=100, deadline=None)
    @given(tensors_and_portfolios(), st.randoms())
    def test_order_independent(self, tp, rnd):
        t, p = tp
        items = list(p.items())
        rnd.shuffle(items)
        assert perf(t, None, Portfolio(dict(items))) == perf(t, None, p)

    @settings(max_examples=100, deadline=None)
    @given(tensors_and_portfolios())
    def test_mean_of_per_function(self, tp):
        t, p = tp
        per_fn = [per_function_perf(t, f, p) for f in t.functions]
        assert perf(t, None, p) == pytest.approx(np.mean(per_fn), abs=1e-14)


class TestPerFunction:
    def test_single_pair_is_mean_attainment(self, rng):
        t = random_tensor(rng)
        for f in t.functions:
            assert per_function_perf(t, f, Portfolio({("a1", 2): 1})) == pytest.approx(
                mean_attainment(t, f, "a1", 2), abs=1e-15)

    def test_certain_member_dominates(self, rng):
        t = random_tensor(rng, n_functions=1)
        v = np.array(t.values)
        v[0, 0, 1, :] = 1.0
        t = EafTensor(v, t.grid, t.algorithms, t.functions)
        p = Portfolio({("a0", 2): 1, ("a1", 1): 3})
        assert per_function_perf(t, "f0", p) == 1.0

    def test_zero_pair_duplicate_changes_nothing(self, rng):
        t = random_tensor(rng, n_functions=1)
        v = np.array(t.values)
        v[0, 1, 0, :] = 0.0
        t = EafTensor(v, t.grid, t.algorithms, t.functions)
        p = Portfolio({("a0", 2): 1, ("a1", 1): 1})
        assert per_function_perf(t, "f0", p.add("a1", 1)) == per_function_perf(t, "f0", p)


class TestBaselines:
    def test_lb_single_algorithm(self, rng):
        t = random_tensor(rng, n_algorithms=1, budgets=(1, 2, 4), total_budget=4)
        assert lower_baseline(t, None, 3) == (perf(t, None, Portfolio({("a0", 2): 1})), "a0")

    def test_lb_dominance(self, rng):
        t = random_tensor(rng)
        v = np.array(t.values)
        v[:, 1] = np.minimum(v[:, 0] + 0.1, 1.0)
        t = EafTensor(v, t.grid, t.algorithms, t.functions)
        assert lower_baseline(t, None, 3)[1] == "a1"

    def test_lb_tie_goes_to_smallest_name(self):
        t = constant_tensor(0.3, algorithms=("zeta", "alpha", "mid"))
        assert lower_baseline(t, None, 3)[1] == "alpha"

    def test_lb_budget_below_grid(self):
        with pytest.raises(ConfigError):
            lower_baseline(constant_tensor(0.3, budgets=(2, 3)), None, 1)

    def test_lb_brute_force_on_toy(self, toy_tensor):
        T = 10000
        values = {a: perf(toy_tensor, None, Portfolio({(a, T): 1}))
                  for a in toy_tensor.algorithms}
        best = max(values.values())
        expected = min(a for a, v in values.items() if v == best)
        assert lower_baseline(toy_tensor, None, T) == (best, expected)

    def test_ub_examples(self):
        assert upper_baseline(constant_tensor(0.01), None) == 1.0
        assert upper_baseline(constant_tensor(0.0), None) == 0.0
        v = np.zeros((1, 2, 1, 4))
        v[0, 0, 0, :3] = 0.2
        v[0, 1, 0, :2] = 0.9
        t = EafTensor(v, Grid((1,), (1.0, 0.1, 0.01, 0.001), 1), ("a", "b"), ("f",))
        assert upper_baseline(t, None) == 0.75

    def test_ub_reads_largest_budget(self):
        v = np.zeros((1, 1, 2, 1))
        v[0, 0, 1, 0] = 0.5
        t = EafTensor(v, Grid((1, 2), (1.0,), 1), ("a",), ("f",))
        assert upper_baseline(t, None) == 1.0

    @pytest.mark.parametrize("value, lb, ub, expected", [
        (0.2, 0.2, 0.8, 0.0),
        (0.8, 0.2, 0.8, 1.0),
        (0.5, 0.2, 0.8, 0.5),
        (0.4, 0.4, 0.4, 0.0),
    ])
    def test_relative_improvement(self, value, lb, ub, expected):
        assert relative_improvement(value, lb, ub) == pytest.approx(expected, abs=1e-15)

    def test_relative_improvement_inverted(self):
        with pytest.raises(DataError):
            relative_improvement(0.5, 0.6, 0.5)


class TestReport:
    def test_fields(self, rng):
        t = random_tensor(rng, monotone=True, budgets=(1, 2, 3), total_budget=3)
        p = Portfolio({("a0", 1): 1, ("a1", 2): 1})
        r = make_report(t, None, p)
        assert r.perf == pytest.approx(np.mean(list(r.per_function.values())), abs=1e-14)
        assert r.lb <= r.ub
        assert r.cost == 3
        assert r.relative_improvement == relative_improvement(r.perf, r.lb, r.ub)
        d = r.as_dict()
        assert d["portfolio"] == [["a0", 1, 1], ["a1", 2, 1]]

    def test_over_budget(self, rng):
        t = random_tensor(rng, budgets=(1, 2, 3), total_budget=3)
        with pytest.raises(ConfigError, match="exceeds"):
            make_report(t, None, Portfolio({("a0", 3): 2}))
