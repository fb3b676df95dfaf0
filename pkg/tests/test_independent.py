import math

import numpy as np
import pytest

from vaxfront import (
    BudgetExceeded,
    CostFunction,
    MetapopModel,
    Strategy,
    cost,
    effective_re,
    eradication_cost,
    has_symmetric_support,
    max_independent_set,
)
from vaxfront import fixtures
from vaxfront.acceptance import brute_force_mwis, random_model

UNIFORM = CostFunction.uniform()


def model_of(matrix, weights=None):
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if weights is None:
        weights = np.full(n, 1.0 / n)
        weights[-1] += 1.0 - math.fsum(weights.tolist())
    return MetapopModel(weights=np.asarray(weights, dtype=float), matrix=matrix)


class TestMaxIndependentSet:
    def test_cycle_half(self):
        result = max_independent_set(fixtures.cycle_model(), UNIFORM)
        assert len(result.set) == 6
        assert result.alpha == 0.5
        assert result.set == (0, 2, 4, 6, 8, 10)

    def test_triangle(self):
        triangle = model_of([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
        result = max_independent_set(triangle, UNIFORM)
        assert len(result.set) == 1
        assert result.alpha == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_zero_matrix_everything(self):
        model = model_of(np.zeros((5, 5)))
        result = max_independent_set(model, UNIFORM)
        assert result.set == (0, 1, 2, 3, 4)
        assert result.alpha == pytest.approx(1.0, abs=1e-15)
        assert result.cstar == 0.0

    def test_self_loop_excluded(self):
        model = model_of([[1.0, 0.0], [0.0, 0.0]])
        result = max_independent_set(model, UNIFORM)
        assert result.set == (1,)

    def test_budget(self):
        model = model_of(np.zeros((41, 41)), weights=np.full(41, 1.0 / 41))
        with pytest.raises(BudgetExceeded):
            max_independent_set(model, UNIFORM)
        forced = max_independent_set(model, UNIFORM, force=True)
        assert len(forced.set) == 41

    def test_support_only_dependence(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            n = int(rng.integers(3, 10))
            model = random_model(rng, n, density=0.4)
            support = model_of((model.matrix > 0).astype(float), model.weights)
            a = max_independent_set(model, UNIFORM)
            b = max_independent_set(support, UNIFORM)
            assert a.set == b.set

    def test_brute_force_equivalence(self):
        rng = np.random.default_rng(42)
        for trial in range(60):
            n = int(rng.integers(3, 13))
            model = random_model(rng, n, density=0.15 + 0.5 * rng.random())
            cost_fn = (
                UNIFORM if trial % 2 else CostFunction.affine(0.5 + rng.random(n))
            )
            exact = max_independent_set(model, cost_fn)
            _, oracle = brute_force_mwis(model, cost_fn)
            assert exact.weight == oracle

    def test_lexicographic_tie_break(self):
        # Two disjoint edges: four optimal pairs; {0, 2} is lexicographically
        # smallest.
        k = np.zeros((4, 4))
        k[0, 1] = k[1, 0] = 1.0
        k[2, 3] = k[3, 2] = 1.0
        result = max_independent_set(model_of(k), UNIFORM)
        assert result.set == (0, 2)


class TestEradicationCost:
    def test_cycle_exact_half(self):
        result = eradication_cost(fixtures.cycle_model(), UNIFORM)
        assert result.cstar == 0.5
        assert result.exact
        assert result.set == (0, 2, 4, 6, 8, 10)
        assert effective_re(fixtures.cycle_model(), result.strategy) <= 1e-10

    def test_positive_matrix_needs_everyone(self):
        model = model_of([[1.0, 1.0], [1.0, 1.0]])
        result = eradication_cost(model, UNIFORM)
        assert result.exact
        assert result.set == ()
        assert result.cstar == pytest.approx(1.0, abs=1e-15)

    def test_reducible_remainder_bound(self):
        # Group 0 is quasi-nilpotent remainder; the atom {1} has a self-loop.
        model = model_of([[0.0, 1.0], [0.0, 2.0]])
        assert not has_symmetric_support(model)
        result = eradication_cost(model, UNIFORM)
        assert not result.exact
        assert result.set == (0,)
        assert result.cstar == pytest.approx(0.5, abs=1e-15)
        assert effective_re(model, result.strategy) <= 1e-10

    def test_returned_strategy_always_eradicates(self):
        rng = np.random.default_rng(43)
        for _ in range(40):
            n = int(rng.integers(2, 10))
            model = random_model(rng, n, density=0.4)
            result = eradication_cost(model, UNIFORM)
            assert effective_re(model, result.strategy) <= 1e-10
            assert result.cstar == cost(UNIFORM, model, result.strategy)

    def test_strategy_matches_set(self):
        result = eradication_cost(fixtures.cycle_model(), UNIFORM)
        expected = Strategy.indicator(12, result.set)
        assert np.array_equal(result.strategy.values, expected.values)
