#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Testes dos tipos de domínio, da avaliação e da partição.
"""

import numpy as np
import pytest
from scipy.stats import norm

from src.core import (
    Dataset,
    Hyperplane,
    ModelState,
    Partition,
    assign_partition,
    evaluate,
    log_likelihood,
    states_share_dimension,
)
from src.exceptions import ContractError, InputError


class TestHyperplane:
    """Testes do componente afim."""

    def test_rejects_non_positive_variance(self):
        """Variância zero ou negativa é rejeitada."""
        with pytest.raises(InputError):
            Hyperplane(0.0, [1.0], 0.0)
        with pytest.raises(InputError):
            Hyperplane(0.0, [1.0], -1.0)

    def test_rejects_non_finite_values(self):
        """Coeficientes não finitos são rejeitados."""
        with pytest.raises(InputError):
            Hyperplane(np.nan, [1.0], 1.0)
        with pytest.raises(InputError):
            Hyperplane(0.0, [np.inf], 1.0)

    def test_slope_is_read_only(self):
        """O vetor de inclinações é imutável."""
        plane = Hyperplane(1.0, [2.0, 3.0], 1.0)
        with pytest.raises(ValueError):
            plane.slope[0] = 5.0
        np.testing.assert_array_equal(plane.coefficients, [1.0, 2.0, 3.0])


class TestModelState:
    """Testes do estado max-afim."""

    def test_requires_at_least_one_plane(self):
        """K = 0 viola o contrato."""
        with pytest.raises(ContractError):
            ModelState(())

    def test_rejects_mixed_dimensions(self):
        """Todos os planos precisam da mesma dimensão."""
        with pytest.raises(InputError):
            ModelState((Hyperplane(0.0, [1.0], 1.0), Hyperplane(0.0, [1.0, 2.0], 1.0)))

    def test_without_preserves_order(self):
        """Remover um plano mantém a ordem dos demais."""
        state = ModelState.from_arrays([1.0, 2.0, 3.0], [[0.0], [1.0], [2.0]], [1.0, 1.0, 1.0])
        reduced = state.without(1)
        np.testing.assert_array_equal(reduced.intercepts, [1.0, 3.0])
        assert state.K == 3

    def test_without_single_plane_fails(self):
        """Não é possível remover o único plano."""
        state = ModelState.from_arrays([0.0], [[1.0]], [1.0])
        with pytest.raises(ContractError):
            state.without(0)


class TestEvaluate:
    """Testes da avaliação max-afim."""

    def test_two_planes(self):
        """max(x, -x) = |x|."""
        state = ModelState.from_arrays([0.0, 0.0], [[1.0], [-1.0]], [1.0, 1.0])
        assert evaluate(state, [-0.7]) == pytest.approx(0.7)
        assert evaluate(state, [0.3]) == pytest.approx(0.3)

    def test_single_plane(self):
        """Com um plano a função é afim."""
        state = ModelState.from_arrays([1.0], [[2.0, -1.0]], [1.0])
        assert evaluate(state, [0.5, 3.0]) == pytest.approx(1.0 + 1.0 - 3.0)

    def test_dimension_mismatch(self):
        """Ponto com dimensão errada gera InputError."""
        state = ModelState.from_arrays([0.0], [[1.0, 1.0]], [1.0])
        with pytest.raises(InputError):
            evaluate(state, [1.0])

    def test_batch_matches_pointwise(self, rng):
        """evaluate_many coincide com evaluate ponto a ponto."""
        state = ModelState.from_arrays(rng.normal(size=4), rng.normal(size=(4, 3)), np.ones(4))
        X = rng.normal(size=(25, 3))
        expected = [evaluate(state, x) for x in X]
        np.testing.assert_allclose(state.evaluate_many(X), expected, rtol=0, atol=1e-12)

    def test_midpoint_convexity(self, rng):
        """f(t x + (1 - t) x') <= t f(x) + (1 - t) f(x') em pontos aleatórios."""
        for _ in range(200):
            K = int(rng.integers(1, 7))
            state = ModelState.from_arrays(rng.normal(size=K), rng.normal(size=(K, 3)), np.ones(K))
            first, second = rng.uniform(-2, 2, size=(2, 3))
            t = rng.uniform()
            mixed = evaluate(state, t * first + (1 - t) * second)
            assert mixed <= t * evaluate(state, first) + (1 - t) * evaluate(state, second) + 1e-12

    def test_dominates_every_plane(self, rng):
        """f(x) >= alpha_k + beta_k^T x para todo k, com igualdade em algum k."""
        state = ModelState.from_arrays(rng.normal(size=5), rng.normal(size=(5, 2)), np.ones(5))
        for x in rng.uniform(-3, 3, size=(50, 2)):
            planes = [plane.value(x) for plane in state.hyperplanes]
            value = evaluate(state, x)
            assert all(value >= plane for plane in planes)
            assert value == pytest.approx(max(planes), abs=1e-12)


class TestPartition:
    """Testes da atribuição ao plano dominante."""

    def test_ties_go_to_lowest_index(self):
        """Em empates o menor índice vence."""
        state = ModelState.from_arrays([0.0, 0.0], [[1.0], [1.0]], [1.0, 1.0])
        data = Dataset(np.array([[0.1], [0.5], [-2.0]]), np.zeros(3))
        partition = assign_partition(state, data)
        np.testing.assert_array_equal(partition.assignment, [0, 0, 0])
        np.testing.assert_array_equal(partition.sizes, [3, 0])

    def test_subsets_cover_every_index_once(self, rng, v_state):
        """Os subconjuntos formam uma partição de 0..n-1."""
        data = Dataset(rng.uniform(-1, 1, size=(40, 1)), np.zeros(40))
        partition = assign_partition(v_state, data)
        merged = np.sort(np.concatenate(partition.subsets))
        np.testing.assert_array_equal(merged, np.arange(40))
        assert partition.K == 2
        for k, subset in enumerate(partition.subsets):
            assert np.all(partition.assignment[subset] == k)

    def test_value_comes_from_assigned_plane(self, rng):
        """evaluate(x_i) = alpha_j + beta_j^T x_i para o plano j da região de i."""
        state = ModelState.from_arrays(rng.normal(size=4), rng.normal(size=(4, 2)), np.ones(4))
        data = Dataset(rng.uniform(-1, 1, size=(60, 2)), np.zeros(60))
        partition = assign_partition(state, data)
        for x, j in zip(data.X, partition.assignment):
            assert evaluate(state, x) == pytest.approx(state.hyperplanes[j].value(x), abs=1e-12)

    def test_from_assignment_keeps_empty_regions(self):
        """Regiões sem pontos aparecem como subconjuntos vazios."""
        partition = Partition.from_assignment(np.array([2, 0, 2]), 4)
        np.testing.assert_array_equal(partition.sizes, [1, 0, 2, 0])


class TestLogLikelihood:
    """Testes da verossimilhança heterocedástica."""

    def test_matches_scipy(self, rng):
        """Cada resíduo usa a variância do plano dominante."""
        state = ModelState.from_arrays([0.0, 0.0], [[1.0], [-1.0]], [0.5, 2.0])
        X = rng.uniform(-1, 1, size=(30, 1))
        y = np.abs(X[:, 0]) + rng.normal(size=30)
        data = Dataset(X, y)
        variance = np.where(X[:, 0] >= 0, 0.5, 2.0)
        expected = norm.logpdf(y, loc=np.abs(X[:, 0]), scale=np.sqrt(variance)).sum()
        assert log_likelihood(state, data) == pytest.approx(expected, rel=1e-12)


class TestDataset:
    """Testes do contêiner de dados."""

    def test_rejects_length_mismatch(self):
        """X e y precisam ter o mesmo número de linhas."""
        with pytest.raises(InputError):
            Dataset(np.zeros((3, 1)), np.zeros(2))

    def test_rejects_non_finite(self):
        """Valores não finitos são rejeitados."""
        with pytest.raises(InputError):
            Dataset(np.array([[np.nan]]), np.array([1.0]))

    def test_design_has_intercept_column(self):
        """Linhas de desenho começam com 1."""
        data = Dataset(np.array([[2.0, 3.0]]), np.array([1.0]))
        np.testing.assert_array_equal(data.design, [[1.0, 2.0, 3.0]])

    def test_states_share_dimension(self):
        """Dimensões diferentes entre estados geram InputError."""
        a = ModelState.from_arrays([0.0], [[1.0]], [1.0])
        b = ModelState.from_arrays([0.0], [[1.0, 1.0]], [1.0])
        assert states_share_dimension([a, a]) == 1
        with pytest.raises(InputError):
            states_share_dimension([a, b])
