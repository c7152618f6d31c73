#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Testes do LSE convexo (QP por ADMM) e da minimização da superfície (LP).
"""

import numpy as np
import pytest

from src.core import Dataset, ModelState
from src.exceptions import ContractError, InputError
from src.solvers.lp_solver import (
    LpSolver,
    LpStatus,
    check_box,
    minimize_surrogate,
    surrogate_values,
    thin_states,
)
from src.solvers.qp_solver import (
    QpSolver,
    ScaledQp,
    constraint_matrix,
    lse_fit,
    lse_predict,
    lse_predict_batch,
    lse_state,
)
from .oracles import grid_minimize, lse_predict_loop, lse_reference

UNIT_BOX_1D = (np.array([-1.0]), np.array([1.0]))
UNIT_BOX_2D = (np.array([-1.0, -1.0]), np.array([1.0, 1.0]))


class TestConstraintMatrix:
    """Testes das restrições de hiperplano suporte."""

    def test_shape_and_rows(self):
        """n (n - 1) linhas; cada uma codifica yhat_j - yhat_i - g_i^T (x_j - x_i)."""
        X = np.array([[0.0], [1.0], [3.0]])
        A = constraint_matrix(X).toarray()
        assert A.shape == (6, 3 * 2)
        z = np.array([0.0, 1.0, 9.0, 0.5, 2.0, 6.0])
        yhat, g = z[:3], z[3:].reshape(3, 1)
        expected = [
            yhat[j] - yhat[i] - g[i] @ (X[j] - X[i])
            for i in range(3) for j in range(3) if i != j
        ]
        np.testing.assert_allclose(A @ z, expected)


class TestScaledQp:
    """Testes da equilibração de Ruiz."""

    def test_scaling_preserves_problem(self, rng):
        """x = D x_s: restrições escaladas por E e objetivo escalado por c."""
        X = rng.uniform(-1, 1, size=(8, 2))
        y = rng.normal(size=8)
        P = np.concatenate([np.full(8, 2.0), np.zeros(16)])
        q = np.concatenate([-2.0 * y, np.zeros(16)])
        qp = ScaledQp.equilibrate(P, q, constraint_matrix(X))
        x = rng.normal(size=24)
        x_s = x / qp.D
        np.testing.assert_allclose(qp.A @ x_s, qp.E * (qp.A_raw @ x), rtol=1e-10, atol=1e-12)
        scaled = 0.5 * x_s @ (qp.P * x_s) + qp.q @ x_s
        assert scaled == pytest.approx(qp.c * qp.objective(x), rel=1e-10)
        assert np.all(qp.D > 0) and np.all(qp.E > 0) and qp.c > 0


class TestLse:
    """Testes do estimador de mínimos quadrados convexo."""

    def test_convex_data_is_interpolated(self):
        """Pontos já convexos: yhat = y e objetivo zero."""
        X = np.array([[0.0], [1.0], [2.0]])
        solution = lse_fit(Dataset(X, np.array([0.0, 1.0, 4.0])))
        np.testing.assert_allclose(solution.yhat, [0.0, 1.0, 4.0], atol=1e-6)
        assert solution.objective == pytest.approx(0.0, abs=1e-8)

    def test_concave_triplet_is_flattened(self):
        """(0, 0), (1, 1), (2, 0): a solução é a reta constante 1/3."""
        X = np.array([[0.0], [1.0], [2.0]])
        solution = lse_fit(Dataset(X, np.array([0.0, 1.0, 0.0])))
        np.testing.assert_allclose(solution.yhat, [1 / 3] * 3, atol=1e-6)
        assert solution.objective == pytest.approx(2 / 3, abs=1e-6)

    def test_single_point(self):
        """n = 1 devolve o próprio ponto com subgradiente nulo."""
        solution = lse_fit(Dataset(np.array([[0.4, -0.1]]), np.array([2.5])))
        assert solution.yhat[0] == 2.5
        assert lse_predict(solution, None, [10.0, 10.0]) == 2.5

    def test_matches_slsqp_reference(self):
        """Objetivo igual ao de um QP genérico em 20 instâncias de n = 20."""
        generator = np.random.default_rng(314)
        for _ in range(20):
            X = generator.uniform(-1, 1, size=(20, 1))
            y = X[:, 0] ** 2 + 0.3 * generator.standard_normal(20)
            solution = QpSolver().solve(X, y)
            reference = lse_reference(X, y)
            assert solution.max_violation() <= 1e-9
            assert solution.objective <= reference * (1 + 1e-5) + 1e-9
            assert solution.objective == pytest.approx(reference, rel=1e-4, abs=1e-8)

    def test_polish_certifies_solutions(self):
        """O polimento pelo conjunto ativo conclui a maioria das instâncias de n = 20."""
        generator = np.random.default_rng(314)
        polished = 0
        for _ in range(20):
            X = generator.uniform(-1, 1, size=(20, 1))
            y = X[:, 0] ** 2 + 0.3 * generator.standard_normal(20)
            solution = QpSolver().solve(X, y)
            assert solution.max_violation() <= 1e-9
            polished += solution.polished
        assert polished >= 10

    def test_feasible_in_two_dimensions(self, plane_data):
        """A solução reparada satisfaz todas as restrições."""
        solution = lse_fit(plane_data)
        assert solution.max_violation() <= 1e-9
        # Verificar resultado
        residual = plane_data.y - solution.yhat
        assert np.mean(residual ** 2) < np.var(plane_data.y)

    def test_prediction_at_anchors(self, plane_data):
        """Nos pontos de treino o estimador induzido reproduz yhat."""
        solution = lse_fit(plane_data)
        values = lse_predict_batch(solution, None, plane_data.X)
        assert np.all(values >= solution.yhat - 1e-12)
        np.testing.assert_allclose(values, solution.yhat, atol=1e-6)

    def test_prediction_matches_loop(self, plane_data, rng):
        """Avaliação vetorizada coincide com o laço explícito."""
        solution = lse_fit(plane_data)
        for x in rng.uniform(-1.5, 1.5, size=(10, 2)):
            expected = lse_predict_loop(solution.yhat, solution.g, plane_data.X, x)
            assert lse_predict(solution, plane_data.X, x) == pytest.approx(expected, abs=1e-12)

    def test_state_conversion(self, plane_data, rng):
        """O ModelState com n planos avalia igual ao estimador."""
        solution = lse_fit(plane_data)
        state = lse_state(solution, plane_data)
        assert state.K == plane_data.n
        X = rng.uniform(-1, 1, size=(10, 2))
        np.testing.assert_allclose(state.evaluate_many(X), lse_predict_batch(solution, None, X), atol=1e-12)

    def test_size_limit(self):
        """n acima de LSE_MAX_N é recusado."""
        X = np.zeros((501, 1))
        with pytest.raises(InputError):
            lse_fit(Dataset(X, np.zeros(501)))

    def test_prediction_dimension_mismatch(self, plane_data):
        """Consulta com dimensão errada gera InputError."""
        solution = lse_fit(plane_data)
        with pytest.raises(InputError):
            lse_predict(solution, None, [0.0])


class TestSurrogateMinimization:
    """Testes do simplex da superfície média."""

    def test_single_plane_goes_to_corner(self):
        """Um plano y = x: mínimo em x = -1."""
        state = ModelState.from_arrays([0.0], [[1.0]], [1.0])
        solution = minimize_surrogate([state], UNIT_BOX_1D)
        assert solution.status == LpStatus.OPTIMAL
        assert solution.x_star[0] == pytest.approx(-1.0)
        assert solution.value == pytest.approx(-1.0)

    def test_abs_value(self, v_state):
        """max(x, -x) tem mínimo 0 em x = 0."""
        solution = minimize_surrogate([v_state], UNIT_BOX_1D)
        assert solution.x_star[0] == pytest.approx(0.0, abs=1e-12)
        assert solution.value == pytest.approx(0.0, abs=1e-12)

    def test_average_of_shifted_kinks(self):
        """|x - 0.5| e |x + 0.5|: mínimo 0.5 no intervalo, lexicograficamente x = -0.5."""
        right = ModelState.from_arrays([-0.5, 0.5], [[1.0], [-1.0]], [1.0, 1.0])
        left = ModelState.from_arrays([0.5, -0.5], [[1.0], [-1.0]], [1.0, 1.0])
        solution = minimize_surrogate([right, left], UNIT_BOX_1D)
        assert solution.value == pytest.approx(0.5)
        assert solution.x_star[0] == pytest.approx(-0.5)

    def test_constant_picks_lexicographic_minimum(self):
        """Superfície constante: todo ponto é ótimo, vence o canto inferior."""
        state = ModelState.from_arrays([0.3], [[0.0, 0.0]], [1.0])
        solution = minimize_surrogate([state], UNIT_BOX_2D)
        np.testing.assert_allclose(solution.x_star, [-1.0, -1.0])
        assert solution.value == pytest.approx(0.3)

    def test_partial_tie(self):
        """Plano x2: qualquer x1 é ótimo, vence x1 = -1."""
        state = ModelState.from_arrays([0.0], [[0.0, 1.0]], [1.0])
        solution = minimize_surrogate([state], UNIT_BOX_2D)
        np.testing.assert_allclose(solution.x_star, [-1.0, -1.0])

    def test_optimal_against_random_points(self, rng):
        """Nenhum ponto aleatório da caixa tem valor menor."""
        states = [
            ModelState.from_arrays(rng.normal(size=4), rng.normal(size=(4, 2)), np.ones(4))
            for _ in range(5)
        ]
        solution = minimize_surrogate(states, UNIT_BOX_2D)
        probes = rng.uniform(-1, 1, size=(200, 2))
        assert np.all(surrogate_values(states, probes) >= solution.value - 1e-9)
        assert np.all(solution.x_star >= -1.0) and np.all(solution.x_star <= 1.0)

    def test_matches_grid_search(self):
        """Em 50 instâncias o simplex nunca perde para a grade fina."""
        generator = np.random.default_rng(1618)
        resolution = 200
        for _ in range(50):
            K = int(generator.integers(1, 6))
            M = int(generator.integers(1, 4))
            states = [
                ModelState.from_arrays(generator.normal(size=K), generator.normal(size=(K, 2)), np.ones(K))
                for _ in range(M)
            ]
            solution = minimize_surrogate(states, UNIT_BOX_2D)
            _, grid_value = grid_minimize(states, UNIT_BOX_2D, resolution)
            lipschitz = max(np.abs(state.slopes).sum(axis=1).max() for state in states)
            cell = 2.0 / resolution
            assert solution.value <= grid_value + 1e-9
            assert solution.value >= grid_value - lipschitz * cell - 1e-9

    def test_malformed_box(self, v_state):
        """lo >= hi devolve infeasible_error sem exceção."""
        solution = minimize_surrogate([v_state], (np.array([1.0]), np.array([-1.0])))
        assert solution.status == LpStatus.INFEASIBLE_ERROR
        assert not solution.optimal
        assert np.isnan(solution.value)

    def test_box_dimension_mismatch(self, v_state):
        """Caixa com dimensão diferente da superfície gera InputError."""
        with pytest.raises(InputError):
            minimize_surrogate([v_state], UNIT_BOX_2D)

    def test_requires_states(self):
        """Lista vazia viola o contrato."""
        with pytest.raises(ContractError):
            LpSolver().solve([], UNIT_BOX_1D)

    def test_check_box(self):
        """check_box rejeita caixas degeneradas ou não finitas."""
        assert check_box((np.array([0.0]), np.array([0.0]))) is None
        assert check_box((np.array([0.0]), np.array([np.inf]))) is None
        lower, upper = check_box(([0.0, 1.0], [1.0, 2.0]), p=2)
        np.testing.assert_array_equal(upper, [1.0, 2.0])

    def test_thin_states(self, v_state):
        """thin_states mantém no máximo max_draws estados igualmente espaçados."""
        states = [v_state] * 250
        assert len(thin_states(states, 100)) == 100
        assert len(thin_states(states[:30], 100)) == 30
