#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Minimização de uma superfície max-afim média sobre uma caixa.

    min_x (1 / M) sum_m max_k (alpha_mk + beta_mk^T x),  l <= x <= u

pela forma epígrafo, resolvida com simplex primal de variáveis limitadas em
tableau denso. Com x = l + s e t_m = L_m + tau_m (L_m é um limite inferior de
max_k sobre a caixa) todas as variáveis ficam com limite inferior zero:

    min  sum_m tau_m / M
    s.a. -tau_m + beta_mk^T s + folga_mk = L_m - alpha_mk - beta_mk^T l
         0 <= s <= u - l,  tau >= 0,  folga >= 0

Entre vértices ótimos é escolhido o x* lexicograficamente menor.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from config import settings
from ..core import ModelState, states_share_dimension
from ..exceptions import ContractError, InputError, SolverError
from .base_solver import BaseSolver

logger = logging.getLogger(__name__)

_BLAND_AFTER = 50


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE_ERROR = "infeasible_error"


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Minimizador, valor da superfície e status."""
    x_star: np.ndarray
    value: float
    status: LpStatus
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


def surrogate_values(states: Sequence[ModelState], X) -> np.ndarray:
    """(1 / M) sum_m f_m(x) para cada linha de X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.mean([state.evaluate_many(X) for state in states], axis=0)


def check_box(box: Tuple, p: Optional[int] = None) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Devolve (l, u) como arrays ou None se a caixa for malformada."""
    try:
        lower, upper = (np.asarray(bound, dtype=float).ravel() for bound in box)
    except (TypeError, ValueError):
        return None
    if lower.shape != upper.shape or lower.size == 0:
        return None
    if p is not None and lower.shape[0] != p:
        return None
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper)) and np.all(lower < upper)):
        return None
    return lower, upper


class _Tableau:
    """Tableau denso [B^-1 A | B^-1 h] com variáveis não básicas no limite inferior ou superior."""

    def __init__(self, A: np.ndarray, h: np.ndarray, basis: np.ndarray, lb: np.ndarray, ub: np.ndarray):
        self.T = np.hstack([A, h[:, None]])
        self.basis = basis.copy()
        self.lb = lb.copy()
        self.ub = ub.copy()
        self.nv = A.shape[1]
        self.at_upper = np.zeros(self.nv, dtype=bool)
        self.fixed = np.zeros(self.nv, dtype=bool)
        self.x = np.zeros(self.nv)
        self.refresh()

    @property
    def nonbasic(self) -> np.ndarray:
        mask = np.ones(self.nv, dtype=bool)
        mask[self.basis] = False
        return mask

    def refresh(self) -> None:
        """x_B = B^-1 h - B^-1 A_N x_N."""
        nonbasic = self.nonbasic
        self.x[nonbasic] = np.where(self.at_upper, self.ub, self.lb)[nonbasic]
        self.x[self.basis] = self.T[:, -1] - self.T[:, :-1][:, nonbasic] @ self.x[nonbasic]

    def pivot(self, row: int, col: int) -> None:
        self.T[row] /= self.T[row, col]
        column = self.T[:, col].copy()
        column[row] = 0.0
        self.T -= np.outer(column, self.T[row])
        self.basis[row] = col

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        return cost - cost[self.basis] @ self.T[:, :-1]

    def fix_nonzero(self, reduced: np.ndarray, tolerance: float) -> None:
        """Prende no valor atual as não básicas de custo reduzido não nulo (preserva a face ótima)."""
        newly = self.nonbasic & ~self.fixed & (np.abs(reduced) > tolerance)
        self.lb[newly] = self.x[newly]
        self.ub[newly] = self.x[newly]
        self.fixed |= newly


class LpSolver(BaseSolver):
    """Simplex primal de variáveis limitadas: regra de Dantzig, Bland sob degenerescência."""

    name = "surrogate_simplex"

    def __init__(self, max_iterations: Optional[int] = None, tolerance: float = 1e-9):
        super().__init__(max_iterations or settings.LP_MAX_ITERATIONS, tolerance)
        self.iterations = 0

    def _optimize(self, tableau: _Tableau, cost: np.ndarray) -> np.ndarray:
        tol = self.tolerance
        degenerate_streak = 0
        while True:
            if self.iterations >= self.max_iterations:
                report = self._report(iterations=self.iterations)
                raise SolverError(f"simplex excedeu {self.max_iterations} iterações", report)
            reduced = tableau.reduced_costs(cost)
            free = tableau.nonbasic & ~tableau.fixed
            increase = free & ~tableau.at_upper & (reduced < -tol)
            decrease = free & tableau.at_upper & (reduced > tol)
            candidates = np.flatnonzero(increase | decrease)
            if candidates.size == 0:
                return reduced
            bland = degenerate_streak > _BLAND_AFTER
            entering = int(candidates[0] if bland else candidates[np.argmax(np.abs(reduced[candidates]))])
            direction = 1.0 if increase[entering] else -1.0

            delta = -direction * tableau.T[:, entering]
            basic_x = tableau.x[tableau.basis]
            ratios = np.full(delta.shape, np.inf)
            down = delta < -tol
            ratios[down] = (basic_x[down] - tableau.lb[tableau.basis][down]) / -delta[down]
            up = (delta > tol) & np.isfinite(tableau.ub[tableau.basis])
            ratios[up] = (tableau.ub[tableau.basis][up] - basic_x[up]) / delta[up]
            ratios = np.maximum(ratios, 0.0)
            flip = tableau.ub[entering] - tableau.lb[entering]

            step = ratios.min() if ratios.size else np.inf
            if not np.isfinite(step) and not np.isfinite(flip):
                raise SolverError("problema ilimitado na superfície", self._report(iterations=self.iterations))
            self.iterations += 1

            if flip <= step:
                tableau.at_upper[entering] = not tableau.at_upper[entering]
                theta = flip
            else:
                ties = np.flatnonzero(ratios <= step + tol)
                if bland:
                    row = int(ties[np.argmin(tableau.basis[ties])])
                else:
                    row = int(ties[np.argmax(np.abs(delta[ties]))])
                leaving = tableau.basis[row]
                tableau.at_upper[leaving] = delta[row] > 0
                tableau.at_upper[entering] = False
                tableau.pivot(row, entering)
                theta = step
            tableau.refresh()
            degenerate_streak = degenerate_streak + 1 if theta <= tol else 0

    def solve(self, hyperplane_sets: Sequence[ModelState], box: Tuple) -> LpSolution:
        """
        Minimiza a superfície média sobre a caixa.

        Args:
            hyperplane_sets: Estados (ao menos um)
            box: Tupla (inferior, superior)

        Returns:
            LpSolution; status infeasible_error apenas para caixa malformada
        """
        states = list(hyperplane_sets)
        if not states:
            raise ContractError("minimize_surrogate exige ao menos um estado")
        p = states_share_dimension(states)
        bounds = check_box(box)
        if bounds is None:
            logger.warning("Caixa malformada para minimização")
            return LpSolution(np.full(p, np.nan), float("nan"), LpStatus.INFEASIBLE_ERROR)
        lower, upper = bounds
        if lower.shape[0] != p:
            raise InputError(f"caixa com dimensão {lower.shape[0]}, superfície com p={p}")

        M = len(states)
        alphas = np.concatenate([state.intercepts for state in states])
        betas = np.vstack([state.slopes for state in states])
        owner = np.concatenate([np.full(state.K, m) for m, state in enumerate(states)])
        R = alphas.shape[0]

        box_floor = alphas + np.minimum(betas * lower, betas * upper).sum(axis=1)
        L = np.array([box_floor[owner == m].max() for m in range(M)])
        at_lower = alphas + betas @ lower

        A = np.zeros((R, p + M + R))
        A[:, :p] = betas
        A[np.arange(R), p + owner] = -1.0
        A[:, p + M:] = np.eye(R)
        h = L[owner] - at_lower
        lb = np.zeros(p + M + R)
        ub = np.concatenate([upper - lower, np.full(M + R, np.inf)])

        tableau = _Tableau(A, h, p + M + np.arange(R), lb, ub)
        for m in range(M):
            rows = np.flatnonzero(owner == m)
            tableau.pivot(int(rows[np.argmax(at_lower[rows])]), p + m)
        tableau.refresh()

        self.iterations = 0
        cost = np.zeros(p + M + R)
        cost[p:p + M] = 1.0 / M
        reduced = self._optimize(tableau, cost)
        for coordinate in range(p):
            tableau.fix_nonzero(reduced, self.tolerance)
            stage = np.zeros(p + M + R)
            stage[coordinate] = 1.0
            reduced = self._optimize(tableau, stage)

        x_star = np.clip(lower + tableau.x[:p], lower, upper)
        value = float(surrogate_values(states, x_star)[0])
        self._report(iterations=self.iterations, rows=R, value=value)
        logger.info(f"Superfície minimizada: M={M}, linhas={R}, iterações={self.iterations}, valor={value:.6g}")
        return LpSolution(x_star=x_star, value=value, status=LpStatus.OPTIMAL, iterations=self.iterations)


def minimize_surrogate(hyperplane_sets: Sequence[ModelState], box: Tuple) -> LpSolution:
    """
    Minimiza (1 / M) sum_m max_k (alpha_mk + beta_mk^T x) sobre a caixa.

    Args:
        hyperplane_sets: Lista de ModelState
        box: Tupla (inferior, superior) com inferior < superior

    Returns:
        LpSolution
    """
    return LpSolver().solve(hyperplane_sets, box)


def thin_states(states: Sequence[ModelState], max_draws: Optional[int] = None) -> list:
    """Subconjunto igualmente espaçado de no máximo `max_draws` estados."""
    states = list(states)
    limit = max_draws or settings.SURROGATE_MAX_DRAWS
    if len(states) <= limit:
        return states
    indices = np.unique(np.linspace(0, len(states) - 1, limit).round().astype(int))
    return [states[i] for i in indices]
