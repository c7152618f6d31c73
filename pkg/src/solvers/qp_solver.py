#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Estimador de mínimos quadrados sob convexidade (LSE).

Resolve

    min  sum_i (y_i - yhat_i)^2
    s.a. yhat_j >= yhat_i + g_i^T (x_j - x_i)   para todo par i != j

com ADMM no estilo OSQP (equilibração de Ruiz, sobre-relaxação, rho adaptativo)
e polimento pelo conjunto ativo. A variável de otimização é [yhat, g_1, ..., g_n].
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve

from config import settings
from ..core import Dataset, ModelState
from ..exceptions import InputError, SolverError
from .base_solver import BaseSolver

logger = logging.getLogger(__name__)

_MIN_VARIANCE = 1e-12
_SCALING_MIN = 1e-4
_SCALING_MAX = 1e4


@dataclass(frozen=True, eq=False)
class QpSolution:
    """Valores ajustados, subgradientes e o relatório do solver."""
    yhat: np.ndarray
    g: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    anchors: Optional[np.ndarray] = None
    polished: bool = False

    @property
    def n(self) -> int:
        return self.yhat.shape[0]

    def max_violation(self, anchors: Optional[np.ndarray] = None) -> float:
        """Maior violação de yhat_j >= yhat_i + g_i^T (x_j - x_i)."""
        anchors = self.anchors if anchors is None else np.asarray(anchors, dtype=float)
        planes = _plane_matrix(self.yhat, self.g, anchors)
        return float(max(0.0, (planes - self.yhat[:, None]).max()))


def _plane_matrix(yhat: np.ndarray, g: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """F[i, j] = yhat_j + g_j^T (x_i - x_j): plano do ponto j avaliado em x_i."""
    diff = anchors[:, None, :] - anchors[None, :, :]
    return yhat[None, :] + np.einsum("ijk,jk->ij", diff, g)


def constraint_matrix(X: np.ndarray) -> sparse.csr_matrix:
    """
    Matriz esparsa das n (n - 1) restrições de hiperplano suporte.

    A linha do par (i, j) vale +1 em yhat_j, -1 em yhat_i e -(x_j - x_i) no
    bloco g_i, de modo que A z >= 0 equivale às restrições.
    """
    n, p = X.shape
    I, J = np.nonzero(~np.eye(n, dtype=bool))
    m = I.shape[0]
    rows = np.arange(m)
    g_cols = n + I[:, None] * p + np.arange(p)[None, :]
    row_index = np.concatenate([rows, rows, np.repeat(rows, p)])
    col_index = np.concatenate([J, I, g_cols.ravel()])
    values = np.concatenate([np.ones(m), -np.ones(m), -(X[J] - X[I]).ravel()])
    return sparse.csr_matrix((values, (row_index, col_index)), shape=(m, n * (1 + p)))


def _inverse_sqrt_norms(norms: np.ndarray) -> np.ndarray:
    """1 / sqrt(norma), sem escalar colunas ou linhas praticamente nulas."""
    norms = np.where(norms < _SCALING_MIN, 1.0, np.minimum(norms, _SCALING_MAX))
    return 1.0 / np.sqrt(norms)


@dataclass(frozen=True, eq=False)
class ScaledQp:
    """
    QP  min 1/2 x^T diag(P) x + q^T x  s.a.  A x >= 0  e sua versão equilibrada.

    Os campos sem sufixo são do problema escalado; x = D x_s, z = z_s / E e
    y = E y_s / c levam de volta ao problema original.
    """
    P: np.ndarray
    q: np.ndarray
    A: sparse.csr_matrix
    D: np.ndarray
    E: np.ndarray
    c: float
    P_raw: np.ndarray
    q_raw: np.ndarray
    A_raw: sparse.csr_matrix

    @classmethod
    def equilibrate(cls, P_diag: np.ndarray, q: np.ndarray, A: sparse.csr_matrix, iterations: int = 15) -> "ScaledQp":
        """Equilibração de Ruiz (norma infinito) da matriz KKT [P A^T; A 0] e escala do custo."""
        D = np.ones(A.shape[1])
        E = np.ones(A.shape[0])
        P_s = P_diag.astype(float).copy()
        A_s = A.tocsr()
        for _ in range(iterations):
            abs_A = abs(A_s)
            columns = np.maximum(np.abs(P_s), abs_A.max(axis=0).toarray().ravel())
            rows = abs_A.max(axis=1).toarray().ravel()
            d = _inverse_sqrt_norms(columns)
            e = _inverse_sqrt_norms(rows)
            P_s = P_s * d * d
            A_s = (sparse.diags(e) @ A_s @ sparse.diags(d)).tocsr()
            D *= d
            E *= e
        q_s = D * q
        c = 1.0 / float(np.clip(max(np.mean(np.abs(P_s)), np.abs(q_s).max()), _SCALING_MIN, _SCALING_MAX))
        return cls(
            P=c * P_s, q=c * q_s, A=A_s, D=D, E=E, c=c,
            P_raw=P_diag, q_raw=q, A_raw=A.tocsr(),
        )

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.P_raw * x) + self.q_raw @ x)


@dataclass(frozen=True, eq=False)
class _Polished:
    """Ponto polido no espaço original, com o resíduo KKT relativo."""
    x: np.ndarray
    kkt_residual: float
    feasible: bool


class QpSolver(BaseSolver):
    """
    ADMM (OSQP) para o QP do LSE, com fatoração densa do sistema reduzido.

    Cada iteração resolve (P + sigma I + rho A^T A) x~ = sigma x - q + A^T (rho z - y),
    aplica sobre-relaxação alpha e projeta z em [0, inf). O polimento é tentado
    a cada `polish_interval` iterações e ao final; um ponto polido que satisfaz
    as condições KKT encerra o ADMM.
    """

    name = "lse_admm"

    def __init__(
        self,
        max_iterations: Optional[int] = None,
        tolerance: Optional[float] = None,
        rho: float = 0.1,
        sigma: float = 1e-6,
        alpha: float = 1.6,
        adapt_interval: int = 25,
        polish_interval: int = 250,
        polish_delta: float = 1e-6,
        polish_refine: int = 25,
        polish_rounds: int = 5,
    ):
        super().__init__(max_iterations or settings.LSE_MAX_ITERATIONS, tolerance or settings.LSE_TOLERANCE)
        self.rho = rho
        self.sigma = sigma
        self.alpha = alpha
        self.adapt_interval = adapt_interval
        self.polish_interval = polish_interval
        self.polish_delta = polish_delta
        self.polish_refine = polish_refine
        self.polish_rounds = polish_rounds

    def _factor(self, qp: ScaledQp, AtA: np.ndarray, rho: float):
        return cho_factor(np.diag(qp.P + self.sigma) + rho * AtA, lower=True, check_finite=False)

    def _solve_active(
        self, qp: ScaledQp, active: np.ndarray, x0: np.ndarray, nu0: np.ndarray,
    ) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """
        KKT de igualdade  P x + q + A_a^T nu = 0,  A_a x = 0  no espaço escalado.

        Resolve o sistema regularizado por delta e refina a partir de (x0, nu0);
        o refinamento converge para a solução mais próxima do ponto inicial
        quando A_a tem linhas dependentes.
        """
        delta = self.polish_delta
        Aa = qp.A[active]
        try:
            factor = cho_factor(
                np.diag(qp.P + delta) + (Aa.T @ Aa).toarray() / delta, lower=True, check_finite=False,
            )
        except np.linalg.LinAlgError:
            return None
        x, nu = x0.copy(), nu0.copy()
        for _ in range(self.polish_refine):
            r1 = -qp.q - (qp.P * x + Aa.T @ nu)
            r2 = -(Aa @ x)
            size = max(np.abs(r1).max(), np.abs(r2).max() if r2.size else 0.0)
            if size <= 1e-14:
                break
            dx = cho_solve(factor, r1 + Aa.T @ r2 / delta, check_finite=False)
            x = x + dx
            nu = nu + (Aa @ dx - r2) / delta
        return x, nu

    def _polish(self, qp: ScaledQp, x_s: np.ndarray, z_s: np.ndarray, y_s: np.ndarray) -> Optional[_Polished]:
        """
        Polimento pelo conjunto ativo estimado a partir do iterado (x_s, z_s, y_s).

        Restrições com multiplicador de sinal errado saem do conjunto e
        restrições violadas entram, por até `polish_rounds` rodadas.
        """
        tol = self.tolerance
        active = z_s < -y_s
        x_p, nu = x_s.copy(), y_s.copy()
        best: Optional[_Polished] = None
        for _ in range(self.polish_rounds):
            solved = self._solve_active(qp, active, x_p, nu[active])
            if solved is None:
                break
            x_p, nu_active = solved
            nu = np.zeros_like(y_s)
            nu[active] = nu_active

            x = qp.D * x_p
            y = qp.E * nu / qp.c
            Ax = qp.A_raw @ x
            Px = qp.P_raw * x
            Aty = qp.A_raw.T @ y
            prim_scale = 1.0 + np.abs(Ax).max()
            dual_scale = 1.0 + max(np.abs(Px).max(), np.abs(qp.q_raw).max(), np.abs(Aty).max())
            violation = max(0.0, -Ax.min()) / prim_scale
            stationarity = np.abs(Px + qp.q_raw + Aty).max() / dual_scale
            sign = max(0.0, y.max()) / dual_scale
            polished = _Polished(
                x=x, kkt_residual=float(max(violation, stationarity, sign)), feasible=violation <= tol,
            )
            if best is None or polished.kkt_residual < best.kkt_residual:
                best = polished
            if polished.kkt_residual <= tol:
                break
            wrong_sign = y > tol * dual_scale
            violated = Ax < -tol * prim_scale
            if not (np.any(wrong_sign & active) or np.any(violated & ~active)):
                break
            active = (active & ~wrong_sign) | violated
        if best is not None:
            logger.debug(f"Polimento: resíduo KKT {best.kkt_residual:.3e}, ativas {int(active.sum())}")
        return best

    def solve(self, X: np.ndarray, y: np.ndarray) -> QpSolution:
        """
        Resolve o QP do LSE.

        Args:
            X: Matriz n x p de covariáveis
            y: Respostas

        Returns:
            QpSolution convexo-viável

        Raises:
            SolverError: Se nem o ADMM nem o polimento produzirem uma solução aceitável
        """
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        n, p = X.shape
        if n == 1:
            solution = QpSolution(y.copy(), np.zeros((1, p)), 0.0, 0.0, 0, anchors=X)
            self._report(iterations=0, objective=0.0, kkt_residual=0.0)
            return solution

        N = n * (1 + p)
        qp = ScaledQp.equilibrate(
            np.concatenate([np.full(n, 2.0), np.zeros(n * p)]),
            np.concatenate([-2.0 * y, np.zeros(n * p)]),
            constraint_matrix(X),
        )
        A, AT = qp.A, qp.A.T.tocsr()
        AtA = (AT @ A).toarray()
        tol = self.tolerance

        rho = self.rho
        factor = self._factor(qp, AtA, rho)
        x = np.concatenate([y, np.zeros(n * p)]) / qp.D
        z = np.maximum(A @ x, 0.0)
        y_dual = np.zeros(A.shape[0])

        converged = False
        polished: Optional[_Polished] = None
        best_state: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None
        best_score = np.inf
        iteration = 0
        r_prim = r_dual = np.inf
        for iteration in range(1, self.max_iterations + 1):
            x_tilde = cho_solve(factor, self.sigma * x - qp.q + AT @ (rho * z - y_dual), check_finite=False)
            z_tilde = A @ x_tilde
            x = self.alpha * x_tilde + (1.0 - self.alpha) * x
            z_relaxed = self.alpha * z_tilde + (1.0 - self.alpha) * z
            z_new = np.maximum(z_relaxed + y_dual / rho, 0.0)
            y_dual = y_dual + rho * (z_relaxed - z_new)
            z = z_new

            # Resíduos no problema original
            Ax = (A @ x) / qp.E
            z_raw = z / qp.E
            Px = (qp.P * x) / (qp.c * qp.D)
            Aty = (AT @ y_dual) / (qp.c * qp.D)
            r_prim = np.abs(Ax - z_raw).max()
            r_dual = np.abs(Px + qp.q_raw + Aty).max()
            prim_scale = max(np.abs(Ax).max(), np.abs(z_raw).max())
            dual_scale = max(np.abs(Px).max(), np.abs(Aty).max(), np.abs(qp.q_raw).max())
            if r_prim <= tol * (1.0 + prim_scale) and r_dual <= tol * (1.0 + dual_scale):
                converged = True
                break

            if iteration % self.adapt_interval == 0:
                score = max(r_prim / (1.0 + prim_scale), r_dual / (1.0 + dual_scale))
                if score < best_score:
                    best_score = score
                    best_state = (x.copy(), z.copy(), y_dual.copy())
                ratio = np.sqrt((r_prim / max(prim_scale, 1e-10)) / max(r_dual / max(dual_scale, 1e-10), 1e-30))
                new_rho = float(np.clip(rho * ratio, 1e-6, 1e6))
                if new_rho > 5.0 * rho or new_rho < 0.2 * rho:
                    logger.debug(f"Iteração {iteration}: rho {rho:.3e} -> {new_rho:.3e}")
                    rho = new_rho
                    factor = self._factor(qp, AtA, rho)

            if iteration % self.polish_interval == 0:
                candidate = self._polish(qp, x, z, y_dual)
                if candidate is not None and candidate.kkt_residual <= tol:
                    polished = candidate
                    break

        x_admm = qp.D * x
        if polished is None:
            candidates: List[_Polished] = []
            for state in [(x, z, y_dual)] + ([best_state] if best_state is not None and not converged else []):
                candidate = self._polish(qp, *state)
                if candidate is not None:
                    candidates.append(candidate)
            certified = [c for c in candidates if c.kkt_residual <= tol]
            if certified:
                polished = min(certified, key=lambda c: c.kkt_residual)
            else:
                # Sem certificado KKT: aceita um ponto viável que não piore o objetivo do ADMM
                f_admm = qp.objective(x_admm)
                acceptable = [
                    c for c in candidates
                    if c.feasible and qp.objective(c.x) <= f_admm + tol * (1.0 + abs(f_admm))
                ]
                if acceptable:
                    polished = min(acceptable, key=lambda c: qp.objective(c.x))
                    logger.warning(
                        f"Polimento sem certificado KKT (resíduo {polished.kkt_residual:.3e}); "
                        f"aceito por viabilidade e objetivo"
                    )

        if polished is not None:
            solution_x, residual = polished.x, polished.kkt_residual
        elif converged:
            solution_x, residual = x_admm, float(max(r_prim, r_dual))
        else:
            report = self._report(
                iterations=iteration, primal_residual=float(r_prim), dual_residual=float(r_dual), rho=rho,
            )
            raise SolverError(
                f"LSE não convergiu em {iteration} iterações "
                f"(resíduo primal {r_prim:.3e}, dual {r_dual:.3e})",
                report,
            )
        if not converged:
            logger.info(f"LSE encerrado pelo polimento na iteração {iteration}")

        yhat, g = _repair(solution_x[:n].copy(), solution_x[n:].reshape(n, p).copy(), X)
        objective = float(np.sum((y - yhat) ** 2))
        solution = QpSolution(
            yhat=yhat, g=g, objective=objective, kkt_residual=float(residual),
            iterations=iteration, anchors=X, polished=polished is not None,
        )
        self._report(
            iterations=iteration, objective=objective, kkt_residual=solution.kkt_residual,
            polished=solution.polished, rho=rho, variables=N,
        )
        logger.info(f"LSE resolvido: n={n}, p={p}, iterações={iteration}, objetivo={objective:.6g}")
        return solution


def _repair(yhat: np.ndarray, g: np.ndarray, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Troca (yhat_i, g_i) pelo plano dominante em x_i onde houver violação residual."""
    planes = _plane_matrix(yhat, g, X)
    best = planes.argmax(axis=1)
    raise_rows = planes[np.arange(len(yhat)), best] > yhat
    if np.any(raise_rows):
        yhat = yhat.copy()
        g = g.copy()
        yhat[raise_rows] = planes[raise_rows, best[raise_rows]]
        g[raise_rows] = g[best[raise_rows]]
    return yhat, g


def lse_fit(data: Dataset, tolerance: Optional[float] = None, max_iterations: Optional[int] = None) -> QpSolution:
    """
    Ajusta o LSE convexo a um dataset.

    Args:
        data: Dataset (n <= LSE_MAX_N)
        tolerance: Tolerância absoluta e relativa do ADMM
        max_iterations: Limite de iterações

    Returns:
        QpSolution

    Raises:
        InputError: Se n exceder LSE_MAX_N
        SolverError: Se o ADMM não convergir
    """
    if data.n > settings.LSE_MAX_N:
        raise InputError(f"LSE limitado a n <= {settings.LSE_MAX_N}, recebido n={data.n}")
    return QpSolver(max_iterations=max_iterations, tolerance=tolerance).solve(data.X, data.y)


def lse_predict_batch(sol: QpSolution, anchors: Optional[np.ndarray], X) -> np.ndarray:
    """max_i (yhat_i + g_i^T (x - x_i)) para cada linha de X."""
    anchors = sol.anchors if anchors is None else np.asarray(anchors, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != anchors.shape[1]:
        raise InputError(f"dimensão incompatível: LSE p={anchors.shape[1]}, consulta {X.shape}")
    intercepts = sol.yhat - np.einsum("ij,ij->i", sol.g, anchors)
    return (X @ sol.g.T + intercepts).max(axis=1)


def lse_predict(sol: QpSolution, anchors: Optional[np.ndarray], x) -> float:
    """
    Avalia o estimador induzido f(x) = max_i (yhat_i + g_i^T (x - x_i)).

    Args:
        sol: Solução do LSE
        anchors: Pontos de treino x_i (None usa os guardados na solução)
        x: Ponto de comprimento p

    Returns:
        Valor do estimador
    """
    return float(lse_predict_batch(sol, anchors, np.asarray(x, dtype=float).reshape(1, -1))[0])


def lse_state(sol: QpSolution, data: Dataset) -> ModelState:
    """
    Converte o LSE em um ModelState com n hiperplanos.

    A variância de cada plano é o erro quadrático médio do ajuste, de modo que
    o estado possa ser minimizado e serializado como qualquer outro.
    """
    variance = max(sol.objective / data.n, _MIN_VARIANCE)
    intercepts = sol.yhat - np.einsum("ij,ij->i", sol.g, data.X)
    return ModelState.from_arrays(intercepts, sol.g, np.full(data.n, variance))
