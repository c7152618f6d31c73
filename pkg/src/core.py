#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Tipos de domínio e a partição induzida pelos hiperplanos dominantes.

Uma função max-afim f(x) = max_k (alpha_k + beta_k^T x) é representada por um
ModelState com K hiperplanos. Cada hiperplano carrega também a variância do
ruído das observações que ele domina (modelo heterocedástico).

Todos os tipos são imutáveis; as operações são funções puras.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Tuple

import numpy as np

from .exceptions import ContractError, InputError

logger = logging.getLogger(__name__)

_LOG_2PI = float(np.log(2.0 * np.pi))


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    if array.ndim != ndim:
        raise InputError(f"{name} deve ter {ndim} dimensão(ões), recebido {array.ndim}")
    if not np.all(np.isfinite(array)):
        raise InputError(f"{name} contém valores não finitos")
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Um componente afim: intercepto, vetor de inclinações e variância do ruído."""
    intercept: float
    slope: np.ndarray
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "slope", _frozen_array(self.slope, 1, "slope"))
        object.__setattr__(self, "variance", float(self.variance))
        if not np.isfinite(self.intercept):
            raise InputError("intercepto não finito")
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise InputError(f"variância deve ser positiva, recebido {self.variance}")

    @property
    def dim(self) -> int:
        return self.slope.shape[0]

    @property
    def coefficients(self) -> np.ndarray:
        """Vetor [alpha, beta] de comprimento p + 1."""
        return np.concatenate(([self.intercept], self.slope))

    def value(self, x: np.ndarray) -> float:
        return self.intercept + float(self.slope @ x)

    def __repr__(self) -> str:
        return f"Hyperplane(alpha={self.intercept:.4g}, beta={np.round(self.slope, 4).tolist()}, sigma2={self.variance:.4g})"


@dataclass(frozen=True, eq=False)
class ModelState:
    """Um ponto do espaço trans-dimensional: K >= 1 hiperplanos ordenados."""
    hyperplanes: Tuple[Hyperplane, ...]

    def __post_init__(self):
        planes = tuple(self.hyperplanes)
        if len(planes) < 1:
            raise ContractError("ModelState exige K >= 1")
        dims = {plane.dim for plane in planes}
        if len(dims) != 1:
            raise InputError(f"hiperplanos com dimensões diferentes: {sorted(dims)}")
        object.__setattr__(self, "hyperplanes", planes)

    @classmethod
    def from_arrays(cls, intercepts: Sequence[float], slopes, variances: Sequence[float]) -> "ModelState":
        """Constrói o estado a partir de vetores (K,), (K, p) e (K,)."""
        slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
        return cls(tuple(
            Hyperplane(alpha, beta, sigma2)
            for alpha, beta, sigma2 in zip(intercepts, slopes, variances)
        ))

    @property
    def K(self) -> int:
        return len(self.hyperplanes)

    @property
    def dim(self) -> int:
        return self.hyperplanes[0].dim

    @cached_property
    def intercepts(self) -> np.ndarray:
        return np.array([plane.intercept for plane in self.hyperplanes])

    @cached_property
    def slopes(self) -> np.ndarray:
        return np.vstack([plane.slope for plane in self.hyperplanes])

    @cached_property
    def variances(self) -> np.ndarray:
        return np.array([plane.variance for plane in self.hyperplanes])

    def without(self, index: int) -> "ModelState":
        """Novo estado sem o hiperplano `index` (ordem dos demais preservada)."""
        if self.K < 2:
            raise ContractError("não é possível remover o único hiperplano")
        return ModelState(self.hyperplanes[:index] + self.hyperplanes[index + 1:])

    def plane_values(self, X: np.ndarray) -> np.ndarray:
        """Matriz n x K com alpha_k + beta_k^T x_i."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise InputError(f"dimensão incompatível: modelo p={self.dim}, entrada {X.shape}")
        return X @ self.slopes.T + self.intercepts

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        return self.plane_values(X).max(axis=1)

    def __repr__(self) -> str:
        return f"ModelState(K={self.K}, p={self.dim})"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Matriz de covariáveis n x p e respostas de comprimento n."""
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = _frozen_array(self.X, 2, "X")
        y = _frozen_array(np.ravel(self.y), 1, "y")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise InputError(f"dataset exige n >= 1 e p >= 1, recebido {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise InputError(f"X tem {X.shape[0]} linhas, y tem {y.shape[0]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def design(self) -> np.ndarray:
        """Linhas [1, x_i] usadas apenas nas contas conjugadas."""
        design = np.hstack([np.ones((self.n, 1)), self.X])
        design.flags.writeable = False
        return design

    @cached_property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Caixa envolvente das covariáveis (mínimos, máximos)."""
        return self.X.min(axis=0), self.X.max(axis=0)

    def subset(self, indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Linhas de desenho e respostas das observações `indices`."""
        return self.design[indices], self.y[indices]


@dataclass(frozen=True, eq=False)
class Partition:
    """Atribuição de cada observação ao hiperplano dominante (índices a partir de 0)."""
    assignment: np.ndarray
    subsets: Tuple[np.ndarray, ...]

    @classmethod
    def from_assignment(cls, assignment: np.ndarray, K: int) -> "Partition":
        assignment = np.asarray(assignment, dtype=np.intp)
        order = np.argsort(assignment, kind="stable")
        counts = np.bincount(assignment, minlength=K)
        subsets = tuple(np.split(order, np.cumsum(counts)[:-1]))
        return cls(assignment=assignment, subsets=subsets)

    @property
    def K(self) -> int:
        return len(self.subsets)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(subset) for subset in self.subsets], dtype=np.intp)


def _as_query(state: ModelState, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != state.dim:
        raise InputError(f"dimensão incompatível: modelo p={state.dim}, ponto com {x.shape[0]}")
    return x


def evaluate(state: ModelState, x) -> float:
    """
    Avalia a função max-afim em um ponto.

    Args:
        state: Estado com K hiperplanos
        x: Ponto de comprimento p

    Returns:
        max_k (alpha_k + beta_k^T x)
    """
    x = _as_query(state, x)
    return float(np.max(state.slopes @ x + state.intercepts))


def assign_partition(state: ModelState, data: Dataset) -> Partition:
    """
    Atribui cada observação ao hiperplano que atinge o máximo.

    Empates vão para o menor índice (np.argmax devolve a primeira ocorrência),
    o que torna as partições determinísticas.

    Args:
        state: Estado atual
        data: Dataset

    Returns:
        Partition com K subconjuntos (possivelmente vazios)
    """
    values = state.plane_values(data.X)
    return Partition.from_assignment(np.argmax(values, axis=1), state.K)


def log_likelihood(state: ModelState, data: Dataset) -> float:
    """
    Log-verossimilhança gaussiana heterocedástica.

    Cada resíduo y_i - f(x_i) usa a variância do hiperplano que domina x_i.

    Args:
        state: Estado
        data: Dataset

    Returns:
        Soma das log-densidades
    """
    values = state.plane_values(data.X)
    assignment = np.argmax(values, axis=1)
    fitted = values[np.arange(data.n), assignment]
    variance = state.variances[assignment]
    residual = data.y - fitted
    return float(-0.5 * np.sum(_LOG_2PI + np.log(variance) + residual ** 2 / variance))


def states_share_dimension(states: Iterable[ModelState]) -> int:
    """Confere que todos os estados têm a mesma dimensão e a devolve."""
    dims = {state.dim for state in states}
    if len(dims) != 1:
        raise InputError(f"estados com dimensões diferentes: {sorted(dims)}")
    return dims.pop()
