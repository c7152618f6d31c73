#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Modelos de configuração (priori, propostas e cadeia).

Os nomes dos campos são exatamente as chaves aceitas nos arquivos JSON de
configuração. `mu` e `V` podem ser omitidos; nesse caso são resolvidos para a
dimensão dos dados (média zero, covariância `scale * I`).
"""

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import settings


def _check_spd(V: List[List[float]]) -> None:
    matrix = np.asarray(V, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("V deve ser uma matriz quadrada")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("V contém valores não finitos")
    if not np.allclose(matrix, matrix.T, rtol=1e-12, atol=1e-12):
        raise ValueError("V deve ser simétrica")
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        raise ValueError("V deve ser definida positiva (Cholesky falhou)")


class _NigFields(BaseModel):
    """Campos comuns da normal-inversa-gama."""
    model_config = ConfigDict(populate_by_name=True, extra="ignore")

    mu: Optional[List[float]] = Field(default=None, description="Média da normal, intercepto primeiro")
    V: Optional[List[List[float]]] = Field(default=None, description="Escala da covariância (p+1)x(p+1)")

    @model_validator(mode="after")
    def _validate_mean_and_scale(self):
        if self.V is not None:
            _check_spd(self.V)
        if self.mu is not None:
            if not all(np.isfinite(self.mu)):
                raise ValueError("mu contém valores não finitos")
            if self.V is not None and len(self.mu) != len(self.V):
                raise ValueError("mu e V com dimensões diferentes")
        return self

    def _resolve_mean(self, p: int, fallback: Optional[np.ndarray] = None) -> np.ndarray:
        if self.mu is not None:
            mu = np.asarray(self.mu, dtype=float)
        elif fallback is not None:
            mu = np.asarray(fallback, dtype=float)
        else:
            mu = np.zeros(p + 1)
        if mu.shape != (p + 1,):
            raise ValueError(f"mu deve ter comprimento {p + 1}, recebido {mu.shape[0]}")
        return mu


class PriorConfig(_NigFields):
    """Hiperparâmetros da priori: NIG por plano e Poisson em K - 1."""

    scale: float = Field(default=settings.DEFAULT_PRIOR_SCALE, gt=0, description="Escala de V quando omitida")
    a: float = Field(default=settings.DEFAULT_PRIOR_A, gt=0, description="Forma da inversa-gama")
    b: float = Field(default=settings.DEFAULT_PRIOR_B, gt=0, description="Taxa da inversa-gama")
    lambda_: float = Field(default=settings.DEFAULT_LAMBDA, gt=0, alias="lambda", description="Taxa de Poisson para K - 1")
    truncation: Optional[float] = Field(default=None, gt=0, description="Meia largura da caixa de truncamento")

    def resolve(self, p: int) -> Tuple[np.ndarray, np.ndarray, float, float]:
        """
        Resolve (mu, V, a, b) para a dimensão p dos dados.

        Args:
            p: Número de covariáveis

        Returns:
            Tupla (mu, V, a, b)
        """
        mu = self._resolve_mean(p)
        if self.V is not None:
            V = np.asarray(self.V, dtype=float)
            if V.shape != (p + 1, p + 1):
                raise ValueError(f"V deve ser {p + 1}x{p + 1}, recebido {V.shape}")
        else:
            V = self.scale * np.eye(p + 1)
        return mu, V, self.a, self.b


class ProposalConfig(_NigFields):
    """Hiperparâmetros das distribuições de proposta e da busca de divisões."""

    a: Optional[float] = Field(default=None, gt=0, description="Forma (padrão: a da priori)")
    b: Optional[float] = Field(default=None, gt=0, description="Taxa (padrão: b da priori)")
    v_scale: float = Field(default=settings.DEFAULT_PROPOSAL_SCALE, gt=0, description="Fator sobre V da priori")
    L: int = Field(default=settings.DEFAULT_KNOTS, ge=1, description="Nós por região")
    M: Optional[int] = Field(default=None, ge=1, description="Direções de busca (gaussian)")
    direction_mode: Literal["cardinal", "gaussian"] = "cardinal"
    c: float = Field(default=settings.DEFAULT_JUMP_C, description="Constante das probabilidades de salto")

    @field_validator("c")
    @classmethod
    def _validate_c(cls, value: float) -> float:
        if not 0.0 < value <= 0.5:
            raise ValueError("c deve estar em (0, 0.5]")
        return value

    def directions_count(self, p: int) -> int:
        """Número de direções M; no modo cardinal M = p."""
        if self.direction_mode == "cardinal":
            return p
        return self.M if self.M is not None else p

    def resolve(self, prior: PriorConfig, p: int) -> Tuple[np.ndarray, np.ndarray, float, float]:
        """
        Resolve (mu~, V~, a~, b~); o que faltar herda da priori.

        Args:
            prior: Configuração da priori
            p: Número de covariáveis

        Returns:
            Tupla (mu, V, a, b)
        """
        prior_mu, prior_V, prior_a, prior_b = prior.resolve(p)
        mu = self._resolve_mean(p, fallback=prior_mu)
        if self.V is not None:
            V = np.asarray(self.V, dtype=float)
            if V.shape != (p + 1, p + 1):
                raise ValueError(f"V deve ser {p + 1}x{p + 1}, recebido {V.shape}")
        else:
            V = self.v_scale * prior_V
        a = self.a if self.a is not None else prior_a
        b = self.b if self.b is not None else prior_b
        return mu, V, a, b


class ChainConfig(BaseModel):
    """Configuração da cadeia: iterações, burn-in, thinning e semente."""
    model_config = ConfigDict(extra="ignore")

    iterations: int = Field(default=settings.DEFAULT_ITERATIONS, ge=1)
    burn_in: int = Field(default=settings.DEFAULT_BURN_IN, ge=0)
    thin: int = Field(default=settings.DEFAULT_THIN, ge=1)
    seed: int = Field(default=0, ge=0, le=2 ** 64 - 1)

    @property
    def retained(self) -> int:
        """Número de estados retidos após burn-in e thinning."""
        return (self.iterations - self.burn_in) // self.thin

    @model_validator(mode="after")
    def _validate_retained(self):
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in deve ser menor que iterations")
        if self.retained < 1:
            raise ValueError("nenhum estado retido após burn-in e thinning")
        return self


class FitConfig(BaseModel):
    """Configuração completa de um ajuste (arquivo --config)."""
    model_config = ConfigDict(extra="ignore")

    prior: PriorConfig = Field(default_factory=PriorConfig)
    proposal: ProposalConfig = Field(default_factory=ProposalConfig)
    chain: ChainConfig = Field(default_factory=ChainConfig)
