#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Atualização conjugada normal-inversa-gama (NIG) de uma região básica.

Convenção fixa em todo o pacote:

    sigma2 ~ IG(a, b)            densidade ∝ sigma2^-(a+1) exp(-b / sigma2)
    theta | sigma2 ~ N(mu, sigma2 * V)   com theta = [alpha, beta]

Com essa convenção a atualização por região é exatamente conjugada.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import gammaln

from config import settings
from config.models import PriorConfig, ProposalConfig
from .core import Hyperplane
from .exceptions import InputError, NumericalError, SamplingError

logger = logging.getLogger(__name__)

_LOG_2PI = float(np.log(2.0 * np.pi))
_JITTER = 1e-10
_MASS_SEED = 7_340_033


def cholesky_with_jitter(matrix: np.ndarray, what: str = "matriz") -> np.ndarray:
    """
    Fator de Cholesky inferior, com jitter crescente em caso de falha.

    Adiciona 1e-10 * traço / d * I, multiplicado por 10 a cada nova tentativa,
    até CHOLESKY_ESCALATIONS vezes.

    Raises:
        NumericalError: Se nenhuma tentativa produzir um fator
    """
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        pass
    d = matrix.shape[0]
    base = _JITTER * max(float(np.trace(matrix)) / d, 1e-300)
    for escalation in range(settings.CHOLESKY_ESCALATIONS):
        jitter = base * 10.0 ** escalation
        try:
            factor = np.linalg.cholesky(matrix + jitter * np.eye(d))
            logger.warning(f"Cholesky de {what} exigiu jitter {jitter:.3e}")
            return factor
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(f"Cholesky de {what} falhou após {settings.CHOLESKY_ESCALATIONS} escalonamentos de jitter")


@dataclass(frozen=True, eq=False)
class NigParams:
    """Parâmetros (mu, V, a, b) de uma normal-inversa-gama de dimensão p + 1."""
    mu: np.ndarray
    V: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).ravel()
        V = np.array(self.V, dtype=float)
        if V.shape != (mu.shape[0], mu.shape[0]):
            raise InputError(f"V deve ser {mu.shape[0]}x{mu.shape[0]}, recebido {V.shape}")
        if not (self.a > 0 and self.b > 0):
            raise InputError(f"a e b devem ser positivos, recebido a={self.a}, b={self.b}")
        mu.flags.writeable = False
        V.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def from_prior(cls, prior: PriorConfig, p: int) -> "NigParams":
        return cls(*prior.resolve(p))

    @classmethod
    def from_proposal(cls, proposal: ProposalConfig, prior: PriorConfig, p: int) -> "NigParams":
        return cls(*proposal.resolve(prior, p))

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @cached_property
    def cholesky(self) -> np.ndarray:
        return cholesky_with_jitter(self.V, "V")

    @cached_property
    def precision(self) -> np.ndarray:
        precision = cho_solve((self.cholesky, True), np.eye(self.dim), check_finite=False)
        return 0.5 * (precision + precision.T)

    @cached_property
    def log_det_V(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.cholesky))))

    @cached_property
    def cache_key(self) -> Tuple:
        return (self.mu.tobytes(), self.V.tobytes(), self.dim, self.a, self.b)

    def __repr__(self) -> str:
        return f"NigParams(dim={self.dim}, a={self.a:.4g}, b={self.b:.4g})"


def nig_posterior(prior: NigParams, X_k: np.ndarray, y_k: np.ndarray) -> NigParams:
    """
    Posteriori NIG de uma região básica.

    V* = (V~^-1 + X^T X)^-1, mu* = V* (V~^-1 mu~ + X^T y), a* = a~ + m / 2,
    b* = b~ + (mu~^T V~^-1 mu~ + y^T y - mu*^T V*^-1 mu*) / 2.

    Args:
        prior: Parâmetros NIG da proposta (ou da priori)
        X_k: Linhas de desenho [1, x_i] da região, m x (p + 1)
        y_k: Respostas da região

    Returns:
        NigParams da posteriori; com m = 0 devolve a própria priori

    Raises:
        NumericalError: Se o Cholesky de V~^-1 + X^T X falhar
    """
    y_k = np.asarray(y_k, dtype=float).ravel()
    m = y_k.shape[0]
    if m == 0:
        return prior
    X_k = np.asarray(X_k, dtype=float).reshape(m, prior.dim)

    precision0 = prior.precision
    shift = precision0 @ prior.mu + X_k.T @ y_k
    precision = precision0 + X_k.T @ X_k
    factor = cholesky_with_jitter(precision, "V~^-1 + X^T X")

    mu = cho_solve((factor, True), shift, check_finite=False)
    V = cho_solve((factor, True), np.eye(prior.dim), check_finite=False)
    V = 0.5 * (V + V.T)
    a = prior.a + 0.5 * m
    b = prior.b + 0.5 * (prior.mu @ precision0 @ prior.mu + y_k @ y_k - mu @ shift)
    if not (np.isfinite(b) and b > 0):
        raise NumericalError(f"b* não positivo ({b}) na atualização conjugada")
    return NigParams(mu=mu, V=V, a=a, b=b)


def nig_sample(
    params: NigParams,
    rng: np.random.Generator,
    truncation: Optional[float] = None,
    max_attempts: Optional[int] = None,
) -> Hyperplane:
    """
    Sorteia (alpha, beta, sigma2) de uma NIG.

    sigma2 ~ IG(a, b) e (alpha, beta) ~ N(mu, sigma2 V). Com `truncation`,
    repete o sorteio até todas as coordenadas de (alpha, beta) ficarem em
    [-truncation, truncation].

    Args:
        params: Parâmetros NIG
        rng: Gerador aleatório do chamador
        truncation: Meia largura da caixa (opcional)
        max_attempts: Limite de tentativas da rejeição

    Returns:
        Hyperplane com a variância sorteada

    Raises:
        SamplingError: Se a rejeição exceder o limite de tentativas
    """
    attempts = max_attempts or settings.TRUNCATION_ATTEMPTS
    for _ in range(attempts if truncation is not None else 1):
        sigma2 = params.b / rng.gamma(params.a)
        theta = params.mu + np.sqrt(sigma2) * (params.cholesky @ rng.standard_normal(params.dim))
        if truncation is None or np.all(np.abs(theta) <= truncation):
            return Hyperplane(theta[0], theta[1:], sigma2)
    raise SamplingError(f"amostragem truncada excedeu {attempts} tentativas (caixa ±{truncation})")


def nig_log_density_batch(params: NigParams, thetas: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """
    Log-densidade NIG (não truncada) de vários pontos de uma vez.

    Args:
        params: Parâmetros NIG
        thetas: Matriz K x (p + 1) de coeficientes [alpha, beta]
        sigma2: Vetor de K variâncias

    Returns:
        Vetor de K log-densidades
    """
    thetas = np.atleast_2d(thetas)
    sigma2 = np.asarray(sigma2, dtype=float).ravel()
    d = params.dim
    diff = (thetas - params.mu).T
    whitened = solve_triangular(params.cholesky, diff, lower=True, check_finite=False)
    quad = np.sum(whitened ** 2, axis=0)
    log_sigma2 = np.log(sigma2)
    log_normal = -0.5 * (d * (_LOG_2PI + log_sigma2) + params.log_det_V + quad / sigma2)
    log_ig = params.a * np.log(params.b) - gammaln(params.a) - (params.a + 1.0) * log_sigma2 - params.b / sigma2
    return log_normal + log_ig


@lru_cache(maxsize=64)
def _truncation_log_mass(key: Tuple, bound: float, draws: int) -> float:
    mu_bytes, V_bytes, dim, a, b = key
    params = NigParams(
        mu=np.frombuffer(mu_bytes, dtype=float),
        V=np.frombuffer(V_bytes, dtype=float).reshape(dim, dim),
        a=a,
        b=b,
    )
    rng = np.random.default_rng(_MASS_SEED)
    sigma2 = params.b / rng.gamma(params.a, size=draws)
    thetas = params.mu + np.sqrt(sigma2)[:, None] * (rng.standard_normal((draws, dim)) @ params.cholesky.T)
    inside = np.mean(np.all(np.abs(thetas) <= bound, axis=1))
    if inside <= 0.0:
        raise NumericalError(f"caixa de truncamento ±{bound} sem massa estimável sob a priori")
    logger.info(f"Massa da priori truncada em ±{bound}: {inside:.5f} ({draws} sorteios)")
    return float(np.log(inside))


def truncation_log_mass(params: NigParams, bound: float, draws: Optional[int] = None) -> float:
    """Log da massa da NIG dentro da caixa, estimada por Monte Carlo e mantida em cache."""
    return _truncation_log_mass(params.cache_key, float(bound), int(draws or settings.TRUNCATION_DRAWS))


def nig_log_density(
    params: NigParams,
    alpha: float,
    beta,
    sigma2: float,
    truncation: Optional[float] = None,
) -> float:
    """
    Log-densidade conjunta NIG de (alpha, beta, sigma2).

    Com `truncation`, pontos fora da caixa têm densidade zero (-inf) e os de
    dentro são renormalizados pela massa estimada da caixa.

    Args:
        params: Parâmetros NIG
        alpha: Intercepto
        beta: Inclinações
        sigma2: Variância (> 0)
        truncation: Meia largura da caixa (opcional)

    Returns:
        Log-densidade
    """
    if not sigma2 > 0:
        raise InputError(f"sigma2 deve ser positivo, recebido {sigma2}")
    theta = np.concatenate(([float(alpha)], np.asarray(beta, dtype=float).ravel()))
    if theta.shape[0] != params.dim:
        raise InputError(f"coeficientes com dimensão {theta.shape[0]}, esperado {params.dim}")
    value = float(nig_log_density_batch(params, theta[None, :], np.array([sigma2]))[0])
    if truncation is None:
        return value
    if np.any(np.abs(theta) > truncation):
        return -np.inf
    return value - truncation_log_mass(params, truncation)


def plane_log_density(params: NigParams, plane: Hyperplane, truncation: Optional[float] = None) -> float:
    """Atalho de nig_log_density para um Hyperplane."""
    return nig_log_density(params, plane.intercept, plane.slope, plane.variance, truncation)
