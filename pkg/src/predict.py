#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Previsão pela média a posteriori, bandas pontuais e certificado de convexidade.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from config import settings
from .core import ModelState
from .exceptions import ContractError, InputError
from .sampler import PosteriorSamples

logger = logging.getLogger(__name__)

CONVEXITY_TOLERANCE = 1e-9


def _as_queries(samples: PosteriorSamples, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != samples.dim:
        raise InputError(f"dimensão incompatível: modelo p={samples.dim}, consulta {X.shape}")
    return X


def draw_values(samples: PosteriorSamples, X) -> np.ndarray:
    """Matriz M x n com o valor de cada estado em cada ponto."""
    X = _as_queries(samples, X)
    return np.vstack([state.evaluate_many(X) for state in samples.draws])


def posterior_mean_batch(samples: PosteriorSamples, X) -> np.ndarray:
    """Média a posteriori em vários pontos (vetor de comprimento n)."""
    return draw_values(samples, X).mean(axis=0)


def posterior_mean(samples: PosteriorSamples, x) -> float:
    """
    (1 / M) * soma_m f_m(x) sobre os estados retidos.

    Args:
        samples: Estados da posteriori
        x: Ponto de comprimento p

    Returns:
        Média a posteriori em x
    """
    x = np.asarray(x, dtype=float).ravel()
    return float(posterior_mean_batch(samples, x[None, :])[0])


def _check_level(level: float) -> float:
    level = float(level)
    if not 0.0 < level < 1.0:
        raise InputError(f"level deve estar em (0, 1), recebido {level}")
    return level


def posterior_band_batch(samples: PosteriorSamples, X, level: float = settings.DEFAULT_LEVEL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quantis empíricos (1 - level) / 2 e 1 - (1 - level) / 2 em cada ponto.

    Raises:
        InputError: Se level não estiver em (0, 1)
        ContractError: Se houver menos de MIN_BAND_DRAWS estados
    """
    level = _check_level(level)
    if len(samples) < settings.MIN_BAND_DRAWS:
        raise ContractError(f"bandas exigem ao menos {settings.MIN_BAND_DRAWS} estados, recebido {len(samples)}")
    values = draw_values(samples, X)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [tail, 1.0 - tail], axis=0)
    return lo, hi


def posterior_band(samples: PosteriorSamples, x, level: float = settings.DEFAULT_LEVEL) -> Tuple[float, float]:
    """Banda de credibilidade pontual em um único ponto."""
    x = np.asarray(x, dtype=float).ravel()
    lo, hi = posterior_band_batch(samples, x[None, :], level)
    return float(lo[0]), float(hi[0])


def k_distribution(samples: PosteriorSamples) -> Dict[int, float]:
    """Frequência a posteriori de cada número de hiperplanos."""
    counts = Counter(state.K for state in samples.draws)
    return {k: counts[k] / len(samples) for k in sorted(counts)}


def k_mode(samples: PosteriorSamples) -> int:
    distribution = k_distribution(samples)
    return max(distribution, key=lambda k: (distribution[k], -k))


@dataclass(frozen=True)
class ConvexityReport:
    probes: int
    max_violation: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= CONVEXITY_TOLERANCE


def convexity_certificate(
    samples: PosteriorSamples,
    probe_count: int,
    rng: np.random.Generator,
    box: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    include_corners: bool = False,
) -> ConvexityReport:
    """
    Verifica f(t x1 + (1 - t) x2) <= t f(x1) + (1 - t) f(x2) para a média a posteriori.

    Sorteia `probe_count` triplas (x1, x2, t) uniformes na caixa. Com
    `include_corners`, os primeiros x1 percorrem os vértices da caixa.

    Args:
        samples: Estados da posteriori
        probe_count: Número de sondas (>= 1)
        rng: Gerador aleatório
        box: Caixa (inferior, superior); padrão: caixa dos dados guardada nas amostras, ou [-1, 1]^p
        include_corners: Usa os vértices da caixa como parte das sondas

    Returns:
        ConvexityReport com a maior violação encontrada
    """
    if probe_count < 1:
        raise ContractError("probe_count deve ser >= 1")
    p = samples.dim
    if box is None:
        box = samples.bounds if samples.bounds is not None else (np.full(p, -1.0), np.full(p, 1.0))
    lower, upper = (np.asarray(bound, dtype=float) for bound in box)

    x1 = rng.uniform(lower, upper, size=(probe_count, p))
    x2 = rng.uniform(lower, upper, size=(probe_count, p))
    t = rng.uniform(size=(probe_count, 1))
    if include_corners:
        count = min(probe_count, 2 ** p)
        bits = (np.arange(count)[:, None] >> np.arange(p)) & 1
        x1[:count] = np.where(bits == 1, upper, lower)

    f1 = posterior_mean_batch(samples, x1)
    f2 = posterior_mean_batch(samples, x2)
    fm = posterior_mean_batch(samples, t * x1 + (1.0 - t) * x2)
    violation = fm - (t[:, 0] * f1 + (1.0 - t[:, 0]) * f2)
    report = ConvexityReport(probes=probe_count, max_violation=float(violation.max()))
    if not report.passed:
        logger.error(f"Violação de convexidade {report.max_violation:.3e} em {probe_count} sondas")
    return report


def single_state_samples(state: ModelState) -> PosteriorSamples:
    """Embala um único estado como PosteriorSamples (M = 1)."""
    return PosteriorSamples((state,))
