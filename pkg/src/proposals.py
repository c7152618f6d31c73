#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Distribuições de proposta da cadeia: realocação, remoção e adição.

Todas as propostas sorteiam um modelo inteiramente novo (atualização em
bloco) a partir das posterioris NIG das regiões básicas. As densidades
gravadas em ProposalDraw são as densidades completas de salto:

    log q(candidato | atual) = log(prob. do tipo de movimento) + log h(candidato | atual)

em que h é a mistura inteira (todos os planos removíveis na remoção, todas as
K * L * M divisões na adição). A reversa de uma adição é a mistura de remoção
avaliada a partir do candidato, e vice-versa; a reversa da realocação é a
realocação.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from config.models import PriorConfig, ProposalConfig
from .conjugate import NigParams, nig_log_density_batch, nig_posterior, nig_sample
from .core import Dataset, ModelState, Partition, assign_partition
from .exceptions import AdditionUnavailable, ContractError, InputError

logger = logging.getLogger(__name__)

# Peso de uma região vazia na remoção: p_d(j) ∝ 1 / 0.25
EMPTY_REGION_SIZE = 0.25


class MoveKind(str, Enum):
    """Tipos de movimento da cadeia."""
    RELOCATE = "relocate"
    DELETE = "delete"
    ADD = "add"


@dataclass(frozen=True, eq=False)
class ResolvedProposal:
    """ProposalConfig resolvida para uma dimensão: NIG de proposta, nós, direções e constantes de salto."""
    nig: NigParams
    L: int
    M: int
    direction_mode: str
    c: float
    lam: float

    @classmethod
    def from_configs(cls, proposal: ProposalConfig, prior: PriorConfig, p: int) -> "ResolvedProposal":
        return cls(
            nig=NigParams.from_proposal(proposal, prior, p),
            L=proposal.L,
            M=proposal.directions_count(p),
            direction_mode=proposal.direction_mode,
            c=proposal.c,
            lam=prior.lambda_,
        )


@dataclass(frozen=True, eq=False)
class SplitSpec:
    """Divisão da região `region` ao longo de `direction` no nó `knot`."""
    region: int
    direction: np.ndarray
    knot: float
    direction_index: int = 0
    knot_index: int = 0


@dataclass(frozen=True, eq=False)
class SplitCandidate:
    """Uma componente da mistura de adição: divisão, lados e peso não normalizado n- * n+."""
    spec: SplitSpec
    minus: Optional[np.ndarray]
    plus: Optional[np.ndarray]
    weight: float


@dataclass(frozen=True, eq=False)
class ProposalDraw:
    """Candidato sorteado e as log-densidades de ida e volta."""
    candidate: ModelState
    log_forward: float
    log_reverse: float
    kind: MoveKind
    directions: Optional[np.ndarray] = None
    removed: Optional[int] = None
    split: Optional[SplitSpec] = None


def jump_probabilities(K: int, lam: float, c: float) -> Tuple[float, float, float]:
    """
    Probabilidades de adição, remoção e realocação para K hiperplanos.

    Com K - 1 ~ Poisson(lam): p(K + 1) / p(K) = lam / K e p(K - 1) / p(K) = (K - 1) / lam.
    Como K = 0 não tem massa, d_1 = 0.

    Args:
        K: Número atual de hiperplanos (>= 1)
        lam: Taxa da Poisson
        c: Constante (tipicamente 0.4)

    Returns:
        Tupla (b_K, d_K, r_K)
    """
    if K < 1:
        raise ContractError(f"K deve ser >= 1, recebido {K}")
    birth = c * min(1.0, lam / K)
    death = c * min(1.0, (K - 1) / lam) if K >= 2 else 0.0
    return birth, death, 1.0 - birth - death


def draw_directions(cfg: ResolvedProposal, p: int, rng: np.random.Generator) -> np.ndarray:
    """Direções de busca M x p: cardinais ou gaussianas sorteadas nesta tentativa."""
    if cfg.direction_mode == "cardinal":
        return np.eye(p)
    return rng.standard_normal((cfg.M, p))


def region_posteriors(nig: NigParams, data: Dataset, subsets: Sequence[np.ndarray]) -> List[NigParams]:
    """Posteriori NIG de cada subconjunto (regiões vazias devolvem a própria NIG)."""
    return [nig_posterior(nig, *data.subset(subset)) for subset in subsets]


def _plane_log_density(params: NigParams, state: ModelState, index: int) -> float:
    coefficients = np.concatenate(([state.intercepts[index]], state.slopes[index]))
    return float(nig_log_density_batch(params, coefficients[None, :], state.variances[index:index + 1])[0])


def product_log_density(posteriors: Sequence[NigParams], state: ModelState) -> float:
    """Soma das log-densidades do plano k sob a posteriori da região k."""
    if len(posteriors) != state.K:
        raise ContractError(f"{len(posteriors)} regiões para {state.K} hiperplanos")
    return float(sum(_plane_log_density(post, state, k) for k, post in enumerate(posteriors)))


def _sample_state(posteriors: Sequence[NigParams], rng: np.random.Generator) -> ModelState:
    return ModelState(tuple(nig_sample(post, rng) for post in posteriors))


def deletion_weights(sizes: Sequence[int]) -> np.ndarray:
    """p_d(j) ∝ 1 / |C_j|, com regiões vazias tratadas como tamanho 0.25."""
    sizes = np.asarray(sizes, dtype=float)
    weights = 1.0 / np.where(sizes > 0, sizes, EMPTY_REGION_SIZE)
    return weights / weights.sum()


def enumerate_splits(
    partition: Partition,
    data: Dataset,
    directions: np.ndarray,
    L: int,
) -> List[SplitCandidate]:
    """
    Enumera as K * L * M divisões (região, direção, nó).

    Os nós dividem [min, max] das projeções da região em L + 1 intervalos de
    mesma largura. Regiões com menos de 2 pontos ou projeção sem espalhamento
    recebem peso 0 em todas as suas divisões.

    Args:
        partition: Partição atual
        data: Dataset
        directions: Matriz M x p de direções
        L: Número de nós

    Returns:
        Lista de SplitCandidate na ordem (região, direção, nó)
    """
    candidates: List[SplitCandidate] = []
    fractions = np.arange(1, L + 1) / (L + 1)
    for region, subset in enumerate(partition.subsets):
        for m, direction in enumerate(directions):
            projection = data.X[subset] @ direction if len(subset) else np.empty(0)
            low = projection.min() if len(subset) else 0.0
            high = projection.max() if len(subset) else 0.0
            splittable = len(subset) >= 2 and high > low
            for ell, fraction in enumerate(fractions):
                knot = float(low + fraction * (high - low))
                spec = SplitSpec(region=region, direction=direction, knot=knot, direction_index=m, knot_index=ell)
                if not splittable:
                    candidates.append(SplitCandidate(spec, None, None, 0.0))
                    continue
                below = projection <= knot
                minus, plus = subset[below], subset[~below]
                candidates.append(SplitCandidate(spec, minus, plus, float(len(minus) * len(plus))))
    return candidates


def split_subsets(partition: Partition, candidate: SplitCandidate) -> List[np.ndarray]:
    """Partição de K + 1 regiões: a região dividida vira (j-, j+) na mesma posição."""
    j = candidate.spec.region
    subsets = list(partition.subsets)
    return subsets[:j] + [candidate.minus, candidate.plus] + subsets[j + 1:]


def relocation_log_density(source: ModelState, target: ModelState, data: Dataset, cfg: ResolvedProposal) -> float:
    """log h_r(target | source): regiões básicas induzidas por `source`."""
    partition = assign_partition(source, data)
    return product_log_density(region_posteriors(cfg.nig, data, partition.subsets), target)


def deletion_log_density(source: ModelState, target: ModelState, data: Dataset, cfg: ResolvedProposal) -> float:
    """
    log h_d(target | source): mistura sobre todos os planos removíveis de `source`.

    Args:
        source: Estado com K hiperplanos
        target: Estado com K - 1 hiperplanos
        data: Dataset
        cfg: Proposta resolvida

    Returns:
        Log-densidade da mistura
    """
    if target.K != source.K - 1:
        raise ContractError(f"remoção exige K* = K - 1 (K={source.K}, K*={target.K})")
    weights = deletion_weights(assign_partition(source, data).sizes)
    terms = []
    for j in range(source.K):
        reduced = source.without(j)
        partition = assign_partition(reduced, data)
        posteriors = region_posteriors(cfg.nig, data, partition.subsets)
        terms.append(np.log(weights[j]) + product_log_density(posteriors, target))
    return float(logsumexp(terms))


def _addition_mixture(
    partition: Partition,
    candidates: Sequence[SplitCandidate],
    base_posteriors: Sequence[NigParams],
    target: ModelState,
    data: Dataset,
    cfg: ResolvedProposal,
) -> float:
    total = sum(candidate.weight for candidate in candidates)
    if total <= 0:
        return -np.inf
    K = partition.K
    # plano k do alvo na mesma posição (antes da divisão) ou deslocado de 1 (depois)
    same = np.array([_plane_log_density(base_posteriors[k], target, k) for k in range(K)])
    shifted = np.array([_plane_log_density(base_posteriors[k], target, k + 1) for k in range(K)])
    before = np.concatenate(([0.0], np.cumsum(same)))
    after = np.concatenate((np.cumsum(shifted[::-1])[::-1], [0.0]))

    terms = []
    for candidate in candidates:
        if candidate.weight <= 0:
            continue
        j = candidate.spec.region
        minus_post = nig_posterior(cfg.nig, *data.subset(candidate.minus))
        plus_post = nig_posterior(cfg.nig, *data.subset(candidate.plus))
        terms.append(
            np.log(candidate.weight / total)
            + before[j]
            + _plane_log_density(minus_post, target, j)
            + _plane_log_density(plus_post, target, j + 1)
            + after[j + 1]
        )
    return float(logsumexp(terms))


def addition_log_density(
    source: ModelState,
    target: ModelState,
    data: Dataset,
    cfg: ResolvedProposal,
    directions: np.ndarray,
) -> float:
    """
    log h_b(target | source): mistura sobre as K * L * M divisões de `source`.

    Devolve -inf quando nenhuma região de `source` pode ser dividida.

    Args:
        source: Estado com K hiperplanos
        target: Estado com K + 1 hiperplanos
        data: Dataset
        cfg: Proposta resolvida
        directions: Direções usadas nesta tentativa

    Returns:
        Log-densidade da mistura
    """
    if target.K != source.K + 1:
        raise ContractError(f"adição exige K* = K + 1 (K={source.K}, K*={target.K})")
    partition = assign_partition(source, data)
    candidates = enumerate_splits(partition, data, directions, cfg.L)
    base_posteriors = region_posteriors(cfg.nig, data, partition.subsets)
    return _addition_mixture(partition, candidates, base_posteriors, target, data, cfg)


def _check_dimension(state: ModelState, data: Dataset) -> None:
    if state.dim != data.p:
        raise InputError(f"dimensão incompatível: estado p={state.dim}, dados p={data.p}")


def propose_relocation(state: ModelState, data: Dataset, cfg: ResolvedProposal, rng: np.random.Generator) -> ProposalDraw:
    """
    Realocação: novos K planos sorteados das regiões básicas do estado atual.

    Args:
        state: Estado atual
        data: Dataset
        cfg: Proposta resolvida
        rng: Gerador aleatório

    Returns:
        ProposalDraw do tipo relocate
    """
    _check_dimension(state, data)
    _, _, relocate = jump_probabilities(state.K, cfg.lam, cfg.c)
    partition = assign_partition(state, data)
    posteriors = region_posteriors(cfg.nig, data, partition.subsets)
    candidate = _sample_state(posteriors, rng)

    log_forward = np.log(relocate) + product_log_density(posteriors, candidate)
    log_reverse = np.log(relocate) + relocation_log_density(candidate, state, data, cfg)
    return ProposalDraw(candidate, float(log_forward), float(log_reverse), MoveKind.RELOCATE)


def propose_deletion(state: ModelState, data: Dataset, cfg: ResolvedProposal, rng: np.random.Generator) -> ProposalDraw:
    """
    Remoção: escolhe j com p_d(j), remove o plano e sorteia K - 1 planos novos.

    Raises:
        ContractError: Se K = 1
    """
    _check_dimension(state, data)
    if state.K < 2:
        raise ContractError("remoção exige K >= 2")
    _, death, _ = jump_probabilities(state.K, cfg.lam, cfg.c)
    birth_back, _, _ = jump_probabilities(state.K - 1, cfg.lam, cfg.c)

    weights = deletion_weights(assign_partition(state, data).sizes)
    removed = int(rng.choice(state.K, p=weights))
    reduced = state.without(removed)
    partition = assign_partition(reduced, data)
    candidate = _sample_state(region_posteriors(cfg.nig, data, partition.subsets), rng)
    directions = draw_directions(cfg, data.p, rng)

    log_forward = np.log(death) + deletion_log_density(state, candidate, data, cfg)
    log_reverse = np.log(birth_back) + addition_log_density(candidate, state, data, cfg, directions)
    logger.debug(f"Remoção do plano {removed} de {state.K}")
    return ProposalDraw(
        candidate, float(log_forward), float(log_reverse), MoveKind.DELETE,
        directions=directions, removed=removed,
    )


def propose_addition(state: ModelState, data: Dataset, cfg: ResolvedProposal, rng: np.random.Generator) -> ProposalDraw:
    """
    Adição: escolhe uma divisão (j, m, l) com p_b ∝ n- * n+ e sorteia K + 1 planos.

    Raises:
        AdditionUnavailable: Se nenhuma região puder ser dividida
    """
    _check_dimension(state, data)
    birth, _, _ = jump_probabilities(state.K, cfg.lam, cfg.c)
    _, death_back, _ = jump_probabilities(state.K + 1, cfg.lam, cfg.c)

    directions = draw_directions(cfg, data.p, rng)
    partition = assign_partition(state, data)
    candidates = enumerate_splits(partition, data, directions, cfg.L)
    weights = np.array([candidate.weight for candidate in candidates])
    if weights.sum() <= 0:
        raise AdditionUnavailable(f"nenhuma região divisível entre {state.K} hiperplanos")

    chosen = candidates[int(rng.choice(len(candidates), p=weights / weights.sum()))]
    base_posteriors = region_posteriors(cfg.nig, data, partition.subsets)
    j = chosen.spec.region
    posteriors = (
        list(base_posteriors[:j])
        + region_posteriors(cfg.nig, data, [chosen.minus, chosen.plus])
        + list(base_posteriors[j + 1:])
    )
    candidate = _sample_state(posteriors, rng)

    log_forward = np.log(birth) + _addition_mixture(partition, candidates, base_posteriors, candidate, data, cfg)
    log_reverse = np.log(death_back) + deletion_log_density(candidate, state, data, cfg)
    logger.debug(f"Adição dividindo a região {j} (nó {chosen.spec.knot:.4g})")
    return ProposalDraw(
        candidate, float(log_forward), float(log_reverse), MoveKind.ADD,
        directions=directions, split=chosen.spec,
    )
