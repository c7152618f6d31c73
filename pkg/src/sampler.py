#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Cadeia de Markov trans-dimensional (RJMCMC) sobre funções max-afins.

Cada iteração sorteia o tipo de movimento com um único uniforme contra as
probabilidades acumuladas (b_K, d_K, r_K), gera um ProposalDraw e aceita com
probabilidade exp(log_acceptance). A semente do ChainConfig determina toda a
cadeia.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import poisson

from config import settings
from config.models import ChainConfig, PriorConfig, ProposalConfig
from .conjugate import NigParams, nig_log_density, nig_posterior, nig_sample
from .core import Dataset, ModelState, log_likelihood, states_share_dimension
from .exceptions import AdditionUnavailable, ChainError, ContractError, NumericalError
from .proposals import (
    MoveKind,
    ProposalDraw,
    ResolvedProposal,
    jump_probabilities,
    propose_addition,
    propose_deletion,
    propose_relocation,
)

logger = logging.getLogger(__name__)

AUTOCORRELATION_LAGS = 5


@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    """Estados retidos da cadeia, as configurações que os produziram e a caixa envolvente dos dados."""
    draws: Tuple[ModelState, ...]
    prior: PriorConfig = field(default_factory=PriorConfig)
    proposal: ProposalConfig = field(default_factory=ProposalConfig)
    chain: ChainConfig = field(default_factory=ChainConfig)
    bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        draws = tuple(self.draws)
        if not draws:
            raise ContractError("PosteriorSamples exige ao menos um estado")
        p = states_share_dimension(draws)
        object.__setattr__(self, "draws", draws)
        if self.bounds is not None:
            lower, upper = (np.asarray(bound, dtype=float).ravel() for bound in self.bounds)
            if lower.shape != (p,) or upper.shape != (p,) or np.any(lower > upper):
                raise ContractError(f"caixa dos dados incompatível com p={p}")
            object.__setattr__(self, "bounds", (lower, upper))

    @property
    def dim(self) -> int:
        return self.draws[0].dim

    def __len__(self) -> int:
        return len(self.draws)


@dataclass(frozen=True)
class ChainDiagnostics:
    """Taxas de aceitação, traços por iteração e contadores de anomalias."""
    acceptance_rate_by_kind: Dict[str, float]
    attempts_by_kind: Dict[str, int]
    k_trace: Tuple[int, ...]
    log_post_trace: Tuple[float, ...]
    addition_unavailable: int = 0
    numerical_errors: int = 0
    nonfinite_acceptances: int = 0
    autocorrelation: Tuple[float, ...] = ()

    def to_dict(self) -> Dict:
        return {
            "acceptance_rate_by_kind": dict(self.acceptance_rate_by_kind),
            "attempts_by_kind": dict(self.attempts_by_kind),
            "k_trace": list(self.k_trace),
            "log_post_trace": list(self.log_post_trace),
            "addition_unavailable": self.addition_unavailable,
            "numerical_errors": self.numerical_errors,
            "nonfinite_acceptances": self.nonfinite_acceptances,
            "autocorrelation": list(self.autocorrelation),
        }


def log_prior(state: ModelState, prior: PriorConfig, prior_nig: Optional[NigParams] = None) -> float:
    """
    Log-priori: Poisson(lambda) em K - 1 mais a NIG (truncada, se configurada) de cada plano.

    Args:
        state: Estado
        prior: Configuração da priori
        prior_nig: NIG da priori já resolvida (opcional)

    Returns:
        Log-densidade; -inf se algum plano estiver fora da caixa de truncamento
    """
    prior_nig = prior_nig or NigParams.from_prior(prior, state.dim)
    total = float(poisson.logpmf(state.K - 1, prior.lambda_))
    for plane in state.hyperplanes:
        total += nig_log_density(prior_nig, plane.intercept, plane.slope, plane.variance, prior.truncation)
        if total == -np.inf:
            break
    return total


def log_posterior(state: ModelState, data: Dataset, prior: PriorConfig, prior_nig: Optional[NigParams] = None) -> float:
    """Log-posteriori não normalizada (verossimilhança + priori)."""
    prior_value = log_prior(state, prior, prior_nig)
    if prior_value == -np.inf:
        return -np.inf
    return log_likelihood(state, data) + prior_value


def _acceptance_from_terms(
    current_log_post: float,
    candidate_log_post: float,
    draw: ProposalDraw,
    counters: Optional[Counter],
) -> float:
    with np.errstate(invalid="ignore", over="ignore"):
        ratio = candidate_log_post - current_log_post + draw.log_reverse - draw.log_forward
    if np.isnan(ratio) or ratio == np.inf or not np.isfinite(current_log_post):
        if counters is not None:
            counters["nonfinite_acceptances"] += 1
        logger.debug(f"Termo não finito na aceitação ({draw.kind.value}); rejeitado")
        return -np.inf
    return float(min(0.0, ratio))


def log_acceptance(
    current: ModelState,
    draw: ProposalDraw,
    data: Dataset,
    prior: PriorConfig,
    counters: Optional[Counter] = None,
    prior_nig: Optional[NigParams] = None,
) -> float:
    """
    Log da probabilidade de aceitação de Metropolis-Hastings.

    min(0, Δ log-verossimilhança + Δ log-priori + log_reverse - log_forward).

    Args:
        current: Estado atual
        draw: Proposta gerada a partir de `current`
        data: Dataset
        prior: Configuração da priori
        counters: Contador opcional de termos não finitos
        prior_nig: NIG da priori já resolvida (opcional)

    Returns:
        Valor em [-inf, 0]; termos não finitos rejeitam (-inf) e são contados
    """
    prior_nig = prior_nig or NigParams.from_prior(prior, data.p)
    return _acceptance_from_terms(
        log_posterior(current, data, prior, prior_nig),
        log_posterior(draw.candidate, data, prior, prior_nig),
        draw,
        counters,
    )


def _choose_move(K: int, cfg: ResolvedProposal, rng: np.random.Generator) -> MoveKind:
    birth, death, _ = jump_probabilities(K, cfg.lam, cfg.c)
    u = rng.random()
    if u < birth:
        return MoveKind.ADD
    if u < birth + death:
        return MoveKind.DELETE
    return MoveKind.RELOCATE


_PROPOSERS = {
    MoveKind.ADD: propose_addition,
    MoveKind.DELETE: propose_deletion,
    MoveKind.RELOCATE: propose_relocation,
}


def autocorrelation(trace, lags: int = AUTOCORRELATION_LAGS) -> Tuple[float, ...]:
    """Autocorrelação amostral para os lags 1..`lags` (0 quando indefinida)."""
    values = np.asarray(trace, dtype=float)
    centered = values - values.mean() if values.size else values
    denominator = float(centered @ centered)
    result = []
    for lag in range(1, lags + 1):
        if values.size <= lag or denominator <= 0:
            result.append(0.0)
        else:
            result.append(float(centered[:-lag] @ centered[lag:] / denominator))
    return tuple(result)


def _run(
    data: Dataset,
    prior: PriorConfig,
    proposal_cfg: ProposalConfig,
    chain_cfg: ChainConfig,
    trans_dimensional: bool,
) -> Tuple[PosteriorSamples, ChainDiagnostics]:
    rng = np.random.default_rng(chain_cfg.seed)
    prior_nig = NigParams.from_prior(prior, data.p)
    cfg = ResolvedProposal.from_configs(proposal_cfg, prior, data.p)
    error_limit = settings.NUMERICAL_ERROR_FRACTION * chain_cfg.iterations

    initial = nig_posterior(prior_nig, data.design, data.y)
    state = ModelState((nig_sample(initial, rng, truncation=prior.truncation),))
    current_log_post = log_posterior(state, data, prior, prior_nig)

    counters: Counter = Counter()
    attempts: Counter = Counter()
    accepted: Counter = Counter()
    k_trace: List[int] = []
    log_post_trace: List[float] = []
    draws: List[ModelState] = []
    retained_log_post: List[float] = []

    logger.info(
        f"Iniciando cadeia: n={data.n}, p={data.p}, iterações={chain_cfg.iterations}, "
        f"burn-in={chain_cfg.burn_in}, thin={chain_cfg.thin}, seed={chain_cfg.seed}"
    )
    for iteration in range(chain_cfg.iterations):
        kind = _choose_move(state.K, cfg, rng) if trans_dimensional else MoveKind.RELOCATE
        attempts[kind.value] += 1
        try:
            draw = _PROPOSERS[kind](state, data, cfg, rng)
            candidate_log_post = log_posterior(draw.candidate, data, prior, prior_nig)
        except AdditionUnavailable as e:
            counters["addition_unavailable"] += 1
            logger.debug(f"Iteração {iteration}: {e}")
        except NumericalError as e:
            counters["numerical_errors"] += 1
            logger.warning(f"Iteração {iteration}: erro numérico na proposta ({e})")
            if counters["numerical_errors"] > error_limit:
                raise ChainError(
                    f"erros numéricos em {counters['numerical_errors']} de {chain_cfg.iterations} iterações"
                ) from e
        else:
            log_a = _acceptance_from_terms(current_log_post, candidate_log_post, draw, counters)
            if np.log(rng.random()) < log_a:
                state = draw.candidate
                current_log_post = candidate_log_post
                accepted[kind.value] += 1

        k_trace.append(state.K)
        log_post_trace.append(current_log_post)
        offset = iteration - chain_cfg.burn_in + 1
        if offset > 0 and offset % chain_cfg.thin == 0:
            draws.append(state)
            retained_log_post.append(current_log_post)

    rates = {
        kind.value: (accepted[kind.value] / attempts[kind.value] if attempts[kind.value] else 0.0)
        for kind in MoveKind
    }
    diagnostics = ChainDiagnostics(
        acceptance_rate_by_kind=rates,
        attempts_by_kind={kind.value: attempts[kind.value] for kind in MoveKind},
        k_trace=tuple(k_trace),
        log_post_trace=tuple(log_post_trace),
        addition_unavailable=counters["addition_unavailable"],
        numerical_errors=counters["numerical_errors"],
        nonfinite_acceptances=counters["nonfinite_acceptances"],
        autocorrelation=autocorrelation(retained_log_post),
    )
    logger.info(
        f"Cadeia concluída: {len(draws)} estados retidos, K final={state.K}, "
        f"aceitação={', '.join(f'{k}={v:.3f}' for k, v in rates.items())}"
    )
    samples = PosteriorSamples(
        tuple(draws), prior=prior, proposal=proposal_cfg, chain=chain_cfg, bounds=data.bounds,
    )
    return samples, diagnostics


def run_chain(
    data: Dataset,
    prior: Optional[PriorConfig] = None,
    proposal_cfg: Optional[ProposalConfig] = None,
    chain_cfg: Optional[ChainConfig] = None,
) -> Tuple[PosteriorSamples, ChainDiagnostics]:
    """
    Executa a cadeia RJMCMC completa.

    Começa com K = 1 sorteado da posteriori NIG com todos os dados. Adições
    indisponíveis contam como adições rejeitadas; erros numéricos em mais de
    NUMERICAL_ERROR_FRACTION das iterações interrompem a cadeia.

    Args:
        data: Dataset
        prior: Configuração da priori
        proposal_cfg: Configuração das propostas
        chain_cfg: Configuração da cadeia

    Returns:
        Tupla (PosteriorSamples, ChainDiagnostics)

    Raises:
        ChainError: Se os erros numéricos forem persistentes
    """
    return _run(
        data,
        prior or PriorConfig(),
        proposal_cfg or ProposalConfig(),
        chain_cfg or ChainConfig(),
        trans_dimensional=True,
    )


def fixed_k_validation_chain(
    data: Dataset,
    prior: Optional[PriorConfig] = None,
    proposal_cfg: Optional[ProposalConfig] = None,
    chain_cfg: Optional[ChainConfig] = None,
) -> PosteriorSamples:
    """
    Cadeia só com realocações e K fixo em 1.

    A distribuição estacionária é a posteriori NIG exata, o que permite
    validar a maquinaria da cadeia contra os momentos em forma fechada.
    """
    samples, _ = _run(
        data,
        prior or PriorConfig(),
        proposal_cfg or ProposalConfig(),
        chain_cfg or ChainConfig(),
        trans_dimensional=False,
    )
    return samples
