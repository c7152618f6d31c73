#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Problemas sintéticos, avaliação de MSE e experimentos de estabilidade.

Problemas disponíveis (dimensão entre parênteses):

    p1 (5): y = (x1 + 0.5 x2 + x3)^2 - x4 + 0.25 x5^2 + N(0, 1),  x ~ N(0, I)
    p2 (6): y = (x1 + x2)^2 + N(0, 0.5^2),                        x ~ U[-1, 1]
    p3 (4): y = |a^T x| + N(0, 1),                                x ~ U[-4, 4]
    quad (2): y = x Q x^T + N(0, 0.1),                            x ~ U[-1, 1]
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import settings
from config.models import ChainConfig, FitConfig
from .core import Dataset, ModelState
from .exceptions import ContractError, InputError
from .predict import posterior_mean_batch
from .sampler import PosteriorSamples, run_chain
from .solvers.lp_solver import minimize_surrogate, thin_states
from .solvers.qp_solver import lse_fit, lse_predict_batch, lse_state

logger = logging.getLogger(__name__)

ProblemId = Literal["p1", "p2", "p3", "quad"]

PROBLEM_DIMENSIONS = {"p1": 5, "p2": 6, "p3": 4, "quad": 2}
NOISE_VARIANCE = {"p1": 1.0, "p2": 0.25, "p3": 1.0, "quad": 0.1}
P3_COEFFICIENTS = np.array([0.8262, 0.9305, 1.6361, 0.6072])
QUAD_MATRIX = np.array([[1.0, 0.2], [0.2, 1.0]])
QUAD_BOX = (np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
QUAD_MINIMIZER = np.zeros(2)

Estimator = Callable[[np.ndarray], np.ndarray]


class ProblemSpec(BaseModel):
    """Problema sintético: identificador, tamanho da amostra e semente."""
    model_config = ConfigDict(frozen=True)

    id: ProblemId
    n: int = Field(gt=0)
    seed: int = Field(default=0, ge=0, le=2 ** 64 - 1)

    @property
    def p(self) -> int:
        return PROBLEM_DIMENSIONS[self.id]


def truth_function(problem_id: str) -> Estimator:
    """Função verdadeira (sem ruído) avaliada em lote."""
    if problem_id == "p1":
        return lambda X: (X[:, 0] + 0.5 * X[:, 1] + X[:, 2]) ** 2 - X[:, 3] + 0.25 * X[:, 4] ** 2
    if problem_id == "p2":
        return lambda X: (X[:, 0] + X[:, 1]) ** 2
    if problem_id == "p3":
        return lambda X: np.abs(X @ P3_COEFFICIENTS)
    if problem_id == "quad":
        return lambda X: np.einsum("ij,jk,ik->i", X, QUAD_MATRIX, X)
    raise InputError(f"problema desconhecido: {problem_id}")


def sample_design(problem_id: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Covariáveis da distribuição de desenho do problema."""
    p = PROBLEM_DIMENSIONS[problem_id]
    if problem_id == "p1":
        return rng.standard_normal((n, p))
    if problem_id == "p3":
        return rng.uniform(-4.0, 4.0, size=(n, p))
    return rng.uniform(-1.0, 1.0, size=(n, p))


def generate(spec: ProblemSpec) -> Tuple[Dataset, Estimator]:
    """
    Gera o dataset do problema e devolve também a função verdadeira.

    Args:
        spec: Problema, tamanho e semente

    Returns:
        Tupla (Dataset, verdade)
    """
    rng = np.random.default_rng(spec.seed)
    X = sample_design(spec.id, spec.n, rng)
    truth = truth_function(spec.id)
    noise = np.sqrt(NOISE_VARIANCE[spec.id]) * rng.standard_normal(spec.n)
    return Dataset(X, truth(X) + noise), truth


def evaluate_mse(
    estimator: Estimator,
    spec: ProblemSpec,
    test_n: Optional[int] = None,
    test_seed: Optional[int] = None,
) -> float:
    """
    MSE do estimador contra a verdade em covariáveis novas do mesmo desenho.

    O conjunto de teste depende só de (problema, test_n, test_seed), então é o
    mesmo para todos os métodos comparados.

    Args:
        estimator: Função em lote X -> valores
        spec: Problema
        test_n: Tamanho do conjunto de teste
        test_seed: Semente do conjunto de teste

    Returns:
        Erro quadrático médio
    """
    test_n = test_n or settings.BENCH_TEST_N
    test_seed = settings.BENCH_TEST_SEED if test_seed is None else test_seed
    X = sample_design(spec.id, test_n, np.random.default_rng(test_seed))
    predictions = np.asarray(estimator(X), dtype=float).ravel()
    if predictions.shape[0] != test_n:
        raise InputError(f"estimador devolveu {predictions.shape[0]} valores para {test_n} pontos")
    return float(np.mean((predictions - truth_function(spec.id)(X)) ** 2))


def _chain_for_seed(config: FitConfig, seed: int) -> ChainConfig:
    return config.chain.model_copy(update={"seed": seed})


def fit_mbcr(data: Dataset, config: Optional[FitConfig] = None, seed: int = 0) -> PosteriorSamples:
    """Ajuste MBCR com a semente da cadeia substituída por `seed`."""
    config = config or FitConfig()
    samples, diagnostics = run_chain(data, config.prior, config.proposal, _chain_for_seed(config, seed))
    logger.debug(f"Aceitação MBCR: {diagnostics.acceptance_rate_by_kind}")
    return samples


def fit_estimator(method: str, spec: ProblemSpec, config: Optional[FitConfig] = None) -> Estimator:
    """
    Gera os dados do problema e ajusta o método pedido.

    `truth` devolve a própria função verdadeira (verificação do harness).
    """
    data, truth = generate(spec)
    if method == "mbcr":
        samples = fit_mbcr(data, config, spec.seed)
        return lambda X: posterior_mean_batch(samples, X)
    if method == "lse":
        solution = lse_fit(data)
        return lambda X: lse_predict_batch(solution, None, X)
    if method == "truth":
        return truth
    raise InputError(f"método desconhecido: {method}")


@dataclass(frozen=True)
class BenchRecord:
    problem: str
    method: str
    n: int
    seed: int
    mse: float


@dataclass(frozen=True)
class BenchSummary:
    problem: str
    method: str
    n: int
    runs: int
    mean: float
    standard_error: float


@dataclass
class BenchReport:
    records: List[BenchRecord] = field(default_factory=list)
    failures: List[Dict] = field(default_factory=list)

    def summaries(self) -> List[BenchSummary]:
        """Média e erro padrão por método, na ordem em que os métodos aparecem."""
        methods = list(dict.fromkeys(record.method for record in self.records))
        summaries = []
        for method in methods:
            rows = [record for record in self.records if record.method == method]
            values = np.array([record.mse for record in rows])
            error = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
            summaries.append(BenchSummary(rows[0].problem, method, rows[0].n, len(values), float(values.mean()), error))
        return summaries


def _bench_task(problem_id: str, n: int, seed: int, method: str, config_data: Dict,
                test_n: Optional[int]) -> BenchRecord:
    spec = ProblemSpec(id=problem_id, n=n, seed=seed)
    estimator = fit_estimator(method, spec, FitConfig.model_validate(config_data))
    mse = evaluate_mse(estimator, spec, test_n=test_n)
    logger.info(f"Bench {problem_id} {method} n={n} seed={seed}: mse={mse:.6g}")
    return BenchRecord(problem_id, method, n, seed, mse)


def run_benchmark(
    problem_id: str,
    n: int,
    seeds: Sequence[int],
    methods: Sequence[str] = ("mbcr", "lse"),
    config: Optional[FitConfig] = None,
    jobs: int = 1,
    test_n: Optional[int] = None,
) -> BenchReport:
    """
    generate -> fit -> evaluate_mse para cada semente e método.

    Falhas de ajuste são registradas em `failures` sem descartar os demais
    resultados.

    Args:
        problem_id: p1, p2, p3 ou quad
        n: Tamanho da amostra
        seeds: Sementes dos dados (e da cadeia)
        methods: Métodos a comparar
        config: Configuração MBCR
        jobs: Processos paralelos
        test_n: Tamanho do conjunto de teste

    Returns:
        BenchReport
    """
    if problem_id not in PROBLEM_DIMENSIONS:
        raise InputError(f"problema desconhecido: {problem_id}")
    config_data = (config or FitConfig()).model_dump(by_alias=True)
    tasks = [(problem_id, n, seed, method, config_data, test_n) for seed in seeds for method in methods]
    report = BenchReport()

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_bench_task, *task) for task in tasks]
            for task, future in zip(tasks, futures):
                _collect(report, task, future.result)
    else:
        for task in tasks:
            _collect(report, task, lambda task=task: _bench_task(*task))
    return report


def _collect(report: BenchReport, task: Tuple, run: Callable[[], BenchRecord]) -> None:
    problem_id, n, seed, method = task[:4]
    try:
        report.records.append(run())
    except Exception as e:
        logger.error(f"Falha no bench {problem_id} {method} seed={seed}: {e}", exc_info=True)
        report.failures.append({"problem": problem_id, "method": method, "n": n, "seed": seed, "error": str(e)})


def mbcr_pipeline(data: Dataset, config: Optional[FitConfig] = None, seed: int = 0) -> np.ndarray:
    """Minimizador da média a posteriori MBCR sobre a caixa do problema quad."""
    samples = fit_mbcr(data, config, seed)
    return minimize_surrogate(thin_states(samples.draws), QUAD_BOX).x_star


def lse_pipeline(data: Dataset, config: Optional[FitConfig] = None, seed: int = 0) -> np.ndarray:
    """Minimizador do LSE sobre a caixa do problema quad."""
    return minimize_surrogate([lse_state(lse_fit(data), data)], QUAD_BOX).x_star


def truth_pipeline(data: Dataset, config: Optional[FitConfig] = None, seed: int = 0) -> np.ndarray:
    """Minimizador exato de x Q x^T (Q definida positiva, caixa contendo a origem)."""
    return QUAD_MINIMIZER.copy()


PIPELINES: Dict[str, Callable] = {"mbcr": mbcr_pipeline, "lse": lse_pipeline, "truth": truth_pipeline}


@dataclass(frozen=True)
class StabilityResult:
    """Minimizadores por método (uma linha por reamostragem) e distância média a (0, 0)."""
    seeds: Tuple[int, ...]
    minimizers: Dict[str, np.ndarray]

    @property
    def mean_distance(self) -> Dict[str, float]:
        return {
            method: float(np.linalg.norm(points - QUAD_MINIMIZER, axis=1).mean())
            for method, points in self.minimizers.items()
        }


def _stability_task(pipeline: Callable, n: int, seed: int, config_data: Dict) -> np.ndarray:
    data, _ = generate(ProblemSpec(id="quad", n=n, seed=seed))
    return np.asarray(pipeline(data, FitConfig.model_validate(config_data), seed), dtype=float)


def stability_experiment(
    resamples: int,
    pipelines: Optional[Mapping[str, Callable]] = None,
    n: int = 100,
    seed: int = 0,
    config: Optional[FitConfig] = None,
    jobs: int = 1,
) -> StabilityResult:
    """
    Reamostra o problema quad e registra o minimizador de cada superfície ajustada.

    Args:
        resamples: Número de reamostragens (>= 2)
        pipelines: Nome -> função (dados, config, semente) -> minimizador; padrão mbcr e lse
        n: Observações por reamostragem
        seed: Semente da primeira reamostragem (as demais usam seed + r)
        config: Configuração MBCR
        jobs: Processos paralelos

    Returns:
        StabilityResult
    """
    if resamples < 2:
        raise ContractError("stability_experiment exige ao menos 2 reamostragens")
    pipelines = dict(pipelines or {"mbcr": mbcr_pipeline, "lse": lse_pipeline})
    config_data = (config or FitConfig()).model_dump(by_alias=True)
    seeds = tuple(seed + r for r in range(resamples))
    minimizers: Dict[str, np.ndarray] = {}
    for name, pipeline in pipelines.items():
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                points = list(executor.map(_stability_task, [pipeline] * resamples, [n] * resamples, seeds,
                                           [config_data] * resamples))
        else:
            points = [_stability_task(pipeline, n, s, config_data) for s in seeds]
        minimizers[name] = np.vstack(points)
        logger.info(f"Estabilidade {name}: {resamples} reamostragens concluídas")
    return StabilityResult(seeds=seeds, minimizers=minimizers)


@dataclass(frozen=True)
class SensitivityRow:
    k: int
    draws: int
    group_minimizer: np.ndarray
    group_value: float
    spread: float


def hyperplane_sensitivity(
    samples: PosteriorSamples,
    box: Tuple[np.ndarray, np.ndarray],
    max_draws: Optional[int] = None,
) -> List[SensitivityRow]:
    """
    Minimiza os estados agrupados por K.

    Para cada K relata o minimizador da superfície média do grupo e a
    dispersão (distância média ao centróide) dos minimizadores individuais.

    Args:
        samples: Estados da posteriori
        box: Caixa (inferior, superior)
        max_draws: Limite de estados por grupo

    Returns:
        Uma linha por K, em ordem crescente de K
    """
    groups: Dict[int, List[ModelState]] = {}
    for state in samples.draws:
        groups.setdefault(state.K, []).append(state)
    rows = []
    for k in sorted(groups):
        states = thin_states(groups[k], max_draws)
        group = minimize_surrogate(states, box)
        if not group.optimal:
            raise InputError("caixa malformada")
        individual = np.vstack([minimize_surrogate([state], box).x_star for state in states])
        spread = float(np.linalg.norm(individual - individual.mean(axis=0), axis=1).mean())
        rows.append(SensitivityRow(k, len(groups[k]), group.x_star, group.value, spread))
    return rows
