#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Manipulador das operações MBCR: fit, predict, bench, minimize e stability.
"""

import logging
import os
from typing import Any, Dict, List, Optional, Sequence

from config import settings
from utils.helpers import write_csv_rows, write_json_file
from .base_handler import BaseHandler
from ..bench import PIPELINES, run_benchmark, stability_experiment
from ..exceptions import InputError
from ..predict import k_distribution, posterior_band_batch, posterior_mean_batch
from ..sampler import run_chain
from ..serialization import read_fit_config, read_model, write_model
from ..solvers.lp_solver import minimize_surrogate, thin_states
from ..validation import check_level, parse_box, parse_grid, read_dataset, read_queries

logger = logging.getLogger(__name__)

PUBLIC_METHODS = ("mbcr", "lse")
TEST_METHODS = ("truth",)


class MbcrHandler(BaseHandler):
    """
    Manipulador para as operações de ajuste, previsão e experimentos.
    """

    def handle(self, operation: str, parameters: Dict[str, Any], context: Optional[Dict[str, Any]] = None) -> Any:
        """
        Manipula uma operação MBCR.

        Args:
            operation: Nome da operação a ser executada
            parameters: Parâmetros da operação
            context: Contexto adicional (opcional)

        Returns:
            Resultado da operação
        """
        operation_map = {
            "fit": self._handle_fit,
            "predict": self._handle_predict,
            "bench": self._handle_bench,
            "minimize": self._handle_minimize,
            "stability": self._handle_stability,
        }

        if operation not in operation_map:
            raise InputError(f"Operação não suportada: {operation}")

        handler_method = operation_map[operation]
        return handler_method(parameters, context)

    def _is_test_mode(self, context: Optional[Dict[str, Any]]) -> bool:
        """
        Verifica se estamos em modo de teste.

        Args:
            context: Contexto adicional

        Returns:
            bool: Verdadeiro se estiver em modo de teste
        """
        return bool(context and context.get("test_mode", False))

    def _methods(self, methods: Sequence[str], context: Optional[Dict[str, Any]]) -> List[str]:
        allowed = PUBLIC_METHODS + (TEST_METHODS if self._is_test_mode(context) else ())
        methods = [method.strip() for method in methods if method.strip()]
        unknown = [method for method in methods if method not in allowed]
        if unknown or not methods:
            raise InputError(f"Métodos inválidos: {unknown or methods} (disponíveis: {', '.join(PUBLIC_METHODS)})")
        return methods

    def _config(self, parameters: Dict[str, Any]):
        config = read_fit_config(parameters.get("config_path"))
        if parameters.get("seed") is not None:
            config = config.model_copy(update={"chain": config.chain.model_copy(update={"seed": parameters["seed"]})})
        return config

    def _handle_fit(self, parameters: Dict[str, Any], context: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        """
        Ajusta o modelo e grava o arquivo JSON.

        Args:
            parameters: data_path, out_path, config_path (opcional), seed (opcional)
            context: Contexto adicional (opcional)

        Returns:
            Taxas de aceitação, estados retidos e distribuição de K
        """
        data = read_dataset(parameters["data_path"])
        config = self._config(parameters)
        samples, diagnostics = run_chain(data, config.prior, config.proposal, config.chain)
        write_model(parameters["out_path"], samples, diagnostics)
        return {
            "retained": len(samples),
            "acceptance_rate_by_kind": diagnostics.acceptance_rate_by_kind,
            "k_distribution": k_distribution(samples),
            "out": parameters["out_path"],
        }

    def _handle_predict(self, parameters: Dict[str, Any], context: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        """
        Grava x1..xp, mean, lo, hi para cada ponto de consulta.

        Args:
            parameters: model_path, out_path, query_path ou grid, level
            context: Contexto adicional (opcional)

        Returns:
            Número de linhas gravadas
        """
        samples, _ = read_model(parameters["model_path"])
        level = check_level(parameters.get("level", settings.DEFAULT_LEVEL))
        if parameters.get("grid"):
            X = parse_grid(parameters["grid"], samples.dim)
        elif parameters.get("query_path"):
            X = read_queries(parameters["query_path"], samples.dim)
        else:
            raise InputError("predict exige um arquivo de consulta ou --grid")

        mean = posterior_mean_batch(samples, X)
        lo, hi = posterior_band_batch(samples, X, level)
        header = [f"x{j}" for j in range(1, samples.dim + 1)] + ["mean", "lo", "hi"]
        rows = [[*map(float, x), float(m), float(a), float(b)] for x, m, a, b in zip(X, mean, lo, hi)]
        write_csv_rows(parameters["out_path"], header, rows)
        logger.info(f"{len(rows)} previsões gravadas em {parameters['out_path']}")
        return {"rows": len(rows), "level": level, "out": parameters["out_path"]}

    def _handle_bench(self, parameters: Dict[str, Any], context: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        """
        Executa o benchmark de MSE e grava resultados e resumo.

        Args:
            parameters: problem, n, seeds, methods, out_path, config_path, jobs, test_n
            context: Contexto adicional (opcional)

        Returns:
            Resumo por método e falhas
        """
        methods = self._methods(parameters.get("methods", PUBLIC_METHODS), context)
        report = run_benchmark(
            parameters["problem"],
            int(parameters["n"]),
            list(parameters["seeds"]),
            methods,
            config=read_fit_config(parameters.get("config_path")),
            jobs=int(parameters.get("jobs") or 1),
            test_n=parameters.get("test_n"),
        )
        header = ["problem", "method", "n", "seed", "mse", "standard_error"]
        rows = [[r.problem, r.method, r.n, r.seed, r.mse, ""] for r in report.records]
        summaries = report.summaries()
        rows += [[s.problem, s.method, s.n, "mean", s.mean, s.standard_error] for s in summaries]
        write_csv_rows(parameters["out_path"], header, rows)
        return {
            "records": len(report.records),
            "summaries": [{"method": s.method, "mean": s.mean, "standard_error": s.standard_error} for s in summaries],
            "failures": report.failures,
            "out": parameters["out_path"],
        }

    def _handle_minimize(self, parameters: Dict[str, Any], context: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        """
        Minimiza a média a posteriori do modelo sobre a caixa.

        Args:
            parameters: model_path, box, out_path (opcional)
            context: Contexto adicional (opcional)

        Returns:
            x_star e value
        """
        samples, _ = read_model(parameters["model_path"])
        box = parse_box(parameters.get("box"), samples.dim)
        states = thin_states(samples.draws)
        solution = minimize_surrogate(states, box)
        if not solution.optimal:
            raise InputError("caixa malformada")
        # value é a média sobre todos os estados, não só sobre os usados no LP
        value = float(posterior_mean_batch(samples, solution.x_star.reshape(1, -1))[0])
        if len(states) < len(samples.draws):
            logger.info(f"Minimização sobre {len(states)} de {len(samples.draws)} estados")
        result = {"x_star": [float(v) for v in solution.x_star], "value": value}
        if parameters.get("out_path"):
            write_json_file(parameters["out_path"], result)
        return result

    def _handle_stability(self, parameters: Dict[str, Any], context: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        """
        Executa o experimento de estabilidade do problema quad.

        Args:
            parameters: resamples, n, seed, methods, out_path, config_path, jobs
            context: Contexto adicional (opcional)

        Returns:
            Distância média a (0, 0) por método
        """
        methods = self._methods(parameters.get("methods", PUBLIC_METHODS), context)
        result = stability_experiment(
            int(parameters["resamples"]),
            pipelines={method: PIPELINES[method] for method in methods},
            n=int(parameters.get("n") or 100),
            seed=int(parameters.get("seed") or 0),
            config=read_fit_config(parameters.get("config_path")),
            jobs=int(parameters.get("jobs") or 1),
        )
        rows = [
            [method, r, seed, *map(float, point)]
            for method, points in result.minimizers.items()
            for r, (seed, point) in enumerate(zip(result.seeds, points))
        ]
        out_path = parameters["out_path"]
        write_csv_rows(out_path, ["method", "resample", "seed", "x1", "x2"], rows)
        summary = {"mean_distance": result.mean_distance, "resamples": len(result.seeds)}
        write_json_file(os.path.splitext(out_path)[0] + "_summary.json", summary)
        return summary

