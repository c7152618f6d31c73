#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Linha de comando MBCR.

    python -m src.cli fit dados.csv --out modelo.json [--config cfg.json] [--seed N]
    python -m src.cli predict modelo.json (consulta.csv | --grid "x1=-1:1:21") --out prev.csv [--level 0.9]
    python -m src.cli bench --problem p2 --n 200 --seeds 0,1,2 --methods mbcr,lse --out bench.csv [--jobs 4]
    python -m src.cli minimize modelo.json --box=-1:1,-1:1 [--out min.json]
    python -m src.cli stability --resamples 10 --out estabilidade.csv [--jobs 4]

Códigos de saída: 0 sucesso, 1 erro de entrada, 2 erro de execução.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from config import settings
from utils.logging import setup_logging
from .exceptions import ContractError, InputError
from .handlers.mbcr_handler import MbcrHandler

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RUNTIME = 2


def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"semente inválida: {value}")
    if not 0 <= seed <= 2 ** 64 - 1:
        raise argparse.ArgumentTypeError(f"semente fora de [0, 2^64 - 1]: {value}")
    return seed


def _seed_list(value: str) -> List[int]:
    return [_seed(part) for part in value.split(",") if part.strip()]


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"inteiro inválido: {value}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"esperado inteiro >= 1, recebido {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    """Cria o parser com os subcomandos."""
    parser = argparse.ArgumentParser(prog=settings.APP_NAME, description=settings.APP_DESCRIPTION)
    parser.add_argument("--log-level", default=None, help="Nível de log (padrão: LOG_LEVEL)")
    parser.add_argument("--test-mode", action="store_true", help=argparse.SUPPRESS)
    commands = parser.add_subparsers(dest="command", required=True)

    fit = commands.add_parser("fit", help="Ajusta o modelo a um CSV x1..xp,y")
    fit.add_argument("data", help="CSV de dados")
    fit.add_argument("--out", required=True, help="Arquivo JSON do modelo")
    fit.add_argument("--config", default=None, help="Arquivo JSON de configuração")
    fit.add_argument("--seed", type=_seed, default=None, help="Semente da cadeia")

    predict = commands.add_parser("predict", help="Média a posteriori e bandas pontuais")
    predict.add_argument("model", help="Arquivo JSON do modelo")
    predict.add_argument("queries", nargs="?", default=None, help="CSV de consulta (x1..xp)")
    predict.add_argument("--grid", default=None, help='Grade, ex.: "x1=-1:1:21;x2=0:1:5"')
    predict.add_argument("--level", type=float, default=settings.DEFAULT_LEVEL, help="Nível da banda em (0, 1)")
    predict.add_argument("--out", required=True, help="CSV de saída")

    bench = commands.add_parser("bench", help="MSE em problemas sintéticos")
    bench.add_argument("--problem", required=True, choices=["p1", "p2", "p3", "quad"])
    bench.add_argument("--n", type=_positive_int, default=200)
    bench.add_argument("--seeds", type=_seed_list, default=[0])
    bench.add_argument("--seed", type=_seed, default=None, help="Atalho para uma única semente")
    bench.add_argument("--methods", default="mbcr,lse", help="Lista separada por vírgulas: mbcr,lse")
    bench.add_argument("--config", default=None)
    bench.add_argument("--jobs", type=_positive_int, default=1)
    bench.add_argument("--test-n", type=_positive_int, default=None)
    bench.add_argument("--out", required=True, help="CSV de resultados")

    minimize = commands.add_parser("minimize", help="Minimiza a média a posteriori sobre uma caixa")
    minimize.add_argument("model", help="Arquivo JSON do modelo")
    minimize.add_argument("--box", required=True, help="Caixa lo:hi,lo:hi,... (use --box=-1:1 para limites negativos)")
    minimize.add_argument("--out", default=None, help="JSON de saída {x_star, value}")

    stability = commands.add_parser("stability", help="Experimento de estabilidade do problema quad")
    stability.add_argument("--resamples", type=_positive_int, default=10)
    stability.add_argument("--n", type=_positive_int, default=100)
    stability.add_argument("--seed", type=_seed, default=0)
    stability.add_argument("--methods", default="mbcr,lse")
    stability.add_argument("--config", default=None)
    stability.add_argument("--jobs", type=_positive_int, default=1)
    stability.add_argument("--out", required=True, help="CSV de minimizadores")
    return parser


def _parameters(args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "fit":
        return {"data_path": args.data, "out_path": args.out, "config_path": args.config, "seed": args.seed}
    if args.command == "predict":
        return {"model_path": args.model, "query_path": args.queries, "grid": args.grid,
                "level": args.level, "out_path": args.out}
    if args.command == "bench":
        return {"problem": args.problem, "n": args.n, "seeds": [args.seed] if args.seed is not None else args.seeds,
                "methods": args.methods.split(","), "config_path": args.config, "jobs": args.jobs,
                "test_n": args.test_n, "out_path": args.out}
    if args.command == "minimize":
        return {"model_path": args.model, "box": args.box, "out_path": args.out}
    return {"resamples": args.resamples, "n": args.n, "seed": args.seed, "methods": args.methods.split(","),
            "config_path": args.config, "jobs": args.jobs, "out_path": args.out}


def _print_result(command: str, result: Dict[str, Any]) -> None:
    if command == "fit":
        rates = ", ".join(f"{kind}={rate:.3f}" for kind, rate in result["acceptance_rate_by_kind"].items())
        print(f"estados retidos: {result['retained']}")
        print(f"taxas de aceitação: {rates}")
    elif command == "predict":
        print(f"linhas: {result['rows']}")
    elif command == "bench":
        for summary in result["summaries"]:
            print(f"{summary['method']}: mse médio {summary['mean']:.6g} (erro padrão {summary['standard_error']:.3g})")
    elif command == "minimize":
        print(f"x_star: {json.dumps(result['x_star'])}")
        print(f"value: {result['value']!r}")
    else:
        for method, distance in result["mean_distance"].items():
            print(f"{method}: distância média a (0, 0) {distance:.6g}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Executa a linha de comando e devolve o código de saída.

    Args:
        argv: Argumentos (padrão: sys.argv[1:])

    Returns:
        0 sucesso, 1 erro de entrada, 2 erro de execução
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT

    setup_logging(level=args.log_level)
    logger.debug(f"Configurações: {settings.get_all_settings()}")
    handler = MbcrHandler()
    context = {"test_mode": args.test_mode}
    try:
        result = handler.handle(args.command, _parameters(args), context)
    except (InputError, ContractError, ValidationError, FileNotFoundError) as e:
        logger.error(f"Erro de entrada: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        logger.error(f"Erro ao executar {args.command}: {e}", exc_info=True)
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    _print_result(args.command, result)
    if result.get("failures"):
        print(f"erro: {len(result['failures'])} ajuste(s) falharam; resultados parciais gravados", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
