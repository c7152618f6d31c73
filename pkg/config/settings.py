#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Configurações da biblioteca e da linha de comando MBCR.
"""

import os
from typing import Dict, Any
from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()

# Configurações da aplicação
APP_NAME = "mbcr"
APP_VERSION = "0.1.0"
APP_DESCRIPTION = "Regressão convexa bayesiana multivariada via RJMCMC"

# Configurações de ambiente
ENV = os.getenv("MBCR_ENV", "development")
DEBUG = ENV == "development"

# Configurações de logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOGS_DIR = os.getenv("LOGS_DIR", "logs")
LOG_TO_FILE = os.getenv("LOG_TO_FILE", "False").lower() == "true"

# Priori: K - 1 ~ Poisson(lambda), planos ~ NIG
DEFAULT_LAMBDA = float(os.getenv("MBCR_LAMBDA", "20"))
DEFAULT_PRIOR_SCALE = float(os.getenv("MBCR_PRIOR_SCALE", "10.0"))
DEFAULT_PRIOR_A = float(os.getenv("MBCR_PRIOR_A", "2.0"))
DEFAULT_PRIOR_B = float(os.getenv("MBCR_PRIOR_B", "0.5"))
TRUNCATION_DRAWS = int(os.getenv("MBCR_TRUNCATION_DRAWS", "100000"))
TRUNCATION_ATTEMPTS = int(os.getenv("MBCR_TRUNCATION_ATTEMPTS", "10000"))

# Propostas
DEFAULT_PROPOSAL_SCALE = float(os.getenv("MBCR_PROPOSAL_SCALE", "0.25"))
DEFAULT_JUMP_C = float(os.getenv("MBCR_JUMP_C", "0.4"))
DEFAULT_KNOTS = int(os.getenv("MBCR_KNOTS", "2"))

# Cadeia
DEFAULT_ITERATIONS = int(os.getenv("MBCR_ITERATIONS", "1000"))
DEFAULT_BURN_IN = int(os.getenv("MBCR_BURN_IN", "500"))
DEFAULT_THIN = int(os.getenv("MBCR_THIN", "1"))
NUMERICAL_ERROR_FRACTION = float(os.getenv("NUMERICAL_ERROR_FRACTION", "0.01"))
CHOLESKY_ESCALATIONS = 3

# Solvers
LSE_MAX_N = int(os.getenv("LSE_MAX_N", "500"))
LSE_MAX_ITERATIONS = int(os.getenv("LSE_MAX_ITERATIONS", "50000"))
LSE_TOLERANCE = float(os.getenv("LSE_TOLERANCE", "1e-6"))
LP_MAX_ITERATIONS = int(os.getenv("LP_MAX_ITERATIONS", "100000"))

# Benchmark
BENCH_TEST_N = int(os.getenv("BENCH_TEST_N", "10000"))
BENCH_TEST_SEED = int(os.getenv("BENCH_TEST_SEED", "20120401"))
SURROGATE_MAX_DRAWS = int(os.getenv("SURROGATE_MAX_DRAWS", "100"))

# Previsão
DEFAULT_LEVEL = float(os.getenv("MBCR_LEVEL", "0.9"))
MIN_BAND_DRAWS = 10


def get_all_settings() -> Dict[str, Any]:
    """
    Retorna todas as configurações definidas neste módulo.

    Returns:
        Dicionário de configurações
    """
    return {k: v for k, v in globals().items() if not k.startswith("_") and k.isupper()}
