#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Hierarquia de exceções do MBCR.

Erros de entrada e de contrato herdam de ValueError e viram código de saída 1
na linha de comando; os demais viram código 2.
"""

from typing import Any, Dict, Optional


class MBCRError(Exception):
    """Classe base para todos os erros do MBCR."""


class InputError(MBCRError, ValueError):
    """Entrada malformada: dimensões, CSV, grade, caixa ou nível inválidos."""


class ContractError(MBCRError, ValueError):
    """Pré-condição de uma operação violada."""


class NumericalError(MBCRError, ArithmeticError):
    """Falha numérica (Cholesky após escalonamento de jitter, b* não positivo)."""


class SamplingError(MBCRError):
    """Amostragem por rejeição excedeu o limite de tentativas."""


class AdditionUnavailable(MBCRError):
    """Nenhuma região pode ser dividida; a adição conta como rejeitada."""


class ChainError(MBCRError):
    """Erros numéricos persistentes durante a cadeia."""


class SolverError(MBCRError):
    """Solver não convergiu dentro do limite de iterações."""

    def __init__(self, message: str, report: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.report = report or {}


class MomentUndefinedError(MBCRError, ValueError):
    """Momentos da inversa-gama indefinidos (a* <= 1)."""
