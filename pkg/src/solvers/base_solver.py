#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Classe base para os solvers de otimização usados em torno do núcleo bayesiano.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict

logger = logging.getLogger(__name__)


class BaseSolver(ABC):
    """
    Classe base abstrata para os solvers.

    Todos os solvers específicos devem herdar desta classe e implementar o
    método `solve`. O relatório da última execução fica em `last_report`.
    """

    name = "base"

    def __init__(self, max_iterations: int, tolerance: float):
        """
        Inicializa o solver base.

        Args:
            max_iterations: Limite de iterações
            tolerance: Tolerância de parada
        """
        if max_iterations < 1:
            raise ValueError("max_iterations deve ser >= 1")
        if not tolerance > 0:
            raise ValueError("tolerance deve ser positiva")
        self.max_iterations = int(max_iterations)
        self.tolerance = float(tolerance)
        self.last_report: Dict[str, Any] = {}

    @abstractmethod
    def solve(self, *args, **kwargs) -> Any:
        """
        Resolve o problema de otimização.

        Returns:
            Solução específica do solver
        """
        pass

    def _report(self, **values: Any) -> Dict[str, Any]:
        self.last_report = {"solver": self.name, **values}
        logger.debug(f"Relatório {self.name}: {self.last_report}")
        return self.last_report
