#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Configuração de logging para a linha de comando MBCR.
"""

import os
import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional


def setup_logging(level: Optional[str] = None, log_to_file: Optional[bool] = None) -> None:
    """
    Configura o sistema de logging para a aplicação.

    - Configura o formato dos logs
    - Define o nível de log a partir do ambiente (ou do argumento)
    - Envia o console para stderr; stdout fica reservado aos resultados
    - Adiciona um arquivo rotativo quando LOG_TO_FILE estiver ativo

    Args:
        level: Nível de log explícito (opcional)
        log_to_file: Força ou desativa o arquivo de log (opcional)
    """
    log_level_name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    log_level = getattr(logging, log_level_name, logging.INFO)

    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    date_format = "%Y-%m-%d %H:%M:%S"
    formatter = logging.Formatter(log_format, date_format)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # Limpar handlers existentes
    root_logger.handlers = []

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_to_file is None:
        log_to_file = os.getenv("LOG_TO_FILE", "False").lower() == "true"

    if log_to_file:
        logs_dir = os.getenv("LOGS_DIR", "logs")
        os.makedirs(logs_dir, exist_ok=True)
        log_file = os.path.join(logs_dir, "mbcr.log")

        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5
        )
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    logging.debug("Sistema de logging configurado")
