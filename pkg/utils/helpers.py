#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Funções auxiliares de entrada e saída para a linha de comando MBCR.
"""

import csv
import json
import logging
import os
import tempfile
from typing import Dict, Any, List, Sequence, Tuple

logger = logging.getLogger(__name__)


def read_json_file(file_path: str) -> Dict[str, Any]:
    """
    Lê um arquivo JSON e retorna seu conteúdo.

    Args:
        file_path: Caminho para o arquivo JSON

    Returns:
        Conteúdo do arquivo JSON

    Raises:
        FileNotFoundError: Se o arquivo não existir
        json.JSONDecodeError: Se o arquivo não for um JSON válido
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return json.load(file)
    except FileNotFoundError:
        logger.error(f"Arquivo não encontrado: {file_path}")
        raise
    except json.JSONDecodeError as e:
        logger.error(f"Erro ao decodificar JSON do arquivo {file_path}: {e}")
        raise


def _atomic_write(file_path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(file_path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as file:
            file.write(text)
        os.replace(tmp_path, file_path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_json_file(file_path: str, data: Dict[str, Any]) -> None:
    """
    Escreve dados em um arquivo JSON de forma atômica (temporário + rename).

    Floats são serializados pela representação mais curta que relê exatamente,
    então duas escritas dos mesmos dados produzem bytes idênticos.

    Args:
        file_path: Caminho para o arquivo JSON
        data: Dados a serem escritos
    """
    try:
        _atomic_write(file_path, json.dumps(data, indent=2, ensure_ascii=False) + "\n")
    except Exception as e:
        logger.error(f"Erro ao escrever no arquivo {file_path}: {e}")
        raise


def read_csv_rows(file_path: str) -> Tuple[List[str], List[List[str]]]:
    """
    Lê um CSV UTF-8 e devolve o cabeçalho e as linhas de dados.

    Args:
        file_path: Caminho para o arquivo CSV

    Returns:
        Tupla (cabeçalho, linhas)
    """
    try:
        with open(file_path, 'r', encoding='utf-8', newline='') as file:
            reader = csv.reader(file)
            rows = [row for row in reader if row]
    except FileNotFoundError:
        logger.error(f"Arquivo não encontrado: {file_path}")
        raise
    if not rows:
        return [], []
    header = [name.strip() for name in rows[0]]
    return header, rows[1:]


def write_csv_rows(file_path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    """
    Escreve um CSV de forma atômica.

    Args:
        file_path: Caminho de destino
        header: Nomes das colunas
        rows: Linhas já formatadas ou numéricas
    """
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(value) for value in row))
    try:
        _atomic_write(file_path, "\n".join(lines) + "\n")
    except Exception as e:
        logger.error(f"Erro ao escrever no arquivo {file_path}: {e}")
        raise


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)

