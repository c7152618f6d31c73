#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Validação das entradas da linha de comando: CSV de dados, grades e caixas.
"""

import logging
import re
from typing import List, Optional, Sequence, Tuple

import numpy as np

from utils.helpers import read_csv_rows
from .core import Dataset
from .exceptions import InputError

logger = logging.getLogger(__name__)

_COLUMN = re.compile(r"^x([1-9][0-9]*)$")


def _covariate_columns(header: Sequence[str], path: str) -> List[int]:
    """Posições das colunas x1..xp, conferindo que estão todas presentes e em ordem."""
    names = [name for name in header if _COLUMN.match(name)]
    if not names:
        raise InputError(f"{path}: nenhuma coluna x1..xp no cabeçalho {list(header)}")
    expected = [f"x{j}" for j in range(1, len(names) + 1)]
    if names != expected:
        raise InputError(f"{path}: colunas de covariáveis devem ser {','.join(expected)}, encontrado {','.join(names)}")
    return [header.index(name) for name in names]


def _parse_rows(rows: Sequence[Sequence[str]], columns: Sequence[int], path: str) -> np.ndarray:
    try:
        values = np.array([[float(row[c]) for c in columns] for row in rows], dtype=float)
    except (ValueError, IndexError) as e:
        raise InputError(f"{path}: valor numérico inválido ({e})") from e
    if not np.all(np.isfinite(values)):
        raise InputError(f"{path}: valores não finitos")
    return values


def parse_dataset(header: Sequence[str], rows: Sequence[Sequence[str]], path: str = "<dados>") -> Dataset:
    """
    Converte um CSV `x1,...,xp,y` em Dataset.

    Raises:
        InputError: Coluna y ausente, covariáveis fora de ordem ou valores inválidos
    """
    header = list(header)
    if "y" not in header:
        raise InputError(f"{path}: coluna 'y' ausente no cabeçalho {header}")
    columns = _covariate_columns(header, path)
    if not rows:
        raise InputError(f"{path}: nenhuma linha de dados")
    values = _parse_rows(rows, columns + [header.index("y")], path)
    return Dataset(values[:, :-1], values[:, -1])


def read_dataset(path: str) -> Dataset:
    """Lê e valida o CSV de dados."""
    header, rows = read_csv_rows(path)
    data = parse_dataset(header, rows, path)
    logger.info(f"Dados lidos de {path}: n={data.n}, p={data.p}")
    return data


def read_queries(path: str, p: int) -> np.ndarray:
    """Lê pontos de consulta (colunas x1..xp; outras colunas são ignoradas)."""
    header, rows = read_csv_rows(path)
    columns = _covariate_columns(header, path)
    if len(columns) != p:
        raise InputError(f"{path}: consulta com {len(columns)} covariáveis, modelo com p={p}")
    return _parse_rows(rows, columns, path).reshape(len(rows), p)


def parse_grid(spec: str, p: int) -> np.ndarray:
    """
    Interpreta uma grade "x1=lo:hi:count;x2=lo:hi:count" (produto cartesiano).

    Args:
        spec: Especificação da grade; termos separados por ';' ou ','
        p: Dimensão do modelo

    Returns:
        Matriz (prod count) x p, com x1 variando mais devagar
    """
    axes = {}
    for term in filter(None, (part.strip() for part in re.split(r"[;,]", spec or ""))):
        name, _, rng = term.partition("=")
        match = _COLUMN.match(name.strip())
        pieces = rng.split(":")
        if not match or len(pieces) != 3:
            raise InputError(f"termo de grade inválido: '{term}' (esperado xj=lo:hi:count)")
        try:
            lo, hi, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
        except ValueError as e:
            raise InputError(f"termo de grade inválido: '{term}'") from e
        if count < 1 or not (np.isfinite(lo) and np.isfinite(hi)) or (count > 1 and hi < lo):
            raise InputError(f"termo de grade inválido: '{term}'")
        axes[int(match.group(1))] = np.linspace(lo, hi, count)
    if sorted(axes) != list(range(1, p + 1)):
        raise InputError(f"grade deve definir exatamente x1..x{p}, recebido {sorted(axes)}")
    mesh = np.meshgrid(*(axes[j] for j in range(1, p + 1)), indexing="ij")
    return np.column_stack([axis.ravel() for axis in mesh])


def parse_box(spec: str, p: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Interpreta uma caixa "lo:hi,lo:hi,..." (um par por dimensão).

    Raises:
        InputError: Formato inválido, lo >= hi ou dimensão incompatível
    """
    pairs = [part.strip() for part in (spec or "").split(",") if part.strip()]
    if not pairs:
        raise InputError("caixa vazia")
    lower, upper = [], []
    for pair in pairs:
        pieces = pair.split(":")
        if len(pieces) != 2:
            raise InputError(f"intervalo inválido na caixa: '{pair}' (esperado lo:hi)")
        try:
            lo, hi = float(pieces[0]), float(pieces[1])
        except ValueError as e:
            raise InputError(f"intervalo inválido na caixa: '{pair}'") from e
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise InputError(f"intervalo inválido na caixa: '{pair}' (exige lo < hi)")
        lower.append(lo)
        upper.append(hi)
    if p is not None and len(lower) != p:
        raise InputError(f"caixa com {len(lower)} dimensões, modelo com p={p}")
    return np.array(lower), np.array(upper)


def check_level(level: float) -> float:
    """Confere que o nível da banda está em (0, 1)."""
    if not 0.0 < float(level) < 1.0:
        raise InputError(f"--level deve estar em (0, 1), recebido {level}")
    return float(level)
