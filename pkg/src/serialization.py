#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Formato JSON dos arquivos de modelo e de configuração.

    {"dim": p,
     "draws": [{"k": K, "planes": [{"alpha": a, "beta": [...], "sigma2": s}, ...]}, ...],
     "diagnostics": {...},
     "config": {"prior": {...}, "proposal": {...}, "chain": {...}},
     "bounds": {"lower": [...], "upper": [...]}}

Campos desconhecidos são ignorados na leitura. Floats são gravados pela
representação mais curta que relê exatamente.
"""

import json
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from config.models import FitConfig
from utils.helpers import read_json_file, write_json_file
from .core import Hyperplane, ModelState
from .exceptions import InputError, MBCRError
from .sampler import ChainDiagnostics, PosteriorSamples

logger = logging.getLogger(__name__)


def _finite_or_none(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _clean(value: Any) -> Any:
    """Converte escalares numpy e não finitos para tipos JSON."""
    if isinstance(value, dict):
        return {str(key): _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(item) for item in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if hasattr(value, "item"):
        return _clean(value.item())
    if isinstance(value, float):
        return _finite_or_none(value)
    return value


def state_to_dict(state: ModelState) -> Dict[str, Any]:
    return {
        "k": state.K,
        "planes": [
            {"alpha": plane.intercept, "beta": [float(b) for b in plane.slope], "sigma2": plane.variance}
            for plane in state.hyperplanes
        ],
    }


def state_from_dict(data: Dict[str, Any]) -> ModelState:
    planes = data.get("planes")
    if not isinstance(planes, list) or not planes:
        raise InputError("estado sem hiperplanos no arquivo de modelo")
    if "k" in data and data["k"] != len(planes):
        raise InputError(f"estado declara k={data['k']} com {len(planes)} hiperplanos")
    try:
        return ModelState(tuple(Hyperplane(plane["alpha"], plane["beta"], plane["sigma2"]) for plane in planes))
    except (KeyError, TypeError) as e:
        raise InputError(f"hiperplano malformado no arquivo de modelo: {e}") from e


def fit_config_of(samples: PosteriorSamples) -> FitConfig:
    return FitConfig(prior=samples.prior, proposal=samples.proposal, chain=samples.chain)


def _bounds_to_dict(bounds: Optional[Tuple[np.ndarray, np.ndarray]]) -> Optional[Dict[str, List[float]]]:
    if bounds is None:
        return None
    return {"lower": [float(v) for v in bounds[0]], "upper": [float(v) for v in bounds[1]]}


def _bounds_from_dict(data: Any) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    if data is None:
        return None
    try:
        return np.asarray(data["lower"], dtype=float), np.asarray(data["upper"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"caixa dos dados inválida no arquivo de modelo: {e}") from e


def samples_to_dict(samples: PosteriorSamples, diagnostics: Optional[ChainDiagnostics] = None) -> Dict[str, Any]:
    """
    Converte os estados (e diagnósticos) no dicionário do arquivo de modelo.

    Args:
        samples: Estados da posteriori
        diagnostics: Diagnósticos da cadeia (opcional)

    Returns:
        Dicionário pronto para JSON
    """
    return _clean({
        "dim": samples.dim,
        "draws": [state_to_dict(state) for state in samples.draws],
        "diagnostics": diagnostics.to_dict() if diagnostics is not None else {},
        "config": fit_config_of(samples).model_dump(by_alias=True),
        "bounds": _bounds_to_dict(samples.bounds),
    })


def samples_from_dict(data: Dict[str, Any]) -> PosteriorSamples:
    """
    Reconstrói PosteriorSamples a partir do dicionário do arquivo de modelo.

    Raises:
        InputError: Estrutura inválida ou dimensão inconsistente
    """
    if not isinstance(data, dict) or not isinstance(data.get("draws"), list):
        raise InputError("arquivo de modelo sem a lista 'draws'")
    try:
        config = FitConfig.model_validate(data.get("config") or {})
    except ValidationError as e:
        raise InputError(f"configuração inválida no arquivo de modelo: {e}") from e
    try:
        samples = PosteriorSamples(
            tuple(state_from_dict(draw) for draw in data["draws"]),
            prior=config.prior,
            proposal=config.proposal,
            chain=config.chain,
            bounds=_bounds_from_dict(data.get("bounds")),
        )
    except MBCRError as e:
        raise InputError(f"arquivo de modelo inválido: {e}") from e
    if "dim" in data and data["dim"] != samples.dim:
        raise InputError(f"arquivo de modelo declara dim={data['dim']}, estados com p={samples.dim}")
    return samples


def write_model(path: str, samples: PosteriorSamples, diagnostics: Optional[ChainDiagnostics] = None) -> None:
    """Grava o arquivo de modelo de forma atômica."""
    write_json_file(path, samples_to_dict(samples, diagnostics))
    logger.info(f"Modelo com {len(samples)} estados gravado em {path}")


def read_model(path: str) -> Tuple[PosteriorSamples, Dict[str, Any]]:
    """
    Lê um arquivo de modelo.

    Returns:
        Tupla (PosteriorSamples, diagnósticos gravados)
    """
    try:
        data = read_json_file(path)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"não foi possível ler o modelo {path}: {e}") from e
    return samples_from_dict(data), data.get("diagnostics") or {}


def read_fit_config(path: Optional[str]) -> FitConfig:
    """
    Lê um arquivo de configuração; sem caminho devolve os padrões.

    Raises:
        InputError: Arquivo ilegível ou configuração inválida
    """
    if not path:
        return FitConfig()
    try:
        return FitConfig.model_validate(read_json_file(path))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"não foi possível ler a configuração {path}: {e}") from e
    except ValidationError as e:
        raise InputError(f"configuração inválida em {path}: {e}") from e
