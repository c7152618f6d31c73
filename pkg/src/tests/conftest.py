#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Fixtures compartilhadas pelos testes.
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from config.models import ChainConfig
from src.core import Dataset, ModelState


@pytest.fixture
def rng():
    """Gerador com semente fixa."""
    return np.random.default_rng(12345)


@pytest.fixture
def linear_data():
    """y = 1 + 2x + N(0, 0.1^2), n = 100, x ~ U[-1, 1]."""
    generator = np.random.default_rng(2024)
    X = generator.uniform(-1.0, 1.0, size=(100, 1))
    y = 1.0 + 2.0 * X[:, 0] + 0.1 * generator.standard_normal(100)
    return Dataset(X, y)


@pytest.fixture
def abs_data():
    """y = |x| + N(0, 0.1^2), n = 200, x ~ U[-1, 1]."""
    generator = np.random.default_rng(77)
    X = generator.uniform(-1.0, 1.0, size=(200, 1))
    y = np.abs(X[:, 0]) + 0.1 * generator.standard_normal(200)
    return Dataset(X, y)


@pytest.fixture
def plane_data():
    """Dados 2-D de dois planos com pouco ruído, n = 60."""
    generator = np.random.default_rng(5)
    X = generator.uniform(-1.0, 1.0, size=(60, 2))
    y = np.maximum(X @ np.array([1.0, 0.5]), X @ np.array([-1.0, 0.2]) + 0.1) + 0.05 * generator.standard_normal(60)
    return Dataset(X, y)


@pytest.fixture
def v_state():
    """Estado |x| em 1-D: planos (0, -1) e (0, 1)."""
    return ModelState.from_arrays([0.0, 0.0], [[-1.0], [1.0]], [0.01, 0.01])


@pytest.fixture
def short_chain():
    """Cadeia curta para testes de contrato."""
    return ChainConfig(iterations=60, burn_in=30, thin=1, seed=11)
