# tests/conftest.py
import sys

import numpy as np
import pytest
from loguru import logger

from app.auth.rate_limit import limiter
from app.config import settings
from app.drivers import TimeGrid


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Salidas y escenarios de usuario en directorios temporales."""
    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "runs"))
    monkeypatch.setattr(settings, "scenarios_dir", str(tmp_path / "scenarios"))
    monkeypatch.setattr(settings, "workers", 1)
    yield
    # la CLI reemplaza los sinks de loguru por el stderr capturado
    logger.remove()
    logger.add(sys.stderr, level="WARNING")


@pytest.fixture
def no_rate_limit(monkeypatch):
    monkeypatch.setattr(limiter, "enabled", False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid():
    return TimeGrid(1.0, 64)


@pytest.fixture
def quick():
    """Overrides de un escenario pequeño y rápido."""

    def build(**values):
        base = {"replicates": 40, "n_grid": "4,8,16", "refine": 2, "substeps": 2, "strict": False, "seed": 7}
        base.update(values)
        return base

    return build
