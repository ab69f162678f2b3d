import os

import numpy as np
import pytest

from rotalg.config.settings import Config
from rotalg.services.algebra_core import make_params


@pytest.fixture(autouse=True)
def _restore_selected_env(monkeypatch):
    """Keep the rotalg env overrides isolated per test."""

    keys = ["ROTALG_THREADS", "ROTALG_OUTPUT_DIR", "ROTALG_LOG_LEVEL"]
    original = {k: os.environ.get(k) for k in keys}
    for k in keys:
        monkeypatch.delenv(k, raising=False)

    yield

    for k, v in original.items():
        if v is None:
            monkeypatch.delenv(k, raising=False)
        else:
            monkeypatch.setenv(k, v)


@pytest.fixture
def app_config(tmp_path, monkeypatch):
    """Provide a minimal but realistic in-memory config with tmp output/log dirs."""

    output_dir = tmp_path / "output"
    log_dir = tmp_path / "logs"
    output_dir.mkdir()
    log_dir.mkdir()

    cfg = {
        "system": {
            "output_dir": str(output_dir),
            "log_dir": str(log_dir),
            "log_level": "INFO",
        },
        "compute": {
            "threads": 2,
            "grid": [32, 32],
            "refine": 3,
            "refine_candidates": 4,
            "section_resolution_factor": 8,
        },
        "tolerances": {
            "membership": 1e-8,
            "cluster": 1e-9,
            "fourier_prune": 1e-12,
            "cli": 1e-9,
        },
    }

    # Ensure Config.load_config uses our in-memory config
    monkeypatch.setattr(Config, "load_config", staticmethod(lambda: cfg))
    Config._config_cache = None
    yield cfg
    Config._config_cache = None


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def params_12():
    return make_params(1, 2)


@pytest.fixture
def params_25():
    return make_params(2, 5)
