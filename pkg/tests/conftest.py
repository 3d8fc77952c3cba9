"""
Pytest fixtures for the bit allocation simulator tests.

Provides shared configurations, seeded generators and temporary stores.
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest
import yaml
from src.config import SystemConfig, load_scenario
from src.database import ResultStore
from src.switching import SwitchingPowerModel, train_switching_model

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def paper_config():
    """Full-scale configuration (library defaults)."""
    return SystemConfig()


@pytest.fixture
def desk_config():
    """Desk-scale configuration shipped in config.yaml."""
    return SystemConfig(n_r=64, n_rf=32, n_u=4, n_paths=8)


@pytest.fixture
def tiny_config():
    """Four RF chains, handy for exhaustive oracles."""
    return SystemConfig(n_r=16, n_rf=4, n_u=2, n_paths=2, b_cap=4)


@pytest.fixture
def rng():
    """Seeded generator; every test gets a fresh stream."""
    return np.random.default_rng(12345)


@pytest.fixture
def temp_store():
    """
    Create a temporary result store for testing.

    Automatically cleaned up after test.
    """
    temp_file = tempfile.NamedTemporaryFile(delete=False, suffix=".db")
    db_path = Path(temp_file.name)
    temp_file.close()

    store = ResultStore(str(db_path))

    yield store

    db_path.unlink(missing_ok=True)


@pytest.fixture
def flat_model():
    """Switching-power model predicting a constant 1 mW over [3, 25] W."""
    grid = tuple((p, 1e-3) for p in np.linspace(3.0, 25.0, 8))
    coeffs = np.array([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0])
    return SwitchingPowerModel(grid=grid, coeffs=coeffs, domain=(3.0, 25.0), scenario_key=(4, 8))


@pytest.fixture
def scenario_writer(tmp_path):
    """
    Write a scenario YAML into tmp_path with outputs under tmp_path.

    Returns a function taking section overrides and returning the file path.
    """

    def write(**sections):
        data = {
            "system": {"n_r": 16, "n_rf": 8, "n_u": 2, "n_paths": 3, "seed": 7},
            "sweep": {"b_bar": [1, 2, 12], "n_realizations": 5},
            "training": {"p_grid": {"start": 2.0, "stop": 6.0, "num": 6}, "n_train": 4, "n_candidates": 6},
            "output": {"dir": str(tmp_path), "progress": False},
            "logging": {"level": "WARNING"},
        }
        for name, values in sections.items():
            data.setdefault(name, {}).update(values)
        path = tmp_path / "scenario.yaml"
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    return write


@pytest.fixture
def sample_channel_dump():
    """Dump of a 2x2 effective channel with gains."""
    return """
    # two RF chains, two users
    rows 2
    cols 2
    1 0 0 0.5
    0 0 0.25 -1
    gamma 1 2.5
    """


@pytest.fixture(scope="session")
def desk_scenario():
    """The shipped config.yaml scenario (desk scale)."""
    return load_scenario(str(REPO_ROOT / "config.yaml"))


@pytest.fixture(scope="session")
def desk_training(desk_scenario):
    """
    Switching-power model and training points of the shipped scenario.

    Trained once per session with the scenario's own grid and seed; only the
    slow tests request it.
    """
    cfg, training = desk_scenario.system, desk_scenario.training
    return train_switching_model(
        cfg,
        training.p_grid,
        np.random.default_rng(cfg.seed),
        n_train=training.n_train,
        n_candidates=training.n_candidates,
        refill=desk_scenario.allocator.refill,
    )
