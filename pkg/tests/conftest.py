"""Shared fixtures: seeded generators, tiny run configs, scratch run directories."""
import pytest

from src.core import make_rng
from src.run_config import materialize

TINY_RUN = {
    "env": "u_maze",
    "strategy": "hot_gp",
    "total_env_steps": 40,
    "horizon": 10,
    "model_rollouts": 3,
    "rollout_steps": 1,
    "batch_size": 8,
    "updates_per_step": 1,
    "gp_subsample_cap": 30,
    "gp_mean_epochs": 1,
    "gp_kernel_steps": 2,
    "gp_mean_hidden": [16],
    "ensemble_size": 2,
    "ensemble_hidden": [16],
    "ensemble_epochs": 1,
    "eval_every": 1,
    "eval_episodes": 1,
}


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def tiny_values():
    return dict(TINY_RUN)


@pytest.fixture
def tiny_config():
    def build(**overrides):
        return materialize({**TINY_RUN, **overrides})

    return build


@pytest.fixture
def run_dir(tmp_path):
    return tmp_path / "run"
