# Episodic environments: point-mass mazes, coverage arena, sparse two-link arm
import config
from src.envs.arm import ArmEnv
from src.envs.base import EnvSpec, Environment
from src.envs.coverage import CoverageEnv, mixture_pdf
from src.envs.maze import MazeEnv, parse_layout


def make_env(name: str, horizon: int = 150, action_penalty: float = 0.0,
             literal_penalty_sign: bool = False, maze_layout=None) -> Environment:
    """Build an environment by its registered name."""
    if name in ("u_maze", "medium_maze"):
        return MazeEnv(name, layout=maze_layout, horizon=horizon)
    if name == "coverage":
        return CoverageEnv(horizon=horizon)
    if name == "sparse_arm":
        return ArmEnv(horizon=horizon, action_penalty=action_penalty,
                      literal_penalty_sign=literal_penalty_sign)
    raise ValueError(f"unknown environment '{name}', expected one of {config.ENVIRONMENTS}")


__all__ = [
    "ArmEnv", "CoverageEnv", "EnvSpec", "Environment", "MazeEnv",
    "make_env", "mixture_pdf", "parse_layout",
]
