"""
Point-Mass Maze
Velocity-controlled point in an ASCII occupancy grid. Cell (row i, col j)
covers x ∈ [j, j+1), y ∈ [i, i+1). Reward is 1 within the goal threshold,
0 otherwise.
"""
import numpy as np

import config
from src.envs.base import EnvSpec, Environment

WALL = "#"
START = "S"


def parse_layout(layout) -> tuple[np.ndarray, tuple[int, int]]:
    """Wall mask (rows × cols) and the start cell from an ASCII grid."""
    rows = [str(row) for row in layout]
    if not rows or len({len(row) for row in rows}) != 1:
        raise ValueError("maze layout must be a non-empty rectangle")
    walls = np.array([[ch == WALL for ch in row] for row in rows])
    if not (walls[0].all() and walls[-1].all() and walls[:, 0].all() and walls[:, -1].all()):
        raise ValueError("maze boundary must be walled")
    starts = [(i, j) for i, row in enumerate(rows) for j, ch in enumerate(row) if ch == START]
    if len(starts) != 1:
        raise ValueError("maze layout needs exactly one start cell 'S'")
    return walls, starts[0]


class MazeEnv(Environment):
    """Observation (x, y, goal_x, goal_y); only (x, y) is modeled."""

    def __init__(
        self,
        name: str = "u_maze",
        layout=None,
        horizon: int = 150,
        goal_threshold: float = config.MAZE_GOAL_THRESHOLD,
        max_speed: float = config.MAZE_MAX_SPEED,
    ):
        super().__init__()
        layout = layout if layout is not None else config.MAZE_LAYOUTS[name]
        self.walls, self.start_cell = parse_layout(layout)
        self.goal_threshold = goal_threshold
        n_rows, n_cols = self.walls.shape
        self.free_cells = [
            (i, j) for i in range(n_rows) for j in range(n_cols)
            if not self.walls[i, j] and (i, j) != self.start_cell
        ]
        if not self.free_cells:
            raise ValueError("maze has no free cell for a goal")
        high = np.array([n_cols, n_rows, n_cols, n_rows], dtype=float)
        self.spec = EnvSpec(
            name=name,
            obs_dim=4,
            action_dim=2,
            dynamic_idx=(0, 1),
            action_low=np.full(2, -max_speed),
            action_high=np.full(2, max_speed),
            obs_low=np.zeros(4),
            obs_high=high,
            horizon=horizon,
        )

    @staticmethod
    def cell_center(cell) -> np.ndarray:
        i, j = cell
        return np.array([j + 0.5, i + 0.5])

    def is_wall(self, x: float, y: float) -> bool:
        n_rows, n_cols = self.walls.shape
        j, i = int(np.floor(x)), int(np.floor(y))
        if i < 0 or j < 0 or i >= n_rows or j >= n_cols:
            return True
        return bool(self.walls[i, j])

    def _reset(self, rng, goal=None, start=None):
        pos = self.cell_center(self.start_cell) if start is None else np.asarray(start, dtype=float)
        if goal is None:
            goal = self.cell_center(self.free_cells[rng.integers(len(self.free_cells))])
        return np.concatenate([pos, np.asarray(goal, dtype=float)])

    def _step(self, action):
        x, y = self._obs[0], self._obs[1]
        # Axis-separated collision: x first, then y.
        if not self.is_wall(x + action[0], y):
            x = x + action[0]
        if not self.is_wall(x, y + action[1]):
            y = y + action[1]
        obs = np.array([x, y, self._obs[2], self._obs[3]])
        return obs, self.state_reward(obs, action)

    def state_reward(self, obs, action=None, visited=None) -> float:
        obs = np.asarray(obs, dtype=float)
        return 1.0 if np.linalg.norm(obs[:2] - obs[2:4]) < self.goal_threshold else 0.0
