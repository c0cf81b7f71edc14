"""
Coverage Arena
Acceleration-controlled point in [−1, 1]² over a G×G grid. Entering a
cell for the first time in an episode pays the value of a three-component
Gaussian mixture at the current position; revisits pay nothing.
"""
import numpy as np
from scipy.stats import multivariate_normal

import config
from src.envs.base import EnvSpec, Environment

# (di, dj) for the 8 neighbors, row-major around the agent's cell.
NEIGHBOR_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def mixture_pdf(points, centers, variance: float = config.COVERAGE_VARIANCE) -> np.ndarray:
    """(1/k)·Σ N(p | μ_i, variance·I) for each row of `points`."""
    points = np.atleast_2d(points)
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    total = sum(
        np.atleast_1d(multivariate_normal(mean=c, cov=variance * np.eye(2)).pdf(points))
        for c in centers
    )
    return total / len(centers)


class CoverageEnv(Environment):
    """
    Observation: position (2), velocity (2), own-cell value (1), 8 neighbor
    values masked to 0 when visited or off-grid, Gaussian centers (6).
    The first 13 components are modeled.
    """

    def __init__(
        self,
        horizon: int = 150,
        grid: int = config.COVERAGE_GRID,
        variance: float = config.COVERAGE_VARIANCE,
        num_centers: int = config.COVERAGE_NUM_CENTERS,
        dt: float = config.COVERAGE_DT,
        max_speed: float = config.COVERAGE_MAX_SPEED,
    ):
        super().__init__()
        self.grid = grid
        self.variance = variance
        self.num_centers = num_centers
        self.dt = dt
        self.max_speed = max_speed
        self.peak = 1.0 / (2.0 * np.pi * variance)
        self.visited = np.zeros((grid, grid), dtype=bool)
        self.centers = np.zeros((num_centers, 2))
        obs_dim = 13 + 2 * num_centers
        low = np.concatenate([
            [-1.0, -1.0, -max_speed, -max_speed], np.zeros(9),
            np.full(2 * num_centers, -config.COVERAGE_CENTER_RANGE),
        ])
        high = np.concatenate([
            [1.0, 1.0, max_speed, max_speed], np.full(9, self.peak),
            np.full(2 * num_centers, config.COVERAGE_CENTER_RANGE),
        ])
        self.spec = EnvSpec(
            name="coverage",
            obs_dim=obs_dim,
            action_dim=2,
            dynamic_idx=tuple(range(13)),
            action_low=np.full(2, -1.0),
            action_high=np.full(2, 1.0),
            obs_low=low,
            obs_high=high,
            horizon=horizon,
        )

    # ─── Grid helpers ────────────────────────────────────────────────────────

    def cell_of(self, pos) -> tuple[int, int]:
        """(row, col) of a position; row indexes y, col indexes x."""
        idx = np.floor((np.asarray(pos, dtype=float) + 1.0) * 0.5 * self.grid).astype(int)
        idx = np.clip(idx, 0, self.grid - 1)
        return int(idx[1]), int(idx[0])

    def cell_center(self, cell) -> np.ndarray:
        i, j = cell
        width = 2.0 / self.grid
        return np.array([-1.0 + (j + 0.5) * width, -1.0 + (i + 0.5) * width])

    def _observe(self, pos, vel, centers, visited) -> np.ndarray:
        i, j = self.cell_of(pos)
        own = mixture_pdf(self.cell_center((i, j)), centers, self.variance)[0]
        neighbors = np.zeros(len(NEIGHBOR_OFFSETS))
        for k, (di, dj) in enumerate(NEIGHBOR_OFFSETS):
            ni, nj = i + di, j + dj
            if 0 <= ni < self.grid and 0 <= nj < self.grid and not visited[ni, nj]:
                neighbors[k] = mixture_pdf(self.cell_center((ni, nj)), centers, self.variance)[0]
        return np.concatenate([pos, vel, [own], neighbors, np.asarray(centers).reshape(-1)])

    # ─── Episode ─────────────────────────────────────────────────────────────

    def _reset(self, rng, centers=None, position=None, velocity=None):
        self.visited = np.zeros((self.grid, self.grid), dtype=bool)
        r = config.COVERAGE_CENTER_RANGE
        if centers is None:
            centers = rng.uniform(-r, r, size=(self.num_centers, 2))
        self.centers = np.asarray(centers, dtype=float).reshape(self.num_centers, 2)
        pos = rng.uniform(-0.9, 0.9, size=2) if position is None else np.asarray(position, dtype=float)
        vel = np.zeros(2) if velocity is None else np.asarray(velocity, dtype=float)
        return self._observe(pos, vel, self.centers, self.visited)

    def _step(self, action):
        pos, vel = self._obs[:2], self._obs[2:4]
        vel = np.clip(vel + action * self.dt, -self.max_speed, self.max_speed)
        pos = np.clip(pos + vel * self.dt, -1.0, 1.0)
        reward = self.state_reward(np.concatenate([pos, self._obs[2:]]), action, self.visited)
        self.visited[self.cell_of(pos)] = True
        return self._observe(pos, vel, self.centers, self.visited), reward

    def state_reward(self, obs, action=None, visited=None) -> float:
        """Mixture value at the position unless its cell is marked in `visited`."""
        obs = np.asarray(obs, dtype=float)
        pos = obs[:2]
        if visited is not None and visited[self.cell_of(pos)]:
            return 0.0
        centers = obs[13:13 + 2 * self.num_centers]
        return float(mixture_pdf(pos, centers, self.variance)[0])
