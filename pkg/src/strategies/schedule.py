"""Linear optimism schedule for the reward quantile threshold r_min."""
from dataclasses import dataclass

import config


@dataclass(frozen=True)
class OptimismSchedule:
    r_min_start: float = config.R_MIN_START
    r_min_end: float = 0.5
    total_env_steps: int = 150_000

    def __post_init__(self):
        if not 0.0 <= self.r_min_start <= self.r_min_end < 1.0:
            raise ValueError("need 0 <= r_min_start <= r_min_end < 1")
        if self.total_env_steps < 1:
            raise ValueError("total_env_steps must be positive")

    def r_min_at(self, env_steps: int) -> float:
        frac = min(max(env_steps / self.total_env_steps, 0.0), 1.0)
        value = self.r_min_start + (self.r_min_end - self.r_min_start) * frac
        return float(min(max(value, self.r_min_start), self.r_min_end))


def r_min_at(schedule: OptimismSchedule, env_steps: int) -> float:
    return schedule.r_min_at(env_steps)
