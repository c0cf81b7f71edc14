# Hallucination rules and the optimism schedule
from src.strategies.hallucination import (
    Strategy, compose_next_state, hallucinate_greedy, hallucinate_greedy_known_reward,
    hallucinate_hotgp, hallucinate_hucrl, hallucinate_mbpo, hallucinate_optimistic_diagonal,
    hallucinate_thompson, hucrl_candidates, known_reward_fn, model_reward_fn,
)
from src.strategies.schedule import OptimismSchedule, r_min_at

__all__ = [
    "Strategy", "compose_next_state", "hallucinate_greedy", "hallucinate_greedy_known_reward",
    "hallucinate_hotgp", "hallucinate_hucrl", "hallucinate_mbpo", "hallucinate_optimistic_diagonal",
    "hallucinate_thompson", "hucrl_candidates", "known_reward_fn", "model_reward_fn",
    "OptimismSchedule", "r_min_at",
]
