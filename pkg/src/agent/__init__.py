# Policy search: SAC, probabilistic-actor DDPG, and transition buffers
from src.agent.ddpg import DdpgAgent, ddpg_update
from src.agent.networks import TanhGaussianActor, make_critic, q_action_grad, q_values
from src.agent.replay_buffer import TransitionBuffer, Transitions
from src.agent.sac import SacAgent, sac_update


def make_agent(algorithm: str, spec, gamma: float, tau: float, lr: float,
               explore_noise: bool = False, seed: int = 0):
    """Build a policy-search agent by name."""
    if algorithm == "sac":
        return SacAgent(spec, gamma=gamma, tau=tau, lr=lr, seed=seed)
    if algorithm == "ddpg":
        return DdpgAgent(spec, gamma=gamma, tau=tau, lr=lr, explore_noise=explore_noise, seed=seed)
    raise ValueError(f"unknown policy algorithm '{algorithm}'")


__all__ = [
    "DdpgAgent", "SacAgent", "TanhGaussianActor", "TransitionBuffer", "Transitions",
    "ddpg_update", "make_agent", "make_critic", "q_action_grad", "q_values", "sac_update",
]
