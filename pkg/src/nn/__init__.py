# Minimal neural networks: MLP, Gaussian head, Adam
from src.nn.adam import Adam, adam_step
from src.nn.heads import GaussianHead
from src.nn.mlp import Gradients, Mlp, polyak_update

__all__ = ["Adam", "adam_step", "GaussianHead", "Gradients", "Mlp", "polyak_update"]
