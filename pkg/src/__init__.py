# HOT-GP model-based reinforcement learning laboratory
