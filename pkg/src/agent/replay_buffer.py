"""
Transition Buffer
Ring buffer of (state, action, next_state, reward, done) records backing
both the real-environment dataset and the hallucinated model dataset.
"""
from dataclasses import dataclass

import numpy as np


@dataclass
class Transitions:
    """A batch of transitions, one row per record."""

    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return len(self.rewards)


class TransitionBuffer:
    """
    FIFO ring buffer with uniform sampling. `capacity=None` (or 0) grows
    without bound; otherwise the oldest records are overwritten.
    """

    def __init__(self, obs_dim: int, action_dim: int, capacity: int | None = None):
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.capacity = capacity if capacity else None
        self._alloc = self.capacity or 1024
        self._states = np.zeros((self._alloc, obs_dim))
        self._actions = np.zeros((self._alloc, action_dim))
        self._next_states = np.zeros((self._alloc, obs_dim))
        self._rewards = np.zeros(self._alloc)
        self._dones = np.zeros(self._alloc, dtype=bool)
        self._size = 0
        self._cursor = 0
        self.total_added = 0

    def __len__(self) -> int:
        return self._size

    def _grow(self, needed: int) -> None:
        new_alloc = self._alloc
        while new_alloc < needed:
            new_alloc *= 2
        for name in ("_states", "_actions", "_next_states", "_rewards", "_dones"):
            old = getattr(self, name)
            grown = np.zeros((new_alloc,) + old.shape[1:], dtype=old.dtype)
            grown[: self._size] = old[: self._size]
            setattr(self, name, grown)
        self._alloc = new_alloc

    def add(self, state, action, next_state, reward, done: bool = False) -> None:
        if self.capacity is None and self._size == self._alloc:
            self._grow(self._size + 1)
        i = self._cursor
        self._states[i] = state
        self._actions[i] = action
        self._next_states[i] = next_state
        self._rewards[i] = reward
        self._dones[i] = done
        self.total_added += 1
        if self.capacity is None:
            self._size += 1
            self._cursor = self._size
        else:
            self._cursor = (self._cursor + 1) % self.capacity
            self._size = min(self._size + 1, self.capacity)

    def extend(self, batch: Transitions) -> None:
        for i in range(len(batch)):
            self.add(batch.states[i], batch.actions[i], batch.next_states[i],
                     batch.rewards[i], bool(batch.dones[i]))

    def _ordered(self, arr: np.ndarray) -> np.ndarray:
        """Records oldest-first."""
        if self.capacity is None or self._size < self.capacity:
            return arr[: self._size]
        return np.concatenate([arr[self._cursor:], arr[: self._cursor]])

    @property
    def states(self) -> np.ndarray:
        return self._ordered(self._states)

    @property
    def actions(self) -> np.ndarray:
        return self._ordered(self._actions)

    @property
    def next_states(self) -> np.ndarray:
        return self._ordered(self._next_states)

    @property
    def rewards(self) -> np.ndarray:
        return self._ordered(self._rewards)

    @property
    def dones(self) -> np.ndarray:
        return self._ordered(self._dones)

    def all(self) -> Transitions:
        return Transitions(self.states, self.actions, self.next_states, self.rewards, self.dones)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        return rng.integers(0, self._size, size=batch_size)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Transitions:
        """Uniform sampling with replacement over the stored records."""
        idx = self.sample_indices(batch_size, rng)
        return Transitions(
            self._states[idx].copy(), self._actions[idx].copy(),
            self._next_states[idx].copy(), self._rewards[idx].copy(),
            self._dones[idx].copy(),
        )

    def sample_states(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return self._states[self.sample_indices(count, rng)].copy()
