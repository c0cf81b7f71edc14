"""Matern-5/2 ARD kernel and its lengthscale derivatives."""
import numpy as np

_SQRT5 = np.sqrt(5.0)


def scaled_differences(x1: np.ndarray, x2: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """(n1, n2, m) array of (x1_i − x2_j) / ℓ."""
    return (x1[:, None, :] - x2[None, :, :]) / lengthscales


def matern52(x1: np.ndarray, x2: np.ndarray, lengthscales: np.ndarray, signal: float = 1.0) -> np.ndarray:
    """k(x, x') = s²·(1 + √5 r + 5r²/3)·exp(−√5 r), r the ARD-scaled distance."""
    x1 = np.atleast_2d(x1)
    x2 = np.atleast_2d(x2)
    sq = np.sum(((x1[:, None, :] - x2[None, :, :]) / lengthscales) ** 2, axis=-1)
    r = np.sqrt(np.maximum(sq, 0.0))
    return signal * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * np.exp(-_SQRT5 * r)


def matern52_log_lengthscale_grads(x: np.ndarray, lengthscales: np.ndarray, signal: float = 1.0):
    """
    Yields ∂K/∂log ℓ_j for each input dimension j of the training Gram matrix:
    s²·(5/3)·(1 + √5 r)·exp(−√5 r)·(Δ_j/ℓ_j)².
    """
    diffs = scaled_differences(x, x, lengthscales)
    sq_parts = diffs ** 2
    r = np.sqrt(np.sum(sq_parts, axis=-1))
    common = signal * (5.0 / 3.0) * (1.0 + _SQRT5 * r) * np.exp(-_SQRT5 * r)
    for j in range(x.shape[1]):
        yield common * sq_parts[:, :, j]
