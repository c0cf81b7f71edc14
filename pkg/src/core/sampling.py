"""
Random Streams and Truncated-Normal Sampling
Counter-based generator substreams and inverse-transform sampling of the
upper tail of a normal distribution.
"""
import zlib

import numpy as np
from scipy import special

# Keeps Φ⁻¹ finite at the edges of the open unit interval.
_U_EPS = 1e-300


def make_rng(seed: int) -> np.random.Generator:
    """Root generator for a run."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def derive_rng(seed: int, tag: str, episode: int = 0, step: int = 0) -> np.random.Generator:
    """
    Independent substream keyed by (run seed, purpose tag, episode, step).
    Streams for different keys never share state, so the order in which
    rollouts are executed cannot perturb their draws.
    """
    key = [int(seed), zlib.crc32(tag.encode("utf-8")), int(episode), int(step)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def std_normal_cdf(x):
    """Φ(x)."""
    return special.ndtr(x)


def std_normal_quantile(p):
    """Φ⁻¹(p) for p in the open unit interval."""
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("quantile argument must lie in (0, 1)")
    out = special.ndtri(arr)
    return float(out) if np.ndim(out) == 0 else out


def truncated_normal_sample(
    mu: float,
    sigma: float,
    lower_quantile: float,
    rng: np.random.Generator,
    u: float | None = None,
) -> float:
    """
    Draw from N(mu, sigma²) restricted to values above its `lower_quantile`
    quantile: u ~ Uniform(lower_quantile, 1), return mu + sigma·Φ⁻¹(u).
    Passing `u` bypasses the generator.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if not 0.0 <= lower_quantile < 1.0:
        raise ValueError("lower_quantile must lie in [0, 1)")
    if sigma == 0:
        return float(mu)
    if u is None:
        u = rng.uniform(lower_quantile, 1.0)
    u = float(np.clip(u, max(lower_quantile, _U_EPS), 1.0 - np.finfo(float).epsneg))
    return float(mu + sigma * special.ndtri(u))


def truncated_normal_cdf(x, mu: float, sigma: float, lower_quantile: float):
    """Analytic CDF of the distribution sampled by `truncated_normal_sample`."""
    z = (np.asarray(x, dtype=float) - mu) / sigma
    return np.clip((special.ndtr(z) - lower_quantile) / (1.0 - lower_quantile), 0.0, 1.0)
