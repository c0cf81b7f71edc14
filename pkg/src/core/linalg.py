"""
Dense Linear Algebra Module
Jittered Cholesky factorization, the multivariate-normal carrier used for
every joint prediction, and Gaussian conditioning on a subset of coordinates.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

import config
from src.exceptions import NotPSDError, ShapeMismatchError

logger = logging.getLogger(__name__)


def as_finite(values, name: str = "array") -> np.ndarray:
    """Convert to a float array and reject NaN/Inf entries."""
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _check_square_symmetric(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {m.shape}")
    scale = max(float(np.max(np.abs(m))) if m.size else 0.0, 1.0)
    if not np.allclose(m, m.T, rtol=config.SYMMETRY_RTOL, atol=config.SYMMETRY_RTOL * scale):
        raise ValueError("matrix is not symmetric within tolerance")


def cholesky(m, jitter: float = 0.0) -> np.ndarray:
    """
    Lower-triangular L with L·Lᵀ = m + jitter·I.

    When the factorization fails the jitter is escalated geometrically,
    starting from 1e-9·trace(m)/d; every attempt is capped at the absolute
    maximum, and the cap itself is always the last value tried.
    """
    m = as_finite(m, "matrix")
    _check_square_symmetric(m)
    d = m.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    eye = np.eye(d)
    try:
        return np.linalg.cholesky(m + jitter * eye)
    except np.linalg.LinAlgError:
        pass

    trace = float(np.trace(m))
    current = max(jitter, config.JITTER_RELATIVE_START * trace / d if trace > 0 else 0.0)
    if current <= 0.0:
        current = config.JITTER_RELATIVE_START
    while True:
        attempt = min(current, config.JITTER_ABSOLUTE_MAX)
        try:
            factor = np.linalg.cholesky(m + attempt * eye)
        except np.linalg.LinAlgError:
            if attempt >= config.JITTER_ABSOLUTE_MAX:
                break
            logger.debug("cholesky failed at jitter %.3e, escalating", attempt)
            current = attempt * config.JITTER_GROWTH
            continue
        if attempt > config.JITTER_WARN_ABOVE:
            logger.warning("cholesky needed jitter %.3e on a %dx%d matrix", attempt, d, d)
        else:
            logger.debug("cholesky succeeded with jitter %.3e", attempt)
        return factor
    raise NotPSDError(
        f"matrix not positive semidefinite (failed at jitter {config.JITTER_ABSOLUTE_MAX:g})"
    )


@dataclass(frozen=True)
class MvNormal:
    """Multivariate normal N(mean, cov)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = as_finite(self.mean, "mean").reshape(-1)
        cov = as_finite(self.cov, "cov").reshape(mean.size, mean.size)
        _check_square_symmetric(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def marginal(self, idx) -> "MvNormal":
        idx = np.asarray(idx, dtype=int)
        return MvNormal(self.mean[idx], self.cov[np.ix_(idx, idx)])

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """
        Draw via the symmetric eigendecomposition. Negative round-off
        eigenvalues are clipped, so a zero covariance returns the mean exactly.
        """
        evals, evecs = np.linalg.eigh(self.cov)
        root = evecs * np.sqrt(np.clip(evals, 0.0, None))
        n = 1 if size is None else size
        z = rng.standard_normal((n, self.dim))
        draws = self.mean + z @ root.T
        return draws[0] if size is None else draws


def gaussian_condition(joint: MvNormal, observed_idx, observed_vals) -> MvNormal:
    """
    Condition `joint` on x_b = v and return the law of the remaining block:
    N(μ_a + Σ_ab Σ_bb⁻¹(v − μ_b), Σ_aa − Σ_ab Σ_bb⁻¹ Σ_ba).
    The remaining coordinates keep their ascending order.
    """
    d = joint.dim
    b = np.atleast_1d(np.asarray(observed_idx, dtype=int))
    v = np.atleast_1d(as_finite(observed_vals, "observed_vals"))
    if b.size != v.size:
        raise ShapeMismatchError("observed_idx and observed_vals differ in length")
    if b.size and (b.min() < 0 or b.max() >= d or np.unique(b).size != b.size):
        raise ValueError(f"invalid observed indices {b.tolist()} for dimension {d}")
    a = np.setdiff1d(np.arange(d), b)
    if b.size == 0:
        return joint.marginal(a)

    mu_a, mu_b = joint.mean[a], joint.mean[b]
    s_aa = joint.cov[np.ix_(a, a)]
    s_ab = joint.cov[np.ix_(a, b)]
    s_bb = joint.cov[np.ix_(b, b)]

    chol = cholesky(s_bb)
    gain = sla.cho_solve((chol, True), s_ab.T).T          # Σ_ab Σ_bb⁻¹
    mean = mu_a + gain @ (v - mu_b)
    cov = s_aa - gain @ s_ab.T
    cov = 0.5 * (cov + cov.T)
    return MvNormal(mean, cov)
