"""Gaussian output head: mean and softly clamped log-variance."""
import numpy as np
from scipy.special import expit

import config


class GaussianHead:
    """
    Interprets the last 2·D network outputs as (mean, raw log-variance).
    Log-variance is soft-clamped: hi − softplus(hi − raw), then
    lo + softplus(x − lo), and finally hard-bounded to [lo, hi].
    """

    def __init__(self, out_dim: int, logvar_min: float = config.LOGVAR_MIN,
                 logvar_max: float = config.LOGVAR_MAX, clamp: bool = True):
        if logvar_min >= logvar_max:
            raise ValueError("logvar_min must be below logvar_max")
        self.out_dim = out_dim
        self.logvar_min = logvar_min
        self.logvar_max = logvar_max
        self.clamp = clamp

    def split(self, raw: np.ndarray):
        """Returns (mean, logvar, dlogvar/draw)."""
        mean = raw[..., : self.out_dim]
        lv_raw = raw[..., self.out_dim:]
        if not self.clamp:
            return mean, lv_raw, np.ones_like(lv_raw)
        hi, lo = self.logvar_max, self.logvar_min
        upper = hi - np.logaddexp(0.0, hi - lv_raw)
        d_upper = expit(hi - lv_raw)
        lower = lo + np.logaddexp(0.0, upper - lo)
        d_lower = expit(upper - lo)
        logvar = np.clip(lower, lo, hi)
        inside = (lower >= lo) & (lower <= hi)
        return mean, logvar, d_upper * d_lower * inside

    def merge_grad(self, d_mean: np.ndarray, d_logvar: np.ndarray, dlogvar_draw: np.ndarray):
        """Upstream gradient on the raw network output."""
        return np.concatenate([d_mean, d_logvar * dlogvar_draw], axis=-1)
