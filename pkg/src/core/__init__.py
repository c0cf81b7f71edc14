# Numeric substrate: linear algebra, Gaussian conditioning, random streams
from src.core.linalg import MvNormal, cholesky, gaussian_condition
from src.core.sampling import (
    derive_rng, make_rng, std_normal_cdf, std_normal_quantile,
    truncated_normal_sample,
)

__all__ = [
    "MvNormal", "cholesky", "gaussian_condition", "derive_rng", "make_rng",
    "std_normal_cdf", "std_normal_quantile", "truncated_normal_sample",
]
