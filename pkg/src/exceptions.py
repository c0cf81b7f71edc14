"""Error hierarchy shared by every HOT-GP module."""
import numpy as np


class HotGpError(Exception):
    """Base class for all errors raised by this package."""


class NotPSDError(HotGpError, np.linalg.LinAlgError):
    """A matrix could not be factorized even at the maximum jitter."""


class DegenerateDataError(HotGpError, ValueError):
    """Too few transitions to fit a model."""


class ModelNotFittedError(HotGpError, RuntimeError):
    """Prediction requested from a model that was never fitted."""


class ShapeMismatchError(HotGpError, ValueError):
    """Array shapes do not chain."""


class ConfigError(HotGpError, ValueError):
    """Invalid or unknown configuration keys/values."""
