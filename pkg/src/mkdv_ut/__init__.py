"""Half-line modified KdV: spectral functions, Riemann-Hilbert solver and reconstruction."""

from .core import BadParams, ConfigError, MkdvError, OutOfDomain, RangeError

__version__ = "0.1.0"
__all__ = ["BadParams", "ConfigError", "MkdvError", "OutOfDomain", "RangeError", "__version__"]
