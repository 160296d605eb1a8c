"""renormlab: renormalization numerics for real quadratic maps."""
__version__ = "0.1.0"
