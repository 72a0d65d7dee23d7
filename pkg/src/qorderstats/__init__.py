"""q-calculus kernels, q-order statistics and the Heine process."""

__version__ = "0.1.0"
