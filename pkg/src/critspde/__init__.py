"""Critical spaces for parabolic stochastic PDEs: exponent calculus and spectral numerics."""

__version__ = "0.1.0"
