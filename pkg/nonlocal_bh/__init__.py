"""Nonlocal biharmonic solver on [0,1]^d with Gaussian kernels."""

__version__ = "0.1.0"
