"""Reproducing kernels on quotient domains of 2-proper holomorphic maps."""

__version__ = "0.1.0"
