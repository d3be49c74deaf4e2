"""Numerical laboratory for constrained two-component attractive
Gross-Pitaevskii ground states: critical-coupling constants, normalized
gradient-flow minimization, analytic trial-function bounds, and asymptotic
scaling diagnostics."""

from .kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
