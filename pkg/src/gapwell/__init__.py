"""Bound states of window-coupled waveguides: solvers, bounds and sweeps."""

__version__ = "0.1.0"
