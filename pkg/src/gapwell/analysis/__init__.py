"""Sweeps, asymptotic fits, bound checks, convergence studies and the FD oracle."""

from .convergence import ConvergenceStudy, convergence_study
from .fd import FDLevel, OracleResult, fd_box_eigenvalue, fd_level, fd_oracle
from .fits import (FitResult, SandwichReport, estimate_conjecture_coefficients,
                   fit_exp_inverse_cube, fit_power_law, fit_quartic, fit_window,
                   rolling_spread, verify_sandwich)
from .sweep import SweepRow, SweepTable, evaluate, instantiate, sweep, synthetic_row

__all__ = [
    "ConvergenceStudy", "FDLevel", "FitResult", "OracleResult", "SandwichReport",
    "SweepRow", "SweepTable", "convergence_study", "estimate_conjecture_coefficients",
    "evaluate", "fd_box_eigenvalue", "fd_level", "fd_oracle", "fit_exp_inverse_cube",
    "fit_power_law", "fit_quartic", "fit_window", "instantiate", "rolling_spread",
    "sweep", "synthetic_row", "verify_sandwich",
]
