"""Classic mode-matching secular matrices (Fourier bases on both sides).

The half-problem matrix couples ND window modes and DD barrier modes through
the overlaps C_nm = <chi_n, phi_m>:

    M(eps) = diag(g_m) + C^T diag(kappa_n) C .

These matrices converge only algebraically in the truncation because the
interface trace has a square-root singularity at the window edge; the
production solver in :mod:`gapwell.modematch.edge` removes that defect.  They
are kept as the reference formulation and for convergence comparisons.
"""

from __future__ import annotations

import math

import numpy as np

from .. import specfun
from ..errors import PoleGuard
from ..linalg import SymMatrix, eigen_symmetric
from .modes import overlap_sym

POLE_TOL = 1e-12


def _window_diag(eps, d, a, Mw, parity):
    m = np.arange(1, Mw + 1)
    nu = (math.pi * (m - 0.5) / d) ** 2
    diff = nu - eps
    g = np.empty(Mw)
    ev = diff >= 0
    k = np.sqrt(diff[ev])
    if parity == "even":
        g[ev] = k * np.tanh(k * a)
    elif parity == "odd":
        with np.errstate(divide="ignore"):
            g[ev] = np.where(k > 0, k / np.tanh(k * a), 1.0 / a)
    else:
        raise ValueError("parity must be 'even' or 'odd'")
    q = np.sqrt(-diff[~ev])
    if q.size:
        c, s = np.cos(q * a), np.sin(q * a)
        if parity == "even":
            if np.any(np.abs(c) < POLE_TOL):
                raise PoleGuard("cos(q a) vanishes at this energy")
            g[~ev] = -q * s / c
        else:
            if np.any(np.abs(s) < POLE_TOL):
                raise PoleGuard("sin(q a) vanishes at this energy")
            g[~ev] = q * c / s
    return g


def secular_matrix_half(eps, d, a, trunc, parity="even") -> SymMatrix:
    """Classic half-problem secular matrix of size Mw x Mw.

    Parameters
    ----------
    eps : float
        Energy in the spectral interval.
    d : float
        Strip width.
    a : float
        Window half-width.
    trunc : (Mw, Mb)
        Window and barrier mode counts.
    parity : {"even", "odd"}
        Longitudinal parity about the window center.
    """
    Mw, Mb = trunc
    g = _window_diag(eps, d, a, Mw, parity)
    n = np.arange(1, Mb + 1)
    kappa = np.sqrt(np.maximum((math.pi * n / d) ** 2 - eps, 0.0))
    C = overlap_sym(n[:, None], np.arange(1, Mw + 1)[None, :])
    M = np.diag(g) + C.T @ (kappa[:, None] * C)
    return SymMatrix(M)


def secular_matrix_layer(eps, d, a, trunc) -> SymMatrix:
    """Classic radial secular matrix for the symmetric layer with a disk window."""
    Mw, Mb = trunc
    m = np.arange(1, Mw + 1)
    nu = (math.pi * (m - 0.5) / d) ** 2
    diff = nu - eps
    h = np.empty(Mw)
    ev = diff >= 0
    k = np.sqrt(diff[ev])
    h[ev] = np.where(k > 0, k * specfun.i_ratio(np.maximum(k * a, 1e-300)), 0.0)
    q = np.sqrt(-diff[~ev])
    if q.size:
        j0 = specfun.bessel("J0", q * a)
        if np.any(np.abs(j0) < POLE_TOL):
            raise PoleGuard("J0(q a) vanishes at this energy")
        h[~ev] = -q * specfun.bessel("J1", q * a) / j0
    n = np.arange(1, Mb + 1)
    kappa = np.sqrt(np.maximum((math.pi * n / d) ** 2 - eps, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(kappa > 0, kappa * specfun.k_ratio(np.maximum(kappa * a, 1e-300)), 0.0)
    C = overlap_sym(n[:, None], m[None, :])
    M = np.diag(h) + C.T @ (w[:, None] * C)
    return SymMatrix(M)


def secular_lambda_min(eps, d, a, trunc, parity="even", dim=2) -> float:
    """Smallest eigenvalue of the classic secular matrix."""
    if dim == 2:
        M = secular_matrix_half(eps, d, a, trunc, parity)
    else:
        M = secular_matrix_layer(eps, d, a, trunc)
    return float(eigen_symmetric(M)[0])
