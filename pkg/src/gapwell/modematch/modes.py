"""Transverse mode bases, longitudinal wavenumbers and basis overlaps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DIRICHLET_DIRICHLET = "dirichlet_dirichlet"
NEUMANN_DIRICHLET = "neumann_dirichlet"
FULL_INTERVAL = "full_interval"

EVANESCENT = "evanescent"
PROPAGATING = "propagating"


@dataclass(frozen=True)
class ModeBasis:
    """Orthonormal transverse modes on an interval.

    ``dirichlet_dirichlet``: sqrt(2/w) sin(pi n (y - y0)/w) on [y0, y0+w].
    ``neumann_dirichlet``: sqrt(2/w) cos(pi (n - 1/2) y/w) on [0, w]
    (Neumann at y = 0, Dirichlet at y = w).
    ``full_interval``: sqrt(2/w) sin(pi n (y - y0)/w) on the full
    cross-section [y0, y0+w]; same functions as ``dirichlet_dirichlet`` but
    labelled separately because window segments of the asymmetric guide use
    them across the wall position.
    """

    kind: str
    width: float
    y0: float = 0.0

    def index_factor(self, n):
        n = np.asarray(n, dtype=float)
        return n - 0.5 if self.kind == NEUMANN_DIRICHLET else n

    def eigenvalue(self, n):
        """Transverse eigenvalue mu_n = (pi * index / width)**2."""
        return (math.pi * self.index_factor(n) / self.width) ** 2

    def __call__(self, n, y):
        """Mode values, shape ``broadcast(n, y)``; zero outside the interval."""
        n = np.asarray(n, dtype=float)
        y = np.asarray(y, dtype=float)
        u = (y - self.y0) / self.width
        amp = math.sqrt(2.0 / self.width)
        if self.kind == NEUMANN_DIRICHLET:
            val = amp * np.cos(math.pi * (n - 0.5) * u)
        else:
            val = amp * np.sin(math.pi * n * u)
        inside = (u >= 0.0) & (u <= 1.0)
        return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class Wavenumber:
    value: float
    regime: str

    @property
    def evanescent(self) -> bool:
        return self.regime == EVANESCENT


def wavenumber(mu: float, eps: float) -> Wavenumber:
    """Longitudinal wavenumber of a channel with transverse eigenvalue ``mu``.

    ``mu >= eps`` gives the evanescent rate sqrt(mu - eps) (zero exactly at
    threshold); ``mu < eps`` the propagating wavenumber sqrt(eps - mu).
    """
    diff = mu - eps
    if diff >= 0:
        return Wavenumber(math.sqrt(diff), EVANESCENT)
    return Wavenumber(math.sqrt(-diff), PROPAGATING)


def overlap_sym(n, m):
    """<chi_n, phi_m> on [0, d] for the DD and ND bases; independent of d.

    Equals (2/pi) n / (n**2 - (m - 1/2)**2).  Broadcasts over arrays.
    """
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    val = (2.0 / math.pi) * n / (n * n - (m - 0.5) ** 2)
    return float(val) if val.ndim == 0 else val


def _int_cos(alpha, beta, length):
    """Integral of cos(alpha y + beta) over [0, length], stable at alpha = 0."""
    h = 0.5 * alpha * length
    return length * np.cos(h + beta) * np.sinc(h / math.pi)


def overlap_asym(side: str, n, m, geom) -> float:
    """<substrip mode n, full-width mode m> for the asymmetric guide.

    Parameters
    ----------
    side : {"upper", "lower"}
        Substrip [0, d1] or [-d2, 0].
    n, m : int or array
        Substrip and full-width mode indices (>= 1).
    geom : StripGeometry
        Supplies d1 and d2.
    """
    d1, d2 = geom.d1, geom.d2
    D = d1 + d2
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    if side == "upper":
        w = d1
        # sin(pi n y/d1) * sin(pi m (y + d2)/D), y in [0, d1]
        a1, a2, b2 = math.pi * n / w, math.pi * m / D, math.pi * m * d2 / D
        b1 = 0.0
    elif side == "lower":
        w = d2
        # substitute y = u - d2, u in [0, d2]
        a1, a2, b2 = math.pi * n / w, math.pi * m / D, 0.0
        b1 = 0.0
    else:
        raise ValueError("side must be 'upper' or 'lower'")
    # sin(A) sin(B) = (cos(A - B) - cos(A + B))/2
    val = 0.5 * (_int_cos(a1 - a2, b1 - b2, w) - _int_cos(a1 + a2, b1 + b2, w))
    val = val * math.sqrt(2.0 / w) * math.sqrt(2.0 / D)
    return float(val) if np.ndim(val) == 0 else val


def delta_dd(n, width, d):
    """mu_n - (pi/d)**2 for DD modes on an interval of the given width."""
    n = np.asarray(n, dtype=float)
    p = math.pi * n / width
    q = math.pi / d
    return (p - q) * (p + q)


def delta_nd(m, d):
    """mu_m - (pi/d)**2 for ND modes on [0, d]."""
    m = np.asarray(m, dtype=float)
    return (math.pi / d) ** 2 * ((m - 0.5) ** 2 - 1.0)
