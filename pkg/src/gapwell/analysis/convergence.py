"""Truncation studies of the mode-matching gap."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import geometry as geo
from ..errors import InvalidGeometry
from ..linalg import fit_line
from ..modematch import SolverOptions, find_ground_state_half, find_ground_state_layer

EDGE_MODES_PER_FUNCTION = 12.5     # ratio N/K of the default solver schedule


@dataclass
class ConvergenceStudy:
    """Gap per truncation with an extrapolated limit.

    ``order`` is minus the least-squares slope of ln|gap(M_k+1) - gap(M_k)|
    against ln M; ``local_orders`` are the pairwise values.  ``extrapolated``
    applies Richardson extrapolation with that order to the two finest
    truncations.
    """

    mode_counts: list
    gaps: list
    extrapolated: float
    order: float
    local_orders: list = field(default_factory=list)
    method: str = "classic"
    a: float = math.nan
    d: float = math.nan


def _half_args(geom):
    if isinstance(geom, geo.LayerGeometry):
        if not geom.symmetric:
            raise InvalidGeometry("convergence studies need d1 = d2")
        return geom.d1, geom.a, 3
    geo.validate(geom)
    if not geom.symmetric or len(geom.windows) != 1:
        raise InvalidGeometry("convergence studies take one window between equal strips")
    return geom.d1, geom.windows[0].half_width, 2


def convergence_study(geom, mode_counts, method="classic") -> ConvergenceStudy:
    """Solve at each mode count and estimate the convergence order.

    Parameters
    ----------
    geom : StripGeometry or LayerGeometry
        One centered window between strips (or layers) of equal width.
    mode_counts : sequence of int
        At least three truncations, increasing.
    method : {"classic", "edge"}
        ``"classic"`` uses M window and M barrier modes in the Fourier
        secular matrix; ``"edge"`` pins the interface basis to
        ``M / 12.5`` functions with M modes per family.
    """
    counts = sorted(int(m) for m in mode_counts)
    if len(counts) < 3:
        raise ValueError("convergence_study needs at least three mode counts")
    d, a, dim = _half_args(geom)
    gaps = []
    for m in counts:
        if method == "classic":
            opts = SolverOptions(method="classic", fixed=(m, m))
        elif method == "edge":
            opts = SolverOptions(fixed=(max(2, round(m / EDGE_MODES_PER_FUNCTION)), m))
        else:
            raise ValueError("method must be 'classic' or 'edge'")
        run = find_ground_state_layer if dim == 3 else find_ground_state_half
        gaps.append(run(d, a, opts).gap)
    g = np.array(gaps)
    diffs = np.abs(np.diff(g))
    mids = np.sqrt(np.array(counts[:-1], float) * np.array(counts[1:], float))
    good = diffs > 0
    local = [float(math.log(diffs[k] / diffs[k + 1]) / math.log(mids[k + 1] / mids[k]))
             if diffs[k] > 0 and diffs[k + 1] > 0 else math.nan
             for k in range(len(diffs) - 1)]
    if good.sum() >= 2:
        order = -fit_line(np.log(mids[good]), np.log(diffs[good])).slope
    else:
        order = math.inf
    if math.isfinite(order) and order > 0:
        f = (counts[-1] / counts[-2]) ** order
        extrap = float(g[-1] + (g[-1] - g[-2]) / (f - 1.0))
    else:
        extrap = float(g[-1])
    return ConvergenceStudy(counts, [float(x) for x in g], extrap, float(order), local,
                            method, a, d)
