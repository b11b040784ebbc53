"""Asymptotic fits of sweep tables and the two-sided bound check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import geometry as geo
from ..errors import DegenerateAbscissa, InsufficientRows, Unsupported
from ..linalg import fit_line
from .sweep import (FIT_FLOOR_FACTOR, FIT_MAX_A_OVER_D, FLOOR_REL, SweepTable, sweep)

SANDWICH_TOL = 1e-6          # relative slack on ratio differences (solver tolerance scale)


@dataclass
class FitResult:
    """Outcome of a one-parameter asymptotic fit.

    ``exponent`` holds the power (power law, quartic), the slope against
    a^-3 (exponential model) or the fitted power for the conjecture forms.
    ``window`` is the parameter range of the rows used; ``rolling`` holds
    slopes over consecutive triples where computed.
    """

    model: str
    exponent: float
    coefficient: float
    r2: float
    window: tuple
    rolling: tuple = ()
    n_rows: int = 0
    metadata: dict = field(default_factory=dict)


@dataclass
class SandwichReport:
    c1: float
    c2: float
    ratios: list                 # (-gap)/I^2 per input row, NaN for failed rows
    passed: bool
    failed_row: int | None = None
    reason: str = ""


def _rows(table):
    return table.rows if isinstance(table, SweepTable) else list(table)


def _floor(row):
    return FLOOR_REL * (math.pi / row.d) ** 2


def fit_window(table, dim=None, max_a_over_d=FIT_MAX_A_OVER_D, floor_factor=FIT_FLOOR_FACTOR):
    """Rows admissible for small-a fits, sorted by parameter, plus the rule used."""
    out = []
    for r in _rows(table):
        if not r.ok or r.gap >= 0:
            continue
        if abs(r.gap) < floor_factor * _floor(r):
            continue
        if (dim or r.dim) == 2 and r.a / r.d > max_a_over_d:
            continue
        out.append(r)
    out.sort(key=lambda r: r.param)
    rule = {"floor_factor": floor_factor, "floor_rel": FLOOR_REL,
            "max_a_over_d": max_a_over_d if (dim or 2) == 2 else None}
    return out, rule


def _need(rows, n, what):
    if len(rows) < n:
        raise InsufficientRows(f"{what} needs at least {n} admissible rows, got {len(rows)}")


def fit_power_law(table, x="i_measure", use_window=True) -> FitResult:
    """Regress ln(-gap) on ln x; ``-gap ~ coefficient * x**exponent``.

    Raises
    ------
    InsufficientRows
        Fewer than 3 admissible rows.
    DegenerateAbscissa
        All abscissae equal.
    """
    rows, rule = fit_window(table) if use_window else (
        sorted((r for r in _rows(table) if r.ok and r.gap < 0), key=lambda r: r.param), {})
    _need(rows, 3, "fit_power_law")
    xs = np.log([getattr(r, x) for r in rows])
    ys = np.log([-r.gap for r in rows])
    lf = fit_line(xs, ys)
    return FitResult("power_law", lf.slope, math.exp(lf.intercept), lf.r2,
                     (rows[0].param, rows[-1].param), n_rows=len(rows), metadata=rule)


def quartic_coefficients(rows):
    """Per-row c = ((-gap)/a^4)^(1/4) after rescaling to d = pi (dilation)."""
    out = []
    for r in rows:
        s = math.pi / r.d
        a = r.a * s
        gap = r.gap / s ** 2
        out.append((a, (-gap / a ** 4) ** 0.25))
    return out


def fit_quartic(table, use_window=True, order=1.0) -> FitResult:
    """Coefficient c of ``-gap = (c a)^4`` extrapolated to a -> 0.

    Rows are rescaled to d = pi.  The per-row coefficient approaches its
    limit linearly in a (``order`` = 1), so the two smallest rows are
    combined by Richardson extrapolation in ``a**order``.  ``r2`` is that of
    the straight line c(a**order) over the window.
    """
    rows, rule = fit_window(table) if use_window else (
        sorted((r for r in _rows(table) if r.ok and r.gap < 0), key=lambda r: r.param), {})
    rows = [r for r in rows if r.dim == 2]
    _need(rows, 2, "fit_quartic")
    pts = quartic_coefficients(rows)
    (a1, c1), (a2, c2) = pts[0], pts[1]
    if a1 == a2:
        raise DegenerateAbscissa("the two smallest rows share the same a")
    t1, t2 = a1 ** order, a2 ** order
    c0 = c1 - (c2 - c1) * t1 / (t2 - t1)
    r2 = 1.0
    if len(pts) >= 3:
        r2 = fit_line([p[0] ** order for p in pts], [p[1] for p in pts]).r2
    return FitResult("quartic", 4.0, c0, r2, (rows[0].param, rows[-1].param),
                     n_rows=len(rows),
                     metadata=dict(rule, per_row=pts, unextrapolated=c1, order=order))


def _rolling(xs, ys):
    return tuple(fit_line(xs[i:i + 3], ys[i:i + 3]).slope for i in range(len(xs) - 2))


def fit_exp_inverse_cube(table) -> FitResult:
    """Regress ln(-gap) on a^-3: ``-gap ~ coefficient * exp(exponent / a^3)``.

    Only 3D rows with |gap| above ``FIT_FLOOR_FACTOR`` times the numerical
    floor enter.  Rolling slopes over consecutive triples are reported.

    Raises
    ------
    InsufficientRows
        Fewer than 3 rows above the floor.
    """
    rows, rule = fit_window(table, dim=3)
    rows = [r for r in rows if r.dim == 3]
    _need(rows, 3, "fit_exp_inverse_cube")
    xs = np.array([r.a ** -3 for r in rows])
    ys = np.log([-r.gap for r in rows])
    lf = fit_line(xs, ys)
    return FitResult("exp_inverse_cube", lf.slope, math.exp(lf.intercept), lf.r2,
                     (rows[0].param, rows[-1].param), rolling=_rolling(xs, ys),
                     n_rows=len(rows), metadata=rule)


def rolling_spread(fit: FitResult) -> float:
    """(max - min) / |mean| of the rolling slopes."""
    r = np.asarray(fit.rolling, dtype=float)
    if r.size == 0:
        return math.nan
    return float(np.ptp(r) / abs(r.mean()))


def verify_sandwich(table) -> SandwichReport:
    """Check that (-gap)/I^2 is bounded above and below and stabilizes.

    ``c2`` and ``c1`` are the minimum and maximum of the ratio over the
    rows.  The check passes when every row has a negative gap, ``0 < c2 <=
    c1`` and, with rows sorted by I, the distance of each ratio from the
    ratio of the smallest-I row does not grow as I decreases (up to a
    relative slack ``SANDWICH_TOL``).  Rows are sorted internally, so the
    outcome does not depend on the input order.
    """
    rows = _rows(table)
    ratios = []
    for i, r in enumerate(rows):
        if not (r.status == "ok" and math.isfinite(r.gap) and r.gap < 0):
            ratios = [(-q.gap / q.i_measure ** 2) if q.ok else math.nan for q in rows]
            why = f"row {i} has status {r.status} and gap {r.gap!r}"
            return SandwichReport(math.nan, math.nan, ratios, False, i, why)
        ratios.append(-r.gap / r.i_measure ** 2)
    if not ratios:
        return SandwichReport(math.nan, math.nan, [], False, None, "empty table")
    c1, c2 = max(ratios), min(ratios)
    srt = [q for _, q in sorted(zip((r.i_measure for r in rows), ratios))]
    dev = np.abs(np.asarray(srt) - srt[0])
    slack = SANDWICH_TOL * c1
    grow = [k for k in range(len(dev) - 1) if dev[k] > dev[k + 1] + slack]
    ok = 0 < c2 <= c1 and not grow
    why = "" if ok else (f"ratios do not settle towards small I at sorted position {grow[0]}"
                         if grow else "nonpositive lower constant")
    return SandwichReport(c1, c2, ratios, ok, None, why)


def estimate_conjecture_coefficients(nu, dim=2, d=math.pi, a_list=None, solver=None,
                                     workers=None) -> FitResult:
    """Empirical coefficient of the weak-coupling form for one window.

    2D: the strips have widths ``d`` and ``nu d``; with
    ``-gap d^2 = (c2 a^2)^2`` the per-row coefficient is extrapolated
    linearly in a to a -> 0 from the two smallest rows.  For d1 = d2 = d
    it relates to the quartic coefficient c of ``-gap = (c a)^4`` at
    d = pi through ``c2 = c^2 d``.

    3D (symmetric layers only): ``-gap d^2 = exp(-1/(c3 a^3))`` so the
    coefficient is ``c3 = -1/slope`` of ln(-gap d^2) against a^-3.
    """
    if not (0 < nu <= 1):
        raise ValueError("nu must lie in (0, 1]")
    if dim == 3:
        if nu != 1:
            raise Unsupported("the 3D coefficient is available for symmetric layers only")
        a_list = a_list or [0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6]
        tab = sweep(geo.LayerGeometry(d, d, 1.0), a_list, solver, variational=False,
                    workers=workers)
        rows, rule = fit_window(tab, dim=3)
        _need(rows, 3, "the 3D coefficient")
        xs = np.array([r.a ** -3 for r in rows])
        ys = np.log([-r.gap * d * d for r in rows])
        lf = fit_line(xs, ys)
        return FitResult("conjecture_3d", lf.slope, -1.0 / lf.slope, lf.r2,
                         (rows[0].param, rows[-1].param), rolling=_rolling(xs, ys),
                         n_rows=len(rows), metadata=dict(rule, nu=nu, d=d))
    if dim != 2:
        raise ValueError("dim must be 2 or 3")
    a_list = a_list or [0.025, 0.05, 0.1, 0.15, 0.2]
    tmpl = geo.StripGeometry(d, nu * d, [geo.Window(0.0, 1.0)])
    tab = sweep(tmpl, a_list, solver, variational=False, workers=workers)
    rows, rule = fit_window(tab)
    _need(rows, 2, "the 2D coefficient")
    c2 = [math.sqrt(-r.gap) * d / r.a ** 2 for r in rows]
    a1, a2 = rows[0].a, rows[1].a
    est = c2[0] - (c2[1] - c2[0]) * a1 / (a2 - a1)
    pw = fit_power_law(tab) if len(rows) >= 3 else None
    return FitResult("conjecture_2d", pw.exponent if pw else math.nan, est,
                     pw.r2 if pw else 1.0, (rows[0].param, rows[-1].param),
                     n_rows=len(rows),
                     metadata=dict(rule, nu=nu, d=d, per_row=list(zip([r.a for r in rows], c2))))
