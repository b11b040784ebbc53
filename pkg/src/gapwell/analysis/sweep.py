"""Parameter sweeps: one solver and one variational evaluation per row."""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .. import geometry as geo
from .. import variational as var
from ..errors import GapwellError
from ..modematch import (SolverOptions, find_ground_state_half, find_ground_state_layer,
                         find_ground_state_strip, matching_residual)

FLOOR_REL = 1e-13
FIT_FLOOR_FACTOR = 100.0     # fits ignore |gap| below this multiple of the floor
FIT_MAX_A_OVER_D = 0.3       # and 2D rows with a/d above this


@dataclass
class SweepRow:
    """One evaluated geometry.

    ``gap`` is the mode-matching value, ``gap_variational`` the minimized
    trial-function upper bound and ``gap_paper_bound`` the closed-form bound.
    Quantities that do not apply or failed are NaN; ``status`` is ``"ok"``
    or the name of the error class raised by the solver.
    """

    param: float
    d1: float
    d2: float
    windows: tuple               # ((center, half_width), ...); radius for a layer
    a: float
    i_measure: float
    dim: int = 2
    epsilon: float = math.nan
    gap: float = math.nan
    gap_variational: float = math.nan
    gap_paper_bound: float = math.nan
    modes_window: int = 0
    modes_barrier: int = 0
    residual: float = math.nan
    bracket_width: float = math.nan
    status: str = "ok"
    message: str = ""

    @property
    def d(self) -> float:
        return max(self.d1, self.d2)

    @property
    def ok(self) -> bool:
        return self.status == "ok" and math.isfinite(self.gap)

    def record(self) -> dict:
        """Row as the flat record used for CSV and JSON output."""
        return {
            "d1": self.d1, "d2": self.d2,
            "windows": [list(w) for w in self.windows],
            "a": self.a, "i_measure": self.i_measure, "epsilon": self.epsilon,
            "gap": self.gap, "gap_variational": self.gap_variational,
            "gap_paper_bound": self.gap_paper_bound,
            "modes_window": self.modes_window, "modes_barrier": self.modes_barrier,
            "residual": self.residual, "bracket_width": self.bracket_width,
            "status": self.status,
        }


@dataclass
class SweepTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def ok_rows(self):
        return [r for r in self.rows if r.ok]


def synthetic_row(a, gap, d=math.pi, dim=2, windows=None) -> SweepRow:
    """Row with a prescribed gap, for fit checks and adversarial tables."""
    if windows is None:
        windows = ((0.0, a),)
    i_meas = 2.0 * sum(w[1] ** 2 for w in windows) if dim == 2 else math.pi * a * a
    return SweepRow(param=a, d1=d, d2=d, windows=tuple(windows), a=a, i_measure=i_meas,
                    dim=dim, epsilon=(math.pi / d) ** 2 + gap, gap=gap)


def instantiate(template, p):
    """Geometry for parameter ``p``.

    ``template`` may be a callable, a :class:`StripGeometry` (every window
    half-width becomes ``p``) or a :class:`LayerGeometry` (radius ``p``).
    """
    if callable(template) and not isinstance(template, (geo.StripGeometry, geo.LayerGeometry)):
        return template(p)
    if isinstance(template, geo.LayerGeometry):
        return geo.LayerGeometry(template.d1, template.d2, p)
    if isinstance(template, geo.StripGeometry):
        wins = [geo.Window(w.center, p) for w in template.windows]
        return geo.StripGeometry(template.d1, template.d2, wins)
    raise TypeError(f"unsupported geometry template {template!r}")


def default_solver(geom, opts: SolverOptions | None = None):
    """Dispatch to the cheapest applicable mode-matching solver."""
    if isinstance(geom, geo.LayerGeometry):
        return find_ground_state_layer(geom.d1, geom.a, opts, geom=geom)
    if geom.symmetric and len(geom.windows) == 1:
        geo.validate(geom)
        return find_ground_state_half(geom.d1, geom.windows[0].half_width, opts)
    return find_ground_state_strip(geom, opts)


def _bounds(geom):
    """Variational value and closed-form bound; NaN where not applicable."""
    v = b = math.nan
    if isinstance(geom, geo.LayerGeometry):
        if geom.symmetric:
            try:
                v = var.minimize_rayleigh3d(geom.d1, geom.a)[1]
            except GapwellError:
                pass
            try:
                b = var.paper_bound_3d(geom.a, geom.d1)
            except GapwellError:
                pass
        return v, b
    try:
        v = var.minimize_rayleigh2d(geom)[1]
    except GapwellError:
        pass
    try:
        b = var.paper_bound_2d(geom)
    except GapwellError:
        pass
    return v, b


def evaluate(geom, param, solver=None, variational=True) -> SweepRow:
    """Evaluate one geometry; solver errors land in the status column."""
    if isinstance(geom, geo.LayerGeometry):
        row = SweepRow(param=param, d1=geom.d1, d2=geom.d2, windows=((0.0, geom.a),),
                       a=geom.a, i_measure=math.pi * geom.a ** 2, dim=3)
    else:
        row = SweepRow(param=param, d1=geom.d1, d2=geom.d2,
                       windows=tuple((w.center, w.half_width) for w in geom.windows),
                       a=float(param), i_measure=geo.i_measure(geom), dim=2)
    run = solver if callable(solver) else (lambda g: default_solver(g, solver))
    try:
        res = run(geom)
    except GapwellError as exc:
        return dataclasses.replace(row, status=type(exc).__name__, message=str(exc))
    row.epsilon, row.gap = res.epsilon, res.gap
    row.modes_window, row.modes_barrier = res.truncation
    row.bracket_width = res.bracket_width
    try:
        row.residual = matching_residual(res)
    except (GapwellError, AttributeError, TypeError):
        row.residual = res.secular_residual
    if variational:
        row.gap_variational, row.gap_paper_bound = _bounds(geom)
    return row


def worker_count():
    env = os.environ.get("GAPWELL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def sweep(template, params, solver=None, *, variational=True, workers=None) -> SweepTable:
    """Evaluate ``template`` at every parameter value.

    Parameters
    ----------
    template : StripGeometry, LayerGeometry or callable
        See :func:`instantiate`.
    params : sequence of float
        Window half-widths (or radii).  Must be nonempty.
    solver : SolverOptions or callable, optional
        Options for the default solver dispatch, or a callable mapping a
        geometry to a result with the fields of ``BoundStateResult``.
    variational : bool
        Also evaluate the trial-function and closed-form bounds.
    workers : int, optional
        Thread count; defaults to ``GAPWELL_THREADS`` or all cores.

    Returns
    -------
    SweepTable
        Rows sorted by parameter.  The result does not depend on the worker
        count: each row is computed independently and placed by index.
    """
    params = [float(p) for p in params]
    if not params:
        raise ValueError("sweep needs a nonempty parameter list")
    order = sorted(range(len(params)), key=lambda i: params[i])
    params = [params[i] for i in order]
    geoms = []
    rows = [None] * len(params)
    for i, p in enumerate(params):
        try:
            geoms.append(instantiate(template, p))
        except GapwellError as exc:
            geoms.append(None)
            rows[i] = SweepRow(param=p, d1=math.nan, d2=math.nan, windows=(), a=p,
                               i_measure=math.nan, status=type(exc).__name__, message=str(exc))
    todo = [i for i, g in enumerate(geoms) if g is not None]
    n = min(workers or worker_count(), max(1, len(todo)))
    job = lambda i: evaluate(geoms[i], params[i], solver, variational)
    if n == 1:
        done = [job(i) for i in todo]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            done = list(pool.map(job, todo))
    for i, r in zip(todo, done):
        rows[i] = r
    meta = {
        "floor_rel": FLOOR_REL,
        "fit_floor_factor": FIT_FLOOR_FACTOR,
        "fit_max_a_over_d": FIT_MAX_A_OVER_D,
    }
    return SweepTable(rows=rows, metadata=meta)
