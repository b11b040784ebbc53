"""Command-line front end.

Commands: ``solve2d``, ``solve3d``, ``sweep``, ``fit``, ``verify``,
``convergence`` and ``oracle``.  Exit codes: 0 success, 2 no bound state
(or one below the numerical floor), 3 invalid input, 4 convergence failure,
5 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import datetime as _dt
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import geometry as geo
from .analysis import (SweepRow, convergence_study, evaluate, fd_oracle, fit_exp_inverse_cube,
                       fit_power_law, fit_quartic, sweep, verify_sandwich)
from .errors import (ConvergenceFailure, GapwellError, InvalidGeometry, IterationFailure,
                     NoBoundState)
from .modematch import SolverOptions, field_on_grid, find_ground_state_half

EXIT_OK, EXIT_NO_BOUND, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4, 5

COMMANDS = ("solve2d", "solve3d", "sweep", "fit", "verify", "convergence", "oracle")
COLUMNS = ("d1", "d2", "windows", "a", "i_measure", "epsilon", "gap", "gap_variational",
           "gap_paper_bound", "modes_window", "modes_barrier", "residual", "bracket_width",
           "status")
FIT_MODELS = ("power_law", "quartic", "exp_inverse_cube")


class UsageError(GapwellError, ValueError):
    """Bad command line or configuration file."""


@dataclass
class RunConfig:
    command: str
    d1: float = math.pi
    d2: float = math.pi
    windows: list = field(default_factory=list)     # [(center, half_width)]
    radius: float | None = None
    modes: int | None = None
    tol_rel: float | None = None
    a_list: list = field(default_factory=list)
    mode_counts: list = field(default_factory=list)
    out: str | None = None
    fmt: str = "json"
    input: str | None = None
    model: str = "power_law"
    field_out: str | None = None
    grid: str | None = None
    argv: list = field(default_factory=list)

    def geometry(self):
        if self.command in ("solve3d",) or (self.radius is not None and not self.windows):
            a = self.radius if self.radius is not None else 1.0
            return geo.LayerGeometry(self.d1, self.d2, a)
        g = geo.StripGeometry(self.d1, self.d2, [geo.Window(x, a) for x, a in self.windows])
        geo.validate(g)
        return g

    def solver(self) -> SolverOptions:
        kw = {}
        if self.tol_rel is not None:
            kw["tol_rel"] = self.tol_rel
        if self.modes is not None:
            kw["mode_cap"] = self.modes
        return SolverOptions(**kw)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text, what):
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from exc


def _build_parser():
    p = _Parser(prog="gapwell", description="Bound states of window-coupled waveguides.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--d1", type=float)
    p.add_argument("--d2", type=float)
    p.add_argument("--windows", help='window list "x:a[,x:a...]"')
    p.add_argument("--radius", type=float, help="disk radius (3D)")
    p.add_argument("--modes", type=int, help="mode-count cap")
    p.add_argument("--tol-rel", type=float)
    p.add_argument("--a-list", help="comma-separated half-widths or radii")
    p.add_argument("--mode-counts", help="comma-separated truncations for convergence")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--config", help="INI file with [geometry], [solver], [sweep] sections")
    p.add_argument("--input", help="sweep CSV or JSON for fit and verify")
    p.add_argument("--model", choices=FIT_MODELS)
    p.add_argument("--field", dest="field_out", help="also write the ground state on a grid")
    p.add_argument("--grid", help='field grid "x0:x1:nx,y0:y1:ny"')
    return p


def _read_config(path):
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError:
        raise
    except configparser.Error as exc:
        raise UsageError(f"config {path}: {exc}") from exc
    flat = {}
    for section in ("geometry", "solver", "sweep"):
        if cp.has_section(section):
            for k, v in cp.items(section):
                flat[k.replace("-", "_")] = v
    return flat


def parse_args(argv) -> RunConfig:
    """Parse the command line (and the optional INI file) into a RunConfig.

    Flags override values from the file.  Raises :class:`UsageError` or a
    geometry error on invalid input.
    """
    argv = list(argv)
    ns = _build_parser().parse_args(argv)
    conf = _read_config(ns.config) if ns.config else {}

    def pick(name, flag, conv=lambda v: v):
        if flag is not None:
            return flag
        if name in conf:
            try:
                return conv(conf[name])
            except ValueError as exc:
                raise UsageError(f"config value {name}: {exc}") from exc
        return None

    cfg = RunConfig(command=ns.command, argv=argv)
    d1 = pick("d1", ns.d1, float)
    d2 = pick("d2", ns.d2, float)
    cfg.d1 = math.pi if d1 is None else d1
    cfg.d2 = cfg.d1 if d2 is None else d2
    win = pick("windows", ns.windows)
    if win is not None:
        try:
            cfg.windows = geo.parse_windows(win)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    cfg.radius = pick("radius", ns.radius, float)
    cfg.modes = pick("modes", ns.modes, int)
    cfg.tol_rel = pick("tol_rel", ns.tol_rel, float)
    al = pick("a_list", ns.a_list)
    cfg.a_list = _floats(al, "a-list") if al is not None else []
    mc = pick("mode_counts", ns.mode_counts)
    cfg.mode_counts = [int(v) for v in _floats(mc, "mode-counts")] if mc is not None else []
    cfg.out = pick("out", ns.out)
    cfg.fmt = pick("format", ns.format) or "json"
    if cfg.fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {cfg.fmt!r}")
    cfg.input = ns.input
    cfg.model = pick("model", ns.model) or "power_law"
    cfg.field_out = ns.field_out
    cfg.grid = ns.grid
    # geometry checks up front so bad input exits before any solve
    if cfg.command in ("solve2d", "oracle", "convergence") and not cfg.windows \
            and cfg.radius is None:
        raise UsageError(f"{cfg.command} needs --windows (or --radius for 3D)")
    if cfg.command == "solve3d" and cfg.radius is None:
        raise UsageError("solve3d needs --radius")
    if cfg.command == "sweep" and not cfg.a_list:
        raise UsageError("sweep needs --a-list")
    if cfg.command in ("fit", "verify") and not cfg.input:
        raise UsageError(f"{cfg.command} needs --input")
    if cfg.windows or cfg.command in ("solve3d",):
        if cfg.command != "sweep":
            cfg.geometry()
        else:
            geo.validate(geo.StripGeometry(cfg.d1, cfg.d2,
                                           [geo.Window(x, a) for x, a in cfg.windows]))
    return cfg


# ------------------------------------------------------------------ output

def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, list):
        return ";".join(f"{_fmt(float(w[0]))}:{_fmt(float(w[1]))}" for w in v)
    return str(v)


def _header(cfg):
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return [f"# gapwell {__version__}",
            "# command: gapwell " + " ".join(cfg.argv),
            f"# timestamp: {stamp}"]


def rows_to_csv(records, cfg) -> str:
    buf = io.StringIO()
    for line in _header(cfg):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for rec in records:
        w.writerow([_fmt(rec[c]) for c in COLUMNS])
    return buf.getvalue()


def _parse_cell(name, text):
    if name == "windows":
        return [[float(x), float(a)] for x, a in
                (p.split(":") for p in text.split(";") if p)]
    if name == "status":
        return text
    if name in ("modes_window", "modes_barrier"):
        return int(text)
    return float(text)


def read_records(path) -> list:
    """Rows of a sweep file written by this tool (CSV or JSON)."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith(("[", "{")):
        data = json.loads(text)
        return data if isinstance(data, list) else [data]
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rd = csv.DictReader(lines)
    return [{k: _parse_cell(k, v) for k, v in r.items()} for r in rd]


def record_to_row(rec) -> SweepRow:
    wins = tuple((float(x), float(a)) for x, a in rec["windows"])
    dim = 3 if abs(rec["i_measure"] - math.pi * rec["a"] ** 2) < 1e-12 * max(1, rec["i_measure"]) \
        and abs(rec["i_measure"] - 2 * sum(w[1] ** 2 for w in wins)) > 1e-12 else 2
    return SweepRow(param=rec["a"], d1=rec["d1"], d2=rec["d2"], windows=wins, a=rec["a"],
                    i_measure=rec["i_measure"], dim=dim, epsilon=rec["epsilon"], gap=rec["gap"],
                    gap_variational=rec["gap_variational"],
                    gap_paper_bound=rec["gap_paper_bound"], modes_window=rec["modes_window"],
                    modes_barrier=rec["modes_barrier"], residual=rec["residual"],
                    bracket_width=rec["bracket_width"], status=rec["status"])


def _emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_records(records, cfg, single):
    if cfg.fmt == "csv":
        _emit(rows_to_csv(records, cfg), cfg)
    else:
        _emit(json.dumps(records[0] if single else records) + "\n", cfg)


def _emit_object(obj, cfg):
    if cfg.fmt == "csv":
        buf = io.StringIO()
        for line in _header(cfg):
            buf.write(line + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in obj.items():
            w.writerow((k, _fmt(v) if not isinstance(v, (list, tuple, dict)) else json.dumps(v)))
        _emit(buf.getvalue(), cfg)
    else:
        _emit(json.dumps(obj) + "\n", cfg)


def _parse_grid(spec, default):
    if not spec:
        return default
    try:
        (x0, x1, nx), (y0, y1, ny) = [p.split(":") for p in spec.split(",")]
        return (np.linspace(float(x0), float(x1), int(nx)),
                np.linspace(float(y0), float(y1), int(ny)))
    except ValueError as exc:
        raise UsageError(f"grid spec {spec!r}: expected x0:x1:nx,y0:y1:ny") from exc


def emit_field(result, grid, out):
    """Write ``x,y,psi`` rows of the reconstructed ground state.

    ``grid`` is a pair of coordinate arrays (xs, ys); ``out`` a path or a
    writable text stream.
    """
    xs, ys = grid
    vals = field_on_grid(result, xs, ys)
    lines = ["x,y,psi"]
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            lines.append(f"{_fmt(float(x))},{_fmt(float(y))},{_fmt(float(vals[i, j]))}")
    text = "\n".join(lines) + "\n"
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# --------------------------------------------------------------- commands

def _solve(cfg):
    g = cfg.geometry()
    param = g.a if isinstance(g, geo.LayerGeometry) else max(w.half_width for w in g.windows)
    holder = {}

    def run(geom):
        from .analysis.sweep import default_solver
        holder["res"] = default_solver(geom, cfg.solver())
        return holder["res"]

    row = evaluate(g, param, run)
    if cfg.field_out and "res" in holder:
        d = max(cfg.d1, cfg.d2)
        s = holder["res"].s
        span = min(10.0 / s, 50.0 * d) if s > 0 else 10.0 * d
        lo = 0.0 if isinstance(g, geo.LayerGeometry) else -span
        emit_field(holder["res"], _parse_grid(cfg.grid, (np.linspace(lo, span, 81),
                                                         np.linspace(-cfg.d2, cfg.d1, 41))),
                   cfg.field_out)
    return [row]


def _sweep(cfg):
    if cfg.radius is not None and not cfg.windows:
        tmpl = geo.LayerGeometry(cfg.d1, cfg.d2, cfg.radius)
    else:
        wins = cfg.windows or [(0.0, 1.0)]
        tmpl = geo.StripGeometry(cfg.d1, cfg.d2, [geo.Window(x, a) for x, a in wins])
    return sweep(tmpl, cfg.a_list, cfg.solver()).rows


def _rows_status(rows):
    bad = [r.status for r in rows if r.status != "ok"]
    if not bad:
        return EXIT_OK
    if all(s in ("NoBoundState", "BelowNumericalFloor") for s in bad) and len(rows) == 1:
        return EXIT_NO_BOUND
    if len(rows) == 1:
        return EXIT_CONVERGENCE if bad[0] in ("ConvergenceFailure", "IterationFailure") \
            else EXIT_INPUT
    return EXIT_OK


def _fit(cfg):
    rows = [record_to_row(r) for r in read_records(cfg.input)]
    fn = {"power_law": fit_power_law, "quartic": fit_quartic,
          "exp_inverse_cube": fit_exp_inverse_cube}[cfg.model]
    f = fn(rows)
    return {"model": f.model, "exponent": f.exponent, "coefficient": f.coefficient,
            "r2": f.r2, "window": list(f.window), "rolling": list(f.rolling),
            "n_rows": f.n_rows}


def _verify(cfg):
    rows = [record_to_row(r) for r in read_records(cfg.input)]
    rep = verify_sandwich(rows)
    return {"c1": rep.c1, "c2": rep.c2, "ratios": rep.ratios, "pass": rep.passed,
            "failed_row": rep.failed_row, "reason": rep.reason}


def _convergence(cfg):
    counts = cfg.mode_counts or [50, 100, 200, 400]
    st = convergence_study(cfg.geometry(), counts)
    return {"mode_counts": st.mode_counts, "gaps": st.gaps, "extrapolated": st.extrapolated,
            "order": st.order, "local_orders": st.local_orders, "method": st.method}


def _oracle(cfg):
    r = fd_oracle(cfg.geometry())
    return {"gap": r.gap, "error": r.error, "x_correction": r.x_correction,
            "levels": [dataclasses.asdict(lv) for lv in r.levels], "kind": r.kind}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration and return the exit code."""
    try:
        if cfg.command in ("solve2d", "solve3d"):
            rows = _solve(cfg)
            _emit_records([r.record() for r in rows], cfg, single=True)
            return _rows_status(rows)
        if cfg.command == "sweep":
            rows = _sweep(cfg)
            _emit_records([r.record() for r in rows], cfg, single=False)
            return EXIT_OK
        obj = {"fit": _fit, "verify": _verify, "convergence": _convergence,
               "oracle": _oracle}[cfg.command](cfg)
        _emit_object(obj, cfg)
        return EXIT_OK
    except OSError as exc:
        print(f"gapwell: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NoBoundState as exc:
        print(f"gapwell: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NO_BOUND
    except (ConvergenceFailure, IterationFailure) as exc:
        print(f"gapwell: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (GapwellError, ValueError, KeyError) as exc:
        print(f"gapwell: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except OSError as exc:
        print(f"gapwell: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, InvalidGeometry, ValueError) as exc:
        print(f"gapwell: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
