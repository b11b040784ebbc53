"""Ground-state solvers for window-coupled strips and layers.

Energies are parametrized by s = sqrt((pi/d)^2 - eps) >= 0, so the gap is
exactly -s^2 and keeps full relative precision however small it is.  The
secular function is the smallest eigenvalue of the interface pencil
(A(eps), G) from :mod:`gapwell.modematch.edge`; it is positive near the lower
end of the spectral interval and first vanishes at the ground state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .. import geometry as geo
from ..errors import (BelowNumericalFloor, ConvergenceFailure, IllConditioned,
                      NoBoundState, PoleGuard, Unsupported)
from ..linalg import smallest_eigenpair
from . import classic
from .edge import (DISK, EXTERIOR, FINITE, HALF_EVEN, HALF_ODD, TAIL,
                   FullTraceSpace, HalfTraceSpace, InterfaceSystem, Region)

log = logging.getLogger(__name__)

FLOOR_REL = 1e-13


@dataclass(frozen=True)
class SolverOptions:
    """Truncation policy and tolerances.

    The interface basis size starts at ``k_start`` and the number of
    transverse modes per family at ``n_start``; both double until the gap
    changes by less than ``tol_rel * |gap|``.  ``mode_cap`` bounds the mode
    count.  ``fixed`` pins a single truncation ``(K, N)`` and skips the loop.
    """

    tol_rel: float = 1e-8
    tol_rel_asym: float = 1e-6
    k_start: int = 8
    n_start: int = 100
    mode_cap: int = 2048
    parity: str = "even"
    method: str = "edge"
    floor_rel: float = FLOOR_REL
    fixed: tuple | None = None
    scan_ratio: float = 4.0


@dataclass
class RegionCoefficients:
    """Mode amplitudes of one region.

    For a finite region the n-th mode varies as
    ``A_n exp(-k_n (x - x_left)) + B_n exp(-k_n (x_right - x))`` (evanescent)
    or ``A_n cos(q_n (x - x_mid)) + B_n sin(q_n (x - x_mid))`` (propagating),
    for tails as ``A_n exp(-k_n |x - x_edge|)``.  ``trace_left`` and
    ``trace_right`` are the projections of the interface traces.
    """

    family: str
    kind: str
    x_left: float
    x_right: float
    wavenumbers: np.ndarray
    evanescent: np.ndarray
    trace_left: np.ndarray | None
    trace_right: np.ndarray | None


@dataclass
class BoundStateResult:
    epsilon: float
    gap: float
    mode_coefficients: list
    secular_residual: float
    truncation: tuple            # (modes_window, modes_barrier)
    bracket_width: float
    interface_functions: int = 0
    history: list = field(default_factory=list)
    status: str = "ok"
    d: float = math.nan
    dim: int = 2
    system: object = field(default=None, repr=False)
    trace: np.ndarray | None = field(default=None, repr=False)
    s: float = math.nan

    @property
    def modes_window(self):
        return self.truncation[0]

    @property
    def modes_barrier(self):
        return self.truncation[1]

    @property
    def kappa1(self):
        """Decay rate of the leading barrier mode, sqrt(-gap)."""
        return self.s


# ------------------------------------------------------------ system setup

def half_system(d, a, K, N, parity="even", dim=2) -> InterfaceSystem:
    """One interface at the window edge of a centered window (parity reduced)."""
    sp = HalfTraceSpace(d, K)
    if dim == 2:
        regions = [Region(sp.barrier, TAIL, 0, None, math.inf, a, math.inf),
                   Region(sp.window, HALF_EVEN if parity == "even" else HALF_ODD,
                          0, None, a, 0.0, a)]
    else:
        regions = [Region(sp.barrier, EXTERIOR, 0, None, a, a, math.inf),
                   Region(sp.window, DISK, 0, None, a, 0.0, a)]
    return InterfaceSystem(sp, [a], regions, {"barrier_half": N, "window_half": N})


def strip_system(geom: geo.StripGeometry, K, N, J=None) -> InterfaceSystem:
    """Interfaces at every window edge of a strip geometry."""
    xs = []
    for w in geom.windows:
        xs += [w.left, w.right]
    n_if = len(xs)
    if geom.symmetric:
        sp = HalfTraceSpace(geom.d, K)
        barrier = [sp.barrier]
        window = sp.window
        n_modes = {"barrier_half": N, "window_half": N}
    else:
        if J is None:
            J = K // 2
        sp = FullTraceSpace(geom.d1, geom.d2, K, K, J, J)
        barrier = [sp.upper, sp.lower]
        window = sp.window
        n_modes = {"window_full": N,
                   "upper": math.ceil(N * geom.d1 / geom.D),
                   "lower": math.ceil(N * geom.d2 / geom.D)}
    regions = []
    for fam in barrier:
        regions.append(Region(fam, TAIL, 0, None, math.inf, -math.inf, xs[0]))
    for k, w in enumerate(geom.windows):
        i = 2 * k
        regions.append(Region(window, FINITE, i, i + 1, 2 * w.half_width, w.left, w.right))
        if i + 2 < n_if:
            for fam in barrier:
                regions.append(Region(fam, FINITE, i + 1, i + 2, xs[i + 2] - xs[i + 1],
                                      xs[i + 1], xs[i + 2]))
    for fam in barrier:
        regions.append(Region(fam, TAIL, n_if - 1, None, math.inf, xs[-1], math.inf))
    return InterfaceSystem(sp, xs, regions, n_modes)


def _pole_guard_ok(system, d) -> bool:
    """Propagating window modes stay below their first trig/Bessel pole."""
    from .. import specfun
    for reg in system.regions:
        idx, _, delta = system.mode_data(reg.family)
        qmax = math.sqrt(max(-float(np.min(delta)), 0.0))
        if reg.kind == FINITE and qmax * reg.length >= math.pi:
            return False
        if reg.kind == HALF_EVEN and qmax * reg.length >= 0.5 * math.pi:
            return False
        if reg.kind == HALF_ODD and qmax * reg.length >= math.pi:
            return False
        if reg.kind == DISK and qmax * reg.length >= specfun.j0_zero(1):
            return False
    return True


# -------------------------------------------------------------- root search

def _lam(system, s):
    T = system.reducer()
    lam, y = smallest_eigenpair(T.T @ system.matrix(s) @ T)
    return lam, T @ y


def _secular(system, s):
    shift = 0.0
    for attempt in range(4):
        try:
            return _lam(system, s * (1.0 + shift))[0]
        except PoleGuard:
            shift = (attempt + 1) * 1e-10
    raise PoleGuard(f"persistent pole at s={s}")


def locate_root(system, d, D, floor_rel=FLOOR_REL, ratio=4.0):
    """Largest s with a singular A; returns (s, bracket (lo, hi))."""
    top = math.pi / d
    s_max = math.sqrt(max(top * top - (math.pi / D) ** 2, 0.0)) * (1.0 - 1e-9)
    s_min = math.sqrt(floor_rel) * top
    f = lambda s: _secular(system, s)
    hi = s_max
    f_hi = f(hi)
    if f_hi <= 0:
        raise IllConditioned("secular function is not positive at the lower spectral edge")
    s = hi
    while True:
        s_next = max(s / ratio, s_min)
        val = f(s_next)
        if val <= 0:
            lo = s_next
            break
        if s_next <= s_min:
            if _secular(system, 0.0) < 0:
                raise BelowNumericalFloor(
                    f"gap magnitude below {floor_rel:g} (pi/d)^2; no sign change above the floor")
            raise NoBoundState("secular function stays positive up to the threshold")
        s = s_next
    hi = s
    if val == 0.0:
        return lo, (lo, lo)
    root = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    return root, (lo, hi)


def _certify(system, root):
    """Root uncertainty in s.

    The larger of the tightest sign-certified bracket and the rounding band
    3 sigma / |f'|, where sigma is the scatter of f about its secant over
    root * (1 +- 3e-9).
    """
    width = math.nan
    for rel in (1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6):
        lo, hi = root * (1 - rel), root * (1 + rel)
        try:
            if _secular(system, lo) <= 0 <= _secular(system, hi):
                width = hi - lo
                break
        except PoleGuard:
            continue
    try:
        xs = root * (1.0 + 1e-9 * np.arange(-3, 4))
        fs = np.array([_secular(system, x) for x in xs])
    except PoleGuard:
        return width
    slope, icpt = np.polyfit(xs - root, fs, 1)
    sigma = float(np.std(fs - (slope * (xs - root) + icpt)))
    if slope != 0:
        band = 6.0 * sigma / abs(slope)
        width = band if not math.isfinite(width) else max(width, band)
    return width


def _solve_system(system, d, D, opts: SolverOptions, dim):
    if not _pole_guard_ok(system, d):
        log.warning("window wider than the monotonicity guard; relying on the downward scan")
    s, _ = locate_root(system, d, D, opts.floor_rel, opts.scan_ratio)
    width_s = _certify(system, s)
    lam, v = _lam(system, s)
    A = system.matrix(s)
    residual = abs(lam) / max(np.linalg.norm(A, 2), 1e-300)
    top = (math.pi / d) ** 2
    eps = top - s * s
    width_eps = 2.0 * s * width_s if math.isfinite(width_s) else math.nan
    return eps, -s * s, s, residual, width_eps, v


def _region_coefficients(system, s, v):
    nb = system.space.size
    out = []
    for reg in system.regions:
        idx, P, delta = system.mode_data(reg.family)
        lam = delta + s * s
        k = np.sqrt(np.abs(lam))
        tl = P @ v[reg.left * nb:(reg.left + 1) * nb] if reg.left is not None else None
        tr = P @ v[reg.right * nb:(reg.right + 1) * nb] if reg.right is not None else None
        out.append(RegionCoefficients(reg.family.name, reg.kind, reg.x_left, reg.x_right,
                                      k, lam >= 0, tl, tr))
    return out


def _truncation(system):
    """(window modes, barrier modes) actually summed, largest family of each."""
    names = {reg.family.name for reg in system.regions}
    win = [system.modes_used(n) for n in names if n.startswith("window")]
    bar = [system.modes_used(n) for n in names if not n.startswith("window")]
    return max(win), max(bar)


def _converge(build, d, D, opts: SolverOptions, dim, describe, tol=None):
    tol = opts.tol_rel if tol is None else tol
    if opts.fixed is not None:
        schedule = [tuple(opts.fixed)]
    else:
        schedule = []
        K, N = opts.k_start, opts.n_start
        while N <= opts.mode_cap:
            schedule.append((K, N))
            K, N = 2 * K, 2 * N
    history = []
    prev = None
    prev_width = 0.0
    for K, N in schedule:
        system = build(K, N)
        eps, gap, s, residual, width, v = _solve_system(system, d, D, opts, dim)
        history.append((K, N, gap))
        log.debug("%s K=%d N=%d gap=%.16e", describe, K, N, gap)
        # changes inside the certified root brackets are rounding noise
        noise = (width if math.isfinite(width) else 0.0) + prev_width
        done = opts.fixed is not None or (
            prev is not None and abs(gap - prev) < tol * abs(gap) + noise)
        if done:
            return BoundStateResult(
                epsilon=eps, gap=gap, mode_coefficients=_region_coefficients(system, s, v),
                secular_residual=residual, truncation=_truncation(system), bracket_width=width,
                interface_functions=K, history=history, d=d, dim=dim, system=system,
                trace=v, s=s)
        prev = gap
        prev_width = width if math.isfinite(width) else 0.0
    raise ConvergenceFailure(
        f"{describe}: gap not converged to tol_rel={tol:g} within mode cap "
        f"{opts.mode_cap}; history={[(k, n, g) for k, n, g in history]}")


# --------------------------------------------------------------- front ends

def find_ground_state_half(d: float, a: float, solver: SolverOptions | None = None) -> BoundStateResult:
    """Ground state of the symmetric strip pair with one window of half-width a."""
    opts = solver or SolverOptions()
    if not (d > 0 and a > 0):
        raise geo.NonPositiveWidth(0, "d and a must be positive")
    if opts.method == "classic":
        return _classic_half(d, a, opts)
    return _converge(lambda K, N: half_system(d, a, K, N, opts.parity, 2), d, 2 * d, opts, 2,
                     f"half(d={d:g}, a={a:g})")


def find_ground_state_strip(geom: geo.StripGeometry, solver: SolverOptions | None = None) -> BoundStateResult:
    """Lowest eigenvalue for an arbitrary window list (symmetric or not)."""
    opts = solver or SolverOptions()
    geo.validate(geom)
    if not geom.windows:
        raise geo.NonPositiveWidth(0, "a window list is required")
    tol = opts.tol_rel if geom.symmetric else max(opts.tol_rel, opts.tol_rel_asym)
    return _converge(lambda K, N: strip_system(geom, K, N), geom.d, geom.D, opts, 2,
                     f"strip(d1={geom.d1:g}, d2={geom.d2:g}, n={len(geom.windows)})", tol)


def find_ground_state_layer(d: float, a: float, solver: SolverOptions | None = None,
                            geom: geo.LayerGeometry | None = None) -> BoundStateResult:
    """Ground state of the symmetric layer pair joined through a disk of radius a."""
    opts = solver or SolverOptions()
    if geom is not None:
        geo.validate(geom)
        if not geom.symmetric:
            raise Unsupported("the layer solver handles the symmetric case d1 = d2 only")
        d, a = geom.d1, geom.a
    if not (d > 0 and a > 0):
        raise geo.NonPositiveWidth(0, "d and a must be positive")
    if opts.method == "classic":
        return _classic_half(d, a, opts, dim=3)
    return _converge(lambda K, N: half_system(d, a, K, N, "even", 3), d, 2 * d, opts, 3,
                     f"layer(d={d:g}, a={a:g})")


# ----------------------------------------------------------- classic route

def _classic_half(d, a, opts: SolverOptions, dim=2):
    """Root of the classic Fourier-Fourier secular matrix (slow convergence)."""
    top = (math.pi / d) ** 2
    s_max = top ** 0.5 * math.sqrt(0.75) * (1 - 1e-9)
    s_min = math.sqrt(opts.floor_rel) * top ** 0.5

    def run(M):
        f = lambda s: classic.secular_lambda_min(top - s * s, d, a, (M, M), opts.parity, dim)
        s = s_max
        while True:
            nxt = max(s / opts.scan_ratio, s_min)
            if f(nxt) <= 0:
                break
            if nxt <= s_min:
                raise BelowNumericalFloor("no sign change above the numerical floor")
            s = nxt
        root = brentq(f, nxt, s, xtol=1e-300, rtol=1e-15)
        return root

    Ms = [tuple(opts.fixed)[1]] if opts.fixed is not None else \
        [opts.n_start * 2 ** j for j in range(20) if opts.n_start * 2 ** j <= opts.mode_cap]
    prev = None
    history = []
    for M in Ms:
        s = run(M)
        gap = -s * s
        history.append((0, M, gap))
        if opts.fixed is not None or (prev is not None and abs(gap - prev) < opts.tol_rel * abs(gap)):
            return BoundStateResult(top - s * s, gap, [], 0.0, (M, M), math.nan, 0, history,
                                    d=d, dim=dim, s=s)
        prev = gap
    raise ConvergenceFailure(f"classic mode matching not converged at M={Ms[-1]}; history={history}")
