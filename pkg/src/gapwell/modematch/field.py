"""Field reconstruction, matching diagnostics and the assembled multi-window system.

Inside every region the ground state is a sum of transverse modes times the
exact longitudinal solution fixed by the interface traces, so the field is
available everywhere from a :class:`BoundStateResult`.  On an interface the
trace itself is returned (it is the common limit of both sides).
"""

from __future__ import annotations

import math

import numpy as np

from .. import geometry as geo
from .. import specfun
from ..errors import DomainError, OutOfDomain
from ..linalg import SymMatrix, det_sign
from .edge import (DISK, EXTERIOR, FINITE, HALF_EVEN, HALF_ODD, TAIL,
                   HalfTraceSpace)
from .modes import ModeBasis

_ON_LINE = 1e-12


def _family_modes(system, fam):
    sp = system.space
    if fam.name == "barrier_half":
        return ModeBasis("dirichlet_dirichlet", sp.d)
    if fam.name == "window_half":
        return ModeBasis("neumann_dirichlet", sp.d)
    if fam.name == "upper":
        return ModeBasis("dirichlet_dirichlet", sp.d1, 0.0)
    if fam.name == "lower":
        return ModeBasis("dirichlet_dirichlet", sp.d2, -sp.d2)
    return ModeBasis("full_interval", sp.D, -sp.d2)


def _ratio_sinh(k, u, L):
    """sinh(k u)/sinh(k L) for 0 <= u <= L, overflow free (u/L at k = 0)."""
    out = np.empty_like(k)
    pos = k * L > 1e-12
    kp = k[pos]
    out[pos] = np.exp(-kp * (L - u)) * (-np.expm1(-2 * kp * u)) / (-np.expm1(-2 * kp * L))
    out[~pos] = u / L
    return out


def _longitudinal(kind, k, ev, x, reg):
    """Mode factors g_n(x) normalized to 1 on the adjacent interface(s).

    Returns (g_left, g_right): factors multiplying the left and right traces.
    """
    if kind == TAIL:
        dist = abs(x - (reg.x_left if math.isfinite(reg.x_left) else reg.x_right))
        return np.exp(-k * dist), None
    if kind == EXTERIOR:
        r, a = x, reg.length
        g = specfun.bessel_scaled("K0", k * r) / specfun.bessel_scaled("K0", k * a) \
            * np.exp(-k * (r - a))
        return g, None
    if kind == DISK:
        r, a = x, reg.length
        g = np.empty_like(k)
        ke = k[ev]
        g[ev] = specfun.bessel_scaled("I0", ke * r) / specfun.bessel_scaled("I0", ke * a) \
            * np.exp(ke * (r - a))
        kq = k[~ev]
        if kq.size:
            g[~ev] = specfun.bessel("J0", kq * r) / specfun.bessel("J0", kq * a)
        return g, None
    if kind in (HALF_EVEN, HALF_ODD):
        a = reg.length
        g = np.empty_like(k)
        ke = k[ev]
        if kind == HALF_EVEN:
            g[ev] = np.exp(-ke * (a - x)) * (1 + np.exp(-2 * ke * x)) / (1 + np.exp(-2 * ke * a))
            g[~ev] = np.cos(k[~ev] * x) / np.cos(k[~ev] * a)
        else:
            g[ev] = _ratio_sinh(ke, x, a)
            g[~ev] = np.sin(k[~ev] * x) / np.sin(k[~ev] * a)
        return g, None
    if kind == FINITE:
        L = reg.length
        u = x - reg.x_left
        gl = np.empty_like(k)
        gr = np.empty_like(k)
        gl[ev] = _ratio_sinh(k[ev], L - u, L)
        gr[ev] = _ratio_sinh(k[ev], u, L)
        kq = k[~ev]
        gl[~ev] = np.sin(kq * (L - u)) / np.sin(kq * L)
        gr[~ev] = np.sin(kq * u) / np.sin(kq * L)
        return gl, gr
    raise ValueError(f"unknown region kind {kind!r}")


def _bounds(result):
    sp = result.system.space
    if isinstance(sp, HalfTraceSpace):
        return -sp.d, sp.d
    return -sp.d2, sp.d1


def _windows_of(system):
    """(left, right) extents of the windows in the coordinates of the system."""
    out = []
    for reg in system.regions:
        if reg.kind in (FINITE, HALF_EVEN, HALF_ODD, DISK) and reg.family.name.startswith("window"):
            if reg.kind == FINITE:
                out.append((reg.x_left, reg.x_right))
            else:
                out.append((-reg.length, reg.length))
    return out


class _FieldEvaluator:
    def __init__(self, result):
        if result.system is None or result.trace is None:
            raise ValueError("result carries no interface system (classic route?)")
        self.r = result
        self.sys = result.system
        self.nb = self.sys.space.size
        self.half = isinstance(self.sys.space, HalfTraceSpace)
        self.reduced = any(reg.kind in (HALF_EVEN, HALF_ODD, DISK, EXTERIOR)
                           for reg in self.sys.regions)
        self.odd = any(reg.kind == HALF_ODD for reg in self.sys.regions)
        self.radial = any(reg.kind in (DISK, EXTERIOR) for reg in self.sys.regions)
        v = np.asarray(result.trace, dtype=float)
        probe = self.sys.space.basis_values(np.array([0.5 * self.sys.space.d]))[0]
        ref = probe @ v[:self.nb]
        self.v = -v if ref < 0 else v
        self.windows = _windows_of(self.sys)

    def trace(self, i, y):
        return float(self.sys.space.basis_values(np.array([y]))[0] @ self.v[i * self.nb:(i + 1) * self.nb])

    def __call__(self, x, y):
        lo, hi = _bounds(self.r)
        if not (lo - _ON_LINE <= y <= hi + _ON_LINE) or not math.isfinite(x):
            raise OutOfDomain(f"point ({x}, {y}) lies outside the guide")
        if self.radial and x < 0:
            raise OutOfDomain("radial coordinate must be >= 0")
        sign = 1.0
        if self.reduced:
            if x < 0:
                x = -x
                sign = -1.0 if self.odd else 1.0
        if self.half:
            y = abs(y)
        if y in (lo, hi) or abs(y - hi) < _ON_LINE or abs(y - lo) < _ON_LINE:
            return 0.0
        in_window = any(wl <= x <= wr for wl, wr in self.windows)
        if abs(y) < _ON_LINE and not in_window:
            return 0.0
        for i, xi in enumerate(self.sys.interfaces):
            if abs(x - xi) <= _ON_LINE * max(1.0, abs(xi)):
                return sign * self.trace(i, y)
        reg = self._region(x, y)
        idx, P, delta = self.sys.mode_data(reg.family)
        lam = delta + self.r.s ** 2
        ev = lam >= 0
        k = np.sqrt(np.abs(lam))
        phi = _family_modes(self.sys, reg.family)(idx, y)
        gl, gr = _longitudinal(reg.kind, k, ev, x, reg)
        nb = self.nb
        tl = P @ self.v[reg.left * nb:(reg.left + 1) * nb]
        val = np.dot(phi * gl, tl)
        if gr is not None:
            tr = P @ self.v[reg.right * nb:(reg.right + 1) * nb]
            val += np.dot(phi * gr, tr)
        return sign * float(val)

    def _region(self, x, y):
        for reg in self.sys.regions:
            name = reg.family.name
            if reg.kind in (HALF_EVEN, HALF_ODD, DISK):
                lo_x, hi_x = 0.0, reg.length
            elif reg.kind == EXTERIOR:
                lo_x, hi_x = reg.length, math.inf
            else:
                lo_x, hi_x = reg.x_left, reg.x_right
            if not (lo_x <= x <= hi_x):
                continue
            if name == "upper" and y < 0 or name == "lower" and y > 0:
                continue
            return reg
        raise OutOfDomain(f"no region contains x={x}")


def reconstruct_field(result, point, geom=None) -> float:
    """Ground-state field at ``point``.

    Parameters
    ----------
    result : BoundStateResult
        Output of one of the edge-method solvers.
    point : (x, y) or (r, y)
        Longitudinal (or radial) coordinate and height.  Half-problem results
        are centered on the window; strip results use the geometry's own x.
    geom : StripGeometry or LayerGeometry, optional
        When given, the point is checked against it.

    The overall sign is fixed so that the trace is positive at mid-height
    above the first interface; the normalization is arbitrary.
    """
    x, y = (float(c) for c in point)
    if geom is not None:
        if isinstance(geom, geo.StripGeometry) and not (-geom.d2 <= y <= geom.d1):
            raise OutOfDomain(f"height {y} outside [-d2, d1]")
        if isinstance(geom, geo.LayerGeometry) and (x < 0 or not (-geom.d2 <= y <= geom.d1)):
            raise OutOfDomain(f"point ({x}, {y}) outside the layer pair")
    return _FieldEvaluator(result)(x, y)


def field_on_grid(result, xs, ys) -> np.ndarray:
    """Field values on the tensor grid xs x ys; shape (len(xs), len(ys))."""
    ev = _FieldEvaluator(result)
    return np.array([[ev(x, y) for y in ys] for x in xs])


def matching_residual(result) -> float:
    """Weak normal-derivative mismatch at the interfaces, relative.

    The value is continuous by construction (both sides expand the same
    trace); the derivative jump tested against the trace basis is
    ``A(eps) v``, reported as ``|A v| / (|A| |v|)``.
    """
    sys = result.system
    A = sys.matrix(result.s)
    v = np.asarray(result.trace, dtype=float)
    return float(np.linalg.norm(A @ v) / (np.linalg.norm(A, 2) * np.linalg.norm(v)))


def value_mismatch(result, interface: int = 0, n_points: int = 33, offset: float = 0.0) -> float:
    """Relative RMS gap between the truncated modal series of the two regions
    adjacent to an interface, on interior heights.

    With ``offset > 0`` the series are evaluated at x_i -+ offset, where they
    converge exponentially; the mismatch is then O(offset).
    """
    ev = _FieldEvaluator(result)
    sys = ev.sys
    xi = sys.interfaces[interface]
    lo, hi = _bounds(result)
    ys = np.linspace(0.0 if ev.half else lo, hi, n_points + 2)[1:-1]
    ys = ys[np.abs(ys) > 1e-9]
    nb = ev.nb

    def side(reg, y, left):
        n = reg.family.name
        if n == "upper" and y < 0 or n == "lower" and y > 0:
            return False
        return reg.x_right == xi if left else reg.x_left == xi

    def series(reg, x, y):
        idx, P, delta = sys.mode_data(reg.family)
        lam = delta + result.s ** 2
        k = np.sqrt(np.abs(lam))
        phi = _family_modes(sys, reg.family)(idx, y)
        gl, gr = _longitudinal(reg.kind, k, lam >= 0, x, reg)
        val = np.dot(phi * gl, P @ ev.v[reg.left * nb:(reg.left + 1) * nb])
        if gr is not None:
            val += np.dot(phi * gr, P @ ev.v[reg.right * nb:(reg.right + 1) * nb])
        return val

    diffs, refs = [], []
    for y in ys:
        lr = next((r for r in sys.regions if side(r, y, True)), None)
        rr = next((r for r in sys.regions if side(r, y, False)), None)
        if lr is None or rr is None:
            raise ValueError("interface has no region on both sides")
        diffs.append(series(lr, xi - offset, y) - series(rr, xi + offset, y))
        refs.append(ev.trace(interface, y))
    diffs, refs = np.array(diffs), np.array(refs)
    return float(np.sqrt(np.mean(diffs ** 2)) / np.sqrt(np.mean(refs ** 2)))


def assemble_multiwindow(eps: float, geom: geo.StripGeometry, trunc=(16, 200)):
    """Interface system of a multi-window strip at energy ``eps``.

    Parameters
    ----------
    eps : float
        Energy inside the spectral interval.
    geom : StripGeometry
    trunc : (K, N)
        Edge functions per wall side and transverse modes per family.

    Returns
    -------
    matrix : SymMatrix
        The interface matrix in the numerically independent trace directions;
        it is singular exactly at eigenvalues.
    meta : dict
        ``det_sign``, ``log_abs_det``, ``interfaces`` (x positions),
        ``block_size`` (trace functions per interface), ``rank``,
        ``regions`` (kind, family, x_left, x_right) and ``log_scale``.  All
        region weights are bounded ratios of exponentials, so no scaling
        ledger is needed and ``log_scale`` is 0.
    """
    from .solver import strip_system
    geo.validate(geom)
    if not geom.windows:
        raise geo.NonPositiveWidth(0, "a window list is required")
    top = (math.pi / geom.d) ** 2
    iv = geo.spectral_interval(geom)
    if not (iv.lower < eps < iv.upper):
        raise DomainError(f"eps={eps} outside the open spectral interval ({iv.lower}, {iv.upper})")
    K, N = trunc
    system = strip_system(geom, K, N)
    s = math.sqrt(top - eps)
    T = system.reducer()
    M = SymMatrix(T.T @ system.matrix(s) @ T)
    sign, logdet = det_sign(M)
    meta = {
        "det_sign": sign, "log_abs_det": logdet, "interfaces": list(system.interfaces),
        "block_size": system.space.size, "rank": T.shape[1],
        "regions": [(r.kind, r.family.name, r.x_left, r.x_right) for r in system.regions],
        "log_scale": 0.0,
    }
    return M, meta
