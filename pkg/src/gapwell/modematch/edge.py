"""Edge-conditioned interface Galerkin form of mode matching.

The unknown is the trace of the eigenfunction on each vertical interface
through a window edge.  Near the edge the trace behaves like the square root
of the distance to the wall, so it is expanded in

    b_k(y) = (2/sqrt(pi w)) sqrt(1 - t**2) U_{2k+1}(t),   t = 1 - |y|/w,

k = 0..K-1, with U the Chebyshev polynomials of the second kind and w the
width of the strip on that side of the wall.  Every region between two
interfaces is solved exactly mode by mode, which turns the matching into the
symmetric K x K (per interface) matrix

    A(eps) = sum over regions of  P^T diag(DtN weights) P ,

where P holds the projections of the b_k on the transverse modes.  The
projections are closed form:

    int_0^1 sqrt(1 - t**2) U_{2k+1}(t) sin(xi t) dt
        = (pi/2) (-1)**k (2k+2) J_{2k+2}(xi) / xi .

A bound state is an energy where A(eps) is singular.  The DtN weights grow
linearly with the mode index, so each weight is split into an energy-free
part (pi * index / width) and a remainder that decays like 1/index.  The
energy-free sums over all modes form the "static" matrix, computed once;
only the remainders are summed at run time.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .. import specfun
from ..errors import PoleGuard
from .modes import delta_dd, delta_nd, overlap_asym

POLE_TOL = 1e-12
DEFLATE_REL = 1e-12
_SQRT8PI = 2.0 * math.sqrt(2.0 / math.pi)


# ------------------------------------------------------------- projections

def edge_coefficients(xi, K: int) -> np.ndarray:
    """(pi/2)(-1)^k (2k+2) J_{2k+2}(xi)/xi for k < K; shape (len(xi), K)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    J = specfun.jn_table(xi, 2 * K)
    k = np.arange(K)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    return (0.5 * math.pi) * sign * (2 * k + 2) * J[:, 2 * k + 2] / xi[:, None]


def edge_projections(xi, K: int) -> np.ndarray:
    """Normalized projections 2 sqrt(2/pi) c_k(xi); mode-dependent signs excluded."""
    return _SQRT8PI * edge_coefficients(xi, K)


def edge_basis(t, K: int) -> np.ndarray:
    """sqrt(1 - t^2) U_{2k+1}(t) on t in [0, 1]; shape (len(t), K)."""
    t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), -1.0, 1.0)
    theta = np.arccos(t)
    k = np.arange(K)
    return np.sin((2 * k[None, :] + 2) * theta[:, None])


@lru_cache(maxsize=64)
def edge_gram(K: int) -> np.ndarray:
    """Gram matrix of the normalized b_k (independent of the width)."""
    a = 2 * np.arange(K) + 2
    dm = (a[:, None] - a[None, :]) ** 2
    dp = (a[:, None] + a[None, :]) ** 2
    G = (2.0 / math.pi) * (1.0 / (1.0 - dm) - 1.0 / (1.0 - dp))
    G.setflags(write=False)
    return G


@lru_cache(maxsize=64)
def static_half(K: int) -> np.ndarray:
    """sum_j xi_j p_j p_j^T over xi_j = pi j/2 (DD and ND modes together).

    Closed form: the combined modes are the Dirichlet sines of the doubled
    interval, whose square-root Laplacian has the kernel -1/(4 sin^2(pi(t-s)/4))
    in the odd extension to [-1, 1].  Splitting off the hypersingular part
    1/z^2, which the U-weighted functions diagonalize, leaves a smooth kernel
    integrated by Gauss-Chebyshev quadrature.
    """
    Q = 2 * K + 64
    i = np.arange(1, Q + 1)
    th = i * math.pi / (Q + 1)
    t = np.cos(th)
    w = math.pi / (Q + 1) * np.sin(th) ** 2
    k = np.arange(K)
    U = np.sin((2 * k[:, None] + 2) * th[None, :]) / np.sin(th)[None, :]
    z = 0.25 * math.pi * (t[:, None] - t[None, :])
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    R = np.where(small, 1.0 / 3.0 + z * z / 15.0, 1.0 / np.sin(zs) ** 2 - 1.0 / zs ** 2)
    Uw = U * w
    S = np.diag(4.0 * (k + 1.0)) - 0.25 * (Uw @ R @ Uw.T)
    S = 0.5 * (S + S.T)
    S.setflags(write=False)
    return S


def richardson(values, exponents, ratio=2.0):
    """Extrapolate partial sums S(N_j), N_j = N_0 ratio^j, with tail N^-p_i."""
    A = [np.asarray(v, dtype=float) for v in values]
    for p in exponents[: len(A) - 1]:
        f = ratio ** p
        A = [(f * A[i + 1] - A[i]) / (f - 1.0) for i in range(len(A) - 1)]
    return A[-1]


def _partial_sums(fn, n_levels, chunk=8192):
    """Partial sums of fn(n_array) (returning a matrix) at the given levels."""
    out = []
    acc = None
    start = 1
    for N in n_levels:
        while start <= N:
            stop = min(N, start + chunk - 1)
            part = fn(np.arange(start, stop + 1, dtype=float))
            acc = part if acc is None else acc + part
            start = stop + 1
        out.append(acc.copy())
    return out


@lru_cache(maxsize=32)
def static_dd(K: int) -> np.ndarray:
    """sum_n (pi n) p_n p_n^T over DD modes only (universal, divide by width).

    Brute-force partial sums with Richardson extrapolation; the summand is
    non-oscillating with an expansion in integer powers of 1/n.
    """
    base = max(4096, 16 * K * K)
    levels = [base * 2 ** j for j in range(4)]

    def fn(n):
        P = edge_projections(math.pi * n, K)
        return P.T @ ((math.pi * n)[:, None] * P)

    S = richardson(_partial_sums(fn, levels), [1, 2, 3])
    S = 0.5 * (S + S.T)
    S.setflags(write=False)
    return S


def static_half_bruteforce(K: int, levels=None) -> np.ndarray:
    """Direct-summation route to :func:`static_half` (used as a cross-check)."""
    base = max(4096, 16 * K * K)
    levels = levels or [base * 2 ** j for j in range(4)]

    def fn(j):
        xi = 0.5 * math.pi * j
        P = edge_projections(xi, K)
        return P.T @ (xi[:, None] * P)

    return richardson(_partial_sums(fn, levels), [1, 2, 3])


# --------------------------------------------------------------- families

@dataclass(frozen=True)
class Family:
    """A transverse mode family used by some region of the guide.

    name: barrier_half, window_half (symmetric half problem), upper, lower
    (substrips of the asymmetric guide) or window_full (full cross-section).
    """

    name: str
    width: float
    offset: float = 0.0   # 0.5 for ND modes

    def static_weight(self, idx):
        return math.pi * (idx - self.offset) / self.width


class TraceSpace:
    """Interface trace basis and its projections on the mode families."""

    size: int
    d: float

    def projections(self, fam: Family, n_max: int) -> np.ndarray:
        raise NotImplementedError

    def delta(self, fam: Family, idx) -> np.ndarray:
        raise NotImplementedError

    def static_pair(self) -> np.ndarray:
        """Static matrix of one barrier side plus one window side."""
        raise NotImplementedError

    def gram(self) -> np.ndarray:
        raise NotImplementedError

    def metric(self) -> np.ndarray:
        """Positive metric used to reduce the interface pencil (L2 Gram)."""
        return self.gram()


class HalfTraceSpace(TraceSpace):
    """Trace space of the symmetric half problem on [0, d]."""

    def __init__(self, d: float, K: int):
        self.d = float(d)
        self.K = int(K)
        self.size = self.K
        self.barrier = Family("barrier_half", self.d)
        self.window = Family("window_half", self.d, 0.5)

    def projections(self, fam, n_max):
        n = np.arange(1, n_max + 1, dtype=float)
        sign = np.where(n % 2 == 1, 1.0, -1.0)[:, None]
        xi = math.pi * (n - fam.offset)
        return sign * edge_projections(xi, self.K)

    def delta(self, fam, idx):
        if fam.name == "barrier_half":
            return delta_dd(idx, self.d, self.d)
        return delta_nd(idx, self.d)

    def static_pair(self):
        return static_half(self.K) / self.d

    def gram(self):
        return edge_gram(self.K)

    def basis_values(self, y):
        """Trace basis at heights y in [0, d]; shape (len(y), K)."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        vals = edge_basis(1.0 - y / self.d, self.K) * (2.0 / math.sqrt(math.pi * self.d))
        return np.where(((y >= 0) & (y <= self.d))[:, None], vals, 0.0)


def _ratio_period(rho: float, max_den: int = 64):
    """Period in m of sin(pi m rho) products if rho is a small rational."""
    fr = Fraction(rho).limit_denominator(max_den)
    if abs(float(fr) - rho) < 1e-13 * max(1.0, rho):
        return 2 * fr.denominator
    return None


class FullTraceSpace(TraceSpace):
    """Trace space on the full cross-section [-d2, d1] of the asymmetric guide.

    Blocks: b+ (K1 edge functions above the wall), b- (K2 below), and J1, J2
    substrip sines that carry the regular (odd power) part of the trace at the
    window edge.  The regular part vanishes by symmetry when d1 = d2.
    """

    def __init__(self, d1, d2, K1, K2, J1=0, J2=0):
        self.d1, self.d2 = float(d1), float(d2)
        self.D = self.d1 + self.d2
        self.d = max(self.d1, self.d2)
        self.K1, self.K2, self.J1, self.J2 = int(K1), int(K2), int(J1), int(J2)
        self.size = self.K1 + self.K2 + self.J1 + self.J2
        self.upper = Family("upper", self.d1)
        self.lower = Family("lower", self.d2)
        self.window = Family("window_full", self.D)
        self._slices = {}
        o = 0
        for name, n in (("b+", self.K1), ("b-", self.K2), ("e+", self.J1), ("e-", self.J2)):
            self._slices[name] = slice(o, o + n)
            o += n
        self._lock = threading.Lock()
        self._static = None

    def block(self, name):
        return self._slices[name]

    def _geom(self):
        from ..geometry import StripGeometry
        return StripGeometry(self.d1, self.d2, [])

    def projections(self, fam, n_max, start=1):
        n = np.arange(start, start + n_max, dtype=float)
        P = np.zeros((n.size, self.size))
        sl = self._slices
        if fam.name in ("upper", "lower"):
            kb, Jb = (self.K1, self.J1) if fam.name == "upper" else (self.K2, self.J2)
            bs, es = (sl["b+"], sl["e+"]) if fam.name == "upper" else (sl["b-"], sl["e-"])
            proj = edge_projections(math.pi * n, kb)
            if fam.name == "upper":
                proj = proj * np.where(n % 2 == 1, 1.0, -1.0)[:, None]
            P[:, bs] = proj
            for j in range(Jb):
                hit = n == j + 1
                P[hit, es.start + j] = 1.0
            return P
        r1, r2 = self.d1 / self.D, self.d2 / self.D
        sign = np.where(n % 2 == 1, 1.0, -1.0)[:, None]
        P[:, sl["b+"]] = math.sqrt(r1) * sign * edge_projections(math.pi * n * r1, self.K1)
        P[:, sl["b-"]] = math.sqrt(r2) * edge_projections(math.pi * n * r2, self.K2)
        g = self._geom()
        if self.J1:
            j = np.arange(1, self.J1 + 1)
            P[:, sl["e+"]] = overlap_asym("upper", j[None, :], n[:, None], g)
        if self.J2:
            j = np.arange(1, self.J2 + 1)
            P[:, sl["e-"]] = overlap_asym("lower", j[None, :], n[:, None], g)
        return P

    def delta(self, fam, idx):
        if fam.name == "upper":
            return delta_dd(idx, self.d1, self.d)
        if fam.name == "lower":
            return delta_dd(idx, self.d2, self.d)
        return delta_dd(idx, self.D, self.d)

    def _substrip_static(self, fam, K, J, bs, es):
        S = np.zeros((self.size, self.size))
        S[bs, bs] = static_dd(K) / fam.width
        if J:
            # the regular functions are substrip modes themselves: exact sums
            j = np.arange(1, J + 1, dtype=float)
            Pj = self.projections(fam, J)[:, bs]
            wj = math.pi * j / fam.width
            S[es, es] = np.diag(wj)
            S[es, bs] = wj[:, None] * Pj
            S[bs, es] = S[es, bs].T
        return S

    def _window_static(self):
        per = _ratio_period(self.d1 / self.D)
        base = max(8192, 16 * max(self.K1, self.K2) ** 2)
        if per is not None:
            base = per * math.ceil(base / per)
            levels = [base * 2 ** j for j in range(4)]
        else:
            levels = [base * 2 ** j for j in range(5)][-2:]
        fam = self.window

        def fn(n):
            P = self.projections(fam, n.size, start=int(n[0]))
            return P.T @ ((math.pi * n / self.D)[:, None] * P)

        sums = _partial_sums(fn, levels)
        sl = self._slices
        nb = slice(0, self.K1 + self.K2)
        ne = slice(self.K1 + self.K2, self.size)
        if per is None:
            # single step, leading tail only (reduced accuracy)
            S = np.empty_like(sums[-1])
            S[nb, nb] = richardson([s[nb, nb] for s in sums], [1])
            S[nb, ne] = richardson([s[nb, ne] for s in sums], [1.5])
            S[ne, nb] = S[nb, ne].T
            S[ne, ne] = richardson([s[ne, ne] for s in sums], [2])
            return S
        S = np.empty_like(sums[-1])
        S[nb, nb] = richardson([s[nb, nb] for s in sums], [1, 2, 3])
        S[nb, ne] = richardson([s[nb, ne] for s in sums], [1.5, 2.5, 3.5])
        S[ne, nb] = S[nb, ne].T
        S[ne, ne] = richardson([s[ne, ne] for s in sums], [2, 3, 4])
        del sl
        return S

    def static_pair(self):
        with self._lock:
            if self._static is None:
                sl = self._slices
                S = self._substrip_static(self.upper, self.K1, self.J1, sl["b+"], sl["e+"])
                S = S + self._substrip_static(self.lower, self.K2, self.J2, sl["b-"], sl["e-"])
                S = S + self._window_static()
                S = 0.5 * (S + S.T)
                S.setflags(write=False)
                self._static = S
            return self._static

    def metric(self):
        # the substrip sines are nearly dependent on the edge functions in L2
        # but keep a resolvable component in the energy norm
        return self.static_pair()

    def gram(self):
        G = np.zeros((self.size, self.size))
        sl = self._slices
        G[sl["b+"], sl["b+"]] = edge_gram(self.K1)
        G[sl["b-"], sl["b-"]] = edge_gram(self.K2)
        if self.J1:
            G[sl["e+"], sl["e+"]] = np.eye(self.J1)
            G[sl["e+"], sl["b+"]] = self.projections(self.upper, self.J1)[:, sl["b+"]]
            G[sl["b+"], sl["e+"]] = G[sl["e+"], sl["b+"]].T
        if self.J2:
            G[sl["e-"], sl["e-"]] = np.eye(self.J2)
            G[sl["e-"], sl["b-"]] = self.projections(self.lower, self.J2)[:, sl["b-"]]
            G[sl["b-"], sl["e-"]] = G[sl["e-"], sl["b-"]].T
        return G

    def basis_values(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        V = np.zeros((y.size, self.size))
        sl = self._slices
        up = (y >= 0) & (y <= self.d1)
        lo = (y <= 0) & (y >= -self.d2)
        V[:, sl["b+"]] = np.where(up[:, None], edge_basis(1.0 - y / self.d1, self.K1), 0.0) \
            * (2.0 / math.sqrt(math.pi * self.d1))
        V[:, sl["b-"]] = np.where(lo[:, None], edge_basis(1.0 + y / self.d2, self.K2), 0.0) \
            * (2.0 / math.sqrt(math.pi * self.d2))
        if self.J1:
            j = np.arange(1, self.J1 + 1)
            V[:, sl["e+"]] = np.where(up[:, None], math.sqrt(2.0 / self.d1)
                                      * np.sin(math.pi * j[None, :] * y[:, None] / self.d1), 0.0)
        if self.J2:
            j = np.arange(1, self.J2 + 1)
            V[:, sl["e-"]] = np.where(lo[:, None], math.sqrt(2.0 / self.d2)
                                      * np.sin(math.pi * j[None, :] * (y[:, None] + self.d2) / self.d2), 0.0)
        return V


# ---------------------------------------------------------------- weights

TAIL = "tail"              # semi-infinite barrier region
FINITE = "finite"          # region between two interfaces
HALF_EVEN = "half_even"    # window half, even about its center
HALF_ODD = "half_odd"      # window half, odd about its center
EXTERIOR = "exterior"      # 3D barrier region r > a
DISK = "disk"              # 3D window region r < a


def _coth(x):
    return 1.0 / np.tanh(x)


def _csch(x):
    e = np.exp(-x)
    return 2.0 * e / (1.0 - e * e)


def segment_weights(kind, delta, s, length):
    """DtN weights of a region for modes with mu - (pi/d)^2 = delta.

    Returns (self_weight, cross_weight); cross is None for one-sided regions.
    The quadratic form of a finite region is
    self * (pL^2 + pR^2) - 2 * cross * pL * pR.
    """
    lam = delta + s * s                  # mu - eps
    ev = lam >= 0
    k = np.sqrt(np.abs(lam))
    w = np.empty_like(lam)
    cross = None
    if kind == TAIL:
        if not np.all(ev):
            raise PoleGuard("propagating mode in a semi-infinite barrier region")
        return k, None
    if kind == EXTERIOR:
        if not np.all(ev):
            raise PoleGuard("propagating mode in the exterior region")
        x = k * length
        pos = x > 0
        w = np.zeros_like(k)
        w[pos] = k[pos] * specfun.k_ratio(x[pos])
        return w, None
    if kind == DISK:
        x = k * length
        w[ev] = np.where(x[ev] > 0, k[ev] * specfun.i_ratio(x[ev]), 0.0)
        if np.any(~ev):
            xq = x[~ev]
            j0 = specfun.bessel("J0", xq)
            if np.any(np.abs(j0) < POLE_TOL):
                raise PoleGuard("J0(q a) vanishes at this energy")
            w[~ev] = -k[~ev] * specfun.bessel("J1", xq) / j0
        return w, None
    x = k * length
    if kind == HALF_EVEN:
        w[ev] = k[ev] * np.tanh(x[ev])
        if np.any(~ev):
            c = np.cos(x[~ev])
            if np.any(np.abs(c) < POLE_TOL):
                raise PoleGuard("cos(q a) vanishes at this energy")
            w[~ev] = -k[~ev] * np.sin(x[~ev]) / c
        return w, None
    if kind == HALF_ODD:
        xe = x[ev]
        w[ev] = np.where(xe > 0, k[ev] * _coth(np.where(xe > 0, xe, 1.0)), 1.0 / length)
        if np.any(~ev):
            sn = np.sin(x[~ev])
            if np.any(np.abs(sn) < POLE_TOL):
                raise PoleGuard("sin(q a) vanishes at this energy")
            w[~ev] = k[~ev] * np.cos(x[~ev]) / sn
        return w, None
    if kind == FINITE:
        cross = np.empty_like(lam)
        xe = x[ev]
        safe = np.where(xe > 0, xe, 1.0)
        w[ev] = np.where(xe > 0, k[ev] * _coth(safe), 1.0 / length)
        cross[ev] = np.where(xe > 0, k[ev] * _csch(safe), 1.0 / length)
        if np.any(~ev):
            xp = x[~ev]
            sn = np.sin(xp)
            if np.any(np.abs(sn) < POLE_TOL):
                raise PoleGuard("sin(q L) vanishes at this energy")
            w[~ev] = k[~ev] * np.cos(xp) / sn
            cross[~ev] = k[~ev] / sn
        return w, cross
    raise ValueError(f"unknown region kind {kind!r}")


def static_offset(kind, length):
    """Energy-free constant in the large-index expansion of a 3D weight."""
    if kind == EXTERIOR:
        return 0.5 / length
    if kind == DISK:
        return -0.5 / length
    return 0.0


# ---------------------------------------------------------------- systems

@dataclass(frozen=True)
class Region:
    """A region of the guide between interfaces.

    left/right are interface indices (None for an open end); length is the
    longitudinal extent (window radius for 3D regions, half-width for
    parity-reduced windows).
    """

    family: Family
    kind: str
    left: int | None
    right: int | None
    length: float
    x_left: float = -math.inf
    x_right: float = math.inf


def exponential_cutoff(kind, length, width, tol=40.0):
    """Mode count beyond which the exponential weight parts are below e^-tol."""
    if kind in (HALF_EVEN, HALF_ODD):
        rate = 2.0 * length
    elif kind == FINITE:
        rate = length
    else:
        return 0
    return int(math.ceil(tol * width / (math.pi * rate))) + 2


def split_weights(kind, delta, s, length, static):
    """Split DtN weights into a power-law part and an exponentially small part.

    Returns (smooth, expo, cross) with self weight = static + smooth + expo.
    ``smooth`` has an asymptotic expansion in powers of 1/n and is summed with
    extrapolation; ``expo`` (and ``cross``) decay like exp(-c n length) and
    are summed directly to :func:`exponential_cutoff`.
    """
    w, cross = segment_weights(kind, delta, s, length)
    base = w - static - static_offset(kind, length)
    if kind in (TAIL, EXTERIOR, DISK):
        return base, None, cross
    lam = delta + s * s
    ev = lam >= 0
    k = np.sqrt(np.abs(lam))
    smooth = np.where(ev, k - static, 0.0)
    return smooth, base - smooth, cross


@dataclass
class InterfaceSystem:
    """Assembled interface Galerkin system for one truncation level.

    ``n_modes[family]`` is the number of modes in the power-law sums; the
    exponentially decaying parts of short regions use as many modes as
    :func:`exponential_cutoff` requires.
    """

    space: TraceSpace
    interfaces: list
    regions: list
    n_modes: dict
    extrapolate: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        need = {}
        for reg in self.regions:
            name = reg.family.name
            cut = exponential_cutoff(reg.kind, reg.length, reg.family.width)
            need[name] = max(need.get(name, self.n_modes[name]), cut)
        for reg in self.regions:
            fam = reg.family
            if fam.name not in self._cache:
                N = need[fam.name]
                idx = np.arange(1, N + 1, dtype=float)
                P = self.space.projections(fam, N)
                self._cache[fam.name] = (idx, P, self.space.delta(fam, idx))

    @property
    def size(self):
        return self.space.size * len(self.interfaces)

    def mode_data(self, fam):
        return self._cache[fam.name]

    def modes_used(self, fam_name):
        return self._cache[fam_name][0].size

    def _dynamic(self, P, dyn):
        """sum_n dyn_n P_n P_n^T, Richardson-extrapolated over N/4, N/2, N.

        The summands decay like n^-4 with an expansion in integer powers, so
        the truncation error is removed to O(N^-5) without extra modes.
        """
        N = dyn.size
        x = dyn[:, None] * P
        if N < 16 or not self.extrapolate or N % 4:
            return P.T @ x
        q = N // 4
        s1 = P[:q].T @ x[:q]
        s2 = s1 + P[q:2 * q].T @ x[q:2 * q]
        s3 = s2 + P[2 * q:].T @ x[2 * q:]
        return richardson([s1, s2, s3], [3, 4])

    def matrix(self, s: float) -> np.ndarray:
        """A(eps) with eps = (pi/d)^2 - s^2."""
        nb = self.space.size
        n_if = len(self.interfaces)
        A = np.zeros((nb * n_if, nb * n_if))
        S0 = self.space.static_pair()
        for i in range(n_if):
            A[i * nb:(i + 1) * nb, i * nb:(i + 1) * nb] += S0
        for reg in self.regions:
            idx, P, delta = self._cache[reg.family.name]
            N = self.n_modes[reg.family.name]
            smooth, expo, cross = split_weights(reg.kind, delta, s, reg.length,
                                                reg.family.static_weight(idx))
            block = self._dynamic(P[:N], smooth[:N])
            if expo is not None:
                block = block + P.T @ (expo[:, None] * P)
            for i in (reg.left, reg.right):
                if i is not None:
                    A[i * nb:(i + 1) * nb, i * nb:(i + 1) * nb] += block
            if cross is not None:
                C = P.T @ (cross[:, None] * P)
                l, r = reg.left, reg.right
                A[l * nb:(l + 1) * nb, r * nb:(r + 1) * nb] -= C
                A[r * nb:(r + 1) * nb, l * nb:(l + 1) * nb] -= C.T
        return 0.5 * (A + A.T)

    def gram(self) -> np.ndarray:
        G = self.space.gram()
        n_if = len(self.interfaces)
        return np.kron(np.eye(n_if), G)

    def reducer(self) -> np.ndarray:
        """Columns spanning the numerically independent trace directions.

        Eigen-directions of the space metric below ``DEFLATE_REL`` times its
        largest eigenvalue are dropped and the rest scaled to unit norm, so
        ``T.T @ A @ T`` is a well-posed standard eigenproblem with the same
        singular energies.  Only the asymmetric trace space loses directions.
        """
        if "_reducer" not in self._cache:
            w, V = np.linalg.eigh(self.space.metric())
            keep = w > DEFLATE_REL * w[-1]
            T = V[:, keep] / np.sqrt(w[keep])
            self._cache["_reducer"] = np.kron(np.eye(len(self.interfaces)), T)
        return self._cache["_reducer"]
