"""Bessel functions of order 0 and 1, zeros of J0, and integer-order J tables.

Each kind is evaluated in three argument ranges:

* ascending power series for small x,
* a trapezoidal rule applied to an integral representation in the middle
  range (spectrally accurate because the integrands are periodic or decay
  doubly exponentially),
* the standard large-argument asymptotic expansion beyond the upper
  crossover.

The crossovers below were picked by comparing against a 40-digit reference
on a log-spaced validation grid; ``tests/test_specfun.py`` keeps a
regression comparison against scipy.special and quadrature.  All routines accept scalars or arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OverflowSaturation

EULER_GAMMA = 0.57721566490153286061

# Crossover points (series | integral | asymptotic).
J_SERIES_MAX = 4.0
J_ASYMPTOTIC_MIN = 25.0
I_ASYMPTOTIC_MIN = 22.0
K_SERIES_MAX = 2.0
K_ASYMPTOTIC_MIN = 20.0

# exp(x)/sqrt(2 pi x) exceeds the largest double beyond this argument.
I_OVERFLOW = 713.0

_EPS = np.finfo(float).eps
_KINDS = ("J0", "J1", "I0", "I1", "K0", "K1")


@dataclass(frozen=True)
class BesselEval:
    """Function value with an a-posteriori absolute error estimate."""

    value: float
    estimated_abs_error: float


# ----------------------------------------------------------------- series

def _series_ji(nu, x, sign):
    """Ascending series of J_nu (sign=-1) or I_nu (sign=+1).

    Returns value and the sum of absolute terms (for error estimates).
    """
    q = 0.25 * x * x
    term = (0.5 * x) ** nu / math.factorial(nu) * np.ones_like(x)
    total = term.copy()
    mag = np.abs(term)
    for k in range(1, 200):
        term = term * (sign * q / (k * (k + nu)))
        total = total + term
        mag = mag + np.abs(term)
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total, mag


def _series_k(nu, x):
    """Small-argument series of K0 or K1 (x > 0)."""
    q = 0.25 * x * x
    lg = np.log(0.5 * x)
    if nu == 0:
        i0, _ = _series_ji(0, x, 1.0)
        term = np.ones_like(x)
        h = 0.0
        acc = np.zeros_like(x)
        for k in range(1, 120):
            term = term * q / (k * k)
            h += 1.0 / k
            acc = acc + term * h
            if np.all(term * h <= 1e-17 * np.abs(acc) + 1e-300):
                break
        val = -(lg + EULER_GAMMA) * i0 + acc
        mag = np.abs(lg + EULER_GAMMA) * i0 + acc
        return val, mag
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1)+psi(k+2)] q^k/(k!(k+1)!)
    i1, _ = _series_ji(1, x, 1.0)
    term = np.ones_like(x)
    psi1 = -EULER_GAMMA
    psi2 = 1.0 - EULER_GAMMA
    acc = term * (psi1 + psi2)
    mag = np.abs(acc)
    for k in range(1, 120):
        term = term * q / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        acc = acc + term * (psi1 + psi2)
        mag = mag + np.abs(term * (psi1 + psi2))
        if np.all(np.abs(term) * (abs(psi1) + abs(psi2)) <= 1e-17 * np.abs(acc) + 1e-300):
            break
    val = 1.0 / x + lg * i1 - 0.25 * x * acc
    return val, 1.0 / x + np.abs(lg) * i1 + 0.25 * x * mag


# ---------------------------------------------------------- integral reps

_J_NODES = 96


def _trapezoid_j(nu, x):
    """J_nu(x) = (1/2pi) int_0^{2pi} cos(nu t - x sin t) dt, periodic trapezoid."""
    t = (np.arange(_J_NODES) + 0.5) * (2.0 * math.pi / _J_NODES)
    f = np.cos(nu * t[None, :] - x[:, None] * np.sin(t)[None, :])
    return f.mean(axis=1), np.full(x.shape, 4 * _EPS)


def _trapezoid_k_scaled(nu, x):
    """exp(x) K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt."""
    h = 0.125
    tmax = np.arccosh(1.0 + 45.0 / np.min(x)) + 2 * h
    t = np.arange(0.0, tmax + h, h)
    w = np.full(t.shape, h)
    w[0] = 0.5 * h
    f = np.exp(-x[:, None] * (np.cosh(t)[None, :] - 1.0)) * np.cosh(nu * t)[None, :]
    val = f @ w
    return val, 8 * _EPS * val


# ------------------------------------------------------------ asymptotics

def _asym_coeffs(nu, x, nterms=40):
    """Terms a_k(nu)/x^k of the Hankel-type expansions, k = 0..nterms-1.

    Truncated at the smallest term (optimal truncation)."""
    mu = 4.0 * nu * nu
    terms = [np.ones_like(x)]
    for k in range(1, nterms):
        terms.append(terms[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x))
        # later terms cannot change a double once every term is this small
        if np.max(np.abs(terms[-1])) < 1e-18:
            break
    T = np.array(terms)
    nterms = T.shape[0]
    # zero out terms past the first local minimum in magnitude
    absT = np.abs(T)
    grow = np.zeros_like(absT, dtype=bool)
    grow[1:] = absT[1:] > absT[:-1]
    stop = np.cumsum(grow, axis=0) > 0
    last = np.where(stop.any(axis=0), np.argmax(stop, axis=0), nterms)
    T = np.where(stop, 0.0, T)
    tail = np.abs(np.take_along_axis(absT, np.minimum(last, nterms - 1)[None, :], axis=0))[0]
    return T, tail


def _asym_j(nu, x):
    T, tail = _asym_coeffs(nu, x)
    k = np.arange(T.shape[0])[:, None]
    sgn = np.where((k // 2) % 2 == 0, 1.0, -1.0)
    P = np.sum(np.where(k % 2 == 0, sgn * T, 0.0), axis=0)
    Q = np.sum(np.where(k % 2 == 1, sgn * T, 0.0), axis=0)
    chi = x - (0.5 * nu + 0.25) * math.pi
    amp = np.sqrt(2.0 / (math.pi * x))
    val = amp * (P * np.cos(chi) - Q * np.sin(chi))
    return val, amp * (tail + 4 * _EPS * (np.abs(P) + np.abs(Q)))


def _asym_i_scaled(nu, x):
    T, tail = _asym_coeffs(nu, x)
    k = np.arange(T.shape[0])[:, None]
    s = np.sum(np.where(k % 2 == 0, T, -T), axis=0)
    amp = 1.0 / np.sqrt(2.0 * math.pi * x)
    return amp * s, amp * (tail + 4 * _EPS * np.abs(s))


def _asym_k_scaled(nu, x):
    T, tail = _asym_coeffs(nu, x)
    s = np.sum(T, axis=0)
    amp = np.sqrt(math.pi / (2.0 * x))
    return amp * s, amp * (tail + 4 * _EPS * np.abs(s))


# ------------------------------------------------------------- front ends

def _pieces(x, lo, hi, f_lo, f_mid, f_hi):
    val = np.empty_like(x)
    err = np.empty_like(x)
    for mask, f in ((x <= lo, f_lo), ((x > lo) & (x <= hi), f_mid), (x > hi, f_hi)):
        if np.any(mask):
            v, e = f(x[mask])
            val[mask] = v
            err[mask] = e
    return val, err


def _series_err(f):
    def g(y):
        v, mag = f(y)
        return v, 2 * _EPS * mag
    return g


def _j_eval(nu, x):
    ax = np.abs(x)
    val, err = _pieces(ax, J_SERIES_MAX, J_ASYMPTOTIC_MIN,
                       _series_err(lambda y: _series_ji(nu, y, -1.0)),
                       _trapezoid_j_err(nu),
                       lambda y: _asym_j(nu, y))
    if nu == 1:
        val = np.where(x < 0, -val, val)
    return val, err


def _trapezoid_j_err(nu):
    def g(y):
        v, _ = _trapezoid_j(nu, y)
        return v, np.full(y.shape, 4 * _EPS)
    return g


def _i_scaled_eval(nu, x):
    """exp(-x) I_nu(x) for x >= 0."""
    def ser(y):
        v, mag = _series_ji(nu, y, 1.0)
        s = np.exp(-y)
        return v * s, 2 * _EPS * mag * s
    return _pieces(x, I_ASYMPTOTIC_MIN, I_ASYMPTOTIC_MIN, ser, ser,
                   lambda y: _asym_i_scaled(nu, y))


def _k_scaled_eval(nu, x):
    """exp(x) K_nu(x) for x > 0."""
    def ser(y):
        v, mag = _series_k(nu, y)
        s = np.exp(y)
        return v * s, 2 * _EPS * mag * s
    return _pieces(x, K_SERIES_MAX, K_ASYMPTOTIC_MIN, ser,
                   lambda y: _trapezoid_k_scaled(nu, y),
                   lambda y: _asym_k_scaled(nu, y))


def _check_kind(kind):
    if kind not in _KINDS:
        raise ValueError(f"unknown Bessel kind {kind!r}; expected one of {_KINDS}")


def _evaluate(kind, x):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x).astype(float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{kind}: non-finite argument")
    nu = int(kind[1])
    if kind[0] == "J":
        val, err = _j_eval(nu, x)
    elif kind[0] == "I":
        if np.any(x < 0):
            raise DomainError(f"{kind}: argument must be >= 0")
        if np.any(x > I_OVERFLOW):
            raise OverflowSaturation(f"{kind}({np.max(x)}) exceeds the double range")
        sv, se = _i_scaled_eval(nu, x)
        e = np.exp(x)
        val, err = sv * e, se * e
    else:
        if np.any(x <= 0):
            raise DomainError(f"{kind}: argument must be > 0")
        sv, se = _k_scaled_eval(nu, x)
        e = np.exp(-x)
        val, err = sv * e, se * e
    if scalar:
        return float(val[0]), float(err[0])
    return val, err


def bessel(kind: str, x):
    """Evaluate J0, J1, I0, I1, K0 or K1 at ``x`` (scalar or array).

    Raises
    ------
    DomainError
        ``x <= 0`` for the K kinds, ``x < 0`` for the I kinds.
    OverflowSaturation
        I kinds beyond ``I_OVERFLOW``.
    """
    _check_kind(kind)
    return _evaluate(kind, x)[0]


def bessel_eval(kind: str, x: float) -> BesselEval:
    """Scalar evaluation with an error estimate."""
    _check_kind(kind)
    v, e = _evaluate(kind, float(x))
    return BesselEval(v, abs(e))


def bessel_scaled(kind: str, x):
    """``exp(-x) I(x)`` for I kinds, ``exp(x) K(x)`` for K kinds.

    Useful when the unscaled values over- or underflow."""
    _check_kind(kind)
    if kind[0] == "J":
        return bessel(kind, x)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    nu = int(kind[1])
    if kind[0] == "I":
        if np.any(x < 0):
            raise DomainError(f"{kind}: argument must be >= 0")
        v = _i_scaled_eval(nu, x)[0]
    else:
        if np.any(x <= 0):
            raise DomainError(f"{kind}: argument must be > 0")
        v = _k_scaled_eval(nu, x)[0]
    return float(v[0]) if scalar else v


def k_ratio(x):
    """K1(x)/K0(x), from the exponentially scaled values (no underflow)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("k_ratio: argument must be > 0")
    r = bessel_scaled("K1", x) / bessel_scaled("K0", x)
    return float(r) if np.ndim(r) == 0 else r


def i_ratio(x):
    """I1(x)/I0(x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    r = bessel_scaled("I1", x) / bessel_scaled("I0", x)
    return float(r) if np.ndim(r) == 0 else r


def j_ratio(x):
    """J1(x)/J0(x); poles at the zeros of J0."""
    x = np.asarray(x, dtype=float)
    r = bessel("J1", x) / bessel("J0", x)
    return float(r) if np.ndim(r) == 0 else r


def j0_zero(k: int) -> float:
    """k-th positive zero of J0 (McMahon start, Newton polish)."""
    if int(k) != k or k < 1:
        raise ValueError("j0_zero: k must be a positive integer")
    beta = (k - 0.25) * math.pi
    b8 = 8.0 * beta
    z = beta + 1.0 / b8 - 124.0 / (3.0 * b8 ** 3) + 120928.0 / (15.0 * b8 ** 5)
    for _ in range(50):
        step = bessel("J0", z) / bessel("J1", z)   # J0' = -J1
        z += step
        if abs(step) < 1e-15 * z:
            break
    return z


def jn_table(x, nmax: int) -> np.ndarray:
    """J_n(x) for n = 0..nmax at every x > 0; shape ``(len(x), nmax+1)``.

    Upward recurrence where it is stable (x > nmax), Miller's backward
    recurrence normalized by ``J0 + 2 sum J_2k = 1`` elsewhere.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise DomainError("jn_table: arguments must be positive")
    out = np.empty((x.size, nmax + 1))
    up = x > nmax
    if np.any(up):
        xu = x[up]
        tab = np.empty((xu.size, nmax + 1))
        tab[:, 0] = bessel("J0", xu)
        if nmax >= 1:
            tab[:, 1] = bessel("J1", xu)
        for n in range(1, nmax):
            tab[:, n + 1] = (2.0 * n / xu) * tab[:, n] - tab[:, n - 1]
        out[up] = tab
    dn = ~up
    if np.any(dn):
        xd = x[dn]
        top = max(nmax, int(np.max(xd)))
        start = top + 30 + int(math.sqrt(40.0 * top))
        start += start % 2
        tab = np.zeros((xd.size, nmax + 1))
        jp1 = np.zeros_like(xd)
        jn = np.full_like(xd, 1e-300)
        norm = np.zeros_like(xd)
        for n in range(start, 0, -1):
            jm1 = (2.0 * n / xd) * jn - jp1
            if n - 1 <= nmax:
                tab[:, n - 1] = jm1
            if (n - 1) % 2 == 0 and n - 1 > 0:
                norm += 2.0 * jm1
            jp1, jn = jn, jm1
            big = np.abs(jn) > 1e250
            if np.any(big):
                scale = np.where(big, 1e-250, 1.0)
                jp1 *= scale
                jn *= scale
                norm *= scale
                tab *= scale[:, None]
        norm += jn
        out[dn] = tab / norm[:, None]
    return out
