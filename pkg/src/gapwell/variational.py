"""Variational upper bounds on the gap from explicit trial functions.

2D (symmetric pair, half problem on 0 <= y <= d with Neumann windows):

    psi = F + sum_k eta_k G_k,   F = f1(x) chi_1(y),
    G_k = (2 a_k/|W|) cos(pi (x - x_k)/(2 a_k)) R_k(y)   on window k,

where f1 is 1 between the outer window edges and decays like exp(-kappa |x|)
outside, and R_k decays like exp(-pi y/(2 a_k)) up to d/2 and then linearly
to zero at d.  The reduced functional L(psi) = (H psi, psi) - (pi/d)^2 |psi|^2
and |psi|^2 are quadratic in (1, eta), so for fixed kappa the optimal eta and
the quotient come from a small generalized eigenproblem; kappa is found by a
bounded scalar search.

3D (symmetric layers, disk window of radius a): psi = F + eta G with
f1 = min(1, K0(kappa r)/K0(kappa a)), G = phi_1(x) R(y), phi_1 the Dirichlet
ground mode of the disk and R decaying at the rate sqrt(mu_1(a)).

All values are exact Rayleigh quotients, hence true upper bounds for the gap.
The ``paper_bound_*`` functions evaluate the asymptotic closed-form estimates
of the same families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import integrate, optimize

from . import geometry as geo
from . import specfun
from .errors import BracketFailure, DomainError, SmallnessViolated, Unsupported

SLACK_DEFAULT = 0.01


@dataclass(frozen=True)
class TrialParams2D:
    """Decay rate of the tails and window amplitudes.

    ``eta`` holds n_terms amplitudes per window, window-major.
    """

    kappa: float
    eta: tuple = ()
    n_terms: int = 1

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))


@dataclass(frozen=True)
class TrialParams3D:
    kappa: float
    eta: float = 0.0
    slack: tuple = (SLACK_DEFAULT, SLACK_DEFAULT, SLACK_DEFAULT)

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        if not (0 <= self.slack[2] < 1):
            raise DomainError("the third slack parameter must lie in [0, 1)")


@dataclass(frozen=True)
class DiskMode:
    """Dirichlet ground mode of the unit disk: eigenvalue and integral."""

    mu1: float
    c_const: float


# ---------------------------------------------------------------- profiles

def _r_profile_norms(rate, d):
    """|R|^2 and |R'|^2 for R = exp(-rate y) on [0, d/2], linear after."""
    e = math.exp(-rate * d)
    n2 = -math.expm1(-rate * d) / (2 * rate) + d * e / 6.0
    dn2 = rate * -math.expm1(-rate * d) / 2 + 2.0 * e / d
    return n2, dn2


def r_norms(a_k: float, d: float):
    """(|R_k|^2, |R_k'|^2) on (0, d) for the window profile of half-width a_k."""
    if not (a_k > 0 and d > 0):
        raise DomainError("a_k and d must be positive")
    e = math.exp(-math.pi * d / (2 * a_k))
    n2 = a_k / math.pi + (d / 6.0 - a_k / math.pi) * e
    dn2 = math.pi / (4 * a_k) + (2.0 / d - math.pi / (4 * a_k)) * e
    return n2, dn2


def r_profile(y, rate, d):
    """The profile R itself (rate pi/(2 a) in 2D, sqrt(mu_1(a)) in 3D)."""
    y = np.asarray(y, dtype=float)
    top = np.exp(-rate * np.minimum(y, 0.5 * d))
    lin = 2.0 * (1.0 - y / d) * math.exp(-0.5 * rate * d)
    return np.where(y <= 0.5 * d, top, lin)


def _chi1_r_overlap(rate, d):
    """int_0^d chi_1(y) R(y) dy by adaptive quadrature on both pieces."""
    amp = math.sqrt(2.0 / d)
    k = math.pi / d
    a1, _ = integrate.quad(lambda y: amp * math.sin(k * y) * math.exp(-rate * y), 0.0, 0.5 * d,
                           epsabs=0.0, epsrel=1e-13, limit=200)
    a2, _ = integrate.quad(lambda y: amp * math.sin(k * y) * 2.0 * (1.0 - y / d),
                           0.5 * d, d, epsabs=0.0, epsrel=1e-13)
    return a1 + a2 * math.exp(-0.5 * rate * d)


# ---------------------------------------------------------------------- 2D

def _symmetric_strip(geom):
    geo.validate(geom)
    if not geom.symmetric:
        raise Unsupported("trial families are evaluated for d1 = d2 only")
    if not geom.windows:
        raise geo.NonPositiveWidth(0, "a window list is required")
    return geom.d1


def _term_scale(n, decay):
    """Transverse decay multiplier of series term n (1-based)."""
    if decay == "harmonic":
        return 2 * n - 1
    if decay == "literal":
        return n
    raise ValueError("decay must be 'harmonic' or 'literal'")


def _pencil_2d(geom, kappa, n_terms=1, decay="harmonic"):
    """(H, M) for the coefficient vector (1, eta_1, ..., eta_m)."""
    d = _symmetric_strip(geom)
    wins = geom.windows
    W = 2.0 * sum(w.half_width for w in wins)
    chi1p = math.sqrt(2.0 / d) * math.pi / d
    top = (math.pi / d) ** 2
    m = len(wins) * n_terms
    H = np.zeros((m + 1, m + 1))
    M = np.zeros((m + 1, m + 1))
    plateau = wins[-1].right - wins[0].left
    H[0, 0] = kappa
    M[0, 0] = plateau + 1.0 / kappa
    i = 1
    for w in wins:
        a = w.half_width
        amp = 2.0 * a / W
        for n in range(1, n_terms + 1):
            kx = math.pi * (2 * n - 1) / (2 * a)      # window cosine wavenumber
            rate = math.pi * _term_scale(n, decay) / (2 * a)
            nr2, dnr2 = _r_profile_norms(rate, d)
            # int over the window of cos(kx (x - x_k)) and of its square
            c1 = (4 * a / (math.pi * (2 * n - 1))) * (-1) ** (n + 1)
            H[i, i] = amp * amp * a * (kx * kx * nr2 + dnr2 - top * nr2)
            H[0, i] = H[i, 0] = -chi1p * amp * c1
            M[i, i] = amp * amp * a * nr2
            M[0, i] = M[i, 0] = amp * c1 * _chi1_r_overlap(rate, d)
            i += 1
    return H, M


def _quotient_2d(geom, kappa, n_terms, decay):
    H, M = _pencil_2d(geom, kappa, n_terms, decay)
    w, v = scipy.linalg.eigh(H, M, subset_by_index=[0, 0])
    vec = v[:, 0] / v[0, 0]
    return float(w[0]), vec


def rayleigh2d_exact(geom: geo.StripGeometry, p: TrialParams2D, decay: str = "harmonic") -> float:
    """Exact Rayleigh quotient L(psi)/|psi|^2 of the 2D trial function.

    Parameters
    ----------
    geom : StripGeometry
        Symmetric pair (d1 = d2).
    p : TrialParams2D
        ``eta`` must hold ``n_terms`` values per window (empty means zeros).
    decay : {"harmonic", "literal"}
        Transverse decay of series term n: rate pi (2n-1)/(2a) (the window
        cosine's own wavenumber) or pi n/(2a).
    """
    H, M = _pencil_2d(geom, p.kappa, p.n_terms, decay)
    m = H.shape[0] - 1
    eta = np.zeros(m) if not p.eta else np.asarray(p.eta, dtype=float)
    if eta.size != m:
        raise ValueError(f"expected {m} eta values, got {eta.size}")
    c = np.concatenate(([1.0], eta))
    return float(c @ H @ c / (c @ M @ c))


def _kappa_search(fn, lo, hi):
    """Minimize fn(kappa) on [lo, hi] in log kappa; grid-scan fallback."""
    g = lambda t: fn(math.exp(t))
    res = optimize.minimize_scalar(g, bounds=(math.log(lo), math.log(hi)), method="bounded",
                                   options={"xatol": 1e-10})
    t = float(res.x)
    edge = 1e-6 * (math.log(hi) - math.log(lo))
    if res.success and math.log(lo) + edge < t < math.log(hi) - edge:
        return math.exp(t), float(res.fun)
    ts = np.linspace(math.log(lo), math.log(hi), 241)
    vals = np.array([g(x) for x in ts])
    j = int(np.argmin(vals))
    if j in (0, ts.size - 1):
        raise BracketFailure(f"quotient not minimized inside kappa in [{lo:g}, {hi:g}]")
    res = optimize.minimize_scalar(g, bounds=(ts[j - 1], ts[j + 1]), method="bounded",
                                   options={"xatol": 1e-10})
    return math.exp(float(res.x)), float(res.fun)


def minimize_rayleigh2d(geom: geo.StripGeometry, n_terms: int = 1, decay: str = "harmonic"):
    """Best trial of the family: returns (TrialParams2D, value).

    The amplitudes are optimal for each kappa (generalized eigenvector);
    kappa is searched on [I(W) 1e-2, I(W) 1e2].  ``n_terms > 1`` selects the
    series family (interpreted): window modes cos(pi (2n-1)(x-x_k)/(2 a_k))
    with their own decaying profiles.
    """
    I = geo.i_measure(geom)
    d = _symmetric_strip(geom)
    scale = I / d ** 3
    kappa, val = _kappa_search(lambda k: _quotient_2d(geom, k, n_terms, decay)[0],
                               1e-2 * scale, 1e2 * scale)
    _, vec = _quotient_2d(geom, kappa, n_terms, decay)
    return TrialParams2D(kappa, tuple(vec[1:]), n_terms), val


def paper_bound_2d(geom: geo.StripGeometry, eps1: float = SLACK_DEFAULT,
                   eps2: float = SLACK_DEFAULT) -> float:
    """Closed-form asymptotic estimate of the optimized 2D trial quotient.

    -(1 - eps2)^-1 (2^6 sum a_k^2 / (pi d^3 (2 + eps1)))^2.  eps1 = eps2 = 0
    is accepted as the formal limit.  Requires every a_k < pi d/8.
    """
    d = _symmetric_strip(geom)
    if not (eps1 >= 0 and 0 <= eps2 < 1):
        raise DomainError("need eps1 >= 0 and 0 <= eps2 < 1")
    for k, w in enumerate(geom.windows):
        if not w.half_width < math.pi * d / 8:
            raise SmallnessViolated(f"window {k}: a = {w.half_width:g} is not < pi d/8 = "
                                    f"{math.pi * d / 8:g}")
    s = sum(w.half_width ** 2 for w in geom.windows)
    return -(64.0 * s / (math.pi * d ** 3 * (2.0 + eps1))) ** 2 / (1.0 - eps2)


# ---------------------------------------------------------------------- 3D

def disk_mode() -> DiskMode:
    """mu_1 = j_{0,1}^2 and C = int phi_1 = 2 sqrt(pi)/j_{0,1} on the unit disk."""
    j = specfun.j0_zero(1)
    return DiskMode(j * j, 2.0 * math.sqrt(math.pi) / j)


def disk_mode_function(r):
    """Normalized Dirichlet ground mode of the unit disk, J0(j r)/(sqrt(pi) J1(j))."""
    j = specfun.j0_zero(1)
    r = np.asarray(r, dtype=float)
    val = specfun.bessel("J0", j * r) / (math.sqrt(math.pi) * specfun.bessel("J1", j))
    return np.where(r <= 1.0, val, 0.0)


def _pencil_3d(d, a, kappa):
    dm = disk_mode()
    chi1p = math.sqrt(2.0 / d) * math.pi / d
    top = (math.pi / d) ** 2
    xi = kappa * a
    r = specfun.k_ratio(xi)
    grad_f = math.pi * xi * xi * (1.0 + 2.0 * r / xi - r * r)
    norm_f = math.pi * a * a + math.pi * a * a * (r * r - 1.0)
    rate = math.sqrt(dm.mu1) / a
    nr2, dnr2 = _r_profile_norms(rate, d)
    ca = dm.c_const * a
    H = np.array([[grad_f, -chi1p * ca], [-chi1p * ca, (rate * rate - top) * nr2 + dnr2]])
    M = np.array([[norm_f, ca * _chi1_r_overlap(rate, d)], [0.0, nr2]])
    M[1, 0] = M[0, 1]
    return H, M


def _quotient_3d(d, a, kappa):
    H, M = _pencil_3d(d, a, kappa)
    # unit-norm F component keeps the products below overflow
    sc = np.array([1.0 / math.sqrt(M[0, 0]), 1.0])
    H = H * np.outer(sc, sc)
    M = M * np.outer(sc, sc)
    # 2x2 pencil in closed form; the root is tiny compared with the entries
    A = M[0, 0] * M[1, 1] - M[0, 1] ** 2
    B = -(H[0, 0] * M[1, 1] + H[1, 1] * M[0, 0] - 2 * H[0, 1] * M[0, 1])
    C = H[0, 0] * H[1, 1] - H[0, 1] ** 2
    disc = math.sqrt(max(B * B - 4 * A * C, 0.0))
    q = -0.5 * (B + math.copysign(disc, B))
    roots = [q / A, C / q] if q != 0 else [-B / (2 * A)]
    lam = min(roots)
    eta = -(H[0, 0] - lam * M[0, 0]) / (H[0, 1] - lam * M[0, 1]) / sc[0]
    return float(lam), float(eta)


def rayleigh3d_exact(d: float, a: float, p: TrialParams3D) -> float:
    """Exact quotient of psi = F + eta G for the disk window of radius a."""
    if not (d > 0 and a > 0):
        raise DomainError("d and a must be positive")
    H, M = _pencil_3d(d, a, p.kappa)
    c = np.array([1.0, p.eta])
    return float(c @ H @ c / (c @ M @ c))


def minimize_rayleigh3d(d: float, a: float):
    """Best 3D trial: returns (TrialParams3D, value); eta optimal per kappa."""
    if not (d > 0 and a > 0):
        raise DomainError("d and a must be positive")
    # the optimal kappa is exponentially small in a^-3; search in log space
    lo = 1e-150 / a
    hi = 1.0 / a
    fn = lambda k: _quotient_3d(d, a, k)[0]
    ts = np.linspace(math.log(lo), math.log(hi), 400)
    vals = np.array([fn(math.exp(t)) for t in ts])
    j = int(np.argmin(vals))
    if j in (0, ts.size - 1):
        raise BracketFailure("3D quotient not minimized inside the kappa bracket")
    res = optimize.minimize_scalar(lambda t: fn(math.exp(t)), bounds=(ts[j - 1], ts[j + 1]),
                                   method="bounded", options={"xatol": 1e-12})
    kappa = math.exp(float(res.x))
    lam, eta = _quotient_3d(d, a, kappa)
    return TrialParams3D(kappa, eta), lam


def paper_bound_3d(a: float, d: float, slack=(SLACK_DEFAULT, SLACK_DEFAULT, SLACK_DEFAULT)) -> float:
    """Leading asymptotic form of the 3D trial estimate.

    g(a) = -((1 + e2)/(1 - e3)) a^-2 exp(-2E/(D a^3)) with E = 2 pi (1 + e2)
    and D = 2 chi_1'(0)^2 C^2 / ((2 + e1) sqrt(mu_1)).
    """
    e1, e2, e3 = slack
    if not (a > 0 and d > 0):
        raise DomainError("a and d must be positive")
    if not (e1 >= 0 and e2 >= 0 and 0 <= e3 < 1):
        raise DomainError("slack must satisfy e1, e2 >= 0 and 0 <= e3 < 1")
    dm = disk_mode()
    chi2 = 2.0 * math.pi ** 2 / d ** 3
    D = 2.0 * chi2 * dm.c_const ** 2 / ((2.0 + e1) * math.sqrt(dm.mu1))
    E = 2.0 * math.pi * (1.0 + e2)
    return -((1.0 + e2) / (1.0 - e3)) * a ** -2 * math.exp(-2.0 * E / (D * a ** 3))


def exponent_3d(d: float, slack=(0.0, 0.0, 0.0)) -> float:
    """The rate 2E/D in g(a) ~ -a^-2 exp(-(2E/D)/a^3)."""
    e1, e2, _ = slack
    dm = disk_mode()
    chi2 = 2.0 * math.pi ** 2 / d ** 3
    D = 2.0 * chi2 * dm.c_const ** 2 / ((2.0 + e1) * math.sqrt(dm.mu1))
    return 2.0 * 2.0 * math.pi * (1.0 + e2) / D
