"""Trial-function bounds checked against direct quadrature of the trial field."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from gapwell import geometry as geo
from gapwell import variational as var
from gapwell.errors import DomainError, SmallnessViolated, Unsupported
from gapwell.modematch import (find_ground_state_half, find_ground_state_layer,
                               find_ground_state_strip)

PI = math.pi
J01 = 2.404825557695773


def _profile(y, rate, d):
    """R and R' built from scratch: exponential to d/2, then linear to zero."""
    if y <= 0.5 * d:
        return math.exp(-rate * y), -rate * math.exp(-rate * y)
    e = math.exp(-0.5 * rate * d)
    return 2.0 * (1.0 - y / d) * e, -2.0 * e / d


def _quadrature_quotient_2d(d, a, kappa, eta):
    """L(psi)/|psi|^2 for one centered window by 2D adaptive quadrature."""
    k = PI / d
    chi = lambda y: math.sqrt(2 / d) * math.sin(k * y)
    dchi = lambda y: math.sqrt(2 / d) * k * math.cos(k * y)
    kx = PI / (2 * a)
    rate = PI / (2 * a)

    def window(y, x, what):
        R, dR = _profile(y, rate, d)
        g = eta * math.cos(kx * x) * R
        gx = -eta * kx * math.sin(kx * x) * R
        gy = eta * math.cos(kx * x) * dR
        psi = chi(y) + g
        if what == "norm":
            return psi * psi
        return gx * gx + (dchi(y) + gy) ** 2 - k * k * psi * psi

    def tail(y, x, what):
        f = math.exp(-kappa * (x - a))
        if what == "norm":
            return (f * chi(y)) ** 2
        return (kappa * f * chi(y)) ** 2 + (f * dchi(y)) ** 2 - k * k * (f * chi(y)) ** 2

    out = {}
    for what in ("energy", "norm"):
        tot = 0.0
        for y0, y1 in ((0.0, 0.5 * d), (0.5 * d, d)):
            tot += integrate.dblquad(window, 0.0, a, y0, y1, args=(what,),
                                     epsabs=1e-13, epsrel=1e-11)[0]
        tot += integrate.dblquad(tail, a, a + 60.0 / kappa, 0.0, d, args=(what,),
                                 epsabs=1e-13, epsrel=1e-11)[0]
        out[what] = 2.0 * tot          # even in x
    return out["energy"] / out["norm"]


def _quadrature_quotient_3d(d, a, kappa, eta):
    """Same for the disk window, in (r, y) with the 2 pi r weight."""
    k = PI / d
    chi = lambda y: math.sqrt(2 / d) * math.sin(k * y)
    dchi = lambda y: math.sqrt(2 / d) * k * math.cos(k * y)
    rate = J01 / a
    norm_phi = a * math.sqrt(PI) * special.j1(J01)
    phi = lambda r: special.j0(J01 * r / a) / norm_phi
    dphi = lambda r: -J01 / a * special.j1(J01 * r / a) / norm_phi
    k0a = special.k0(kappa * a)

    def disk(y, r, what):
        R, dR = _profile(y, rate, d)
        psi = chi(y) + eta * phi(r) * R
        if what == "norm":
            return 2 * PI * r * psi * psi
        gr = eta * dphi(r) * R
        gy = dchi(y) + eta * phi(r) * dR
        return 2 * PI * r * (gr * gr + gy * gy - k * k * psi * psi)

    def outside(y, r, what):
        f = special.k0(kappa * r) / k0a
        if what == "norm":
            return 2 * PI * r * (f * chi(y)) ** 2
        fr = -kappa * special.k1(kappa * r) / k0a
        return 2 * PI * r * ((fr * chi(y)) ** 2 + (f * dchi(y)) ** 2 - k * k * (f * chi(y)) ** 2)

    out = {}
    for what in ("energy", "norm"):
        tot = 0.0
        for y0, y1 in ((0.0, 0.5 * d), (0.5 * d, d)):
            tot += integrate.dblquad(disk, 0.0, a, y0, y1, args=(what,),
                                     epsabs=1e-13, epsrel=1e-11)[0]
        tot += integrate.dblquad(outside, a, a + 60.0 / kappa, 0.0, d, args=(what,),
                                 epsabs=1e-13, epsrel=1e-11)[0]
        out[what] = tot
    return out["energy"] / out["norm"]


@pytest.mark.parametrize("a,kappa,eta", [(0.2, 0.3, -0.4), (0.5, 0.8, -1.2), (0.3, 0.05, 0.7)])
def test_rayleigh2d_matches_quadrature(single_window, a, kappa, eta):
    g = single_window(a)
    # G carries the amplitude 2a/|W| = 1 for a single window
    val = var.rayleigh2d_exact(g, var.TrialParams2D(kappa, (eta,)))
    assert val == pytest.approx(_quadrature_quotient_2d(PI, a, kappa, eta), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("a,kappa,eta", [(1.0, 0.5, -0.3), (0.8, 1.5, 0.6)])
def test_rayleigh3d_matches_quadrature(a, kappa, eta):
    val = var.rayleigh3d_exact(PI, a, var.TrialParams3D(kappa, eta))
    assert val == pytest.approx(_quadrature_quotient_3d(PI, a, kappa, eta), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("a,d", [(0.1, PI), (0.4, 2.0), (1.5, 1.0)])
def test_r_norms_vs_quadrature(a, d):
    rate = PI / (2 * a)
    n2 = sum(integrate.quad(lambda y: _profile(y, rate, d)[0] ** 2, lo, hi, epsrel=1e-13)[0]
             for lo, hi in ((0, d / 2), (d / 2, d)))
    dn2 = sum(integrate.quad(lambda y: _profile(y, rate, d)[1] ** 2, lo, hi, epsrel=1e-13)[0]
              for lo, hi in ((0, d / 2), (d / 2, d)))
    got = var.r_norms(a, d)
    assert got[0] == pytest.approx(n2, rel=1e-11)
    assert got[1] == pytest.approx(dn2, rel=1e-11)
    ys = np.linspace(0, d, 9)
    assert np.allclose(var.r_profile(ys, rate, d), [_profile(y, rate, d)[0] for y in ys],
                       rtol=1e-14, atol=0)


def test_disk_mode():
    dm = var.disk_mode()
    assert dm.mu1 == pytest.approx(5.783185962946785, rel=1e-13)
    c, _ = integrate.quad(lambda r: 2 * PI * r * var.disk_mode_function(r), 0, 1, epsrel=1e-13)
    assert dm.c_const == pytest.approx(c, rel=1e-11)
    nrm, _ = integrate.quad(lambda r: 2 * PI * r * var.disk_mode_function(r) ** 2, 0, 1,
                            epsrel=1e-13)
    assert nrm == pytest.approx(1.0, rel=1e-11)


@pytest.mark.parametrize("a", [0.05, 0.1, 0.2])
def test_2d_ordering(single_window, a):
    g = single_window(a)
    _, val = var.minimize_rayleigh2d(g)
    gap = find_ground_state_half(PI, a).gap
    assert gap <= val < 0
    assert val <= var.paper_bound_2d(g, 0.01, 0.01)


def test_2d_minimum_beats_neighbours(single_window):
    g = single_window(0.1)
    p, val = var.minimize_rayleigh2d(g)
    for f in (0.9, 1.1):
        q = var.TrialParams2D(p.kappa * f, p.eta)
        assert var.rayleigh2d_exact(g, q) >= val
    assert var.rayleigh2d_exact(g, p) == pytest.approx(val, rel=1e-10)


def test_series_family_improves(single_window):
    g = single_window(0.05)
    _, one = var.minimize_rayleigh2d(g, n_terms=1)
    _, two = var.minimize_rayleigh2d(g, n_terms=2)
    _, lit = var.minimize_rayleigh2d(g, n_terms=2, decay="literal")
    assert two < one and lit < one


def test_multiwindow_trial_is_bound():
    g = geo.StripGeometry(PI, PI, [geo.Window(0.0, 0.1), geo.Window(1.0, 0.1)])
    _, val = var.minimize_rayleigh2d(g)
    assert find_ground_state_strip(g).gap <= val < 0


def test_2d_guards(single_window):
    with pytest.raises(SmallnessViolated):
        var.paper_bound_2d(single_window(1.3))
    with pytest.raises(DomainError):
        var.paper_bound_2d(single_window(0.1), eps2=1.0)
    with pytest.raises(Unsupported):
        var.minimize_rayleigh2d(geo.StripGeometry(PI, PI / 2, [geo.Window(0.0, 0.1)]))
    with pytest.raises(DomainError):
        var.TrialParams2D(0.0)
    with pytest.raises(ValueError):
        var.rayleigh2d_exact(single_window(0.1), var.TrialParams2D(1.0, (0.1, 0.2)))
    assert var.paper_bound_2d(single_window(0.1), 0.0, 0.0) == pytest.approx(
        -(32 * 0.01 / PI ** 4) ** 2, rel=1e-14)


@pytest.mark.parametrize("a", [1.0, 1.3])
def test_3d_ordering(a):
    _, val = var.minimize_rayleigh3d(PI, a)
    gap = find_ground_state_layer(PI, a).gap
    assert gap <= val < 0
    assert val <= var.paper_bound_3d(a, PI)


def test_3d_guards():
    with pytest.raises(DomainError):
        var.minimize_rayleigh3d(PI, 0.0)
    with pytest.raises(DomainError):
        var.paper_bound_3d(1.0, PI, (0.0, 0.0, 1.0))
    with pytest.raises(DomainError):
        var.TrialParams3D(1.0, slack=(0.0, 0.0, 1.5))
    assert var.exponent_3d(PI) > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.4), st.floats(-3.0, 3.0), st.floats(-3.0, 1.0))
def test_quotient_bounds_gap(a, eta, log_kappa):
    """Any member of the family bounds the ground state from above."""
    g = geo.StripGeometry(PI, PI, [geo.Window(0.0, a)])
    gap = find_ground_state_half(PI, a).gap
    val = var.rayleigh2d_exact(g, var.TrialParams2D(10.0 ** log_kappa, (eta,)))
    assert val >= gap * (1 + 1e-9)
