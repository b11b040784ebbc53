"""Bessel routines against scipy.special and quadrature references."""

import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, strategies as st
from scipy import integrate

from gapwell import specfun as sf
from gapwell.errors import DomainError, OverflowSaturation

GRID = np.logspace(-3, math.log10(700.0), 1500)


@pytest.mark.parametrize("kind,ref", [("J0", sc.j0), ("J1", sc.j1)])
def test_j_kinds_absolute(kind, ref):
    x = GRID[GRID < 300]
    assert np.max(np.abs(sf.bessel(kind, x) - ref(x))) < 5e-15


@pytest.mark.parametrize("kind,ref", [("I0", sc.i0e), ("I1", sc.i1e),
                                      ("K0", sc.k0e), ("K1", sc.k1e)])
def test_scaled_modified_kinds_relative(kind, ref):
    assert np.max(np.abs(sf.bessel_scaled(kind, GRID) / ref(GRID) - 1)) < 2e-14


@pytest.mark.parametrize("x", [0.1, 1.0, 10.0, 50.0])
def test_wronskian(x):
    # I0 K1 + I1 K0 = 1/x, evaluated with scaled values so nothing overflows
    w = (sf.bessel_scaled("I0", x) * sf.bessel_scaled("K1", x)
         + sf.bessel_scaled("I1", x) * sf.bessel_scaled("K0", x))
    assert abs(w * x - 1.0) < 1e-10


def test_j0_zeros():
    for k, z in enumerate(sc.jn_zeros(0, 20), start=1):
        assert abs(sf.j0_zero(k) - z) < 1e-12 * z
    assert sf.j0_zero(1) == pytest.approx(2.404825557695773, abs=1e-12)


def test_j1_zero_of_derivative():
    # J1 vanishes where J0 is extremal; scipy root oracle
    assert abs(sf.bessel("J1", sc.jn_zeros(1, 1)[0])) < 1e-14


def test_k0_at_one_against_quadrature():
    ref, _ = integrate.quad(lambda t: math.exp(-math.cosh(t)), 0, 10.0, epsabs=0, epsrel=1e-13)
    assert abs(sf.bessel("K0", 1.0) - ref) < 1e-12


def test_jn_table_against_scipy():
    x = np.array([0.05, 0.5, 3.0, 17.0, 40.0, 120.0])
    t = sf.jn_table(x, 40)
    ref = sc.jv(np.arange(41)[None, :], x[:, None])
    assert np.max(np.abs(t - ref)) < 1e-14


def test_ratios_stay_finite_far_out():
    assert sf.k_ratio(1e4) == pytest.approx(1 + 0.5e-4, rel=1e-8)
    assert sf.i_ratio(0.0) == 0.0
    assert np.isfinite(sf.k_ratio(1e-8))


def test_error_estimates_cover_actual_error():
    for kind, ref in [("J0", sc.j0), ("K1", sc.k1), ("I0", sc.i0)]:
        for x in [0.3, 3.0, 30.0]:
            e = sf.bessel_eval(kind, x)
            assert abs(e.value - ref(x)) <= max(e.estimated_abs_error, 4e-16 * abs(ref(x)))


def test_domain_guards():
    with pytest.raises(DomainError):
        sf.bessel("K0", 0.0)
    with pytest.raises(DomainError):
        sf.bessel("I1", -1.0)
    with pytest.raises(OverflowSaturation):
        sf.bessel("I0", 800.0)
    with pytest.raises(ValueError):
        sf.bessel("Y0", 1.0)


@given(st.floats(1e-3, 600.0))
def test_recurrence_identity(x):
    # K1' = -K0 - K1/x checked through the scaled Wronskian-free identity
    # I0 K1 + I1 K0 = 1/x at arbitrary arguments
    w = (sf.bessel_scaled("I0", x) * sf.bessel_scaled("K1", x)
         + sf.bessel_scaled("I1", x) * sf.bessel_scaled("K0", x))
    assert abs(w * x - 1.0) < 1e-12
