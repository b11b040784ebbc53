"""Sweeps, fits, the bound check, convergence studies and the FD oracle."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapwell import geometry as geo
from gapwell.analysis import (convergence_study, estimate_conjecture_coefficients,
                              fd_box_eigenvalue, fd_oracle, fit_exp_inverse_cube,
                              fit_power_law, fit_quartic, fit_window, rolling_spread, sweep,
                              synthetic_row, verify_sandwich)
from gapwell.analysis.fits import quartic_coefficients
from gapwell.errors import DegenerateAbscissa, InsufficientRows, InvalidGeometry, Unsupported
from gapwell.modematch import find_ground_state_half

PI = math.pi
A_SMALL = [0.05, 0.075, 0.1, 0.15, 0.2]


def _quadratic_table(coef=0.1, a_list=A_SMALL):
    return [synthetic_row(a, -coef * (2 * a * a) ** 2) for a in a_list]


# ------------------------------------------------------------------ fits

def test_synthetic_row_measure():
    r = synthetic_row(0.1, -1e-5, windows=((0.0, 0.1), (1.0, 0.2)))
    assert r.i_measure == pytest.approx(0.1)
    assert synthetic_row(0.5, -1e-5, dim=3).i_measure == pytest.approx(PI * 0.25)


def test_power_law_exact():
    fit = fit_power_law(_quadratic_table())
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.coefficient == pytest.approx(0.1, rel=1e-10)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.n_rows == len(A_SMALL)


def test_quartic_exact():
    rows = [synthetic_row(a, -(3 * a) ** 4) for a in A_SMALL]
    assert fit_quartic(rows).coefficient == pytest.approx(3.0, rel=1e-12)


def test_quartic_removes_linear_correction():
    rows = [synthetic_row(a, -((2 + 0.7 * a) * a) ** 4) for a in A_SMALL]
    assert fit_quartic(rows).coefficient == pytest.approx(2.0, rel=1e-12)


def test_quartic_rescales_width():
    """Dilation: the coefficient is reported at d = pi."""
    s = 2.0
    rows = [synthetic_row(a * s, -(3 * a) ** 4 / s ** 2, d=PI * s) for a in A_SMALL]
    got = [c for _, c in quartic_coefficients(rows)]
    assert got == pytest.approx([3.0] * len(rows), rel=1e-12)


def test_exp_inverse_cube_exact():
    rows = [synthetic_row(a, -math.exp(-5.0 / a ** 3), dim=3) for a in (1.0, 1.2, 1.4, 1.6)]
    fit = fit_exp_inverse_cube(rows)
    assert fit.exponent == pytest.approx(-5.0, rel=1e-10)
    assert fit.coefficient == pytest.approx(1.0, rel=1e-9)
    assert len(fit.rolling) == 2
    assert rolling_spread(fit) < 1e-9


def test_fit_window_drops_floor_and_wide_rows():
    rows = _quadratic_table() + [synthetic_row(1.5, -0.3), synthetic_row(0.01, -1e-14),
                                 synthetic_row(0.02, 1e-6)]
    kept, rule = fit_window(rows)
    assert [r.a for r in kept] == A_SMALL
    assert rule["max_a_over_d"] == pytest.approx(0.3)


def test_fit_errors():
    with pytest.raises(InsufficientRows):
        fit_power_law(_quadratic_table(a_list=[0.1, 0.2]))
    with pytest.raises(InsufficientRows):
        fit_exp_inverse_cube([synthetic_row(1.0, -1e-3, dim=3)])
    same = [synthetic_row(0.1, -1e-5) for _ in range(3)]
    with pytest.raises(DegenerateAbscissa):
        fit_power_law(same)
    with pytest.raises(DegenerateAbscissa):
        fit_quartic(same)


# -------------------------------------------------------------- sandwich

def test_sandwich_passes_on_settling_ratios():
    rows = [synthetic_row(a, -(0.1 + a) * (2 * a * a) ** 2) for a in A_SMALL]
    rep = verify_sandwich(rows)
    assert rep.passed and 0 < rep.c2 <= rep.c1
    assert rep.c2 == pytest.approx(0.15)


def test_sandwich_rejects_positive_gap():
    rows = _quadratic_table()
    rows[2] = synthetic_row(rows[2].a, 1e-7)
    rep = verify_sandwich(rows)
    assert not rep.passed and rep.failed_row == 2


def test_sandwich_rejects_failed_row():
    rows = _quadratic_table()
    rows[1].status = "BracketFailure"
    rep = verify_sandwich(rows)
    assert not rep.passed and rep.failed_row == 1


def test_sandwich_rejects_diverging_ratio():
    # ratios move away from the small-I value as I decreases
    rows = [synthetic_row(a, -(1.0 / a) * (2 * a * a) ** 2) for a in A_SMALL]
    rows[0] = synthetic_row(A_SMALL[0], -0.1 * (2 * A_SMALL[0] ** 2) ** 2)
    assert not verify_sandwich(rows).passed


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(5))))
def test_sandwich_order_invariant(perm):
    base = [synthetic_row(a, -(0.1 + a) * (2 * a * a) ** 2) for a in A_SMALL]
    ref = verify_sandwich(base)
    rep = verify_sandwich([base[i] for i in perm])
    assert rep.passed == ref.passed
    assert (rep.c1, rep.c2) == (ref.c1, ref.c2)
    assert sorted(rep.ratios) == sorted(ref.ratios)


# ----------------------------------------------------------------- sweep

def test_sweep_sorted_and_deterministic():
    tmpl = geo.StripGeometry(PI, PI, [geo.Window(0.0, 1.0)])
    t1 = sweep(tmpl, [0.2, 0.1, 0.15], variational=False, workers=1)
    t2 = sweep(tmpl, [0.15, 0.2, 0.1], variational=False, workers=2)
    assert t1.column("param") == [0.1, 0.15, 0.2]
    assert [r.record() for r in t1] == [r.record() for r in t2]
    assert t1.rows[0].gap == pytest.approx(find_ground_state_half(PI, 0.1).gap, rel=1e-12)


def test_sweep_isolates_errors():
    tab = sweep(geo.LayerGeometry(PI, PI, 1.0), [0.1, 1.0], variational=False, workers=1)
    assert tab.rows[0].status == "BelowNumericalFloor" and math.isnan(tab.rows[0].gap)
    assert tab.rows[1].ok and tab.rows[1].gap < 0
    assert len(tab.ok_rows()) == 1


def test_sweep_invalid_geometry_row():
    tmpl = geo.StripGeometry(PI, PI, [geo.Window(0.0, 1.0), geo.Window(0.5, 1.0)])
    tab = sweep(tmpl, [0.1, 0.4], variational=False, workers=1)
    assert tab.rows[0].ok
    assert tab.rows[1].status == "OverlappingWindows"


def test_sweep_bounds_columns():
    tab = sweep(geo.StripGeometry(PI, PI, [geo.Window(0.0, 1.0)]), [0.1], workers=1)
    r = tab.rows[0]
    assert r.gap <= r.gap_variational <= r.gap_paper_bound < 0
    assert r.residual < 1e-8


def test_sweep_empty():
    with pytest.raises(ValueError):
        sweep(geo.LayerGeometry(PI, PI, 1.0), [])


# ------------------------------------------------------------ conjecture

def test_conjecture_unsupported():
    with pytest.raises(Unsupported):
        estimate_conjecture_coefficients(0.5, dim=3)
    with pytest.raises(ValueError):
        estimate_conjecture_coefficients(1.5)


def test_conjecture_2d_matches_quartic():
    a_list = [0.05, 0.1, 0.15]
    fit = estimate_conjecture_coefficients(1.0, a_list=a_list, workers=1)
    tab = sweep(geo.StripGeometry(PI, PI, [geo.Window(0.0, 1.0)]), a_list,
                variational=False, workers=1)
    q = fit_quartic(tab)
    assert fit.coefficient == pytest.approx(q.coefficient ** 2 * PI, rel=0.02)
    per = dict(fit.metadata["per_row"])
    for a, c in quartic_coefficients(tab.rows):
        assert per[a] == pytest.approx(c * c * PI, rel=1e-12)


# ----------------------------------------------------------- convergence

def test_convergence_study_basics():
    st_ = convergence_study(geo.StripGeometry(PI, PI, [geo.Window(0.0, 0.3)]), [200, 50, 100])
    assert st_.mode_counts == [50, 100, 200]
    assert st_.order > 0.5
    ref = find_ground_state_half(PI, 0.3).gap
    # the extrapolated value is closer to the converged gap than the finest truncation
    assert abs(st_.extrapolated - ref) < abs(st_.gaps[-1] - ref)
    with pytest.raises(ValueError):
        convergence_study(geo.StripGeometry(PI, PI, [geo.Window(0.0, 0.3)]), [50, 100])
    with pytest.raises(InvalidGeometry):
        convergence_study(geo.StripGeometry(PI, 2.0, [geo.Window(0.0, 0.3)]), [50, 100, 200])


# ------------------------------------------------------------- FD oracle

def test_fd_box_second_order():
    errs = []
    for h in (0.1, 0.05, 0.025):
        lam, X = fd_box_eigenvalue(PI, h, 3.0)
        errs.append(abs(lam - (1.0 + (PI / (2 * X)) ** 2)))
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    assert 3.5 < r1 < 4.5 and 3.5 < r2 < 4.5


def test_fd_oracle_2d():
    g = geo.StripGeometry(PI, PI, [geo.Window(0.0, 0.5)])
    res = fd_oracle(g)
    ref = find_ground_state_half(PI, 0.5).gap
    assert abs(res.gap - ref) <= max(res.error, 1e-4 * abs(ref))
    assert res.kind == "2d" and len(res.levels) == 3
    hs = [lv.h for lv in res.levels]
    assert hs[0] == pytest.approx(2 * hs[1]) and hs[1] == pytest.approx(2 * hs[2])
