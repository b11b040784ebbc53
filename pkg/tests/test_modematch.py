"""Mode-matching solvers: frozen values, invariances, dual routes and fields.

Frozen gaps were produced by the edge-conditioned solver and reproduced by
the independent finite-difference oracle (see test_analysis.py and the
acceptance suite) to better than 1e-4 relative.
"""

import math

import numpy as np
import pytest

from gapwell import geometry as geo
from gapwell.errors import BelowNumericalFloor, DomainError, OutOfDomain
from gapwell.modematch import (SolverOptions, assemble_multiwindow, find_ground_state_half,
                               find_ground_state_layer, find_ground_state_strip,
                               matching_residual, reconstruct_field, secular_lambda_min,
                               value_mismatch)

PI = math.pi

FROZEN_HALF = {0.1: -2.5157670719e-5, 0.2: -4.04446374522e-4, 1.0: -0.141164862028}
FROZEN_ASYM = {0.2: -1.03090795e-4}          # d1 = pi, d2 = pi/2
FROZEN_LAYER = {1.0: -1.52016785e-6, 1.3: -2.19595893e-3}


@pytest.fixture(scope="module")
def half02():
    return find_ground_state_half(PI, 0.2)


@pytest.mark.parametrize("a", sorted(FROZEN_HALF))
def test_half_frozen(a):
    r = find_ground_state_half(PI, a)
    assert r.gap == pytest.approx(FROZEN_HALF[a], rel=1e-9)
    assert r.epsilon == pytest.approx(1.0 + r.gap, rel=1e-15)
    assert r.status == "ok" and r.bracket_width < 1e-8 * abs(r.gap)


def test_asymmetric_frozen():
    r = find_ground_state_strip(geo.StripGeometry(PI, PI / 2, [(0.0, 0.2)]))
    assert r.gap == pytest.approx(FROZEN_ASYM[0.2], rel=1e-6)


@pytest.mark.parametrize("a", sorted(FROZEN_LAYER))
def test_layer_frozen(a):
    assert find_ground_state_layer(PI, a).gap == pytest.approx(FROZEN_LAYER[a], rel=1e-7)


def test_layer_small_radius_is_below_floor():
    with pytest.raises(BelowNumericalFloor):
        find_ground_state_layer(PI, 0.1)


def test_half_equals_full_symmetric(half02):
    full = find_ground_state_strip(geo.StripGeometry(PI, PI, [(0.0, 0.2)]))
    assert full.gap == pytest.approx(half02.gap, rel=1e-8)


def test_translation_invariance():
    g = geo.StripGeometry(PI, PI, [(0.0, 0.15), (0.8, 0.1)])
    r0 = find_ground_state_strip(g)
    r1 = find_ground_state_strip(g.translated(3.7))
    assert r1.gap == pytest.approx(r0.gap, rel=1e-9)


def test_dilation_covariance(half02):
    r = find_ground_state_half(2 * PI, 0.4)
    assert r.gap * 4 == pytest.approx(half02.gap, rel=1e-9)


def test_more_window_lowers_the_gap():
    one = find_ground_state_half(PI, 0.1).gap
    two = find_ground_state_strip(geo.StripGeometry(PI, PI, [(0.0, 0.1), (1.0, 0.1)])).gap
    wider = find_ground_state_half(PI, 0.12).gap
    assert two < one and wider < one


def test_classic_route_converges_towards_edge_route():
    # independent Fourier-Fourier discretization; its error decays like 1/M
    ref = find_ground_state_half(PI, 0.3).gap
    gaps = [find_ground_state_half(PI, 0.3, SolverOptions(method="classic", fixed=(m, m))).gap
            for m in (50, 100, 200)]
    errs = [abs(g - ref) for g in gaps]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.15)
    # first-order Richardson on the classic route lands on the edge route
    assert 2 * gaps[2] - gaps[1] == pytest.approx(ref, rel=5e-3)


def test_classic_secular_matrix_sign_change():
    lo = secular_lambda_min(1.0 - 2.5e-3, PI, 0.3, (200, 200))
    hi = secular_lambda_min(1.0 - 1.5e-3, PI, 0.3, (200, 200))
    assert lo * hi < 0


def test_assemble_multiwindow_sign_flip_across_root():
    g = geo.StripGeometry(PI, PI, [(0.0, 0.2), (1.0, 0.2)])
    r = find_ground_state_strip(g)
    below, meta_b = assemble_multiwindow(r.epsilon - 0.05 * abs(r.gap), g)
    above, meta_a = assemble_multiwindow(r.epsilon + 0.05 * abs(r.gap), g)
    assert meta_b["det_sign"] != meta_a["det_sign"]
    assert below.order == meta_b["rank"]
    with pytest.raises(DomainError):
        assemble_multiwindow(1.5, g)


def test_field_symmetry_dirichlet_and_decay(half02):
    f = lambda x, y: reconstruct_field(half02, (x, y))
    assert f(0.5, 1.0) == pytest.approx(f(-0.5, 1.0), rel=1e-12)
    assert f(0.5, 1.0) == pytest.approx(f(0.5, -1.0), rel=1e-12)
    assert f(0.7, PI) == 0.0
    assert f(3.0, 0.0) == 0.0
    slope = math.log(f(80.0, PI / 2) / f(60.0, PI / 2)) / 20.0
    assert slope == pytest.approx(-half02.s, rel=1e-6)
    with pytest.raises(OutOfDomain):
        f(0.0, PI + 0.1)


def test_weak_matching_residual(half02):
    assert matching_residual(half02) < 1e-10


def test_value_mismatch_decreases_with_modes():
    vals = [value_mismatch(find_ground_state_half(PI, 0.2, SolverOptions(fixed=(16, n))))
            for n in (100, 200, 400)]
    assert vals[0] > vals[1] > vals[2]
