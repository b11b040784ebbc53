import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gapwell import linalg
from gapwell.errors import DegenerateAbscissa, NonFinite


def _sym(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return a + a.T


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_jacobi_matches_lapack(n):
    a = _sym(n, n)
    w, v = linalg.eigen_symmetric(a, vectors=True, method="jacobi")
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-12 * np.linalg.norm(a))
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)
    assert np.allclose(a @ v, v * w, atol=1e-11 * np.linalg.norm(a))


def test_symmatrix_is_symmetric_and_frozen():
    m = linalg.SymMatrix([[1.0, 2.0], [5.0, 3.0]])
    assert m.array[1, 0] == 2.0
    with pytest.raises(ValueError):
        m.array[0, 0] = 7.0


def test_smallest_eigenpair_pencil():
    a = _sym(6, 1)
    b = np.eye(6) * 2.0
    lam, v = linalg.smallest_eigenpair(a, b)
    assert lam == pytest.approx(np.linalg.eigvalsh(a)[0] / 2, rel=1e-12)
    assert np.allclose(a @ v, lam * b @ v, atol=1e-10)


def test_det_sign_against_numpy():
    for seed in range(5):
        a = _sym(7, seed)
        s, logd = linalg.det_sign(a)
        ref = np.linalg.slogdet(a)
        assert s == ref[0] and logd == pytest.approx(ref[1], rel=1e-12)


def test_nonfinite_rejected():
    with pytest.raises(NonFinite):
        linalg.eigen_symmetric([[np.nan, 0], [0, 1]])


def test_fit_line_exact_and_degenerate():
    f = linalg.fit_line([0, 1, 2], [1, 3, 5])
    assert (f.slope, f.intercept, f.r2) == pytest.approx((2.0, 1.0, 1.0))
    with pytest.raises(DegenerateAbscissa):
        linalg.fit_line([1, 1, 1], [0, 1, 2])


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-10, 10)))
def test_jacobi_trace_and_spectrum_invariants(a):
    a = a + a.T
    w = linalg.jacobi_eigen(a, vectors=False)
    assert np.all(np.diff(w) >= 0)
    assert w.sum() == pytest.approx(np.trace(a), abs=1e-10 * (1 + np.abs(a).sum()))
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * (1 + np.linalg.norm(a)))
