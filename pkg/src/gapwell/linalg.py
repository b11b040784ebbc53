"""Dense real symmetric linear algebra for the secular systems.

Two eigen-backends are available: a cyclic Jacobi solver written here
(reference implementation, accurate to a few ulps on small matrices) and
LAPACK through numpy/scipy, which the solvers use for speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateAbscissa, NonFinite

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60


class SymMatrix:
    """Immutable dense symmetric matrix.

    The strictly lower triangle is overwritten with the upper one, so the
    stored entries (i, j) and (j, i) are identical.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("SymMatrix needs a square 2-D array")
        iu = np.triu_indices(a.shape[0], 1)
        a[(iu[1], iu[0])] = a[iu]
        a.setflags(write=False)
        self._a = a

    @property
    def order(self) -> int:
        return self._a.shape[0]

    @property
    def array(self) -> np.ndarray:
        return self._a

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def norm(self) -> float:
        return float(np.linalg.norm(self._a))


def _as_array(A) -> np.ndarray:
    a = A.array if isinstance(A, SymMatrix) else np.asarray(A, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has NaN or Inf entries")
    return a


def jacobi_eigen(a: np.ndarray, vectors: bool = True):
    """Cyclic Jacobi rotations; stops when off(A) < JACOBI_TOL * ||A||_F."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return (np.zeros(n), v) if vectors else np.zeros(n)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off < JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta          # theta^2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                if vectors:
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]


def eigen_symmetric(A, vectors: bool = False, method: str = "lapack"):
    """Ascending eigenvalues (and optionally eigenvectors as columns).

    Parameters
    ----------
    A : SymMatrix or array_like
    vectors : bool
    method : {"lapack", "jacobi"}
    """
    a = _as_array(A)
    if method == "jacobi":
        return jacobi_eigen(a, vectors)
    if method != "lapack":
        raise ValueError(f"unknown eigen method {method!r}")
    if vectors:
        return np.linalg.eigh(a)
    return np.linalg.eigvalsh(a)


def smallest_eigenpair(A, B=None):
    """Smallest eigenvalue and eigenvector of A (or of the pencil A - lam B)."""
    a = _as_array(A)
    if B is None:
        w, v = scipy.linalg.eigh(a, subset_by_index=[0, 0])
    else:
        w, v = scipy.linalg.eigh(a, _as_array(B), subset_by_index=[0, 0])
    return float(w[0]), v[:, 0]


def det_sign(A):
    """Sign of det(A) and log|det(A)| from a pivoted LU factorization.

    Returns ``(0, -inf)`` when a pivot falls below 1e-14 * ||A||_F.
    """
    a = _as_array(A)
    n = a.shape[0]
    if n == 0:
        return 1, 0.0
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    d = np.diag(lu)
    if np.any(np.abs(d) < 1e-14 * np.linalg.norm(a)):
        return 0, -math.inf
    swaps = int(np.sum(piv != np.arange(n)))
    sign = (-1) ** swaps * int(np.prod(np.sign(d)))
    return sign, float(np.sum(np.log(np.abs(d))))


def solve(A, b):
    return np.linalg.solve(_as_array(A), np.asarray(b, dtype=float))


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r2: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r2))


def fit_line(xs, ys, weights=None) -> LineFit:
    """Weighted least-squares line ``y = slope * x + intercept``.

    r² is 1 by convention when the ys have zero (weighted) variance.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("fit_line needs matching arrays with at least two points")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be nonnegative and not all zero")
    sw = w.sum()
    xm = np.dot(w, x) / sw
    ym = np.dot(w, y) / sw
    sxx = np.dot(w, (x - xm) ** 2)
    if sxx <= 1e-300 * max(1.0, np.dot(w, x * x)) or np.ptp(x[w > 0]) == 0:
        raise DegenerateAbscissa("all abscissae are equal")
    sxy = np.dot(w, (x - xm) * (y - ym))
    slope = sxy / sxx
    intercept = ym - slope * xm
    syy = np.dot(w, (y - ym) ** 2)
    if syy <= 1e-30 * max(1.0, np.dot(w, y * y)):
        r2 = 1.0
    else:
        r2 = float(min(1.0, max(0.0, sxy * sxy / (sxx * syy))))
    return LineFit(float(slope), float(intercept), r2)
