"""Waveguide geometries: two strips (or layers) sharing a boundary with windows.

The upper strip occupies ``0 < y < d1`` and the lower one ``-d2 < y < 0``.
The common wall ``y = 0`` is Dirichlet except on the windows, where the two
guides are connected.  All lengths are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NonPositiveWidth, OverlappingWindows


@dataclass(frozen=True)
class Window:
    """Window interval ``[center - half_width, center + half_width]`` on y = 0."""

    center: float
    half_width: float

    @property
    def left(self) -> float:
        return self.center - self.half_width

    @property
    def right(self) -> float:
        return self.center + self.half_width


def _as_windows(items: Iterable) -> tuple[Window, ...]:
    out = []
    for w in items:
        if isinstance(w, Window):
            out.append(w)
        else:
            x, a = w
            out.append(Window(float(x), float(a)))
    return tuple(out)


@dataclass(frozen=True)
class StripGeometry:
    """Two parallel strips of widths ``d1`` (above) and ``d2`` (below).

    Parameters
    ----------
    d1, d2 : float
        Strip widths.
    windows : sequence of (center, half_width)
        Windows in the common wall, ordered by center.
    """

    d1: float
    d2: float
    windows: tuple[Window, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "d1", float(self.d1))
        object.__setattr__(self, "d2", float(self.d2))
        object.__setattr__(self, "windows", _as_windows(self.windows))

    @property
    def d(self) -> float:
        return max(self.d1, self.d2)

    @property
    def D(self) -> float:
        return self.d1 + self.d2

    @property
    def symmetric(self) -> bool:
        return self.d1 == self.d2

    @property
    def half_widths(self) -> tuple[float, ...]:
        return tuple(w.half_width for w in self.windows)

    @property
    def centers(self) -> tuple[float, ...]:
        return tuple(w.center for w in self.windows)

    def translated(self, shift: float) -> "StripGeometry":
        return StripGeometry(self.d1, self.d2,
                             [(w.center + shift, w.half_width) for w in self.windows])

    def scaled(self, s: float) -> "StripGeometry":
        return StripGeometry(s * self.d1, s * self.d2,
                             [(s * w.center, s * w.half_width) for w in self.windows])

    def with_windows(self, windows: Sequence) -> "StripGeometry":
        return StripGeometry(self.d1, self.d2, windows)


@dataclass(frozen=True)
class LayerGeometry:
    """Two layers of widths ``d1``, ``d2`` joined through a disk of radius ``a``."""

    d1: float
    d2: float
    a: float

    def __post_init__(self):
        for name in ("d1", "d2", "a"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def d(self) -> float:
        return max(self.d1, self.d2)

    @property
    def D(self) -> float:
        return self.d1 + self.d2

    @property
    def symmetric(self) -> bool:
        return self.d1 == self.d2


@dataclass(frozen=True)
class SpectralInterval:
    """Open energy interval that contains the discrete spectrum."""

    lower: float
    upper: float

    def __contains__(self, eps) -> bool:
        return self.lower < eps < self.upper


def validate(geom) -> None:
    """Check the structural invariants of a strip or layer geometry.

    Raises
    ------
    NonPositiveWidth
        A strip width (index 0 for d1, 1 for d2) or window half-width is not
        positive.  For windows ``index`` is the window position.
    OverlappingWindows
        Window ``index`` overlaps, touches, or is not to the right of its
        predecessor.
    """
    for i, w in enumerate((geom.d1, geom.d2)):
        if not (math.isfinite(w) and w > 0):
            raise NonPositiveWidth(i, f"strip width {'d1' if i == 0 else 'd2'}={w} must be positive")
    if isinstance(geom, LayerGeometry):
        if not (math.isfinite(geom.a) and geom.a > 0):
            raise NonPositiveWidth(0, f"window radius a={geom.a} must be positive")
        return
    for k, w in enumerate(geom.windows):
        if not (math.isfinite(w.half_width) and w.half_width > 0):
            raise NonPositiveWidth(k, f"window {k} half-width {w.half_width} must be positive")
        if not math.isfinite(w.center):
            raise NonPositiveWidth(k, f"window {k} center is not finite")
    for k in range(1, len(geom.windows)):
        prev, cur = geom.windows[k - 1], geom.windows[k]
        if cur.center <= prev.center:
            raise OverlappingWindows(k, f"window centers must increase (window {k})")
        if cur.left <= prev.right:
            raise OverlappingWindows(
                k, f"window {k} [{cur.left:g}, {cur.right:g}] overlaps window {k - 1} "
                   f"[{prev.left:g}, {prev.right:g}]")


def i_measure(geom: StripGeometry) -> float:
    """Window size measure ``sum_k a_k |W_k| = 2 sum_k a_k**2``."""
    return 2.0 * math.fsum(w.half_width ** 2 for w in geom.windows)


def spectral_interval(geom) -> SpectralInterval:
    """Return ``((pi/D)**2, (pi/d)**2)``."""
    return SpectralInterval((math.pi / geom.D) ** 2, (math.pi / geom.d) ** 2)


def parse_windows(text: str) -> list[tuple[float, float]]:
    """Parse ``"x:a,x:a"`` into a list of (center, half_width) pairs."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        x, sep, a = item.partition(":")
        if not sep:
            raise ValueError(f"window spec {item!r} is not of the form x:a")
        out.append((float(x), float(a)))
    return out
