"""Lorentz-Minkowski linear algebra, the two-sheeted hyperboloid, and
stereographic projection.

The ambient space is R^3 = {(x0, x1, x2)} with the indefinite pairing
<x, y> = -x0*y0 + x1*y1 + x2*y2; x0 is the timelike coordinate.  The unit
timelike vectors form the two-sheeted hyperboloid, which stereographic
projection identifies with the Riemann sphere minus the unit circle: the lower
sheet maps into the open unit disk, the upper sheet outside the closed disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

H2_TOL = 1e-12


class IdealBoundaryError(ValueError):
    """Raised for inverse projection of a unit-circle point ("ideal boundary point")."""


@dataclass(frozen=True)
class LVec3:
    """A point/vector of Lorentz-Minkowski 3-space."""

    x0: float
    x1: float
    x2: float

    @classmethod
    def of(cls, arr) -> "LVec3":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2])

    def __add__(self, other: "LVec3") -> "LVec3":
        return LVec3(self.x0 + other.x0, self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: "LVec3") -> "LVec3":
        return LVec3(self.x0 - other.x0, self.x1 - other.x1, self.x2 - other.x2)

    def __mul__(self, s: float) -> "LVec3":
        return LVec3(self.x0 * s, self.x1 * s, self.x2 * s)

    __rmul__ = __mul__


def _components(x):
    if isinstance(x, LVec3):
        return x.x0, x.x1, x.x2
    return x[0], x[1], x[2]


def lorentz_inner(x, y) -> float:
    x0, x1, x2 = _components(x)
    y0, y1, y2 = _components(y)
    return -x0 * y0 + x1 * y1 + x2 * y2


def euclid_inner(x, y) -> float:
    x0, x1, x2 = _components(x)
    y0, y1, y2 = _components(y)
    return x0 * y0 + x1 * y1 + x2 * y2


def euclid_cross(x, y):
    x0, x1, x2 = _components(x)
    y0, y1, y2 = _components(y)
    return np.array([x1 * y2 - x2 * y1, x2 * y0 - x0 * y2, x0 * y1 - x1 * y0])


def lorentz_cross(x, y) -> LVec3:
    """The vector w with <w, z> = det(x, y, z) for every z.

    Relative to the Euclidean cross product this flips the timelike component:
    pairing the candidate against the three basis vectors shows w = (-e0, e1, e2)
    where e = x x y.
    """
    e = euclid_cross(x, y)
    return LVec3(-e[0], e[1], e[2])


def det3(x, y, z) -> float:
    return float(np.linalg.det(np.array([_components(x), _components(y), _components(z)])))


@dataclass(frozen=True)
class H2Point:
    """A point of the unit two-sheeted hyperboloid, tagged with its sheet."""

    point: LVec3
    sheet: str  # "upper" | "lower"

    def __post_init__(self):
        q = lorentz_inner(self.point, self.point)
        # scale-relative: <p,p> is a difference of ~x0^2-sized terms, so the
        # absolute 1e-12 bound is only meaningful at O(1) coordinates
        if abs(q + 1.0) >= H2_TOL * max(1.0, self.point.x0 * self.point.x0):
            raise ValueError(f"not on the hyperboloid: <p,p> = {q}")
        expected = "upper" if self.point.x0 > 0 else "lower"
        if self.sheet != expected:
            raise ValueError(f"sheet tag {self.sheet!r} inconsistent with x0 = {self.point.x0}")

    @classmethod
    def of(cls, arr) -> "H2Point":
        p = LVec3.of(arr)
        return cls(p, "upper" if p.x0 > 0 else "lower")


_INF = object()


@dataclass(frozen=True)
class ExtComplex:
    """A point of the Riemann sphere: a finite complex value or the tagged infinity."""

    value: complex = 0j
    infinite: bool = False

    @classmethod
    def infinity(cls) -> "ExtComplex":
        return cls(0j, True)

    @classmethod
    def of(cls, w) -> "ExtComplex":
        if isinstance(w, ExtComplex):
            return w
        return cls(complex(w), False)

    def abs(self) -> float:
        return math.inf if self.infinite else abs(self.value)

    def in_unit_disk(self) -> bool:
        return not self.infinite and abs(self.value) < 1.0

    def on_unit_circle(self, tol: float = 0.0) -> bool:
        return not self.infinite and abs(abs(self.value) - 1.0) <= tol

    def __complex__(self) -> complex:
        if self.infinite:
            raise ValueError("cannot convert the point at infinity to complex")
        return self.value


def stereographic(p: H2Point) -> ExtComplex:
    """(x1 + i*x2)/(1 - x0); x0 = 1 cannot occur on the hyperboloid."""
    v = p.point
    denom = 1.0 - v.x0
    if denom == 0.0:
        # unreachable on the hyperboloid; guard kept for raw-vector misuse
        return ExtComplex.infinity()
    return ExtComplex(complex(v.x1, v.x2) / denom)


def inverse_stereographic(w) -> H2Point:
    """The hyperboloid point (|w|^2 + 1, -2 Re w, -2 Im w)/(|w|^2 - 1).

    Unit-circle points are the ideal boundary (they signal singular points of a
    surface, not normal directions) and are rejected.  w = infinity maps to the
    upper-sheet vertex (1, 0, 0).
    """
    w = ExtComplex.of(w)
    if w.infinite:
        return H2Point(LVec3(1.0, 0.0, 0.0), "upper")
    a = abs(w.value)
    if a == 1.0:
        raise IdealBoundaryError("ideal boundary point: |w| = 1")
    d = a * a - 1.0
    p = LVec3((a * a + 1.0) / d, -2.0 * w.value.real / d, -2.0 * w.value.imag / d)
    return H2Point(p, "upper" if p.x0 > 0 else "lower")
