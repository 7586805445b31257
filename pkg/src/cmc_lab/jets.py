"""Truncated Taylor (jet) arithmetic in one and two variables.

All derivative information in this library flows through these jets: a jet of
degree D at a base point stores the Taylor coefficients c[a] (univariate) or
c[a, b] (bivariate, monomial u^a v^b, a + b <= D).  Arithmetic is exact
truncation: the product of two jets is the coefficient convolution restricted
to total degree <= D, and elementary functions are composed through their
Taylor series, which is exact through degree D because the non-constant part
of a jet is nilpotent in the truncated algebra.

Degree is capped at 5: the fifth-order directional derivatives consumed by the
cuspidal-edge criterion are the deepest anything here needs, and a fixed cap
keeps every coefficient array the same small shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DEGREE = 5


class JetError(Exception):
    pass


class JetDomainError(JetError):
    """Elementary function evaluated outside its domain ("jet domain error")."""


class JetDivisionError(JetError):
    """Division by a jet whose value coefficient is zero ("jet division singular")."""


class JetOrderError(JetError):
    """Differentiation requested on a degree-0 jet ("jet order exhausted")."""


def _tri_mask(degree: int) -> np.ndarray:
    a = np.arange(degree + 1)
    return (a[:, None] + a[None, :]) <= degree


class Jet2:
    """Bivariate truncated Taylor polynomial at a base point.

    coeffs[a, b] is the Taylor coefficient of (u - u0)^a (v - v0)^b, i.e.
    d^{a+b} f / du^a dv^b / (a! b!).
    """

    __slots__ = ("base", "degree", "c")

    def __init__(self, base, degree, coeffs):
        if not (0 <= degree <= MAX_DEGREE):
            raise JetError(f"degree must be in [0, {MAX_DEGREE}], got {degree}")
        self.base = (float(base[0]), float(base[1]))
        self.degree = int(degree)
        c = np.asarray(coeffs)
        if c.shape != (degree + 1, degree + 1):
            raise JetError(f"coefficient array must be {(degree+1, degree+1)}, got {c.shape}")
        self.c = c

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value, base=(0.0, 0.0), degree=MAX_DEGREE):
        dtype = complex if isinstance(value, complex) else float
        c = np.zeros((degree + 1, degree + 1), dtype=dtype)
        c[0, 0] = value
        return cls(base, degree, c)

    @classmethod
    def coordinate(cls, base, degree=MAX_DEGREE, axis=0):
        """Jet of the coordinate function u (axis=0) or v (axis=1).

        The value coefficient is the base coordinate itself; the linear
        coefficient in the corresponding variable is 1.
        """
        c = np.zeros((degree + 1, degree + 1))
        c[0, 0] = base[axis]
        if degree >= 1:
            if axis == 0:
                c[1, 0] = 1.0
            else:
                c[0, 1] = 1.0
        return cls(base, degree, c)

    @classmethod
    def variables(cls, base, degree=MAX_DEGREE):
        return (cls.coordinate(base, degree, 0), cls.coordinate(base, degree, 1))

    # -- basic queries -------------------------------------------------------

    @property
    def value(self):
        return self.c[0, 0]

    def partial(self, a: int, b: int):
        """The mixed partial derivative d^{a+b} f / du^a dv^b at the base point."""
        if a + b > self.degree:
            raise JetOrderError("jet order exhausted")
        return self.c[a, b] * math.factorial(a) * math.factorial(b)

    def gradient(self):
        if self.degree < 1:
            raise JetOrderError("jet order exhausted")
        return np.array([self.c[1, 0], self.c[0, 1]])

    def truncated(self, degree: int) -> "Jet2":
        if degree > self.degree:
            raise JetError("cannot raise jet degree")
        if degree == self.degree:
            return self
        return Jet2(self.base, degree, self.c[: degree + 1, : degree + 1].copy())

    def conjugate(self) -> "Jet2":
        return Jet2(self.base, self.degree, np.conj(self.c))

    def real_part(self) -> "Jet2":
        return Jet2(self.base, self.degree, np.real(self.c).copy())

    def imag_part(self) -> "Jet2":
        return Jet2(self.base, self.degree, np.imag(self.c).copy())

    def du(self) -> "Jet2":
        """Jet of df/du; one degree lower (truncation loses the top order)."""
        if self.degree < 1:
            raise JetOrderError("jet order exhausted")
        D = self.degree - 1
        mult = np.arange(1, self.degree + 1)[:, None]
        return Jet2(self.base, D, (self.c[1:, : D + 1] * mult).copy())

    def dv(self) -> "Jet2":
        if self.degree < 1:
            raise JetOrderError("jet order exhausted")
        D = self.degree - 1
        mult = np.arange(1, self.degree + 1)[None, :]
        return Jet2(self.base, D, (self.c[: D + 1, 1:] * mult).copy())

    def __call__(self, u, v):
        """Evaluate the truncated polynomial at (u, v)."""
        du, dv = u - self.base[0], v - self.base[1]
        pu = du ** np.arange(self.degree + 1)
        pv = dv ** np.arange(self.degree + 1)
        return pu @ self.c @ pv

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.base != self.base:
                raise JetError("jets have different base points")
            return other
        if isinstance(other, Jet1):
            raise JetError("cannot mix univariate and bivariate jets")
        return None  # scalar

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self.c.copy().astype(np.result_type(self.c, other))
            c[0, 0] += other
            return Jet2(self.base, self.degree, c)
        D = min(self.degree, o.degree)
        return Jet2(self.base, D, self.c[: D + 1, : D + 1] + o.c[: D + 1, : D + 1])

    __radd__ = __add__

    def __neg__(self):
        return Jet2(self.base, self.degree, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet2(self.base, self.degree, self.c * other)
        D = min(self.degree, o.degree)
        A = self.c[: D + 1, : D + 1]
        B = o.c[: D + 1, : D + 1]
        out = np.zeros((D + 1, D + 1), dtype=np.result_type(A, B))
        for a in range(D + 1):
            for b in range(D + 1 - a):
                x = A[a, b]
                if x == 0:
                    continue
                out[a:, b:] += x * B[: D + 1 - a, : D + 1 - b]
        out[~_tri_mask(D)] = 0
        return Jet2(self.base, D, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return self * (1.0 / other)
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        g0 = self.value
        if g0 == 0:
            raise JetDivisionError("jet division singular")
        series = [(-1.0) ** n / g0 ** (n + 1) for n in range(self.degree + 1)]
        return _compose(self, series)

    def __pow__(self, p):
        if isinstance(p, int):
            if p < 0:
                return self._reciprocal() ** (-p)
            out = Jet2.constant(1.0, self.base, self.degree)
            b = self
            n = p
            while n:
                if n & 1:
                    out = out * b
                b = b * b
                n >>= 1
            return out
        return power(self, p)

    def _nilpotent(self):
        c = self.c.copy()
        c[0, 0] = 0
        return Jet2(self.base, self.degree, c)

    def allclose(self, other, atol=1e-12, rtol=1e-12):
        return self.base == other.base and np.allclose(
            self.c, other.c[: self.degree + 1, : self.degree + 1], atol=atol, rtol=rtol
        )

    def __repr__(self):
        return f"Jet2(base={self.base}, degree={self.degree}, value={self.value})"


class Jet1:
    """Univariate truncated Taylor polynomial; coeffs[a] multiplies (x - x0)^a."""

    __slots__ = ("base", "degree", "c")

    def __init__(self, base, degree, coeffs):
        if not (0 <= degree <= MAX_DEGREE):
            raise JetError(f"degree must be in [0, {MAX_DEGREE}], got {degree}")
        self.base = float(base)
        self.degree = int(degree)
        c = np.asarray(coeffs)
        if c.shape != (degree + 1,):
            raise JetError(f"coefficient array must be {(degree + 1,)}, got {c.shape}")
        self.c = c

    @classmethod
    def constant(cls, value, base=0.0, degree=MAX_DEGREE):
        c = np.zeros(degree + 1, dtype=complex if isinstance(value, complex) else float)
        c[0] = value
        return cls(base, degree, c)

    @classmethod
    def coordinate(cls, base, degree=MAX_DEGREE):
        c = np.zeros(degree + 1)
        c[0] = base
        if degree >= 1:
            c[1] = 1.0
        return cls(base, degree, c)

    @property
    def value(self):
        return self.c[0]

    def derivative_value(self, n: int):
        if n > self.degree:
            raise JetOrderError("jet order exhausted")
        return self.c[n] * math.factorial(n)

    def truncated(self, degree: int) -> "Jet1":
        if degree > self.degree:
            raise JetError("cannot raise jet degree")
        if degree == self.degree:
            return self
        return Jet1(self.base, degree, self.c[: degree + 1].copy())

    def dx(self) -> "Jet1":
        if self.degree < 1:
            raise JetOrderError("jet order exhausted")
        D = self.degree - 1
        return Jet1(self.base, D, (self.c[1:] * np.arange(1, self.degree + 1)).copy())

    def __call__(self, x):
        return np.polyval(self.c[::-1], x - self.base)

    def _coerce(self, other):
        if isinstance(other, Jet1):
            if other.base != self.base:
                raise JetError("jets have different base points")
            return other
        if isinstance(other, Jet2):
            raise JetError("cannot mix univariate and bivariate jets")
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self.c.copy().astype(np.result_type(self.c, other))
            c[0] += other
            return Jet1(self.base, self.degree, c)
        D = min(self.degree, o.degree)
        return Jet1(self.base, D, self.c[: D + 1] + o.c[: D + 1])

    __radd__ = __add__

    def __neg__(self):
        return Jet1(self.base, self.degree, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet1(self.base, self.degree, self.c * other)
        D = min(self.degree, o.degree)
        out = np.zeros(D + 1, dtype=np.result_type(self.c, o.c))
        for a in range(D + 1):
            x = self.c[a]
            if x == 0:
                continue
            out[a:] += x * o.c[: D + 1 - a]
        return Jet1(self.base, D, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return self * (1.0 / other)
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        g0 = self.value
        if g0 == 0:
            raise JetDivisionError("jet division singular")
        series = [(-1.0) ** n / g0 ** (n + 1) for n in range(self.degree + 1)]
        return _compose(self, series)

    def __pow__(self, p):
        if isinstance(p, int):
            if p < 0:
                return self._reciprocal() ** (-p)
            out = Jet1.constant(1.0, self.base, self.degree)
            b = self
            n = p
            while n:
                if n & 1:
                    out = out * b
                b = b * b
                n >>= 1
            return out
        return power(self, p)

    def _nilpotent(self):
        c = self.c.copy()
        c[0] = 0
        return Jet1(self.base, self.degree, c)

    def compose_inverse(self) -> "Jet1":
        """Jet of the inverse function x(y) at y0 = self.value.

        Requires a nonzero linear coefficient.  Solved order by order from
        (self o inverse)(y) = y.
        """
        if self.degree < 1 or self.c[1] == 0:
            raise JetDomainError("jet not invertible: vanishing first derivative")
        D = self.degree
        y0 = self.value
        inv = np.zeros(D + 1)
        inv[0] = self.base
        inv[1] = 1.0 / self.c[1]
        for n in range(2, D + 1):
            # coefficient of (y - y0)^n in self(inv(y)); must equal 0
            partial = Jet1(y0, D, np.concatenate([inv[:n], np.zeros(D + 1 - n)]))
            comp = _compose_poly(self, partial)
            inv[n] = -comp.c[n] / self.c[1]
        return Jet1(y0, D, inv)

    def allclose(self, other, atol=1e-12, rtol=1e-12):
        return self.base == other.base and np.allclose(
            self.c, other.c[: self.degree + 1], atol=atol, rtol=rtol
        )

    def __repr__(self):
        return f"Jet1(base={self.base}, degree={self.degree}, value={self.value})"


def _compose(jet, series):
    """Horner evaluation of sum_n series[n] * (jet - value)^n in the jet algebra."""
    hat = jet._nilpotent()
    out = hat * 0 + series[-1]
    for n in range(len(series) - 2, -1, -1):
        out = out * hat + series[n]
    return out


def _compose_poly(outer: Jet1, inner: Jet1) -> Jet1:
    """outer(inner(y)) where inner.value must equal outer.base."""
    if not np.isclose(inner.value, outer.base, rtol=0, atol=1e-12):
        raise JetError("composition base mismatch")
    hat = inner._nilpotent()
    out = hat * 0 + outer.c[-1]
    for n in range(outer.degree - 1, -1, -1):
        out = out * hat + outer.c[n]
    return out


compose1 = _compose_poly


def compose2(F: Jet2, U: Jet2, V: Jet2) -> Jet2:
    """F(U, V) for bivariate jets U, V based at the new point, with values at F.base."""
    du = U - F.base[0]
    dv = V - F.base[1]
    D = min(U.degree, V.degree)
    pu = [Jet2.constant(1.0, U.base, D)]
    pv = [Jet2.constant(1.0, U.base, D)]
    for _ in range(F.degree):
        pu.append(pu[-1] * du)
        pv.append(pv[-1] * dv)
    out = Jet2.constant(0.0, U.base, D)
    for a in range(F.degree + 1):
        for b in range(F.degree + 1 - a):
            if F.c[a, b] != 0:
                out = out + F.c[a, b] * (pu[a] * pv[b])
    return out


def compose_curve(F: Jet2, cu: Jet1, cv: Jet1) -> Jet1:
    """Restrict a bivariate jet to a parametrized curve (cu(s), cv(s))."""
    du = cu - F.base[0]
    dv = cv - F.base[1]
    D = min(cu.degree, cv.degree)
    pu = [Jet1.constant(1.0, cu.base, D)]
    pv = [Jet1.constant(1.0, cu.base, D)]
    for _ in range(F.degree):
        pu.append(pu[-1] * du)
        pv.append(pv[-1] * dv)
    out = Jet1.constant(0.0, cu.base, D)
    for a in range(F.degree + 1):
        for b in range(F.degree + 1 - a):
            if F.c[a, b] != 0:
                out = out + F.c[a, b] * (pu[a] * pv[b])
    return out


# -- elementary functions ----------------------------------------------------


def _is_jet(x):
    return isinstance(x, (Jet1, Jet2))


def _series_from_derivative(jet, deriv_builder, value_fn):
    """Taylor coefficients of f at v0 from a rational expression for f'.

    deriv_builder(x) must build the jet of f' out of rational operations on a
    coordinate jet x; the coefficients of f follow by termwise integration.
    """
    v0 = jet.value
    D = jet.degree
    if D == 0:
        return [value_fn(v0)]
    x = Jet1.coordinate(v0, D - 1)
    u = deriv_builder(x)
    return [value_fn(v0)] + [u.c[n] / (n + 1) for n in range(D)]


def sqrt(x):
    if not _is_jet(x):
        return math.sqrt(x)
    v0 = x.value
    if not (v0 > 0):
        raise JetDomainError("jet domain error: sqrt requires positive value coefficient")
    s = math.sqrt(v0)
    series = [s]
    for n in range(1, x.degree + 1):
        # binomial(1/2, n) * v0^(1/2 - n)
        b = 1.0
        for i in range(n):
            b *= (0.5 - i) / (i + 1)
        series.append(b * v0 ** (0.5 - n) )
    return _compose(x, series)


def exp(x):
    if not _is_jet(x):
        return math.exp(x)
    e = np.exp(x.value)
    series = [e / math.factorial(n) for n in range(x.degree + 1)]
    return _compose(x, series)


def log(x):
    if not _is_jet(x):
        return math.log(x)
    v0 = x.value
    if not (np.real(v0) > 0 and np.imag(v0) == 0):
        raise JetDomainError("jet domain error: log requires positive value coefficient")
    series = [math.log(v0)] + [
        (-1.0) ** (n + 1) / (n * v0**n) for n in range(1, x.degree + 1)
    ]
    return _compose(x, series)


def sin(x):
    if not _is_jet(x):
        return math.sin(x)
    s, c = np.sin(x.value), np.cos(x.value)
    cycle = [s, c, -s, -c]
    series = [cycle[n % 4] / math.factorial(n) for n in range(x.degree + 1)]
    return _compose(x, series)


def cos(x):
    if not _is_jet(x):
        return math.cos(x)
    s, c = np.sin(x.value), np.cos(x.value)
    cycle = [c, -s, -c, s]
    series = [cycle[n % 4] / math.factorial(n) for n in range(x.degree + 1)]
    return _compose(x, series)


def sinh(x):
    if not _is_jet(x):
        return math.sinh(x)
    s, c = np.sinh(x.value), np.cosh(x.value)
    series = [(s if n % 2 == 0 else c) / math.factorial(n) for n in range(x.degree + 1)]
    return _compose(x, series)


def cosh(x):
    if not _is_jet(x):
        return math.cosh(x)
    s, c = np.sinh(x.value), np.cosh(x.value)
    series = [(c if n % 2 == 0 else s) / math.factorial(n) for n in range(x.degree + 1)]
    return _compose(x, series)


def arctan(x):
    if not _is_jet(x):
        return math.atan(x)
    series = _series_from_derivative(x, lambda t: 1.0 / (1.0 + t * t), math.atan)
    return _compose(x, series)


def artanh(x):
    if not _is_jet(x):
        return math.atanh(x)
    if not abs(x.value) < 1:
        raise JetDomainError("jet domain error: artanh requires |value| < 1")
    series = _series_from_derivative(x, lambda t: 1.0 / (1.0 - t * t), math.atanh)
    return _compose(x, series)


def power(x, p):
    if not _is_jet(x):
        return x**p
    if isinstance(p, int):
        return x**p
    v0 = x.value
    if not (v0 > 0):
        raise JetDomainError("jet domain error: non-integer power requires positive value")
    series = [v0**p]
    b = 1.0
    for n in range(1, x.degree + 1):
        b *= (p - (n - 1)) / n
        series.append(b * v0 ** (p - n))
    return _compose(x, series)


_ELEM = {
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "sinh": sinh,
    "cosh": cosh,
    "arctan": arctan,
    "artanh": artanh,
    "exp": exp,
    "log": log,
    "power": power,
}

_ARITH = {
    "+": lambda f, g: f + g,
    "-": lambda f, g: f - g,
    "*": lambda f, g: f * g,
    "/": lambda f, g: f / g,
}


def jet_const(value, base=(0.0, 0.0), degree=MAX_DEGREE) -> Jet2:
    return Jet2.constant(value, base, degree)


def jet_coordinate(base, degree=MAX_DEGREE, axis=0) -> Jet2:
    return Jet2.coordinate(base, degree, axis)


def jet_arith(op: str, f, g):
    return _ARITH[op](f, g)


def jet_elem(fn: str, f, *args):
    return _ELEM[fn](f, *args)


# -- vector fields -----------------------------------------------------------


@dataclass(frozen=True)
class VectorFieldJet:
    """Coefficient jets (e1, e2) of the planar field e1*d_u + e2*d_v."""

    e1: Jet2
    e2: Jet2

    def __post_init__(self):
        if self.e1.base != self.e2.base or self.e1.degree != self.e2.degree:
            raise JetError("vector field components must share base point and degree")

    @classmethod
    def constant(cls, e1, e2, base=(0.0, 0.0), degree=MAX_DEGREE):
        return cls(Jet2.constant(e1, base, degree), Jet2.constant(e2, base, degree))

    @property
    def base(self):
        return self.e1.base


def apply_vector_field(field: VectorFieldJet, f: Jet2) -> Jet2:
    """Jet of e1 * df/du + e2 * df/dv; degree drops by one."""
    if f.degree < 1:
        raise JetOrderError("jet order exhausted")
    if field.base != f.base:
        raise JetError("field and jet have different base points")
    D = f.degree - 1
    return field.e1.truncated(min(field.e1.degree, D)) * f.du() + field.e2.truncated(
        min(field.e2.degree, D)
    ) * f.dv()


def iterated_field_derivative(X, field: VectorFieldJet, k: int) -> np.ndarray:
    """Value at the base point of the k-fold field derivative applied to each
    component of the jet triple X.  Exact: no finite differencing."""
    if k > min(j.degree for j in X):
        raise JetOrderError("jet order exhausted")
    out = []
    for comp in X:
        j = comp
        for _ in range(k):
            j = apply_vector_field(field, j)
        out.append(j.value)
    return np.array(out)
