"""Constructors for the surface zoo: rotational spacelike CMC (Delaunay)
surfaces with timelike, spacelike, or lightlike axis, their conjugates, and
the standard local singularity models.

Every surface exposes the same contract: degree-5 bivariate jets of the three
components at any admissible parameter point, plus Lorentzian fundamental
forms at spacelike regular points.  The profile integrals are Primitives
(adaptive quadrature for values, integrand jets for derivatives), so jet
coefficients are exact up to the quadrature tolerance in the value slot.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import jets as jt
from .jets import Jet1, Jet2, MAX_DEGREE
from .lorentz import H2Point, lorentz_cross, lorentz_inner
from .quadrature import Integrand, Primitive

DOMAIN_TOL = 1e-8  # admissible interval: where the guarded quantities exceed this
R_CAP = 2.0  # default half-width of the r-interval served to grids/meshes


class SurfaceParameterError(ValueError):
    pass


class SurfaceDomainError(ValueError):
    pass


class NotSpacelikeError(ValueError):
    """Raised by fundamental_forms off the spacelike regular set."""


class MeshEvaluationError(RuntimeError):
    """Surface evaluation failed while building a mesh; carries the grid index."""


def _promote_r(j1: Jet1, t0: float, degree: int) -> Jet2:
    """Lift a univariate jet in r at r0 to a bivariate jet at (r0, t0)."""
    c = np.zeros((degree + 1, degree + 1), dtype=j1.c.dtype)
    n = min(degree, j1.degree) + 1
    c[:n, 0] = j1.c[:n]
    return Jet2((j1.base, t0), degree, c)


def _positive_root(fn, hi=60.0):
    """Smallest positive root of fn, or None; fn(0) must be positive."""
    lo = 0.0
    step = 1e-3
    x = step
    prev = lo
    while x <= hi:
        if fn(x) <= 0:
            return brentq(fn, prev, x, xtol=1e-14, rtol=1e-15)
        prev = x
        x = x * 1.35 + 1e-3
    return None


@dataclass
class Surface:
    """Immutable parametric surface with a degree-5 jet evaluator.

    The evaluator serves jets of the three components of X at (u, v); the
    optional analytic-normal evaluator serves jets of a smooth Euclidean unit
    normal (a frontal normal: defined across singular points).
    """

    family: str
    builder: Callable[[float, float, int], tuple]
    u_range: tuple
    v_range: tuple
    H: Optional[float] = None
    k: Optional[float] = None
    variant: Optional[str] = None
    normal_builder: Optional[Callable[[float, float, int], tuple]] = None
    orientation: int = 1
    meta: dict = field(default_factory=dict)

    def _check_domain(self, u, v):
        if not (self.u_range[0] <= u <= self.u_range[1]):
            raise SurfaceDomainError(
                f"u = {u} outside admissible interval {self.u_range} for {self.family}"
            )

    def jet(self, u: float, v: float, degree: int = MAX_DEGREE):
        self._check_domain(u, v)
        return self.builder(float(u), float(v), degree)

    def point(self, u: float, v: float) -> np.ndarray:
        X = self.jet(u, v, degree=0)
        return np.array([comp.value for comp in X])

    @property
    def has_analytic_normal(self) -> bool:
        return self.normal_builder is not None

    def analytic_normal_jet(self, u: float, v: float, degree: int = MAX_DEGREE):
        if self.normal_builder is None:
            raise ValueError(f"surface {self.family} has no analytic normal")
        self._check_domain(u, v)
        return self.normal_builder(float(u), float(v), degree)

    def __repr__(self):
        ps = ", ".join(
            f"{n}={v}" for n, v in (("H", self.H), ("k", self.k), ("variant", self.variant)) if v is not None
        )
        return f"Surface({self.family}{', ' + ps if ps else ''})"


# -- fundamental forms --------------------------------------------------------


@dataclass(frozen=True)
class FundamentalForms:
    E: float
    F: float
    G: float
    L: float
    M: float
    N: float
    H_mean: float
    nu: H2Point
    q: Optional[complex] = None  # Hopf coefficient, filled only in a conformal chart


def _frame_values(S: Surface, u, v, degree=2):
    X = S.jet(u, v, degree)
    Xu = np.array([c.du().value for c in X])
    Xv = np.array([c.dv().value for c in X])
    Xuu = np.array([c.partial(2, 0) for c in X])
    Xuv = np.array([c.partial(1, 1) for c in X])
    Xvv = np.array([c.partial(0, 2) for c in X])
    return Xu, Xv, Xuu, Xuv, Xvv


def _oriented_normal(S: Surface, Xu, Xv):
    w = lorentz_cross(Xu, Xv).array()
    q = lorentz_inner(w, w)
    if not q < 0:
        raise NotSpacelikeError("not a spacelike regular point")
    return S.orientation * w / math.sqrt(-q)


def fundamental_forms(S: Surface, p, conformal_q: bool = True) -> FundamentalForms:
    """First and second fundamental forms, unit normal, and mean curvature.

    The normal is lorentz_cross(X_u, X_v), normalized to <nu,nu> = -1 and
    oriented (a fixed per-surface sign) so that H_mean matches the surface's
    constructed mean curvature.  Raising off the spacelike regular set keeps
    every downstream consumer honest about where the metric degenerates.
    """
    u, v = p
    Xu, Xv, Xuu, Xuv, Xvv = _frame_values(S, u, v)
    E = lorentz_inner(Xu, Xu)
    F = lorentz_inner(Xu, Xv)
    G = lorentz_inner(Xv, Xv)
    if E * G - F * F <= 0 or E <= 0:
        raise NotSpacelikeError("not a spacelike regular point")
    nu = _oriented_normal(S, Xu, Xv)
    L = lorentz_inner(nu, Xuu)
    M = lorentz_inner(nu, Xuv)
    N = lorentz_inner(nu, Xvv)
    H_mean = (E * N - 2 * F * M + G * L) / (2 * (E * G - F * F))
    q = None
    if conformal_q and abs(E - G) <= 1e-6 * abs(E) and abs(F) <= 1e-6 * abs(E):
        # Hopf coefficient <X_zz, nu> for z = u + iv
        Xzz = (Xuu - Xvv - 2j * Xuv) / 4.0
        q = complex(lorentz_inner(Xzz, nu))
    return FundamentalForms(E, F, G, L, M, N, H_mean, H2Point.of(nu), q)


def _probe_orientation(S: Surface, H: float) -> int:
    """Sign making H_mean = +H, fixed once per surface at construction.

    Mean curvature is smooth and nonvanishing off the singular set, so one
    regular probe orients the whole (connected) chart.
    """
    for frac in (0.5, 0.3, 0.8, 0.65):
        try:
            ff = fundamental_forms(S, (S.u_range[1] * frac, 0.1), conformal_q=False)
        except (NotSpacelikeError, SurfaceDomainError):
            continue
        if abs(ff.H_mean) > 1e-12:
            return 1 if ff.H_mean * H > 0 else -1
    raise SurfaceParameterError("could not orient surface: no usable probe point")


# -- Delaunay families --------------------------------------------------------


def _check_kH(k, H, need_k=True):
    if H == 0:
        raise SurfaceParameterError("H = 0 is excluded (maximal case out of scope)")
    if need_k and k == 1:
        raise SurfaceParameterError("k=1 degenerate (delta has a double root at r=0 scale)")


def delaunay_timelike(k: float, H: float, r_cap: float = R_CAP) -> Surface:
    """Rotational CMC-H surface about a timelike axis; singular cone points on r=0.

    X(r,t) = (1/2H) (int_0^r (tau^2+k-1)/sqrt(delta), r cos 2Ht, r sin 2Ht),
    delta(r) = (r^2+k+1)^2 - 4k.
    """
    _check_kH(k, H)
    k, H = float(k), float(H)

    def delta(x):
        return (x * x + k + 1) ** 2 - 4 * k

    prof = Primitive(Integrand(lambda x: (x * x + k - 1) / jt.sqrt(delta(x))))
    root = _positive_root(lambda x: delta(x) - DOMAIN_TOL)
    r_hi = min(r_cap, root * (1 - 1e-9)) if root else r_cap

    def builder(r0, t0, degree):
        Fj = _promote_r(prof.jet(r0, degree), t0, degree)
        rj = Jet2.coordinate((r0, t0), degree, 0)
        tj = Jet2.coordinate((r0, t0), degree, 1)
        c, s = jt.cos(2 * H * tj), jt.sin(2 * H * tj)
        inv2H = 1.0 / (2 * H)
        return (Fj * inv2H, rj * c * inv2H, rj * s * inv2H)

    S = Surface(
        family="delaunay_timelike",
        builder=builder,
        u_range=(-r_hi, r_hi),
        v_range=(0.0, math.pi / abs(H)),
        H=H,
        k=k,
        meta={"delta": delta, "profile": prof},
    )
    S.orientation = _probe_orientation(S, H)
    return S


def delaunay_spacelike(k: float, H: float, r_cap: float = R_CAP) -> Surface:
    """Rotational CMC-H surface about a spacelike axis.

    X(r,t) = (1/2H) (r cosh 2Ht, r sinh 2Ht, int_0^r (tau^2-k+1)/sqrt(delta)),
    delta(r) = (r^2-k-1)^2 - 4k; admissible |r| below the first zero of delta.
    """
    _check_kH(k, H)
    k, H = float(k), float(H)

    def delta(x):
        return (x * x - k - 1) ** 2 - 4 * k

    prof = Primitive(Integrand(lambda x: (x * x - k + 1) / jt.sqrt(delta(x))))
    root = _positive_root(lambda x: delta(x) - DOMAIN_TOL)
    r_hi = min(r_cap, root * (1 - 1e-9)) if root else r_cap

    def builder(r0, t0, degree):
        Gj = _promote_r(prof.jet(r0, degree), t0, degree)
        rj = Jet2.coordinate((r0, t0), degree, 0)
        tj = Jet2.coordinate((r0, t0), degree, 1)
        ch, sh = jt.cosh(2 * H * tj), jt.sinh(2 * H * tj)
        inv2H = 1.0 / (2 * H)
        return (rj * ch * inv2H, rj * sh * inv2H, Gj * inv2H)

    S = Surface(
        family="delaunay_spacelike",
        builder=builder,
        u_range=(-r_hi, r_hi),
        v_range=(-1.5, 1.5),
        H=H,
        k=k,
        meta={"delta": delta, "profile": prof},
    )
    S.orientation = _probe_orientation(S, H)
    return S


def delaunay_lightlike(variant: str, H: float, r_cap: float = R_CAP) -> Surface:
    """Rotational CMC-H surface about a lightlike axis; closed-form profile.

    X(r,t) = (zeta - r(1 + t^2/4), -rt, zeta + r(1 - t^2/4)) with zeta either
    the arctan profile (variant "i", all r) or the artanh profile
    (variant "ii", |r| < 1).
    """
    _check_kH(None, H, need_k=False)
    H = float(H)
    if variant not in ("i", "ii"):
        raise SurfaceParameterError(f"variant must be 'i' or 'ii', got {variant!r}")
    c8 = 1.0 / (8 * H * H)
    if variant == "i":
        zeta = lambda x: c8 * (-x / (1 + x * x) + jt.arctan(x))
        r_hi = r_cap
    else:
        zeta = lambda x: c8 * (x / (1 - x * x) - jt.artanh(x))
        r_hi = min(r_cap, 1.0 - 1e-6)

    def builder(r0, t0, degree):
        rj = Jet2.coordinate((r0, t0), degree, 0)
        tj = Jet2.coordinate((r0, t0), degree, 1)
        zj = zeta(rj)
        quart = tj * tj * 0.25
        return (zj - rj * (1 + quart), -rj * tj, zj + rj * (1 - quart))

    S = Surface(
        family=f"delaunay_lightlike_{variant}",
        builder=builder,
        u_range=(-r_hi, r_hi),
        v_range=(-2.0, 2.0),
        H=H,
        variant=variant,
        meta={"zeta": zeta},
    )
    S.orientation = _probe_orientation(S, H)
    return S


# -- conjugates ----------------------------------------------------------------


def _template_T(lam_jet, rho_jet, Phi_jet, phi_t, h):
    def builder(r0, t0, degree):
        lam = _promote_r(lam_jet(r0, degree), t0, degree)
        rho = _promote_r(rho_jet(r0, degree), t0, degree)
        tj = Jet2.coordinate((r0, t0), degree, 1)
        phi = _promote_r(Phi_jet(r0, degree), t0, degree) + phi_t * tj
        return (lam + h * phi, rho * jt.cos(phi), rho * jt.sin(phi))

    return builder


def _template_S(lam_jet, rho_jet, Phi_jet, phi_t, h):
    def builder(r0, t0, degree):
        lam = _promote_r(lam_jet(r0, degree), t0, degree)
        rho = _promote_r(rho_jet(r0, degree), t0, degree)
        tj = Jet2.coordinate((r0, t0), degree, 1)
        phi = _promote_r(Phi_jet(r0, degree), t0, degree) + phi_t * tj
        return (rho * jt.sinh(phi), rho * jt.cosh(phi), lam + h * phi)

    return builder


def _template_L(lam_jet, rho_jet, Phi_jet, phi_t, h):
    def builder(r0, t0, degree):
        lam = _promote_r(lam_jet(r0, degree), t0, degree)
        rho = _promote_r(rho_jet(r0, degree), t0, degree)
        tj = Jet2.coordinate((r0, t0), degree, 1)
        phi = _promote_r(Phi_jet(r0, degree), t0, degree) + phi_t * tj
        p2 = phi * phi
        p3 = p2 * phi
        return (
            lam - rho - rho * p2 + h * (p3 / 3.0 + phi),
            -2.0 * rho * phi + h * p2,
            lam + rho - rho * p2 + h * (p3 / 3.0 - phi),
        )

    return builder


_TEMPLATES = {"T": _template_T, "S": _template_S, "L": _template_L}


def conjugate_of(
    family: str,
    k: Optional[float] = None,
    H: float = 0.5,
    variant: Optional[str] = None,
    r_cap: float = R_CAP,
) -> Surface:
    """The conjugate (quarter-turn associate) of a Delaunay surface, in the
    closed-form templates; rho, lambda, phi per branch of the classification.

    Branches: timelike axis with k > -1 ("I-i", template T), k < -1 ("I-i",
    template S), k = -1 ("I-ii", template L); spacelike axis mirrored
    ("II-i"/"II-ii"); lightlike axis variant i -> T ("III-i"), variant ii -> S
    ("III-ii").
    """
    _check_kH(k, H, need_k=family in ("delaunay_timelike", "delaunay_spacelike"))
    H = float(H)
    normal_builder = None

    if family in ("delaunay_timelike", "delaunay_spacelike"):
        if k is None:
            raise SurfaceParameterError("k is required for Delaunay axis families")
        k = float(k)
        timelike = family == "delaunay_timelike"
        sgn = 1.0 if k + 1 > 0 else -1.0
        absK = abs(k + 1)
        if timelike:
            delta = lambda x: (x * x + k + 1) ** 2 - 4 * k
            Delta = lambda x: 2 * (k + 1) * x * x + (1 - k) ** 2
        else:
            delta = lambda x: (x * x - k - 1) ** 2 - 4 * k
            Delta = lambda x: -2 * (k + 1) * x * x + (1 - k) ** 2

        if k == -1.0:
            # lightlike template with the quartic profile integrals
            h = H
            rho_jet = lambda r0, d: Jet1.coordinate(r0, d) * 0.5
            lam_p = Primitive(Integrand(
                lambda x: x * x * (jt.sqrt(x**4 + 4) + x * x) / (4 * H * H * jt.sqrt(x**4 + 4))
            ))
            Phi_p = Primitive(Integrand(
                lambda x: (jt.sqrt(x**4 + 4) + x * x) / (2 * H * jt.sqrt(x**4 + 4))
            ))
            lam_jet, Phi_jet, phi_t = lam_p.jet, Phi_p.jet, 1.0
            template, branch = "L", ("I-ii" if timelike else "II-ii")
            r_hi = r_cap
        else:
            h = (1 - k) / (2 * H * absK)
            rho_jet = lambda r0, d: jt.sqrt(
                Jet1.constant(0.0, r0, d) + Delta(Jet1.coordinate(r0, d))
            ) / (2 * H * absK)
            lam_sign = 1.0 if timelike else -sgn
            phi_sign = sgn if timelike else 1.0
            lam_p = Primitive(Integrand(
                lambda x: math.sqrt(2 * absK) * x**4 / (H * jt.sqrt(delta(x)) * Delta(x))
            ))
            Phi_p = Primitive(Integrand(
                lambda x: math.sqrt(2 * absK) * (1 - k) * x * x / (jt.sqrt(delta(x)) * Delta(x))
            ))
            lam_jet = lambda r0, d: lam_p.jet(r0, d) * lam_sign
            Phi_jet = lambda r0, d: Phi_p.jet(r0, d) * phi_sign
            phi_t = -math.sqrt(absK / 2) * (1.0 if timelike else sgn)
            template = ("T" if k > -1 else "S") if timelike else ("S" if k > -1 else "T")
            branch = "I-i" if timelike else "II-i"
            roots = [r for r in (
                _positive_root(lambda x: delta(x) - DOMAIN_TOL),
                _positive_root(lambda x: Delta(x) - DOMAIN_TOL),
            ) if r is not None]
            r_hi = min([r_cap] + [r * (1 - 1e-9) for r in roots])

            if timelike and k > -1:
                normal_builder = _conj_Ii_normal(k, H, delta, Delta, Phi_jet, phi_t)

    elif family.startswith("delaunay_lightlike"):
        variant = variant or (family.rsplit("_", 1)[-1] if family[-1] in "i" else None)
        if variant not in ("i", "ii"):
            raise SurfaceParameterError("lightlike conjugate needs variant 'i' or 'ii'")
        s2 = math.sqrt(2.0)
        if variant == "i":
            h = -1.0 / (2 * H)
            rho_jet = lambda r0, d: jt.sqrt(2 * Jet1.coordinate(r0, d) ** 2 + 1) / (2 * H)
            lam_jet = lambda r0, d: (
                -s2 * Jet1.coordinate(r0, d)
                + 2 * s2 * jt.arctan(Jet1.coordinate(r0, d))
                - jt.arctan(s2 * Jet1.coordinate(r0, d))
            ) / (2 * H)
            Phi_jet = lambda r0, d: s2 * jt.arctan(Jet1.coordinate(r0, d)) - jt.arctan(
                s2 * Jet1.coordinate(r0, d)
            )
            template, branch, r_hi = "T", "III-i", r_cap
        else:
            h = 1.0 / (2 * H)
            rho_jet = lambda r0, d: jt.sqrt(1 - 2 * Jet1.coordinate(r0, d) ** 2) / (2 * H)
            lam_jet = lambda r0, d: (
                s2 * Jet1.coordinate(r0, d)
                - 2 * s2 * jt.artanh(Jet1.coordinate(r0, d))
                + jt.artanh(s2 * Jet1.coordinate(r0, d))
            ) / (2 * H)
            Phi_jet = lambda r0, d: s2 * jt.artanh(Jet1.coordinate(r0, d)) - jt.artanh(
                s2 * Jet1.coordinate(r0, d)
            )
            template, branch, r_hi = "S", "III-ii", min(r_cap, 1 / s2 - 1e-6)
        phi_t = 2 * H / s2
        k = None
    else:
        raise SurfaceParameterError(f"no conjugate template for family {family!r}")

    builder = _TEMPLATES[template](lam_jet, rho_jet, Phi_jet, phi_t, h)
    period = 2 * math.pi / abs(phi_t) if template == "T" else 3.0
    S = Surface(
        family=f"conjugate_of_{family}",
        builder=builder,
        u_range=(-r_hi, r_hi),
        v_range=(0.0, period) if template == "T" else (-period / 2, period / 2),
        H=H,
        k=k,
        variant=variant,
        normal_builder=normal_builder,
        meta={"template": template, "branch": branch, "h": h,
              "rho0": float(rho_jet(0.0, 0).value), "phi_t": phi_t},
    )
    S.orientation = _probe_orientation(S, H)
    return S


def _conj_Ii_normal(k, H, delta, Delta, Phi_jet, phi_t):
    """Analytic frontal unit normal of the timelike-axis conjugate, k > -1.

    Co-oriented with X_r x X_t on r > 0 (the closed form whose signed area
    density is r sqrt(delta - (k+1) r^2) / (H sqrt(k+1) sqrt(delta))).
    """
    sK = math.sqrt(k + 1)

    def builder(r0, t0, degree):
        rj1 = Jet1.coordinate(r0, degree)
        d = delta(rj1) + Jet1.constant(0.0, r0, degree)
        D = Delta(rj1) + Jet1.constant(0.0, r0, degree)
        sd = _promote_r(jt.sqrt(d), t0, degree)
        sD = _promote_r(jt.sqrt(D), t0, degree)
        core = _promote_r(jt.sqrt(d - (k + 1) * rj1 * rj1), t0, degree)
        rj = Jet2.coordinate((r0, t0), degree, 0)
        tj = Jet2.coordinate((r0, t0), degree, 1)
        phi = _promote_r(Phi_jet(r0, degree), t0, degree) + phi_t * tj
        cphi, sphi = jt.cos(phi), jt.sin(phi)
        pref = -1.0 / (math.sqrt(2) * sD * core)
        r3 = rj * rj * rj
        n0 = pref * (sd * sD)
        n1 = pref * (-math.sqrt(2) * sK * r3 * cphi - (k - 1) * sd * sphi)
        n2 = pref * (-math.sqrt(2) * sK * r3 * sphi + (k - 1) * sd * cphi)
        return (n0, n1, n2)

    return builder


# -- standard local models -----------------------------------------------------


def standard_model(name: str) -> Surface:
    """Polynomial/trigonometric local models with exact jets.

    fold: (u, v^2, 0); cuspidal_edge: (u, v^2, v^3); cusp25: (u, v^2, v^5);
    cone: (v cos u, v sin u, v).  fold and cusp25 carry their smooth frontal
    normals analytically.
    """
    if name == "fold":
        def builder(u0, v0, degree):
            uj = Jet2.coordinate((u0, v0), degree, 0)
            vj = Jet2.coordinate((u0, v0), degree, 1)
            return (uj, vj * vj, Jet2.constant(0.0, (u0, v0), degree))

        def nb(u0, v0, degree):
            z = Jet2.constant(0.0, (u0, v0), degree)
            return (z, z, Jet2.constant(1.0, (u0, v0), degree))

        return Surface("model_fold", builder, (-4.0, 4.0), (-4.0, 4.0), normal_builder=nb)

    if name == "cuspidal_edge":
        def builder(u0, v0, degree):
            uj = Jet2.coordinate((u0, v0), degree, 0)
            vj = Jet2.coordinate((u0, v0), degree, 1)
            return (uj, vj * vj, vj * vj * vj)

        return Surface("model_cuspidal_edge", builder, (-4.0, 4.0), (-4.0, 4.0))

    if name == "cusp25":
        def builder(u0, v0, degree):
            uj = Jet2.coordinate((u0, v0), degree, 0)
            vj = Jet2.coordinate((u0, v0), degree, 1)
            return (uj, vj * vj, vj**5)

        def nb(u0, v0, degree):
            # X_u x X_v = v (0, -5v^3, 2): unit normal (0, -5v^3, 2)/|.|
            vj = Jet2.coordinate((u0, v0), degree, 1)
            z = Jet2.constant(0.0, (u0, v0), degree)
            mag = jt.sqrt(25.0 * vj**6 + 4.0)
            return (z, -5.0 * vj**3 / mag, 2.0 / mag)

        return Surface("model_25", builder, (-4.0, 4.0), (-4.0, 4.0), normal_builder=nb)

    if name == "cone":
        def builder(u0, v0, degree):
            uj = Jet2.coordinate((u0, v0), degree, 0)
            vj = Jet2.coordinate((u0, v0), degree, 1)
            return (vj * jt.cos(uj), vj * jt.sin(uj), vj)

        return Surface("model_cone", builder, (-4.0, 4.0), (-4.0, 4.0))

    raise SurfaceParameterError(f"unknown model {name!r}")


def custom_surface(builder, u_range=(-2.0, 2.0), v_range=(-2.0, 2.0), **kw) -> Surface:
    return Surface("custom", builder, u_range, v_range, **kw)


# -- mesh export ---------------------------------------------------------------


@dataclass
class Mesh:
    vertices: np.ndarray  # (n, 3), (x0, x1, x2) coordinates
    faces: np.ndarray  # (m, 3), 0-based vertex indices
    sidecar: dict

    def write_obj(self, path, sidecar_path=None):
        with open(path, "w") as fh:
            fh.write("# cmc-lab surface mesh; vertex order (x1, x2, x0)\n")
            for x0, x1, x2 in self.vertices:
                fh.write(f"v {float(x1)!r} {float(x2)!r} {float(x0)!r}\n")
            for a, b, c in self.faces:
                fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
        if sidecar_path is None:
            sidecar_path = str(path) + ".json"
        with open(sidecar_path, "w") as fh:
            json.dump(self.sidecar, fh, indent=2, sort_keys=True)
        return sidecar_path


def mesh_export(S: Surface, nu: int, nv: int, u_range=None, v_range=None) -> Mesh:
    """Sample X on a regular grid; two consistently oriented triangles per cell.

    Conelike axes pinch automatically: all grid vertices with the same image
    coincide in the vertex list (no welding needed for viewers).
    """
    if nu < 2 or nv < 2:
        raise ValueError("grid must be 2D (at least 2 samples per direction)")
    u_range = u_range or S.u_range
    v_range = v_range or S.v_range
    us = np.linspace(u_range[0], u_range[1], nu)
    vs = np.linspace(v_range[0], v_range[1], nv)
    verts = np.empty((nu * nv, 3))
    for i, u in enumerate(us):
        for j, v in enumerate(vs):
            try:
                verts[i * nv + j] = S.point(u, v)
            except Exception as e:
                raise MeshEvaluationError(
                    f"evaluation failed at grid index ({i},{j}), (u,v)=({u},{v}): {e}"
                ) from e
    faces = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            a = i * nv + j
            b = (i + 1) * nv + j
            c = (i + 1) * nv + j + 1
            d = i * nv + j + 1
            faces.append((a, b, c))
            faces.append((a, c, d))
    sidecar = {
        "family": S.family,
        "H": S.H,
        "k": S.k,
        "variant": S.variant,
        "grid": {"nu": nu, "nv": nv},
        "domain": {"u": list(map(float, u_range)), "v": list(map(float, v_range))},
    }
    return Mesh(verts, np.array(faces, dtype=int), sidecar)
