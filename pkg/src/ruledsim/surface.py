"""Ruled surfaces r(u, v) = f(u) + v q(u) and their pointwise invariants.

The director q is kept unit-length; the striction curve (locus of central
points) together with the distribution parameter drives everything downstream:
classification, the moving frame, and similarity testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr
from .curves import ArcLengthMap, CurveSpec, EPS_SPEED, SampledCurve, build_arc_length_map
from .errors import CylindricalSurfaceError, RuledSimError, SingularPointError

TOL_DEV = 1e-8        # developability threshold on |distribution parameter|
UNIT_TOL = 1e-12      # required accuracy of the unit director


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _cross(a, b):
    return np.cross(a, b)


def _det3(a, b, c):
    return _dot(a, _cross(b, c))


def _normalize_rows(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


@dataclass(frozen=True, eq=False)
class StrictionSample:
    u: float
    point: np.ndarray
    v0: float
    d: float


@dataclass(frozen=True)
class SurfaceClass:
    kind: str                   # "cylindrical" | "developable" | "skew"
    conoid: bool | None         # k1 != 0 and k2 == 0; None if frame not computable
    max_abs_d: float | None
    max_director_speed: float


class StrictionData:
    """Striction samples on the u-grid plus the arc-length map of c."""

    def __init__(self, u, points, v0, d, arc: ArcLengthMap):
        self.u = u
        self.points = points
        self.v0 = v0
        self.d = d
        self.arc = arc

    def samples(self):
        return [StrictionSample(float(ui), pi.copy(), float(vi), float(di))
                for ui, pi, vi, di in zip(self.u, self.points, self.v0, self.d)]


class RuledSurface:
    """Base curve + unit director over a shared u-domain.

    When ``normalize_director`` is set, directors are renormalized pointwise
    at load; otherwise non-unit directors are rejected.  Values are immutable
    after construction and all operations are pure functions of them.
    """

    def __init__(self, base, director, name: str = "",
                 normalize_director: bool = True):
        if (abs(base.u_min - director.u_min) > 1e-12
                or abs(base.u_max - director.u_max) > 1e-12):
            raise ValueError("base and director must share the same u-domain")
        self.name = name
        self.base = base
        self.normalize_director = bool(normalize_director)
        self.director = self._prepare_director(director)
        self.u_min = base.u_min
        self.u_max = base.u_max
        self.sample_count = base.sample_count
        self._cache: dict = {}

    # -- construction helpers ------------------------------------------------

    def _prepare_director(self, director):
        g = director.grid()
        norms = np.linalg.norm(director.point(g), axis=-1)
        dev = float(np.max(np.abs(norms - 1.0)))
        if dev <= UNIT_TOL:
            return director
        if not self.normalize_director:
            raise ValueError(
                f"director is not unit length (max deviation {dev:.3e}) and "
                "normalization is disabled")
        if isinstance(director, CurveSpec):
            nrm = expr.call("sqrt", expr.add(
                expr.pow_(director.x, expr.const(2.0)),
                expr.add(expr.pow_(director.y, expr.const(2.0)),
                         expr.pow_(director.z, expr.const(2.0)))))
            return CurveSpec(expr.div(director.x, nrm), expr.div(director.y, nrm),
                             expr.div(director.z, nrm), director.u_min,
                             director.u_max, director.sample_count)
        return SampledCurve(g, _normalize_rows(director.point(g)))

    @property
    def exact_derivatives(self) -> bool:
        return bool(getattr(self.base, "exact_derivatives", False)
                    and getattr(self.director, "exact_derivatives", False))

    def grid(self) -> np.ndarray:
        return self.base.grid()

    # -- pointwise geometry ----------------------------------------------------

    def point(self, u, v):
        """Surface point f(u) + v q(u)."""
        f = self.base.point(u)
        q = self.director.point(u)
        v = np.asarray(v, dtype=float)
        return f + v[..., None] * q if v.ndim else f + v * q

    def director_speed(self, u):
        return np.linalg.norm(self.director.point(u, 1), axis=-1)

    def max_director_speed(self) -> float:
        key = "max_dir_speed"
        if key not in self._cache:
            self._cache[key] = float(np.max(self.director_speed(self.grid())))
        return self._cache[key]

    def is_cylindrical(self, eps_speed: float = EPS_SPEED) -> bool:
        return self.max_director_speed() <= eps_speed

    def unit_normal(self, u, v, eps: float = EPS_SPEED):
        """Unit surface normal ((df + v dq) x q) normalized.

        Raises SingularPointError where the tangent vectors degenerate."""
        fd = self.base.point(u, 1)
        q = self.director.point(u)
        qd = self.director.point(u, 1)
        vv = np.asarray(v, dtype=float)
        ru = fd + (vv[..., None] if vv.ndim else vv) * qd
        n = _cross(ru, q)
        mag = np.linalg.norm(n, axis=-1)
        if np.any(mag < eps):
            bad_u = np.broadcast_to(np.asarray(u, dtype=float), mag.shape) if np.ndim(mag) else u
            where = float(np.atleast_1d(bad_u)[int(np.argmax(np.atleast_1d(mag < eps)))])
            raise SingularPointError(f"singular surface point at u={where!r}")
        return n / (mag[..., None] if np.ndim(mag) else mag)

    def asymptotic_normal(self, u, eps_speed: float = EPS_SPEED):
        """Limit direction of the normal along a ruling, q x dq / |dq|."""
        q = self.director.point(u)
        qd = self.director.point(u, 1)
        mag = np.linalg.norm(qd, axis=-1)
        if np.any(mag < eps_speed):
            raise CylindricalSurfaceError(
                "asymptotic normal undefined on a cylindrical ruling (dq = 0)")
        n = _cross(q, qd)
        return n / (mag[..., None] if np.ndim(mag) else mag)

    def central_normal(self, u, eps_speed: float = EPS_SPEED):
        """Unit vector along dq, the surface normal on the striction curve."""
        qd = self.director.point(u, 1)
        mag = np.linalg.norm(qd, axis=-1)
        if np.any(mag < eps_speed):
            raise CylindricalSurfaceError(
                "central normal undefined on a cylindrical ruling (dq = 0)")
        return qd / (mag[..., None] if np.ndim(mag) else mag)

    def distribution_parameter(self, u, eps_speed: float = EPS_SPEED):
        """det(df, q, dq) / <dq, dq>; zero exactly on torsal rulings."""
        fd = self.base.point(u, 1)
        q = self.director.point(u)
        qd = self.director.point(u, 1)
        denom = _dot(qd, qd)
        if np.any(np.sqrt(denom) < eps_speed):
            raise CylindricalSurfaceError(
                "distribution parameter undefined on a cylindrical ruling")
        return _det3(fd, q, qd) / denom

    def _det_raw(self, u):
        """det(df, q, dq) without the denominator (for root bracketing)."""
        fd = self.base.point(u, 1)
        q = self.director.point(u)
        qd = self.director.point(u, 1)
        return _det3(fd, q, qd)

    def _distribution_masked(self, u, eps_speed: float = EPS_SPEED):
        """d where defined, NaN on (near-)cylindrical rulings; plus the mask."""
        fd = self.base.point(u, 1)
        q = self.director.point(u)
        qd = self.director.point(u, 1)
        denom = _dot(qd, qd)
        defined = np.sqrt(denom) >= eps_speed
        d = np.full(np.shape(denom), np.nan)
        det = _det3(fd, q, qd)
        d[defined] = det[defined] / denom[defined]
        return d, defined

    # -- striction curve -------------------------------------------------------

    def strictional_distance(self, u, order: int = 0):
        """v0 = -<dq, df>/<dq, dq> and its first two u-derivatives.

        At isolated exact zeros of dq the quotient is 0/0; those points get
        the value 0 so a frame with gaps stays computable (the rulings there
        are reported as gaps downstream)."""
        fd = self.base.point(u, 1)
        qd = self.director.point(u, 1)
        A = _dot(qd, fd)
        B = _dot(qd, qd)
        if order == 0:
            return _safe_div(-A, B)
        fdd = self.base.point(u, 2)
        qdd = self.director.point(u, 2)
        Ad = _dot(qdd, fd) + _dot(qd, fdd)
        Bd = 2.0 * _dot(qdd, qd)
        if order == 1:
            return _safe_div(-(Ad * B - A * Bd), B**2)
        fddd = self.base.point(u, 3)
        qddd = self.director.point(u, 3)
        Add = _dot(qddd, fd) + 2.0 * _dot(qdd, fdd) + _dot(qd, fddd)
        Bdd = 2.0 * _dot(qddd, qd) + 2.0 * _dot(qdd, qdd)
        num = (Add * B - A * Bdd) * B - 2.0 * Bd * (Ad * B - A * Bd)
        if order == 2:
            return _safe_div(-num, B**3)
        raise ValueError("strictional distance derivatives available to order 2")

    def striction_point(self, u, order: int = 0):
        """Striction curve c = f + v0 q and its u-derivatives (order <= 2)."""
        q = self.director.point(u)
        v0 = self.strictional_distance(u)
        if order == 0:
            return self.base.point(u) + (v0[..., None] if np.ndim(v0) else v0) * q
        qd = self.director.point(u, 1)
        v0d = self.strictional_distance(u, 1)
        if order == 1:
            terms = (self.base.point(u, 1), _scale(v0d, q), _scale(v0, qd))
            return terms[0] + terms[1] + terms[2]
        qdd = self.director.point(u, 2)
        v0dd = self.strictional_distance(u, 2)
        if order == 2:
            return (self.base.point(u, 2) + _scale(v0dd, q)
                    + 2.0 * _scale(v0d, qd) + _scale(v0, qdd))
        raise ValueError("striction point derivatives available to order 2")

    def striction_curve(self) -> "StrictionCurve":
        return StrictionCurve(self)

    def striction(self, eps_speed: float = EPS_SPEED) -> StrictionData:
        """Striction samples on the u-grid plus the arc-length map of c.

        Errors on cylindrical surfaces and on singular striction curves
        (e.g. edge-of-regression cusps), naming the offending u."""
        key = ("striction", eps_speed)
        if key in self._cache:
            return self._cache[key]
        if self.is_cylindrical(eps_speed):
            raise CylindricalSurfaceError(
                "striction curve undefined for a cylindrical surface")
        g = self.grid()
        v0 = self.strictional_distance(g)
        pts = self.striction_point(g)
        d, _ = self._distribution_masked(g, eps_speed)
        arc = build_arc_length_map(
            lambda uu: np.linalg.norm(self.striction_point(uu, 1), axis=-1),
            self.u_min, self.u_max, self.sample_count - 1,
            eps_speed=eps_speed, what="striction curve")
        data = StrictionData(g, pts, v0, d, arc)
        self._cache[key] = data
        return data

    # -- classification --------------------------------------------------------

    def torsal_rulings(self, eps_speed: float = EPS_SPEED,
                       tol: float = 1e-10) -> list[float]:
        """Parameters u where the distribution parameter vanishes.

        Sign changes of det(df, q, dq) on the grid are refined by bisection
        until |d| <= tol; grid points with |d| already below tol (tangent,
        non-crossing zeros) are reported directly."""
        if self.is_cylindrical(eps_speed):
            raise CylindricalSurfaceError(
                "torsal rulings undefined for a cylindrical surface")
        g = self.grid()
        d, defined = self._distribution_masked(g, eps_speed)
        det = self._det_raw(g)
        roots: list[float] = []
        for ui, di, ok in zip(g, d, defined):
            if ok and abs(di) <= tol:
                roots.append(float(ui))
        for i in range(len(g) - 1):
            if not (defined[i] and defined[i + 1]):
                continue
            if abs(d[i]) <= tol or abs(d[i + 1]) <= tol:
                continue
            if det[i] * det[i + 1] < 0.0:
                lo, hi = float(g[i]), float(g[i + 1])
                flo = det[i]
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    dm = float(self.distribution_parameter(np.asarray(mid)))
                    if abs(dm) <= tol or hi - lo < 1e-15 * max(1.0, abs(hi)):
                        break
                    fm = float(self._det_raw(np.asarray(mid)))
                    if flo * fm <= 0.0:
                        hi = mid
                    else:
                        lo, flo = mid, fm
                roots.append(0.5 * (lo + hi))
        return sorted(roots)

    def classify(self, eps_speed: float = EPS_SPEED,
                 tol_dev: float = TOL_DEV,
                 tol_conoid: float = 1e-6) -> SurfaceClass:
        """Cylindrical / developable / skew, with a conoid flag from the frame."""
        max_speed = self.max_director_speed()
        if max_speed <= eps_speed:
            return SurfaceClass("cylindrical", None, None, max_speed)
        g = self.grid()
        d, defined = self._distribution_masked(g, eps_speed)
        max_d = float(np.max(np.abs(d[defined])))
        kind = "developable" if max_d <= tol_dev else "skew"
        conoid: bool | None = None
        try:
            from .frame import EPS_K, frenet_frame
            F = frenet_frame(self)
            if not F.gaps:
                conoid = bool(np.min(F.k1) >= EPS_K
                              and np.max(np.abs(F.k2)) <= tol_conoid)
            else:
                conoid = False
        except RuledSimError:
            conoid = None
        return SurfaceClass(kind, conoid, max_d, max_speed)


def _scale(s, v):
    s = np.asarray(s, dtype=float)
    return (s[..., None] if s.ndim else s) * v


def _safe_div(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if den.ndim == 0:
        return float(num / den) if den != 0.0 else 0.0
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den != 0.0)
    return out


class StrictionCurve:
    """Curve view of a surface's striction curve (derivatives to order 2)."""

    def __init__(self, surface: RuledSurface):
        self.surface = surface
        self.u_min = surface.u_min
        self.u_max = surface.u_max
        self.sample_count = surface.sample_count
        self.exact_derivatives = surface.exact_derivatives
        self._cache: dict = {}

    def grid(self) -> np.ndarray:
        return self.surface.grid()

    def point(self, u, order: int = 0):
        return self.surface.striction_point(u, order)

    def speed(self, u):
        return np.linalg.norm(self.point(u, 1), axis=-1)

    def arc_length_map(self, eps_speed: float = EPS_SPEED) -> ArcLengthMap:
        m = self._cache.get(("arc", eps_speed))
        if m is None:
            m = build_arc_length_map(lambda g: self.speed(g), self.u_min,
                                     self.u_max, self.sample_count - 1,
                                     eps_speed=eps_speed, what="striction curve")
            self._cache[("arc", eps_speed)] = m
        return m
