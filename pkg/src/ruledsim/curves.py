"""Space curves over a parameter u and their arc-length machinery.

Two interchangeable curve representations:

* :class:`CurveSpec` -- three expression ASTs; derivatives are exact
  (symbolic) to any order.
* :class:`SampledCurve` -- cubic splines through sampled points; derivatives
  come from differentiating the splines.

Both expose ``point(u, order)``, the shared grid, and an ``exact_derivatives``
flag that downstream numerics use to pick between symbolic and
finite-difference paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import minimize_scalar

from . import expr
from .errors import RegularityError

EPS_SPEED = 1e-9  # regularity threshold separating cusps from roundoff


# ---------------------------------------------------------------------------
# Deterministic quadrature
# ---------------------------------------------------------------------------

def cumulative_integral(fn, u0: float, u1: float, base_panels: int,
                        refine: int = 8, rtol: float = 1e-12,
                        atol: float = 1e-14, max_refine: int = 256):
    """Cumulative integral of ``fn`` over [u0, u1] on a refined node grid.

    Composite Simpson per panel, summed left to right, with global panel
    doubling until the total stabilizes.  ``fn`` must accept ndarrays.
    Returns ``(u_nodes, cumulative)`` where cumulative[0] == 0.
    """
    prev_total = None
    while True:
        n = base_panels * refine
        grid = np.linspace(u0, u1, 2 * n + 1)
        vals = np.asarray(fn(grid), dtype=float)
        if vals.shape != grid.shape:
            vals = np.broadcast_to(vals, grid.shape)
        h = (u1 - u0) / n
        inc = (h / 6.0) * (vals[0:-1:2] + 4.0 * vals[1::2] + vals[2::2])
        total = float(np.sum(inc))
        if prev_total is not None and (
                abs(total - prev_total) <= max(atol, rtol * abs(total))
                or refine >= max_refine):
            s = np.concatenate(([0.0], np.cumsum(inc)))
            return grid[::2], s
        prev_total = total
        refine *= 2


def integral(fn, u0: float, u1: float, base_panels: int = 64, **kw) -> float:
    """One-shot deterministic integral (same scheme as cumulative_integral)."""
    _, s = cumulative_integral(fn, u0, u1, base_panels, **kw)
    return float(s[-1])


# ---------------------------------------------------------------------------
# Arc-length map
# ---------------------------------------------------------------------------

class ArcLengthMap:
    """Monotone map between a curve parameter u and arc length s.

    Forward and inverse are monotone cubic (PCHIP) interpolants through the
    quadrature nodes, so round trips at nodes are exact and the inverse can
    never overshoot.
    """

    def __init__(self, u_nodes: np.ndarray, s_nodes: np.ndarray):
        self.u_nodes = u_nodes
        self.s_nodes = s_nodes
        self.length = float(s_nodes[-1])
        self._fwd = PchipInterpolator(u_nodes, s_nodes)
        self._inv = PchipInterpolator(s_nodes, u_nodes)
        self._fwd_d = self._fwd.derivative()

    def s_of_u(self, u):
        return self._fwd(u)

    def u_of_s(self, s):
        return self._inv(s)

    def ds_du(self, u):
        return self._fwd_d(u)

    def roundtrip_defect(self, n: int = 4096) -> float:
        """max |s(u(sigma)) - sigma| over a dense sigma grid."""
        sigma = np.linspace(0.0, self.length, n)
        return float(np.max(np.abs(self._fwd(self._inv(sigma)) - sigma)))


def _refine_minimum(fn, lo: float, hi: float, u_coarse: float) -> tuple[float, float]:
    """Polish the discrete minimum of a smooth nonnegative function."""
    res = minimize_scalar(lambda x: float(fn(np.asarray(x))),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    if res.fun <= float(fn(np.asarray(u_coarse))):
        return float(res.x), float(res.fun)
    return float(u_coarse), float(fn(np.asarray(u_coarse)))


def build_arc_length_map(speed, u_min: float, u_max: float, panels: int,
                         eps_speed: float = EPS_SPEED,
                         what: str = "curve") -> ArcLengthMap:
    """Arc-length map from a vectorized speed function.

    Raises RegularityError naming the offending u when the speed drops below
    ``eps_speed`` anywhere (checked on the quadrature grid and polished with a
    local bounded minimization, so interior cusps between nodes are caught).
    """
    probe = np.linspace(u_min, u_max, 4 * panels + 1)
    vals = np.asarray(speed(probe), dtype=float)
    if vals.shape != probe.shape:
        vals = np.broadcast_to(vals, probe.shape)
    i = int(np.argmin(vals))
    lo = probe[max(i - 1, 0)]
    hi = probe[min(i + 1, len(probe) - 1)]
    u_bad, v_min = _refine_minimum(speed, float(lo), float(hi), float(probe[i]))
    if v_min < eps_speed:
        raise RegularityError(f"zero-speed point on {what}", u=u_bad)
    u_nodes, s_nodes = cumulative_integral(speed, u_min, u_max, panels)
    return ArcLengthMap(u_nodes, s_nodes)


# ---------------------------------------------------------------------------
# Curve representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveSpec:
    """An analytic space curve (x(u), y(u), z(u)) on [u_min, u_max]."""

    x: expr.Expr
    y: expr.Expr
    z: expr.Expr
    u_min: float
    u_max: float
    sample_count: int = 512
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    exact_derivatives = True

    def __post_init__(self):
        if not self.u_min < self.u_max:
            raise ValueError(f"u_min must be < u_max, got [{self.u_min}, {self.u_max}]")
        if self.sample_count < 16:
            raise ValueError(f"sample_count must be >= 16, got {self.sample_count}")
        # components must evaluate finitely across the domain
        g = self.grid()
        for comp in (self.x, self.y, self.z):
            expr.evaluate(comp, g)

    def grid(self) -> np.ndarray:
        return np.linspace(self.u_min, self.u_max, self.sample_count)

    def _component_fns(self, order: int):
        fns = self._cache.get(order)
        if fns is None:
            comps = []
            for c in (self.x, self.y, self.z):
                d = expr.differentiate(c, order) if order > 0 else c
                comps.append(expr.compile_expr(d))
            fns = tuple(comps)
            self._cache[order] = fns
        return fns

    def point(self, u, order: int = 0):
        """Order-th derivative vector at u; shape (3,) or (n, 3)."""
        if order < 0 or order > 3:
            raise ValueError("derivative order must be in 0..3")
        self._check_domain(u)
        fns = self._component_fns(order)
        uu = np.asarray(u, dtype=float)
        comps = [np.broadcast_to(np.asarray(f(uu), dtype=float), uu.shape) for f in fns]
        out = np.stack(comps, axis=-1)
        return out if np.ndim(u) else out.reshape(3)

    def _check_domain(self, u):
        uu = np.asarray(u, dtype=float)
        pad = 1e-9 * (self.u_max - self.u_min)
        if np.any(uu < self.u_min - pad) or np.any(uu > self.u_max + pad):
            bad = float(uu.flat[int(np.argmax((uu < self.u_min - pad) | (uu > self.u_max + pad)))])
            raise ValueError(f"parameter u={bad!r} outside domain [{self.u_min}, {self.u_max}]")

    def speed(self, u):
        d = self.point(u, 1)
        return np.linalg.norm(d, axis=-1)

    def arc_length_map(self, eps_speed: float = EPS_SPEED) -> ArcLengthMap:
        m = self._cache.get(("arc", eps_speed))
        if m is None:
            m = build_arc_length_map(lambda g: self.speed(g), self.u_min, self.u_max,
                                     self.sample_count - 1, eps_speed=eps_speed)
            self._cache[("arc", eps_speed)] = m
        return m


def curve_from_text(x: str, y: str, z: str, u_min: float, u_max: float,
                    sample_count: int = 512) -> CurveSpec:
    return CurveSpec(expr.parse_expression(x), expr.parse_expression(y),
                     expr.parse_expression(z), float(u_min), float(u_max),
                     int(sample_count))


class SampledCurve:
    """A curve known only through samples; cubic splines supply derivatives."""

    exact_derivatives = False

    def __init__(self, u: np.ndarray, points: np.ndarray):
        u = np.asarray(u, dtype=float)
        points = np.asarray(points, dtype=float)
        if u.ndim != 1 or points.shape != (u.size, 3):
            raise ValueError("need u of shape (n,) and points of shape (n, 3)")
        if u.size < 16:
            raise ValueError("need at least 16 samples")
        if np.any(np.diff(u) <= 0):
            raise ValueError("sample parameters must be strictly increasing")
        self.u_min = float(u[0])
        self.u_max = float(u[-1])
        self.sample_count = int(u.size)
        self._u = u
        self._points = points
        self._spline = CubicSpline(u, points, axis=0)
        self._cache: dict = {}

    def grid(self) -> np.ndarray:
        return self._u.copy()

    def point(self, u, order: int = 0):
        if order < 0 or order > 3:
            raise ValueError("derivative order must be in 0..3")
        uu = np.asarray(u, dtype=float)
        pad = 1e-9 * (self.u_max - self.u_min)
        if np.any(uu < self.u_min - pad) or np.any(uu > self.u_max + pad):
            raise ValueError(f"parameter outside domain [{self.u_min}, {self.u_max}]")
        out = self._spline(uu, nu=order)
        return out if np.ndim(u) else np.asarray(out).reshape(3)

    def speed(self, u):
        return np.linalg.norm(self.point(u, 1), axis=-1)

    def arc_length_map(self, eps_speed: float = EPS_SPEED) -> ArcLengthMap:
        m = self._cache.get(("arc", eps_speed))
        if m is None:
            m = build_arc_length_map(lambda g: self.speed(g), self.u_min, self.u_max,
                                     self.sample_count - 1, eps_speed=eps_speed)
            self._cache[("arc", eps_speed)] = m
        return m
