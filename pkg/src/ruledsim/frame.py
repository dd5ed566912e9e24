"""Moving frame {q, h, a} of a ruled surface along its striction curve.

The frame satisfies, with respect to the striction arc length s,

    dq/ds =  k1 h
    dh/ds = -k1 q + k2 a
    da/ds =       -k2 h

with k1 = |dq/ds| >= 0 (h absorbs orientation) and k2 = <dh/ds, a> kept
signed so the system above holds verbatim.  phi = integral of k1 ds is the
arc length of the spherical image of the rulings; the ratio f(phi) = k2/k1
on that parameter is the intrinsic similarity invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .curves import ArcLengthMap, cumulative_integral
from .errors import (CylindricalSurfaceError, FrameGapError,
                     OdeInapplicableError)
from .surface import RuledSurface, _dot, _normalize_rows

EPS_K = 1e-7   # k1 below this means the frame has a gap (director locally constant)
EPS_F = 1e-6   # |f| below this makes the third-order ruling equation inapplicable


@dataclass(frozen=True, eq=False)
class FrameSample:
    s: float
    u: float
    c: np.ndarray
    q: np.ndarray
    h: np.ndarray
    a: np.ndarray
    k1: float
    k2: float
    phi: float
    psi3: float


class FrameField:
    """Frame data sampled on the surface's u-grid, ordered by arc length s."""

    def __init__(self, surface, u, s, c, q, h, a, k1, k2, phi, psi3,
                 ds_du, gaps, arc: ArcLengthMap):
        self.surface = surface
        self.u = u
        self.s = s
        self.c = c
        self.q = q
        self.h = h
        self.a = a
        self.k1 = k1
        self.k2 = k2
        self.phi = phi
        self.psi3 = psi3
        self.ds_du = ds_du
        self.gaps = tuple(gaps)   # (u_lo, u_hi) intervals where k1 < EPS_K
        self.arc = arc            # striction-curve arc-length map

    @property
    def total_phi(self) -> float:
        return float(self.phi[-1])

    @property
    def total_s(self) -> float:
        return float(self.s[-1])

    def valid(self) -> np.ndarray:
        """Mask of samples where the frame is defined."""
        if not self.gaps:
            return np.ones_like(self.s, dtype=bool)
        mask = np.ones_like(self.s, dtype=bool)
        for lo, hi in self.gaps:
            mask &= ~((self.u >= lo) & (self.u <= hi))
        return mask

    def samples(self):
        return [FrameSample(float(self.s[i]), float(self.u[i]), self.c[i].copy(),
                            self.q[i].copy(), self.h[i].copy(), self.a[i].copy(),
                            float(self.k1[i]), float(self.k2[i]),
                            float(self.phi[i]), float(self.psi3[i]))
                for i in range(len(self.s))]

    def require_no_gaps(self, what: str = "operation"):
        if self.gaps:
            raise FrameGapError(f"{what} needs the frame on the whole domain; "
                                "k1 drops below threshold", self.gaps)


def _fd5(y: np.ndarray, dx: float) -> np.ndarray:
    """5-point finite-difference first derivative on a uniform grid."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    out[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * dx)
    # 4th-order one-sided stencils at the edges
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * dx)
    for i in (0, 1):
        out[i] = np.tensordot(c, y[i:i + 5], axes=(0, 0))
    for i in (-2, -1):
        out[i] = -np.tensordot(c, y[i - 4:i + 1 if i != -1 else None][::-1], axes=(0, 0))
    return out


def frenet_frame(surface: RuledSurface) -> FrameField:
    """Compute the frame field of a non-cylindrical surface.

    Where the director is locally constant (k1 < EPS_K) the frame has a gap:
    h, a, k2 are NaN there and the gap intervals are reported on the result.
    Exact symbolic derivatives are used when the surface is analytic; sampled
    surfaces fall back to spline derivatives for q and 5-point finite
    differences for dh.
    """
    cached = surface._cache.get("frame")
    if cached is not None:
        return cached
    if surface.is_cylindrical():
        raise CylindricalSurfaceError("frame undefined for a cylindrical surface")
    st = surface.striction()
    arc = st.arc
    g = surface.grid()
    n = len(g)

    q = surface.director.point(g)
    qd = surface.director.point(g, 1)
    # <q, dq> vanishes identically for a unit director; remove the numerical
    # remainder (spline derivatives) so the frame is orthonormal to roundoff
    qd = qd - q * _dot(qd, q)[:, None]
    qd_norm = np.linalg.norm(qd, axis=-1)
    ds_du = np.asarray(np.linalg.norm(surface.striction_point(g, 1), axis=-1))
    s = np.asarray(arc.s_of_u(g), dtype=float)
    s = s - s[0]

    k1 = qd_norm / ds_du
    ok = k1 >= EPS_K

    h = np.full_like(q, np.nan)
    a = np.full_like(q, np.nan)
    k2 = np.full(n, np.nan)
    h[ok] = qd[ok] / qd_norm[ok, None]
    a[ok] = np.cross(q[ok], h[ok])

    if surface.exact_derivatives:
        qdd = surface.director.point(g, 2)
        # h = qd/|qd|  =>  dh/du = qdd/|qd| - qd <qd, qdd>/|qd|^3
        dh_du = np.full_like(q, np.nan)
        dh_du[ok] = (qdd[ok] / qd_norm[ok, None]
                     - qd[ok] * (_dot(qd[ok], qdd[ok]) / qd_norm[ok] ** 3)[:, None])
    else:
        dh_du = np.full_like(q, np.nan)
        dx = float(g[1] - g[0])
        for i0, i1 in _runs(ok):
            if i1 - i0 >= 5:
                seg = np.stack([_fd5(h[i0:i1, j], dx) for j in range(3)], axis=-1)
                dh_du[i0:i1] = seg
    k2[ok] = _dot(dh_du[ok], a[ok]) / ds_du[ok]

    # phi = integral k1 ds = integral |dq/du| du (spherical arc of the rulings)
    phi_nodes, phi_cum = cumulative_integral(
        lambda uu: np.linalg.norm(surface.director.point(uu, 1), axis=-1),
        surface.u_min, surface.u_max, n - 1)
    phi = PchipInterpolator(phi_nodes, phi_cum)(g)
    phi = np.asarray(phi, dtype=float)
    phi[0] = 0.0

    # psi3 = integral k2 ds = integral <dh/du, a> du (signed arc of the a-image)
    if ok.all():
        if surface.exact_derivatives:
            def psi_integrand(uu):
                qq = surface.director.point(uu)
                qqd = surface.director.point(uu, 1)
                qqdd = surface.director.point(uu, 2)
                nn = np.linalg.norm(qqd, axis=-1)
                hh = qqd / nn[..., None]
                aa = np.cross(qq, hh)
                dh = (qqdd / nn[..., None]
                      - qqd * (_dot(qqd, qqdd) / nn**3)[..., None])
                return _dot(dh, aa)
            psi_nodes, psi_cum = cumulative_integral(
                psi_integrand, surface.u_min, surface.u_max, n - 1)
            psi3 = np.asarray(PchipInterpolator(psi_nodes, psi_cum)(g), dtype=float)
            psi3[0] = 0.0
        else:
            from scipy.integrate import cumulative_simpson
            integrand = _dot(dh_du, a)
            psi3 = np.concatenate(([0.0], cumulative_simpson(integrand, x=g)))
    else:
        psi3 = np.full(n, np.nan)
        psi3[0] = 0.0

    gaps = _mask_to_intervals(g, ~ok)
    F = FrameField(surface, g, s, st.points, q, h, a, k1, k2, phi, psi3,
                   ds_du, gaps, arc)
    surface._cache["frame"] = F
    return F


def _runs(mask: np.ndarray):
    """Contiguous index ranges [i0, i1) where mask is True."""
    out = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            out.append((i, j + 1))
            i = j + 1
        else:
            i += 1
    return out


def _mask_to_intervals(x: np.ndarray, bad: np.ndarray):
    intervals = []
    i = 0
    n = len(x)
    while i < n:
        if bad[i]:
            j = i
            while j + 1 < n and bad[j + 1]:
                j += 1
            intervals.append((float(x[i]), float(x[j])))
            i = j + 1
        else:
            i += 1
    return intervals


# ---------------------------------------------------------------------------
# Total curvature parameter and the structure function
# ---------------------------------------------------------------------------

class PhiMap:
    """Monotone map between striction arc length s and phi = integral k1 ds."""

    def __init__(self, s: np.ndarray, phi: np.ndarray):
        dphi = np.diff(phi)
        if np.any(dphi <= 0.0):
            raise FrameGapError("phi is not strictly increasing; frame has "
                                "stalls where k1 vanishes")
        self.s_nodes = s
        self.phi_nodes = phi
        self.total = float(phi[-1])
        self._fwd = PchipInterpolator(s, phi)
        self._inv = PchipInterpolator(phi, s)

    def phi_of_s(self, s):
        return self._fwd(s)

    def s_of_phi(self, phi):
        return self._inv(phi)


def total_curvature(F: FrameField) -> PhiMap:
    """The map s -> phi and its monotone inverse."""
    if F.total_phi <= 1e-12:
        raise CylindricalSurfaceError("total curvature is zero (k1 vanishes "
                                      "identically); phi map undefined")
    F.require_no_gaps("total curvature map")
    return PhiMap(F.s, F.phi)


class StructureFunction:
    """f(phi) = k2/k1 resampled on a uniform phi-grid over [0, total]."""

    def __init__(self, phi: np.ndarray, values: np.ndarray):
        self.phi = phi
        self.values = values
        self.total = float(phi[-1])
        self._spline = CubicSpline(phi, values)

    def __call__(self, phi):
        return self._spline(np.clip(phi, 0.0, self.total))

    def derivative(self, phi):
        return self._spline.derivative()(np.clip(phi, 0.0, self.total))


def structure_function(F: FrameField, resolution: int = 512) -> StructureFunction:
    """Pointwise ratio k2/k1 on a uniform phi-grid.

    Errors (naming the phi-interval) where k1 falls below threshold."""
    low = F.k1 < EPS_K
    if low.any():
        spans = _mask_to_intervals(F.phi, low)
        raise FrameGapError("structure function undefined where k1 < threshold "
                            "(phi intervals)", spans)
    ratio = F.k2 / F.k1
    grid = np.linspace(0.0, F.total_phi, resolution)
    vals = CubicSpline(F.phi, ratio)(grid)
    return StructureFunction(grid, np.asarray(vals, dtype=float))


# ---------------------------------------------------------------------------
# Frame ODE in the phi parameter (dq/dphi = h, dh/dphi = -q + f a, da/dphi = -f h)
# ---------------------------------------------------------------------------

def _gram_schmidt(Y: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on the rows (q, h, a), in that order."""
    q, h, a = Y
    q = q / np.linalg.norm(q)
    h = h - np.dot(h, q) * q
    h = h / np.linalg.norm(h)
    a = a - np.dot(a, q) * q - np.dot(a, h) * h
    a = a / np.linalg.norm(a)
    return np.array([q, h, a])


def _frame_rhs(f_val: float, Y: np.ndarray) -> np.ndarray:
    q, h, a = Y
    return np.array([h, -q + f_val * a, -f_val * h])


@dataclass(frozen=True, eq=False)
class FrameTrajectory:
    phi: np.ndarray
    q: np.ndarray
    h: np.ndarray
    a: np.ndarray


def integrate_frame_ode(f, initial: np.ndarray, phi_range,
                        output_nodes: int = 513,
                        endpoint_tol: float = 1e-8) -> FrameTrajectory:
    """Integrate the phi-parametrized frame system with fixed-step RK4.

    ``f`` is a StructureFunction or any callable of phi.  The initial frame
    (rows q0, h0, a0) must be orthonormal within 1e-10.  Every step is
    re-projected onto the orthonormal frames by modified Gram-Schmidt, and
    the step count doubles until the endpoint moves by <= endpoint_tol.
    """
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (3, 3):
        raise ValueError("initial frame must be a 3x3 matrix with rows q, h, a")
    defect = np.max(np.abs(initial @ initial.T - np.eye(3)))
    if defect > 1e-10:
        raise ValueError(f"initial frame is not orthonormal (defect {defect:.3e})")
    phi0, phi1 = float(phi_range[0]), float(phi_range[1])
    if output_nodes < 2 or abs(phi1 - phi0) < 1e-15:
        one = initial.copy()
        return FrameTrajectory(np.array([phi0]), one[0:1], one[1:2], one[2:3])

    fv = f if callable(f) else (lambda p: float(f))

    def run(steps_per_interval: int):
        m = output_nodes - 1
        total = m * steps_per_interval
        hstep = (phi1 - phi0) / total
        Y = initial.copy()
        out = np.empty((output_nodes, 3, 3))
        out[0] = Y
        idx = 1
        p = phi0
        for k in range(total):
            f1 = float(fv(p))
            f2 = float(fv(p + 0.5 * hstep))
            f3 = float(fv(p + hstep))
            k1v = _frame_rhs(f1, Y)
            k2v = _frame_rhs(f2, Y + 0.5 * hstep * k1v)
            k3v = _frame_rhs(f2, Y + 0.5 * hstep * k2v)
            k4v = _frame_rhs(f3, Y + hstep * k3v)
            Y = Y + (hstep / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            Y = _gram_schmidt(Y)
            p = phi0 + (k + 1) * hstep
            if (k + 1) % steps_per_interval == 0:
                out[idx] = Y
                idx += 1
        return out

    steps = 2
    out = run(steps)
    while steps < 512:
        finer = run(steps * 2)
        if np.max(np.abs(finer[-1] - out[-1])) <= endpoint_tol:
            out = finer
            break
        out = finer
        steps *= 2
    phi = np.linspace(phi0, phi1, output_nodes)
    return FrameTrajectory(phi, out[:, 0], out[:, 1], out[:, 2])


# ---------------------------------------------------------------------------
# Third-order ruling equation diagnostics
# ---------------------------------------------------------------------------

def phi_samples(F: FrameField, resolution: int = 512):
    """Rulings and structure function resampled on a uniform phi-grid.

    Returns ``(phi, q, f)`` with q renormalized to unit length."""
    sf = structure_function(F, resolution)
    grid = sf.phi
    q = np.stack([CubicSpline(F.phi, F.q[:, j])(grid) for j in range(3)], axis=-1)
    return grid, _normalize_rows(q), sf.values


def ruling_ode_residual(source, resolution: int = 512, f=None,
                        eps_f: float = EPS_F) -> float:
    """Max norm of the third-order ruling equation residual on a phi-grid.

    d/dphi((1/f) q'') + ((1+f^2)/f) q' - (f'/f^2) q = 0 is evaluated by
    central finite differences.  ``source`` is a FrameField, or a
    FrameTrajectory together with ``f`` (callable or array on the same grid).
    Raises OdeInapplicableError where |f| < eps_f (the equation divides by f).
    """
    if isinstance(source, FrameTrajectory):
        grid = source.phi
        q = source.q
        fvals = np.asarray(f(grid) if callable(f) else f, dtype=float)
        fvals = np.broadcast_to(fvals, grid.shape)
    else:
        grid, q, fvals = phi_samples(source, resolution)
    if np.min(np.abs(fvals)) < eps_f:
        j = int(np.argmin(np.abs(fvals)))
        raise OdeInapplicableError(
            f"third-order ruling equation inapplicable: |f| < {eps_f:g} "
            f"near phi={grid[j]:.6g}")
    dphi = float(grid[1] - grid[0])
    qp = np.gradient(q, dphi, axis=0, edge_order=2)
    qpp = (np.roll(q, -1, axis=0) - 2.0 * q + np.roll(q, 1, axis=0)) / dphi**2
    w = qpp / fvals[:, None]
    dw = np.gradient(w, dphi, axis=0, edge_order=2)
    fp = np.gradient(fvals, dphi, edge_order=2)
    res = dw + ((1.0 + fvals**2) / fvals)[:, None] * qp \
        - (fp / fvals**2)[:, None] * q
    # interior only: the rolled second difference is invalid at the ends and
    # one-sided stencils degrade two further nodes
    interior = res[3:-3]
    return float(np.max(np.linalg.norm(interior, axis=-1)))


def reconstruct_a(phi: np.ndarray, q: np.ndarray, f,
                  eps_f: float = EPS_F) -> np.ndarray:
    """Recover the central tangent a = (q'' + q)/f from ruling samples.

    q'' comes from central finite differences (second-order one-sided at the
    two boundary nodes)."""
    phi = np.asarray(phi, dtype=float)
    q = np.asarray(q, dtype=float)
    fvals = np.asarray(f(phi) if callable(f) else f, dtype=float)
    fvals = np.broadcast_to(fvals, phi.shape)
    if np.min(np.abs(fvals)) < eps_f:
        j = int(np.argmin(np.abs(fvals)))
        raise OdeInapplicableError(
            f"central tangent reconstruction inapplicable: |f| < {eps_f:g} "
            f"near phi={phi[j]:.6g}")
    h = float(phi[1] - phi[0])
    qpp = np.empty_like(q)
    qpp[1:-1] = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / h**2
    qpp[0] = (2.0 * q[0] - 5.0 * q[1] + 4.0 * q[2] - q[3]) / h**2
    qpp[-1] = (2.0 * q[-1] - 5.0 * q[-2] + 4.0 * q[-3] - q[-4]) / h**2
    return (qpp + q) / fvals[:, None]


# ---------------------------------------------------------------------------
# Tangent angle of the striction curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TangentAngle:
    s: np.ndarray
    theta: np.ndarray
    residual: float   # max |<T, h>|, the striction-property defect


def tangent_angle(F: FrameField, residual_tol: float = 1e-6) -> TangentAngle:
    """Angle theta(s) of the striction tangent within the (q, a) plane.

    T = dc/ds decomposes as cos(theta) q + sin(theta) a along the striction
    curve; <T, h> must vanish and its residual is validated against
    ``residual_tol``."""
    mask = F.valid()
    T = F.surface.striction_point(F.u, 1) / F.ds_du[:, None]
    th = np.abs(_dot(T[mask], F.h[mask]))
    residual = float(np.max(th)) if th.size else 0.0
    if residual > residual_tol:
        raise FrameGapError(
            f"inconsistent striction data: max |<T, h>| = {residual:.3e} "
            f"exceeds {residual_tol:g}")
    theta = np.full(len(F.s), np.nan)
    theta[mask] = np.arctan2(_dot(T[mask], F.a[mask]), _dot(T[mask], F.q[mask]))
    return TangentAngle(F.s.copy(), theta, residual)
