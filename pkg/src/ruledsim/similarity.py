"""Similarity of ruled surfaces under a variable transformation of striction
arc lengths.

Convention for every pairwise check in this module: the FIRST argument plays
the target role (call it surface A) and the SECOND the source role (surface
B); the recovered transformation maps B's striction arc length to A's,

    s_A = integral lam(s_B) ds_B,      lam = k1_B / k1_A > 0.

The intrinsic criterion is agreement of the structure functions f = k2/k1
under matched total-curvature parameter phi; ruling, central-normal and
asymptotic-normal comparisons confirm it, either literally (exact mode) or
after a best proper rotation (up_to_rotation mode).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import minimize_scalar

from . import expr as expr_mod
from .curves import cumulative_integral
from .errors import (ConsistencyError, InapplicableError, MixedKindError,
                     OverlapError, SynthesisError)
from .fileio import fmt7, fmt17, sampled_surface_from_arrays, write_sampled_surface
from .frame import (EPS_K, FrameField, frenet_frame, structure_function,
                    total_curvature)
from .surface import RuledSurface, _dot, _normalize_rows

DEFAULT_TOL = 1e-4


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VariableTransformation:
    """Sampled monotone map s_A(s_B) with profile lam = d s_A / d s_B."""

    s_source: np.ndarray        # s_B samples
    s_target: np.ndarray        # s_A samples
    lam: np.ndarray             # lam(s_B) at the samples
    derivative_defect: float    # max |spline d s_A/d s_B - lam| (cross-check)

    def lam_of_s_source(self, s):
        return PchipInterpolator(self.s_source, self.lam)(s)


@dataclass(frozen=True, eq=False)
class SimilarityReport:
    verdict: bool
    mode: str                               # "exact" | "up_to_rotation"
    transformation: VariableTransformation | None
    rotation: np.ndarray                    # proper orthogonal; identity in exact mode
    deviations: dict[str, float]
    phi_overlap: float
    tol: float
    offsets: tuple[float, float] = (0.0, 0.0)
    notes: tuple[str, ...] = ()

    @property
    def lambda_profile(self):
        return None if self.transformation is None else self.transformation.lam


@dataclass(frozen=True, eq=False)
class Theorem34Result:
    surfaces_similar: bool
    striction_curves_similar: bool
    consistent: bool
    surface_report: SimilarityReport
    curve_report: SimilarityReport


# ---------------------------------------------------------------------------
# Rotation alignment
# ---------------------------------------------------------------------------

def procrustes_rotation(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Least-squares proper rotation R with R @ x_i closest to y_i.

    Rows of X and Y are paired direction vectors about the origin, so no
    centroid shift is involved."""
    M = X.T @ Y
    U, _, Vt = np.linalg.svd(M)
    V = Vt.T
    d = float(np.sign(np.linalg.det(V @ U.T)))
    return V @ np.diag([1.0, 1.0, d]) @ U.T


def _rotation_between(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Minimal proper rotation taking unit vector u to unit vector v."""
    c = float(np.dot(u, v))
    w = np.cross(u, v)
    s = float(np.linalg.norm(w))
    if s < 1e-14:
        if c > 0.0:
            return np.eye(3)
        # antiparallel: rotate half a turn about any perpendicular axis
        axis = np.cross(u, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-8:
            axis = np.cross(u, [0.0, 1.0, 0.0])
        axis = axis / np.linalg.norm(axis)
        return 2.0 * np.outer(axis, axis) - np.eye(3)
    K = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    return np.eye(3) + K + K @ K * ((1.0 - c) / s**2)


# ---------------------------------------------------------------------------
# Frame resampling on a common phi-grid
# ---------------------------------------------------------------------------

class _PhiSampled:
    """One surface's frame data resampled on phi-grid values."""

    def __init__(self, F: FrameField, resolution: int):
        self.F = F
        self.map = total_curvature(F)
        self.total = self.map.total
        self.sf = structure_function(F, resolution)
        self._k1 = CubicSpline(F.phi, F.k1)
        self._f = CubicSpline(F.phi, F.k2 / F.k1)
        self._vec = {name: CubicSpline(F.phi, getattr(F, name), axis=0)
                     for name in ("q", "h", "a")}

    def at(self, phi: np.ndarray):
        s = np.asarray(self.map.s_of_phi(phi), dtype=float)
        out = {"s": s, "k1": np.asarray(self._k1(phi), dtype=float),
               "f": np.asarray(self._f(phi), dtype=float)}
        for name, sp in self._vec.items():
            out[name] = _normalize_rows(np.asarray(sp(phi), dtype=float))
        return out


def _frame_of(surface_or_frame) -> FrameField:
    if isinstance(surface_or_frame, FrameField):
        return surface_or_frame
    return frenet_frame(surface_or_frame)


# ---------------------------------------------------------------------------
# Surface similarity
# ---------------------------------------------------------------------------

def check_similar_surfaces(a, b, mode: str = "exact", tol: float = DEFAULT_TOL,
                           resolution: int = 512,
                           offset_search: bool = False) -> SimilarityReport:
    """Decide whether two ruled surfaces are similar under a variable
    transformation of their striction arc lengths.

    ``a`` and ``b`` are RuledSurface or FrameField values; see the module
    docstring for the argument-order convention.  Cylindrical pairs are
    routed to :func:`cylindrical_family_check`; mixing a cylindrical and a
    non-cylindrical input is an error.
    """
    if mode not in ("exact", "up_to_rotation"):
        raise ValueError(f"mode must be 'exact' or 'up_to_rotation', got {mode!r}")
    if isinstance(a, RuledSurface) and isinstance(b, RuledSurface):
        cyl_a, cyl_b = a.is_cylindrical(), b.is_cylindrical()
        if cyl_a and cyl_b:
            return cylindrical_family_check(a, b, mode)
        if cyl_a or cyl_b:
            raise MixedKindError(
                "one surface is cylindrical and the other is not; no "
                "variable transformation of striction arc lengths exists")
    F_a, F_b = _frame_of(a), _frame_of(b)
    pa, pb = _PhiSampled(F_a, resolution), _PhiSampled(F_b, resolution)

    overlap = min(pa.total, pb.total)
    if overlap <= 1e-9:
        raise OverlapError("surfaces have no common span of the "
                           "total-curvature parameter")
    delta_a = delta_b = 0.0
    if offset_search:
        delta_a, delta_b = _search_offsets(pa, pb, overlap, resolution, mode)

    grid = np.linspace(0.0, overlap, resolution)
    da = pa.at(grid + delta_a)
    db = pb.at(grid + delta_b)

    structure_sup = float(np.max(np.abs(da["f"] - db["f"])))
    if mode == "exact":
        R = np.eye(3)
    else:
        X = np.concatenate([da["q"], da["h"], da["a"]])
        Y = np.concatenate([db["q"], db["h"], db["a"]])
        R = procrustes_rotation(X, Y)
    ruling_sup = float(np.max(np.linalg.norm(da["q"] @ R.T - db["q"], axis=-1)))
    central_sup = float(np.max(np.linalg.norm(da["h"] @ R.T - db["h"], axis=-1)))
    asymptotic_sup = float(np.max(np.linalg.norm(da["a"] @ R.T - db["a"], axis=-1)))

    lam = db["k1"] / da["k1"]
    defect = _composition_defect(db["s"], da["s"], lam)
    transformation = VariableTransformation(db["s"], da["s"], lam, defect)

    notes = []
    k2_a = da["f"] * da["k1"]
    k2_b = db["f"] * db["k1"]
    usable = (np.abs(k2_a) > EPS_K) & (np.abs(k2_b) > EPS_K)
    if usable.any():
        k2_defect = float(np.max(np.abs(k2_b[usable] / k2_a[usable] - lam[usable])))
        notes.append(f"lambda vs k2-ratio max defect {k2_defect:.3e}")

    deviations = {
        "structure_fn_sup": structure_sup,
        "ruling_sup": ruling_sup,
        "central_normal_sup": central_sup,
        "asymptotic_sup": asymptotic_sup,
    }
    verdict = all(v <= tol for v in deviations.values())
    return SimilarityReport(verdict, mode, transformation, R, deviations,
                            float(overlap), tol, (delta_a, delta_b),
                            tuple(notes))


def _search_offsets(pa: _PhiSampled, pb: _PhiSampled, overlap: float,
                    resolution: int, mode: str) -> tuple[float, float]:
    """Brute-force grid search of the phi anchor on the longer surface.

    Scores each candidate by the worse of the structure-function and the
    (mode-aligned) ruling deviation, so families with identically zero
    structure functions still lock in."""
    step = overlap / 256.0
    grid = np.linspace(0.0, overlap, resolution)

    def score(da, db):
        sup_f = float(np.max(np.abs(da["f"] - db["f"])))
        if mode == "exact":
            R = np.eye(3)
        else:
            X = np.concatenate([da["q"], da["h"], da["a"]])
            Y = np.concatenate([db["q"], db["h"], db["a"]])
            R = procrustes_rotation(X, Y)
        sup_q = float(np.max(np.linalg.norm(da["q"] @ R.T - db["q"], axis=-1)))
        return max(sup_f, sup_q)

    best = (0.0, 0.0)
    best_sup = np.inf
    slack_a = pa.total - overlap
    slack_b = pb.total - overlap
    if slack_a >= slack_b:
        fixed = pb.at(grid)
        for d in np.arange(0.0, slack_a + 0.5 * step, step):
            sup = score(pa.at(grid + d), fixed)
            if sup < best_sup:
                best_sup, best = sup, (float(d), 0.0)
    else:
        fixed = pa.at(grid)
        for d in np.arange(0.0, slack_b + 0.5 * step, step):
            sup = score(fixed, pb.at(grid + d))
            if sup < best_sup:
                best_sup, best = sup, (0.0, float(d))
    return best


def _composition_defect(s_src: np.ndarray, s_tgt: np.ndarray,
                        lam: np.ndarray) -> float:
    """Compare d s_tgt/d s_src from a spline of the composition against the
    pointwise curvature ratio."""
    if len(s_src) < 8:
        return 0.0
    deriv = CubicSpline(s_src, s_tgt).derivative()(s_src)
    inner = slice(2, -2)
    return float(np.max(np.abs(deriv[inner] - lam[inner])))


def lambda_from_curvatures(F_a, F_b, resolution: int = 512,
                           cross_tol: float = 1e-6) -> VariableTransformation:
    """Recover the variable transformation by composing the phi-maps.

    s_A(s_B) comes from phi_A^-1 (phi_B(s_B)); its spline derivative is
    cross-checked against the pointwise ratio k1_B/k1_A and a
    ConsistencyError is raised when they differ by more than ``cross_tol``.
    """
    F_a, F_b = _frame_of(F_a), _frame_of(F_b)
    pa, pb = _PhiSampled(F_a, resolution), _PhiSampled(F_b, resolution)
    overlap = min(pa.total, pb.total)
    if overlap <= 1e-9:
        raise OverlapError("no common span of the total-curvature parameter")
    grid = np.linspace(0.0, overlap, resolution)
    da, db = pa.at(grid), pb.at(grid)
    lam = db["k1"] / da["k1"]
    defect = _composition_defect(db["s"], da["s"], lam)
    if defect > cross_tol:
        raise ConsistencyError(
            f"transformation derivative disagrees with the curvature ratio "
            f"by {defect:.3e} (tolerance {cross_tol:g})")
    return VariableTransformation(db["s"], da["s"], lam, defect)


# ---------------------------------------------------------------------------
# Synthesis of new family members
# ---------------------------------------------------------------------------

def _as_scalar_fn(f):
    if isinstance(f, expr_mod.Expr):
        return expr_mod.compile_expr(f)
    if callable(f):
        return f
    v = float(f)
    return lambda x, _v=v: np.full_like(np.asarray(x, dtype=float), _v) \
        if np.ndim(x) else _v


def _cumulative_vector(fn, x0: float, x1: float, panels: int):
    """Cumulative integral of a vector-valued function, Simpson per panel."""
    grid = np.linspace(x0, x1, 2 * panels + 1)
    vals = np.asarray(fn(grid), dtype=float)
    h = (x1 - x0) / panels
    inc = (h / 6.0) * (vals[0:-1:2] + 4.0 * vals[1::2] + vals[2::2])
    out = np.concatenate([np.zeros((1, vals.shape[1])), np.cumsum(inc, axis=0)])
    return grid[::2], out


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    s: np.ndarray               # arc length of the new striction curve
    c: np.ndarray               # striction curve points
    q: np.ndarray               # rulings
    s_source: np.ndarray        # matching arc lengths on the source surface
    surface: RuledSurface = field(compare=False)

    def write_csv(self, path):
        write_sampled_surface(path, self.s, self.c, self.q)


def synthesize_similar(b, lam, theta, anchor=(0.0, 0.0, 0.0),
                       samples: int = 2048, name: str = "") -> SynthesisResult:
    """Build a new member of ``b``'s similarity family.

    ``lam`` (a positive profile of b's striction arc length s_B) fixes the
    new arc length s_A = integral lam ds_B; ``theta`` (a profile of s_A) tilts
    the new striction tangent within the (q, a) plane,

        c'(s_A) = cos(theta) q + sin(theta) a,

    which keeps <dq, dc> = 0, so the constructed curve is automatically the
    striction curve of the result and is traversed at unit speed.  The rulings
    themselves are copied across the transformation, so the output is similar
    to ``b`` by construction.
    """
    F = _frame_of(b)
    F.require_no_gaps("synthesis")
    lam_fn = _as_scalar_fn(lam)
    theta_fn = _as_scalar_fn(theta)
    anchor = np.asarray(anchor, dtype=float).reshape(3)
    S_b = F.total_s

    probe = np.linspace(0.0, S_b, 4096)
    lam_vals = np.asarray(lam_fn(probe), dtype=float)
    lam_vals = np.broadcast_to(lam_vals, probe.shape)
    i = int(np.argmin(lam_vals))
    res = minimize_scalar(lambda x: float(lam_fn(float(x))),
                          bounds=(max(0.0, probe[i] - S_b / 4095),
                                  min(S_b, probe[i] + S_b / 4095)),
                          method="bounded", options={"xatol": 1e-12})
    lam_min = min(float(lam_vals[i]), float(res.fun))
    if lam_min <= 0.0:
        s_bad = float(res.x) if float(res.fun) <= float(lam_vals[i]) else float(probe[i])
        raise SynthesisError(f"lambda must be positive; it reaches "
                             f"{lam_min:.3e} near s={s_bad:.6g}")

    sb_nodes, sa_nodes = cumulative_integral(lam_fn, 0.0, S_b, samples - 1)
    S_a = float(sa_nodes[-1])
    sb_of_sa = PchipInterpolator(sa_nodes, sb_nodes)

    surface = F.surface

    def q_of_u(u):
        return surface.director.point(u)

    def a_of_u(u):
        qd = surface.director.point(u, 1)
        n = np.linalg.norm(qd, axis=-1)
        h = qd / n[..., None]
        return np.cross(surface.director.point(u), h)

    def tangent(sa):
        sb = np.asarray(sb_of_sa(sa), dtype=float)
        u = np.asarray(F.arc.u_of_s(sb), dtype=float)
        th = np.asarray(theta_fn(sa), dtype=float)
        th = np.broadcast_to(th, np.shape(sa))
        return (np.cos(th)[..., None] * q_of_u(u)
                + np.sin(th)[..., None] * a_of_u(u))

    nodes, c_cum = _cumulative_vector(tangent, 0.0, S_a, 8 * (samples - 1))
    s_out = nodes[::8]
    c_out = anchor[None, :] + c_cum[::8]
    sb_out = np.asarray(sb_of_sa(s_out), dtype=float)
    u_out = np.asarray(F.arc.u_of_s(sb_out), dtype=float)
    q_out = _normalize_rows(q_of_u(u_out))

    out_surface = sampled_surface_from_arrays(s_out, c_out, q_out,
                                              name=name or f"{surface.name}_synth")
    return SynthesisResult(s_out, c_out, q_out, sb_out, out_surface)


def surface_from_invariants(k1_of_s, f_of_phi, theta_of_s, length: float,
                            anchor=(0.0, 0.0, 0.0), initial=None,
                            samples: int = 2048, name: str = "invariants",
                            endpoint_tol: float = 1e-10) -> SynthesisResult:
    """Construct a surface with prescribed curvature profile and tilt.

    Integrates the frame system dq/ds = k1 h, dh/ds = -k1 q + k2 a,
    da/ds = -k2 h with k2(s) = f(phi(s)) k1(s) and phi' = k1, alongside the
    striction curve c' = cos(theta) q + sin(theta) a, from the given initial
    frame (rows q0, h0, a0).
    """
    k1_fn = _as_scalar_fn(k1_of_s)
    f_fn = _as_scalar_fn(f_of_phi)
    th_fn = _as_scalar_fn(theta_of_s)
    anchor = np.asarray(anchor, dtype=float).reshape(3)
    Y0 = np.eye(3) if initial is None else np.asarray(initial, dtype=float)
    if np.max(np.abs(Y0 @ Y0.T - np.eye(3))) > 1e-10:
        raise ValueError("initial frame is not orthonormal")

    from .frame import _gram_schmidt

    def rhs(s, phi, c, Y):
        k1 = float(k1_fn(s))
        k2 = float(f_fn(phi)) * k1
        th = float(th_fn(s))
        q, h, a = Y
        dY = np.array([k1 * h, -k1 * q + k2 * a, -k2 * h])
        dc = np.cos(th) * q + np.sin(th) * a
        return k1, dc, dY

    def run(steps_per_interval: int):
        m = samples - 1
        total = m * steps_per_interval
        hstep = length / total
        phi = 0.0
        c = anchor.copy()
        Y = Y0.copy()
        out_c = np.empty((samples, 3))
        out_q = np.empty((samples, 3))
        out_c[0], out_q[0] = c, Y[0]
        idx = 1
        for k in range(total):
            s = k * hstep
            dphi1, dc1, dY1 = rhs(s, phi, c, Y)
            dphi2, dc2, dY2 = rhs(s + 0.5 * hstep, phi + 0.5 * hstep * dphi1,
                                  c + 0.5 * hstep * dc1, Y + 0.5 * hstep * dY1)
            dphi3, dc3, dY3 = rhs(s + 0.5 * hstep, phi + 0.5 * hstep * dphi2,
                                  c + 0.5 * hstep * dc2, Y + 0.5 * hstep * dY2)
            dphi4, dc4, dY4 = rhs(s + hstep, phi + hstep * dphi3,
                                  c + hstep * dc3, Y + hstep * dY3)
            phi += (hstep / 6.0) * (dphi1 + 2 * dphi2 + 2 * dphi3 + dphi4)
            c = c + (hstep / 6.0) * (dc1 + 2 * dc2 + 2 * dc3 + dc4)
            Y = _gram_schmidt(Y + (hstep / 6.0) * (dY1 + 2 * dY2 + 2 * dY3 + dY4))
            if (k + 1) % steps_per_interval == 0:
                out_c[idx], out_q[idx] = c, Y[0]
                idx += 1
        return out_c, out_q

    steps = 4
    c_out, q_out = run(steps)
    while steps < 64:
        c2, q2 = run(steps * 2)
        done = (np.max(np.abs(c2[-1] - c_out[-1])) <= endpoint_tol
                and np.max(np.abs(q2[-1] - q_out[-1])) <= endpoint_tol)
        c_out, q_out = c2, q2
        if done:
            break
        steps *= 2
    s_out = np.linspace(0.0, length, samples)
    out_surface = sampled_surface_from_arrays(s_out, c_out, q_out, name=name)
    return SynthesisResult(s_out, c_out, q_out, s_out.copy(), out_surface)


# ---------------------------------------------------------------------------
# Curve similarity (tangent comparison only)
# ---------------------------------------------------------------------------

class _SigmaSampled:
    """A curve's unit tangent reparametrized by its spherical image arc."""

    def __init__(self, curve, stall_eps: float = 1e-7):
        self.curve = curve
        self.arc = curve.arc_length_map()

        def tangent_speed(u):
            cd = curve.point(u, 1)
            cdd = curve.point(u, 2)
            n = np.linalg.norm(cd, axis=-1)
            Tprime = cdd / n[..., None] - cd * (_dot(cd, cdd) / n**3)[..., None]
            return np.linalg.norm(Tprime, axis=-1)

        probe = np.linspace(curve.u_min, curve.u_max, 4 * curve.sample_count)
        rate = tangent_speed(probe) / np.asarray(curve.speed(probe))
        stalled = rate < stall_eps
        if stalled.any():
            runs = _bool_runs(stalled)
            long_runs = [(i0, i1) for i0, i1 in runs if i1 - i0 >= 2]
            if long_runs:
                i0, i1 = long_runs[0]
                raise InapplicableError(
                    "tangent image stalls (straight segment)",
                    interval=(float(probe[i0]), float(probe[i1 - 1])))
        nodes, sigma = cumulative_integral(tangent_speed, curve.u_min,
                                           curve.u_max, curve.sample_count - 1)
        if sigma[-1] <= 1e-9:
            raise InapplicableError(
                "tangent image stalls (straight segment)",
                interval=(float(curve.u_min), float(curve.u_max)))
        self.total = float(sigma[-1])
        self._u_of_sigma = PchipInterpolator(sigma, nodes)
        self._tangent_speed = tangent_speed

    def at(self, sigma: np.ndarray):
        u = np.asarray(self._u_of_sigma(sigma), dtype=float)
        cd = self.curve.point(u, 1)
        speed = np.linalg.norm(cd, axis=-1)
        T = cd / speed[..., None]
        s = np.asarray(self.arc.s_of_u(u), dtype=float)
        rate = self._tangent_speed(u) / speed   # d sigma / d s
        return {"u": u, "T": T, "s": s, "rate": rate}


def _bool_runs(mask: np.ndarray):
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


def check_similar_curves(a, b, mode: str = "exact", tol: float = DEFAULT_TOL,
                         resolution: int = 512) -> SimilarityReport:
    """Decide whether two regular curves share their unit tangents under a
    variable transformation of arc lengths.

    Each tangent image is reparametrized by its own spherical arc length
    sigma and the tangents are compared over the common sigma span, literally
    or after a best proper rotation.  Straight segments (stalled tangent
    image) raise InapplicableError naming the parameter interval.
    """
    if mode not in ("exact", "up_to_rotation"):
        raise ValueError(f"mode must be 'exact' or 'up_to_rotation', got {mode!r}")
    sa, sb = _SigmaSampled(a), _SigmaSampled(b)
    overlap = min(sa.total, sb.total)
    if overlap <= 1e-9:
        raise OverlapError("curves have no common span of the tangent-image arc")
    grid = np.linspace(0.0, overlap, resolution)
    da, db = sa.at(grid), sb.at(grid)
    R = np.eye(3) if mode == "exact" else procrustes_rotation(da["T"], db["T"])
    tangent_sup = float(np.max(np.linalg.norm(da["T"] @ R.T - db["T"], axis=-1)))
    lam = db["rate"] / da["rate"]
    defect = _composition_defect(db["s"], da["s"], lam)
    transformation = VariableTransformation(db["s"], da["s"], lam, defect)
    deviations = {"tangent_sup": tangent_sup}
    verdict = tangent_sup <= tol
    return SimilarityReport(verdict, mode, transformation, R, deviations,
                            float(overlap), tol)


# ---------------------------------------------------------------------------
# Theorem-level checks and family corollaries
# ---------------------------------------------------------------------------

def verify_theorem_3_4(a: RuledSurface, b: RuledSurface, mode: str = "exact",
                       tol: float = DEFAULT_TOL) -> Theorem34Result:
    """For developable surfaces: similarity of the surfaces must coincide
    with similarity of their striction curves."""
    for s in (a, b):
        kind = s.classify().kind
        if kind != "developable":
            raise InapplicableError(
                f"surface {s.name or '<unnamed>'} is {kind}, not developable")
    surface_report = check_similar_surfaces(a, b, mode=mode, tol=tol)
    curve_report = check_similar_curves(a.striction_curve(), b.striction_curve(),
                                        mode=mode, tol=tol)
    return Theorem34Result(surface_report.verdict, curve_report.verdict,
                           surface_report.verdict == curve_report.verdict,
                           surface_report, curve_report)


def cylindrical_family_check(a: RuledSurface, b: RuledSurface,
                             mode: str = "exact") -> SimilarityReport:
    """Similarity for constant-director surfaces.

    Exact mode compares the constant rulings directly (within 1e-8); up to
    rotation any two cylinders are similar.  The arc-length transformation is
    unconstrained for cylinders and is reported as undefined."""
    if mode not in ("exact", "up_to_rotation"):
        raise ValueError(f"mode must be 'exact' or 'up_to_rotation', got {mode!r}")
    for s in (a, b):
        if not s.is_cylindrical():
            raise MixedKindError(
                f"surface {s.name or '<unnamed>'} is not cylindrical")
    qa = _mean_direction(a)
    qb = _mean_direction(b)
    if mode == "exact":
        dev = float(np.linalg.norm(qa - qb))
        verdict = dev <= 1e-8
        R = np.eye(3)
    else:
        R = _rotation_between(qa, qb)
        dev = float(np.linalg.norm(R @ qa - qb))
        verdict = True
    return SimilarityReport(verdict, mode, None, R, {"ruling_sup": dev},
                            0.0, 1e-8,
                            notes=("cylindrical family: arc-length "
                                   "transformation unconstrained (k1 = 0)",))


def _mean_direction(s: RuledSurface) -> np.ndarray:
    q = s.director.point(s.grid())
    m = q.mean(axis=0)
    return m / np.linalg.norm(m)


def conoid_family_check(a: RuledSurface, b: RuledSurface,
                        tol: float = DEFAULT_TOL,
                        tol_conoid: float = 1e-6) -> SimilarityReport:
    """Similarity for conoids (k1 != 0, k2 = 0).

    Both structure functions vanish, so the check reduces to the
    rotation-aligned ruling comparison over the common phi span."""
    for s in (a, b):
        cls = s.classify(tol_conoid=tol_conoid)
        if not cls.conoid:
            raise InapplicableError(
                f"surface {s.name or '<unnamed>'} is not a conoid "
                f"(k2 not identically zero or k1 vanishes)")
    return check_similar_surfaces(a, b, mode="up_to_rotation", tol=tol)


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def report_text(report: SimilarityReport) -> str:
    """Flat key = value rendering of a similarity report."""
    lines = [
        f"verdict = {'similar' if report.verdict else 'not_similar'}",
        f"mode = {report.mode}",
        f"tol = {fmt7(report.tol)}",
        f"phi_overlap = {fmt7(report.phi_overlap)}",
    ]
    for key in sorted(report.deviations):
        lines.append(f"{key} = {fmt7(report.deviations[key])}")
    t = report.transformation
    if t is None:
        lines.append("lambda = undefined")
    else:
        lo, hi = float(np.min(t.lam)), float(np.max(t.lam))
        if hi - lo <= 1e-9 * max(1.0, abs(hi)):
            lines.append(f"lambda = {t.lam[0]:.8f}")
        else:
            lines.append(f"lambda_min = {fmt7(lo)}")
            lines.append(f"lambda_max = {fmt7(hi)}")
        lines.append(f"lambda_derivative_defect = {fmt7(t.derivative_defect)}")
    if report.offsets != (0.0, 0.0):
        lines.append(f"phi_offset_a = {fmt7(report.offsets[0])}")
        lines.append(f"phi_offset_b = {fmt7(report.offsets[1])}")
    R = report.rotation
    if not np.allclose(R, np.eye(3), atol=1e-12):
        for i in range(3):
            lines.append("rotation_row%d = %s" % (i, " ".join(fmt7(x) for x in R[i])))
    else:
        lines.append("rotation = identity")
    for note in report.notes:
        lines.append(f"note = {note}")
    return "\n".join(lines) + "\n"


def write_transformation_csv(path, report: SimilarityReport) -> None:
    """CSV of (s_b, s_a, lambda) triples for the recovered transformation."""
    t = report.transformation
    if t is None:
        raise ValueError("report carries no transformation (cylindrical family)")
    buf = io.StringIO()
    buf.write("s_b,s_a,lambda\n")
    for i in range(len(t.s_source)):
        buf.write(f"{fmt17(t.s_source[i])},{fmt17(t.s_target[i])},{fmt17(t.lam[i])}\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
