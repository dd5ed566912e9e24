"""File formats: surface definition files, sampled-surface CSV, frame CSV,
Wavefront OBJ, and report text.

Machine-exchange numbers are written with 17 significant digits; human
summaries round to 7.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from . import expr
from .curves import CurveSpec, SampledCurve
from .errors import ParseError
from .surface import RuledSurface

SAMPLED_HEADER = "s,cx,cy,cz,qx,qy,qz"
FRAME_HEADER = "s,u,phi,cx,cy,cz,qx,qy,qz,hx,hy,hz,ax,ay,az,k1,k2"


def fmt17(x: float) -> str:
    return f"{float(x):.16e}"


def fmt7(x: float) -> str:
    return f"{float(x):.7g}"


# ---------------------------------------------------------------------------
# Surface definition files
# ---------------------------------------------------------------------------

def _const_value(text: str, line_no: int) -> float:
    """Evaluate a constant expression (no u allowed), e.g. '2*pi'."""
    try:
        node = expr.parse_expression(text)
    except ParseError as e:
        raise ParseError(f"bad numeric value {text!r}: {e}", offset=e.offset,
                         line=line_no) from None
    if expr.contains_var(node):
        raise ParseError(f"value {text!r} may not depend on u", offset=0,
                         line=line_no)
    return float(expr.evaluate(node, 0.0))


def parse_surface_definition(text: str, name_hint: str = "",
                             samples_override: int | None = None) -> RuledSurface:
    """Parse the sectioned key = value surface format.

    Sections: [surface] (name, u_min, u_max, samples, normalize),
    [base] and [director] (x, y, z expressions in u).
    """
    section = None
    fields: dict[str, dict[str, tuple[str, int]]] = {"surface": {}, "base": {}, "director": {}}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in fields:
                raise ParseError(f"unknown section [{section}]", offset=0, line=line_no)
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", offset=0,
                             line=line_no)
        if section is None:
            raise ParseError("key outside any [section]", offset=0, line=line_no)
        key, value = (part.strip() for part in line.split("=", 1))
        fields[section][key.lower()] = (value, line_no)

    def need(section: str, key: str) -> tuple[str, int]:
        try:
            return fields[section][key]
        except KeyError:
            raise ParseError(f"missing '{key}' in [{section}]", offset=0,
                             line=0) from None

    sur = fields["surface"]
    name = sur.get("name", (name_hint, 0))[0]
    u_min = _const_value(*need("surface", "u_min"))
    u_max = _const_value(*need("surface", "u_max"))
    samples = int(_const_value(*sur.get("samples", ("512", 0))))
    if samples_override is not None:
        samples = int(samples_override)
    normalize_text = sur.get("normalize", ("true", 0))[0].strip().lower()
    if normalize_text not in ("true", "false"):
        raise ParseError(f"normalize must be true or false, got {normalize_text!r}",
                         offset=0, line=sur.get("normalize", ("", 0))[1])
    normalize = normalize_text == "true"

    def curve(section: str) -> CurveSpec:
        comps = []
        for key in ("x", "y", "z"):
            value, line_no = need(section, key)
            try:
                comps.append(expr.parse_expression(value))
            except ParseError as e:
                raise ParseError(f"in [{section}] {key}: {e}", offset=e.offset,
                                 line=line_no) from None
        return CurveSpec(*comps, u_min=u_min, u_max=u_max, sample_count=samples)

    return RuledSurface(curve("base"), curve("director"), name=name,
                        normalize_director=normalize)


def load_surface_file(path: str | Path,
                      samples_override: int | None = None) -> RuledSurface:
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    first = text.lstrip().splitlines()[0].strip() if text.strip() else ""
    if first.replace(" ", "") == SAMPLED_HEADER:
        return read_sampled_surface(p)
    return parse_surface_definition(text, name_hint=p.stem,
                                    samples_override=samples_override)


# ---------------------------------------------------------------------------
# Sampled-surface CSV (one row per arc-length sample of the striction curve)
# ---------------------------------------------------------------------------

def write_sampled_surface(path: str | Path, s: np.ndarray, c: np.ndarray,
                          q: np.ndarray) -> None:
    buf = io.StringIO()
    buf.write(SAMPLED_HEADER + "\n")
    for i in range(len(s)):
        row = [s[i], *c[i], *q[i]]
        buf.write(",".join(fmt17(x) for x in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def sampled_surface_from_arrays(s: np.ndarray, c: np.ndarray, q: np.ndarray,
                                name: str = "") -> RuledSurface:
    base = SampledCurve(s, c)
    director = SampledCurve(s, q)
    return RuledSurface(base, director, name=name, normalize_director=True)


def read_sampled_surface(path: str | Path) -> RuledSurface:
    p = Path(path)
    rows = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[1] != 7:
        raise ParseError(f"{p}: sampled surface needs 7 columns ({SAMPLED_HEADER})",
                         offset=0, line=1)
    s = rows[:, 0]
    return sampled_surface_from_arrays(s, rows[:, 1:4], rows[:, 4:7], name=p.stem)


# ---------------------------------------------------------------------------
# Frame CSV
# ---------------------------------------------------------------------------

def write_frame_csv(path: str | Path, F) -> None:
    buf = io.StringIO()
    buf.write(FRAME_HEADER + "\n")
    for i in range(len(F.s)):
        row = [F.s[i], F.u[i], F.phi[i], *F.c[i], *F.q[i], *F.h[i], *F.a[i],
               F.k1[i], F.k2[i]]
        buf.write(",".join(fmt17(x) for x in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# Wavefront OBJ (vertices + triangles only)
# ---------------------------------------------------------------------------

def write_obj(path: str | Path, vertices: np.ndarray,
              triangles: np.ndarray) -> None:
    buf = io.StringIO()
    for v in vertices:
        buf.write(f"v {fmt17(v[0])} {fmt17(v[1])} {fmt17(v[2])}\n")
    for t in triangles:
        buf.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_obj(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    vertices = []
    triangles = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            vertices.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            triangles.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.asarray(vertices, dtype=float), np.asarray(triangles, dtype=int)


def tessellate(surface: RuledSurface, v_min: float, v_max: float,
               nu: int, nv: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid of surface points (row-major, u varying slowest) and triangles.

    nu x nv vertices; each quad splits into two triangles with consistent
    winding, so there are 2 (nu-1)(nv-1) triangles."""
    if nu < 2 or nv < 2:
        raise ValueError("nu and nv must both be >= 2")
    us = np.linspace(surface.u_min, surface.u_max, nu)
    vs = np.linspace(v_min, v_max, nv)
    verts = np.empty((nu * nv, 3))
    for i, u in enumerate(us):
        f = surface.base.point(float(u))
        q = surface.director.point(float(u))
        verts[i * nv:(i + 1) * nv] = f[None, :] + vs[:, None] * q[None, :]
    tris = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            a = i * nv + j
            b = a + 1
            c = a + nv
            d = c + 1
            tris.append((a, b, d))
            tris.append((a, d, c))
    return verts, np.asarray(tris, dtype=int)
