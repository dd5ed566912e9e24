import math

import numpy as np
import pytest

from ruledsim.fileio import parse_surface_definition
from ruledsim.presets import get_preset


@pytest.fixture(scope="session")
def helicoid():
    return get_preset("helicoid")


@pytest.fixture(scope="session")
def helix_conoid():
    return get_preset("helix_conoid")


@pytest.fixture(scope="session")
def hyperboloid():
    return get_preset("hyperboloid")


@pytest.fixture(scope="session")
def tangent_developable():
    return get_preset("tangent_developable")


@pytest.fixture(scope="session")
def cylinder():
    return get_preset("cylinder")


def make_tangent_developable(radius: float, pitch: float,
                             u_max: float = 2 * math.pi,
                             samples: int = 512, axis: str = "z"):
    """Tangent developable of the helix (radius cos u, radius sin u, pitch u).

    The striction curve is the helix itself; k1 = radius/w^2, k2 = pitch/w^2
    with w^2 = radius^2 + pitch^2, so the structure function is pitch/radius.
    Set ``axis`` to permute coordinates (a rigidly rotated copy)."""
    w = math.sqrt(radius * radius + pitch * pitch)
    comps = {
        "bx": f"{radius}*cos(u)", "by": f"{radius}*sin(u)", "bz": f"{pitch}*u",
        "dx": f"-{radius}*sin(u)/{w}", "dy": f"{radius}*cos(u)/{w}", "dz": f"{pitch}/{w}",
    }
    if axis == "x":  # cycle xyz -> yzx
        comps = {
            "bx": comps["bz"], "by": comps["bx"], "bz": comps["by"],
            "dx": comps["dz"], "dy": comps["dx"], "dz": comps["dy"],
        }
    text = f"""
[surface]
name = tdev_{radius}_{pitch}_{axis}
u_min = 0
u_max = {u_max}
samples = {samples}
normalize = false
[base]
x = {comps['bx']}
y = {comps['by']}
z = {comps['bz']}
[director]
x = {comps['dx']}
y = {comps['dy']}
z = {comps['dz']}
"""
    return parse_surface_definition(text)


def make_surface(base_xyz, director_xyz, u_min, u_max, samples=512,
                 normalize=False, name="test"):
    text = f"""
[surface]
name = {name}
u_min = {u_min}
u_max = {u_max}
samples = {samples}
normalize = {'true' if normalize else 'false'}
[base]
x = {base_xyz[0]}
y = {base_xyz[1]}
z = {base_xyz[2]}
[director]
x = {director_xyz[0]}
y = {director_xyz[1]}
z = {director_xyz[2]}
"""
    return parse_surface_definition(text)


def frame_orthonormality_defect(F) -> float:
    """Worst orthonormality violation over the valid frame samples."""
    m = F.valid()
    q, h, a = F.q[m], F.h[m], F.a[m]
    checks = [
        np.abs(np.linalg.norm(q, axis=1) - 1.0),
        np.abs(np.linalg.norm(h, axis=1) - 1.0),
        np.abs(np.linalg.norm(a, axis=1) - 1.0),
        np.abs(np.sum(q * h, axis=1)),
        np.abs(np.sum(q * a, axis=1)),
        np.abs(np.sum(h * a, axis=1)),
        np.linalg.norm(a - np.cross(q, h), axis=1),
    ]
    return float(max(c.max() for c in checks))


def frenet_residual(F) -> float:
    """Worst relative defect of the frame derivative system, using 5-point
    central differences in u divided by ds/du."""
    g = F.u
    du = g[1] - g[0]

    def fd5(y):
        out = np.empty_like(y)
        out[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * du)
        out[:2] = np.nan
        out[-2:] = np.nan
        return out

    def d_ds(vecs):
        return np.stack([fd5(vecs[:, j]) for j in range(3)], axis=-1) / F.ds_du[:, None]

    dq, dh, da = d_ds(F.q), d_ds(F.h), d_ds(F.a)
    r1 = np.linalg.norm(dq - F.k1[:, None] * F.h, axis=-1)
    r2 = np.linalg.norm(dh - (-F.k1[:, None] * F.q + F.k2[:, None] * F.a), axis=-1)
    r3 = np.linalg.norm(da - (-F.k2[:, None] * F.h), axis=-1)
    scale = max(1.0, float(np.max(F.k1)), float(np.max(np.abs(F.k2))))
    inner = slice(2, -2)
    return float(max(r[inner].max() for r in (r1, r2, r3)) / scale)
