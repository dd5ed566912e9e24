"""Built-in surfaces, addressable by name from the CLI and the tests.

Each preset is stored in the surface definition format so the standard file
path is exercised even without fixture files on disk.
"""

from __future__ import annotations

from .fileio import parse_surface_definition
from .surface import RuledSurface

# The helicoid: axis base curve, horizontal rulings turning at unit rate.
_HELICOID = """
[surface]
name = helicoid
u_min = 0
u_max = 2*pi
samples = 512
normalize = false
[base]
x = 0
y = 0
z = u
[director]
x = cos(u)
y = sin(u)
z = 0
"""

# A conoid whose striction curve is a unit-pitch helix; its rulings match the
# helicoid's under the arc-length rescaling u -> u/sqrt(2).  The domain spans
# the same total ruling turn (2*pi) as the helicoid preset.
_HELIX_CONOID = """
[surface]
name = helix_conoid
u_min = 0
u_max = 2*2^(1/2)*pi
samples = 512
normalize = false
[base]
x = -sin(u/2^(1/2))
y = cos(u/2^(1/2))
z = u/2^(1/2)
[director]
x = cos(u/2^(1/2))
y = sin(u/2^(1/2))
z = 0
"""

_CYLINDER = """
[surface]
name = cylinder
u_min = 0
u_max = 2*pi
samples = 512
normalize = false
[base]
x = cos(u)
y = sin(u)
z = 0
[director]
x = 0
y = 0
z = 1
"""

# One-sheet hyperboloid ruling of the unit circle; k1 = k2 = 1/sqrt(2).
_HYPERBOLOID = """
[surface]
name = hyperboloid
u_min = 0
u_max = 2*pi
samples = 512
normalize = false
[base]
x = cos(u)
y = sin(u)
z = 0
[director]
x = -sin(u)/2^(1/2)
y = cos(u)/2^(1/2)
z = 1/2^(1/2)
"""

# Tangent developable of the unit-pitch circular helix; the striction curve
# is the helix itself (the edge of regression).
_TANGENT_DEVELOPABLE = """
[surface]
name = tangent_developable
u_min = 0
u_max = 2*pi
samples = 512
normalize = false
[base]
x = cos(u)
y = sin(u)
z = u
[director]
x = -sin(u)/2^(1/2)
y = cos(u)/2^(1/2)
z = 1/2^(1/2)
"""

_PRESETS = {
    "helicoid": _HELICOID,
    "helix_conoid": _HELIX_CONOID,
    "cylinder": _CYLINDER,
    "hyperboloid": _HYPERBOLOID,
    "tangent_developable": _TANGENT_DEVELOPABLE,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset_text(name: str) -> str:
    return _PRESETS[name]


def get_preset(name: str, samples: int | None = None) -> RuledSurface:
    try:
        text = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: "
                       f"{', '.join(preset_names())}") from None
    return parse_surface_definition(text, name_hint=name, samples_override=samples)
