"""Bundled scene files and the plain-text scene format.

A scene file has two sections::

    # comments run to end of line
    [hypersurface]
    n = 2
    f = (t1^2 + t2^2)/2 + y^2/2
    [submanifold]
    g = t1*t2
    xi_scale = 1        # optional gauge multiplier, an expression in t
    gauge = blaschke    # optional: graph (default) | blaschke

Expressions use the scene expression grammar; for n = 1 the parameter is
named t, otherwise t1..tn.
"""

from __future__ import annotations

from importlib import resources

from ..errors import SceneFormatError
from ..frame import build_scene

CATALOG = (
    "a2",
    "a3",
    "a4",
    "a5",
    "d4",
    "d5",
    "e6",
    "e7",
    "e8",
    "cubic-curve",
    "nonflat",
    "hyperquadric",
)


def parse_scene_text(text, name=None):
    """Parse the scene file format into a Scene."""
    section = None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("hypersurface", "submanifold"):
                raise SceneFormatError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line or section is None:
            raise SceneFormatError(f"line {lineno}: expected 'key = value' in a section")
        key, value = (part.strip() for part in line.split("=", 1))
        allowed = {
            "hypersurface": ("n", "f"),
            "submanifold": ("g", "xi_scale", "gauge"),
        }[section]
        if key not in allowed:
            raise SceneFormatError(f"line {lineno}: unknown key '{key}' in [{section}]")
        values[key] = value
    for required in ("n", "f", "g"):
        if required not in values:
            raise SceneFormatError(f"scene file is missing '{required}'")
    try:
        n = int(values["n"])
    except ValueError as err:
        raise SceneFormatError(f"n must be an integer, got {values['n']!r}") from err
    return build_scene(
        values["f"],
        values["g"],
        n,
        xi_scale_text=values.get("xi_scale"),
        gauge=values.get("gauge", "graph"),
        name=name,
    )


def serialize_scene(scene):
    lines = ["[hypersurface]", f"n = {scene.n}", f"f = {scene.f_text}",
             "[submanifold]", f"g = {scene.g_text}"]
    if scene.xi_scale_text:
        lines.append(f"xi_scale = {scene.xi_scale_text}")
    if scene.gauge != "graph":
        lines.append(f"gauge = {scene.gauge}")
    return "\n".join(lines) + "\n"


def bundled_text(name):
    if name not in CATALOG:
        raise SceneFormatError(f"no bundled scene named '{name}'")
    return resources.files(__package__).joinpath(f"{name}.scene").read_text()


def load_bundled(name):
    return parse_scene_text(bundled_text(name), name=name)
