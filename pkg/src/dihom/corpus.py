"""Named fixture complexes shipped with the package."""

from __future__ import annotations

import json
import re
from importlib import resources

from .pcs_core import PrecubicalSet, from_json, hollow_cube, standard_cube

_GENERATED = re.compile(r"^(cube|hollow-cube)-(\d+)$")


def fixture_names() -> list[str]:
    """Names of the JSON fixtures (generated cube families excluded)."""
    root = resources.files(__package__) / "fixtures"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> PrecubicalSet:
    """Load a fixture by name; ``cube-N`` and ``hollow-cube-N`` are built on the fly."""
    m = _GENERATED.match(name)
    if m and not (m.group(1) == "hollow-cube" and m.group(2) == "3"):
        n = int(m.group(2))
        return standard_cube(n) if m.group(1) == "cube" else hollow_cube(n)
    path = resources.files(__package__) / "fixtures" / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"unknown fixture {name!r}")
    return from_json(json.loads(path.read_text(encoding="utf-8")))
