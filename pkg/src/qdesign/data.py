"""Shipped JSON fixtures: locating, regenerating and checksumming them.

Matrices use the ``{"rows", "cols", "data"}`` format of :mod:`qdesign.core`
and grids the ``{"n", "entries"}`` format of :mod:`qdesign.sudoq`. The
manifest ``checksums.json`` records the SHA-256 digest of every fixture.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import ame, birkhoff, sudoq
from .core import matrix_to_json

FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"
MANIFEST = "checksums.json"


def fixture_payloads() -> dict:
    """Every fixture as ``{file name: JSON-serializable object}``."""
    out = {
        "p36.json": matrix_to_json(ame.p36()),
        "seed_matrix.json": matrix_to_json(ame.seed_matrix()),
        "a_opt.json": matrix_to_json(ame.optimal_family_matrix("A")),
        "g_opt.json": matrix_to_json(ame.optimal_family_matrix("G")),
        "w_opt.json": matrix_to_json(ame.optimal_family_matrix("W")),
        "j.json": matrix_to_json(birkhoff.MATRIX_J),
    }
    for name in sudoq.DISPLAYED_DESIGNS:
        out[f"{name}.json"] = sudoq.grid_to_json(sudoq.displayed_design(name))
    return out


def _encode(obj) -> bytes:
    return json.dumps(obj, sort_keys=True).encode()


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_fixtures(directory=FIXTURE_DIR) -> dict:
    """Write all fixtures and the checksum manifest; returns the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for name, obj in fixture_payloads().items():
        data = _encode(obj)
        (directory / name).write_bytes(data)
        manifest[name] = digest(data)
    (directory / MANIFEST).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest


def verify_fixtures(directory=FIXTURE_DIR) -> dict:
    """``{file name: bool}``: whether each file matches its recorded digest."""
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST).read_text())
    return {
        name: (directory / name).is_file() and digest((directory / name).read_bytes()) == want
        for name, want in manifest.items()
    }


def resolve(path) -> Path:
    """Return ``path`` if it exists, otherwise the shipped fixture of that name.

    ``fixtures/p36.json`` and ``p36.json`` both resolve to the shipped file
    when no such file exists relative to the working directory.
    """
    p = Path(path)
    if p.exists():
        return p
    candidate = FIXTURE_DIR / p.name
    if candidate.exists():
        return candidate
    raise FileNotFoundError(f"no such file: {path}")
