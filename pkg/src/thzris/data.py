"""Access to the versioned coefficient tables shipped with the package.

Every table is a JSON file under ``thzris/data`` whose SHA-256 is recorded in
``_integrity.json``. Loading verifies the checksum and refuses mismatched
tables: wrong spectroscopy must be a hard error, not a silently wrong number.
``THZRIS_DATA_DIR`` overrides the data directory (checksums still apply).
"""
from __future__ import annotations

import hashlib
import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import DataIntegrityError

ENV_DATA_DIR = "THZRIS_DATA_DIR"


def data_dir() -> Path:
    override = os.environ.get(ENV_DATA_DIR)
    if override:
        return Path(override)
    return Path(str(resources.files("thzris").joinpath("data")))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@lru_cache(maxsize=None)
def _integrity_index(root: str) -> dict:
    path = Path(root) / "_integrity.json"
    if not path.exists():
        raise DataIntegrityError(f"missing integrity index {path}")
    return json.loads(path.read_text())


@lru_cache(maxsize=None)
def load_table(name: str) -> dict:
    """Load a checksummed JSON table by file name (e.g. ``p676_gas_lines.json``)."""
    root = data_dir()
    path = root / name
    if not path.exists():
        raise DataIntegrityError(f"missing data table {path}")
    index = _integrity_index(str(root))
    expected = index.get(name)
    if expected is None:
        raise DataIntegrityError(f"table {name} is not listed in _integrity.json")
    actual = _sha256(path)
    if actual != expected:
        raise DataIntegrityError(
            f"checksum mismatch for {name}: expected {expected}, got {actual}"
        )
    return json.loads(path.read_text())


def scene_path(name: str) -> Path:
    """Path of a bundled example scene (not checksummed; scenes are inputs)."""
    return data_dir() / "scenes" / name
