"""JSON helpers: stable 12-significant-digit output and readable load errors."""

from __future__ import annotations

import json
import math
from collections.abc import Mapping
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ValidationError

SCHEMA = "qpc/1"


def round_floats(obj):
    """Recursively round floats to 12 significant digits (numpy scalars included)."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Mapping):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(round_floats(obj), indent=1) + "\n"


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def parse_json(text: str, source: str = "<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from None


def read_json(path: str | Path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"{p}: no such file") from None
    except IsADirectoryError:
        raise ValidationError(f"{p}: is a directory") from None
    return parse_json(text, str(p))


def check_fields(d, known: set[str], what: str, required: set[str] = frozenset()) -> None:
    if not isinstance(d, Mapping):
        raise ValidationError(f"{what} must be a JSON object")
    extra = set(d) - set(known)
    if extra:
        raise ValidationError(f"unknown {what} fields {sorted(extra)}")
    missing = set(required) - set(d)
    if missing:
        raise ValidationError(f"{what} lacks required fields {sorted(missing)}")
    if "schema" in d and d["schema"] != SCHEMA:
        raise ValidationError(f"{what}: unsupported schema {d['schema']!r} (expected {SCHEMA!r})")


def data_path(name: str) -> Path:
    """Path of a bundled data file such as ``chi_fusion.json``."""
    p = resources.files("qpc.data").joinpath(name)
    if not p.is_file():
        raise ValidationError(f"no bundled data file {name!r}")
    return Path(str(p))
