# core/utils.py
import json
from pathlib import Path

import numpy as np
import yaml

from core.exceptions import ConfigurationError, InputError


def as_bits(values, length=None) -> np.ndarray:
    """
    Coerce a 0/1 sequence into a uint8 vector.

    Raises InputError when `length` is given and does not match.
    """
    bits = np.asarray(values, dtype=np.uint8).reshape(-1) & 1
    if length is not None and bits.size != length:
        raise InputError(f"expected {length} bits, got {bits.size}")
    return bits


def gf2_span(rows) -> np.ndarray:
    """
    Every element of the GF(2) row span of `rows` (including zero).

    Only meant for the handful of generators an inner code has.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.uint8))
    if rows.size == 0:
        return np.zeros((1, rows.shape[1] if rows.ndim == 2 else 0), dtype=np.uint8)
    m = rows.shape[0]
    coeffs = (np.arange(2 ** m)[:, None] >> np.arange(m)) & 1
    return (coeffs @ rows % 2).astype(np.uint8)


def in_span(vector, rows) -> bool:
    span = gf2_span(rows)
    return bool((span == np.asarray(vector, dtype=np.uint8)).all(axis=1).any())


def load_structured(path) -> dict:
    """
    Read a JSON or YAML document (chosen by suffix).

    OSError propagates untouched; parse errors become ConfigurationError.
    """
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"could not parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a mapping at the top level")
    return data


def dump_json(data, path=None) -> str:
    text = json.dumps(data, indent=2, sort_keys=True, default=_json_default)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
