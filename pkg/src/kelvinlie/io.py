"""JSON serialization of Kelvin matrices and triples."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classes import LieTriple, parse_class
from .errors import ValidationError
from .kelvin import check_spd


def triple_to_dict(t: LieTriple) -> dict:
    return {"Q": t.Q.tolist(), "V": t.V.tolist(), "lam": t.lam.tolist(),
            "class": None if t.cls is None else t.cls.value}


def triple_from_dict(d: dict, where: str = "triple") -> LieTriple:
    for key in ("Q", "V", "lam"):
        if key not in d:
            raise ValidationError(f"{where}: missing field '{key}'")
    cls = parse_class(d["class"]) if d.get("class") else None
    try:
        return LieTriple(np.array(d["Q"], dtype=float), np.array(d["V"], dtype=float),
                         np.array(d["lam"], dtype=float), cls)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    """Kelvin matrix from a nested list or an object with a ``kelvin`` field."""
    if isinstance(obj, dict):
        if "kelvin" not in obj:
            raise ValidationError(f"{where}: missing field 'kelvin'")
        obj = obj["kelvin"]
    try:
        C = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: not a numeric matrix") from None
    return check_spd(C, where)


def item_from_json(obj, where: str = "item"):
    """LieTriple when the object has a ``triple`` (or Q/V/lam) field, else a Kelvin matrix."""
    if isinstance(obj, dict) and "triple" in obj:
        return triple_from_dict(obj["triple"], f"{where}.triple")
    if isinstance(obj, dict) and "Q" in obj:
        return triple_from_dict(obj, where)
    return matrix_from_json(obj, where)


def load_json(path) -> object:
    p = Path(path)
    try:
        with p.open() as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") \
            from None
    except OSError as exc:
        raise ValidationError(f"{p}: cannot read ({exc.strerror})") from None


def dumps(obj) -> str:
    """Stable JSON text (sorted keys, full float precision)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


__all__ = ["triple_to_dict", "triple_from_dict", "matrix_from_json", "item_from_json",
           "load_json", "dumps"]
