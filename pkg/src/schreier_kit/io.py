"""Parsing of families, sets, vectors and matrices from JSON or shorthand text."""

from __future__ import annotations

import json
import math
import os
import re
from typing import Any

import numpy as np

from .errors import DomainError
from .family import CounterFamily, ExplicitFamily, Family, FiniteSet, as_set
from .norms import SparseVector
from .schreier import Ordinal, SchreierFamily

DEFAULT_WINDOW = 12


def load_json_arg(text: str) -> Any:
    """Inline JSON, or the contents of the JSON file at that path."""
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainError(f"invalid JSON: {e}") from None


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise DomainError(f"{what} must be an integer, got {v!r}")
    try:
        f = float(v)
    except ValueError:
        raise DomainError(f"{what} must be an integer, got {v!r}") from None
    if not f.is_integer():
        raise DomainError(f"{what} must be an integer, got {v!r}")
    return int(f)


def parse_set(text) -> FiniteSet:
    """``"2,5"``, ``"[2,5]"``, ``""`` or a list of integers."""
    if isinstance(text, str):
        s = text.strip()
        if s.startswith("["):
            return parse_set(load_json_arg(s))
        items = [t for t in s.split(",") if t.strip()]
        return as_set(_int(t.strip(), "set element") for t in items)
    if isinstance(text, (list, tuple)):
        return as_set(_int(t, "set element") for t in text)
    raise DomainError(f"cannot read a set from {text!r}")


def _parse_blocks(text: str) -> list[FiniteSet]:
    blocks = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            a, b = _int(a, "block start"), _int(b, "block end")
            if b < a:
                raise DomainError(f"empty block {part!r}")
            blocks.append(FiniteSet(range(a, b + 1)))
        else:
            blocks.append(FiniteSet((_int(part, "block"),)))
    return blocks


def family_from_json(d: dict, window: int | None = None) -> Family:
    if not isinstance(d, dict) or "kind" not in d:
        raise DomainError("family JSON needs a 'kind' field")
    kind = d["kind"]
    w = window if window is not None else d.get("window", DEFAULT_WINDOW)
    if kind == "explicit":
        if "maximal" not in d:
            raise DomainError("explicit family needs 'maximal'")
        return ExplicitFamily([parse_set(s) for s in d["maximal"]], _int(w, "window"))
    if kind == "schreier":
        if "alpha" not in d:
            raise DomainError("schreier family needs 'alpha'")
        alpha = Ordinal.parse(str(d["alpha"]), d.get("fundamental", "succ"))
        return SchreierFamily(alpha, _int(w, "window"))
    if kind == "counter":
        blocks = [parse_set(b) for b in d.get("blocks", [])]
        return CounterFamily(blocks, _int(w, "window"))
    raise DomainError(f"unknown family kind {kind!r}; expected explicit, schreier or counter")


def parse_family(text: str, window: int | None = None) -> Family:
    """Shorthand (``schreier:2``, ``schreier:omega:plain``, ``counter:3-4,5-7``),
    inline JSON, or a JSON file path."""
    s = text.strip()
    if s.startswith("schreier:"):
        parts = s.split(":")
        if len(parts) not in (2, 3):
            raise DomainError(f"bad schreier shorthand {text!r}; use schreier:ALPHA[:succ|plain]")
        d = {"kind": "schreier", "alpha": parts[1]}
        if len(parts) == 3:
            d["fundamental"] = parts[2]
        return family_from_json(d, window)
    if s == "counter" or s.startswith("counter:"):
        blocks = _parse_blocks(s[len("counter:"):]) if ":" in s else []
        return CounterFamily(blocks, window if window is not None else DEFAULT_WINDOW)
    if not (s.startswith("{") or os.path.isfile(s)):
        raise DomainError(f"unknown family {text!r}; use schreier:ALPHA, counter[:BLOCKS], JSON or a file")
    return family_from_json(load_json_arg(s), window)


def family_to_json(fam: Family) -> dict:
    if isinstance(fam, SchreierFamily):
        out = {"kind": "schreier", "alpha": str(fam.alpha)}
        if fam.alpha.omega:
            out["fundamental"] = fam.alpha.fundamental
        out["window"] = fam.window
        return out
    if isinstance(fam, CounterFamily):
        return {"kind": "counter", "blocks": [list(b) for b in fam.blocks], "window": fam.window}
    if isinstance(fam, ExplicitFamily):
        return {"kind": "explicit", "maximal": [list(g) for g in fam.generators], "window": fam.window}
    return {"kind": fam.kind, "describe": fam.describe(), "window": fam.window}


_BARE_NUMBERS = re.compile(r"\s*[-+.\deE]+(\s*,\s*[-+.\deE]+)+\s*")


def parse_vector(text) -> SparseVector:
    """``{"1": 1.0, "3": -0.5}``, ``[1.0, 0, -0.5]`` or ``1,0,-0.5``, inline or from a file."""
    if isinstance(text, str) and _BARE_NUMBERS.fullmatch(text):
        text = f"[{text}]"
    d = load_json_arg(text) if isinstance(text, str) else text
    if isinstance(d, dict):
        try:
            return SparseVector({_int(k, "vector index"): v for k, v in d.items()})
        except (TypeError, ValueError) as e:
            raise DomainError(f"bad vector entry: {e}") from None
    if isinstance(d, list):
        try:
            return SparseVector(d)
        except (TypeError, ValueError) as e:
            raise DomainError(f"bad vector entry: {e}") from None
    raise DomainError("vector must be a JSON object or array")


def parse_matrix(text) -> np.ndarray:
    """Row-major array of arrays."""
    d = load_json_arg(text) if isinstance(text, str) else text
    try:
        M = np.array(d, dtype=float)
    except (TypeError, ValueError):
        raise DomainError("matrix must be a rectangular array of numbers") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.size == 0:
        raise DomainError(f"matrix must be square and nonempty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    return M


def parse_permutation(text) -> tuple[int, ...]:
    d = load_json_arg(text) if isinstance(text, str) and text.strip().startswith("[") else text
    if isinstance(d, str):
        d = [t for t in d.split(",") if t.strip()]
    if not isinstance(d, (list, tuple)):
        raise DomainError("permutation must be a list of 1-based images")
    return tuple(_int(v, "permutation entry") for v in d)


def jsonable(obj):
    """Recursively convert numpy scalars, tuples and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj
