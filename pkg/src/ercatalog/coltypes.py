"""The closed column type system.

Seven scalar types cover catalog content: text, int8, float8, boolean,
date, timestamptz, json.  Every layer (URL operands, JSON/CSV payloads,
stored values, sort comparisons) funnels through the converters here so
that typing rules are stated exactly once.

Conventions:
  - timestamptz values are timezone-aware datetimes normalized to UTC;
    inputs without an offset are taken as UTC.
  - dates are proleptic Gregorian (datetime.date).
  - json values are arbitrary JSON data; a bare JSON null in a payload
    denotes SQL null, so JSON-null is not storable at the top level.
  - null ordering and json comparability are decided by callers; this
    module only compares non-null scalars.
"""
from __future__ import annotations

import json as _json
import math
import re
from datetime import date, datetime, timezone

from .errors import ValidationError

TYPE_NAMES = ("text", "int8", "float8", "boolean", "date", "timestamptz", "json")

# json has no defined ordering; everything else compares naturally.
ORDERED_TYPES = frozenset(TYPE_NAMES) - {"json"}

INT8_MIN = -(2 ** 63)
INT8_MAX = 2 ** 63 - 1

_INT_RE = re.compile(r"[+-]?[0-9]+$")
_FLOAT_RE = re.compile(r"[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?$")


def is_type_name(name: str) -> bool:
    return name in TYPE_NAMES


def _bad(typename, text, why=""):
    suffix = f" ({why})" if why else ""
    return ValidationError(f"invalid {typename} literal {text!r}{suffix}")


def parse_timestamp(text: str) -> datetime:
    t = text.strip()
    if t.endswith(("Z", "z")):
        t = t[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(t)
    except ValueError:
        raise _bad("timestamptz", text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def parse_literal(typename: str, text: str):
    """Parse a non-null textual literal (URL operand, CSV cell, @after value)."""
    if typename == "text":
        return text
    if typename == "int8":
        if not _INT_RE.match(text):
            raise _bad("int8", text)
        value = int(text)
        if not INT8_MIN <= value <= INT8_MAX:
            raise _bad("int8", text, "out of range")
        return value
    if typename == "float8":
        if not _FLOAT_RE.match(text.strip()):
            raise _bad("float8", text)
        return float(text)
    if typename == "boolean":
        if text == "true":
            return True
        if text == "false":
            return False
        raise _bad("boolean", text, "expected true or false")
    if typename == "date":
        try:
            return date.fromisoformat(text)
        except ValueError:
            raise _bad("date", text)
    if typename == "timestamptz":
        return parse_timestamp(text)
    if typename == "json":
        try:
            value = _json.loads(text, parse_constant=_reject_constant)
        except ValueError:
            raise _bad("json", text)
        return value
    raise ValidationError(f"unknown column type {typename!r}")


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} not allowed")


def render_literal(typename: str, value) -> str:
    """Canonical text form of a non-null value; inverse of parse_literal."""
    if typename == "text":
        return value
    if typename == "int8":
        return str(value)
    if typename == "float8":
        return repr(float(value))
    if typename == "boolean":
        return "true" if value else "false"
    if typename in ("date", "timestamptz"):
        return value.isoformat()
    if typename == "json":
        return canonical_json(value)
    raise ValidationError(f"unknown column type {typename!r}")


def from_json(typename: str, value, where: str = "value"):
    """Convert a decoded-JSON payload value to the stored form (null allowed)."""
    if value is None:
        return None
    if typename == "text":
        if not isinstance(value, str):
            raise ValidationError(f"{where}: expected string, got {_jname(value)}")
        return value
    if typename == "int8":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where}: expected integer, got {_jname(value)}")
        if not INT8_MIN <= value <= INT8_MAX:
            raise ValidationError(f"{where}: integer out of int8 range")
        return value
    if typename == "float8":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where}: expected number, got {_jname(value)}")
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError(f"{where}: non-finite number")
        return value
    if typename == "boolean":
        if not isinstance(value, bool):
            raise ValidationError(f"{where}: expected boolean, got {_jname(value)}")
        return value
    if typename == "date":
        if not isinstance(value, str):
            raise ValidationError(f"{where}: expected date string")
        try:
            return date.fromisoformat(value)
        except ValueError:
            raise ValidationError(f"{where}: invalid date {value!r}")
    if typename == "timestamptz":
        if not isinstance(value, str):
            raise ValidationError(f"{where}: expected timestamp string")
        try:
            return parse_timestamp(value)
        except ValidationError:
            raise ValidationError(f"{where}: invalid timestamp {value!r}")
    if typename == "json":
        check_json_data(value, where)
        return value
    raise ValidationError(f"unknown column type {typename!r}")


def to_json(typename: str, value):
    """Stored value -> JSON-encodable value (None passes through)."""
    if value is None:
        return None
    if typename in ("date", "timestamptz"):
        return value.isoformat()
    return value


def check_json_data(value, where="json value"):
    """Reject non-JSON structure and non-finite numbers inside json payloads."""
    if value is None or isinstance(value, (str, bool, int)):
        return
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"{where}: non-finite number in json data")
        return
    if isinstance(value, list):
        for item in value:
            check_json_data(item, where)
        return
    if isinstance(value, dict):
        for k, v in value.items():
            if not isinstance(k, str):
                raise ValidationError(f"{where}: non-string json object key")
            check_json_data(v, where)
        return
    raise ValidationError(f"{where}: value of type {type(value).__name__} is not json data")


def check_value(typename: str, value, where: str = "value"):
    """Assert a stored value matches its declared type (null always passes)."""
    if value is None:
        return
    ok = {
        "text": lambda v: isinstance(v, str),
        "int8": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "float8": lambda v: isinstance(v, float),
        "boolean": lambda v: isinstance(v, bool),
        "date": lambda v: isinstance(v, date) and not isinstance(v, datetime),
        "timestamptz": lambda v: isinstance(v, datetime),
        "json": lambda v: True,
    }[typename]
    if not ok(value):
        raise ValidationError(f"{where}: stored value {value!r} does not match type {typename}")


def canonical_json(value) -> str:
    return _json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical(typename: str, value):
    """Hashable stand-in used for join keys, grouping, and distinct."""
    if value is None:
        return None
    if typename == "json":
        return canonical_json(value)
    return value


def compare(a, b) -> int:
    """Three-way comparison of two non-null values of one ordered type."""
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def _jname(value):
    return {"str": "string", "bool": "boolean", "int": "integer",
            "float": "number", "list": "array", "dict": "object",
            "NoneType": "null"}.get(type(value).__name__, type(value).__name__)
