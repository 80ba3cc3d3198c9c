"""RowSet plus the two tabular wire codecs (JSON and CSV).

The same codecs serve content negotiation and the dump format, so the
round-trip guarantees are stated here once:

  - JSON: array of objects, column names as keys, null for nulls, numbers
    unquoted, dates/timestamps as ISO-8601 strings.
  - CSV: mandatory header row, RFC-4180 quoting, UTF-8, CRLF line ends.
    A null is an empty unquoted field; an empty text value is a quoted
    empty string "".  That distinction is why the reader/writer here are
    hand-rolled instead of using the csv module, which erases quoting on
    read.
"""
from __future__ import annotations

import json as _json
from dataclasses import dataclass, field

from . import coltypes
from .errors import ValidationError


@dataclass
class RowSet:
    """Ordered tuples under an ordered (name, typename) column header."""

    columns: list[tuple[str, str]] = field(default_factory=list)
    rows: list[tuple] = field(default_factory=list)

    def column_names(self) -> list[str]:
        return [name for name, _ in self.columns]

    def check(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValidationError(f"row {i} arity {len(row)} != {len(self.columns)} columns")
            for (name, typename), value in zip(self.columns, row):
                coltypes.check_value(typename, value, where=f"row {i} column {name}")


def encode_json(rowset: RowSet) -> bytes:
    out = []
    for row in rowset.rows:
        obj = {name: coltypes.to_json(typename, value)
               for (name, typename), value in zip(rowset.columns, row)}
        out.append(obj)
    return (_json.dumps(out, ensure_ascii=False)).encode("utf-8")


def decode_json(data: bytes, target_columns: dict[str, str]) -> RowSet:
    """Decode a JSON array of objects against available target columns.

    All objects must share one key set; keys must name target columns.
    """
    try:
        doc = _json.loads(data.decode("utf-8"), parse_constant=_reject_constant)
    except (ValueError, UnicodeDecodeError) as e:
        raise ValidationError(f"malformed JSON payload: {e}")
    if not isinstance(doc, list):
        raise ValidationError("JSON payload must be an array of objects")
    if not doc:
        return RowSet([], [])
    first = doc[0]
    if not isinstance(first, dict):
        raise ValidationError("JSON payload row 0 is not an object")
    names = list(first.keys())
    for name in names:
        if name not in target_columns:
            raise ValidationError(f"unknown payload column {name!r}")
    columns = [(name, target_columns[name]) for name in names]
    rows = []
    for i, obj in enumerate(doc):
        if not isinstance(obj, dict):
            raise ValidationError(f"JSON payload row {i} is not an object")
        if set(obj.keys()) != set(names):
            raise ValidationError(f"JSON payload row {i} has a different column set than row 0")
        rows.append(tuple(
            coltypes.from_json(typename, obj[name], where=f"row {i} column {name}")
            for name, typename in columns))
    return RowSet(columns, rows)


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} not allowed")


_NEEDS_QUOTE = ('"', ",", "\r", "\n")


def _cell(typename: str, value) -> str:
    if value is None:
        return ""
    text = coltypes.render_literal(typename, value)
    if text == "" or any(c in text for c in _NEEDS_QUOTE):
        return '"' + text.replace('"', '""') + '"'
    return text


def encode_csv(rowset: RowSet) -> bytes:
    lines = [",".join(_cell("text", name) for name in rowset.column_names())]
    for row in rowset.rows:
        lines.append(",".join(
            _cell(typename, value)
            for (_, typename), value in zip(rowset.columns, row)))
    return ("\r\n".join(lines) + "\r\n").encode("utf-8")


def _scan_csv(text: str):
    """Yield records as lists of (text, was_quoted) fields."""
    record, fieldbuf, quoted = [], [], False
    i, n = 0, len(text)
    in_quotes = False
    started = False

    def flush_field():
        nonlocal fieldbuf, quoted, started
        record.append(("".join(fieldbuf), quoted))
        fieldbuf, quoted, started = [], False, False

    while i < n:
        c = text[i]
        if in_quotes:
            if c == '"':
                if i + 1 < n and text[i + 1] == '"':
                    fieldbuf.append('"')
                    i += 2
                    continue
                in_quotes = False
                i += 1
                continue
            fieldbuf.append(c)
            i += 1
            continue
        if c == '"':
            if started and fieldbuf:
                raise ValidationError(f"CSV: stray quote at offset {i}")
            in_quotes = True
            quoted = True
            started = True
            i += 1
            continue
        if c == ",":
            flush_field()
            i += 1
            continue
        if c == "\r" or c == "\n":
            flush_field()
            yield record
            record = []
            if c == "\r" and i + 1 < n and text[i + 1] == "\n":
                i += 2
            else:
                i += 1
            continue
        fieldbuf.append(c)
        started = True
        i += 1
    if in_quotes:
        raise ValidationError("CSV: unterminated quoted field")
    if fieldbuf or quoted or record:
        flush_field()
        yield record


def decode_csv(data: bytes, target_columns: dict[str, str]) -> RowSet:
    """Decode CSV against available target columns; header row is mandatory."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ValidationError(f"CSV payload is not valid UTF-8: {e}")
    records = list(_scan_csv(text))
    if not records:
        raise ValidationError("CSV payload lacks a header row")
    header = [name for name, _ in records[0]]
    for name in header:
        if name not in target_columns:
            raise ValidationError(f"unknown payload column {name!r} in CSV header")
    if len(set(header)) != len(header):
        raise ValidationError("duplicate column name in CSV header")
    columns = [(name, target_columns[name]) for name in header]
    rows = []
    for r, record in enumerate(records[1:]):
        if len(record) != len(header):
            raise ValidationError(f"CSV row {r} has {len(record)} fields, expected {len(header)}")
        row = []
        for (name, typename), (cell, was_quoted) in zip(columns, record):
            if cell == "" and not was_quoted:
                row.append(None)
            elif typename == "text":
                row.append(cell)
            else:
                try:
                    row.append(coltypes.parse_literal(typename, cell))
                except ValidationError as e:
                    raise ValidationError(f"CSV row {r} column {name}: {e.message}")
        rows.append(tuple(row))
    return RowSet(columns, rows)


def encode(rowset: RowSet, fmt: str) -> bytes:
    if fmt == "json":
        return encode_json(rowset)
    if fmt == "csv":
        return encode_csv(rowset)
    raise ValidationError(f"unknown format {fmt!r}")


def decode(data: bytes, fmt: str, target_columns: dict[str, str]) -> RowSet:
    if fmt == "json":
        return decode_json(data, target_columns)
    if fmt == "csv":
        return decode_csv(data, target_columns)
    raise ValidationError(f"unknown format {fmt!r}")
