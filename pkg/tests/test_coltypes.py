import random
from datetime import date, datetime, timezone

import pytest

from ercatalog import coltypes
from ercatalog.errors import ValidationError


@pytest.mark.parametrize("typename,text,value", [
    ("int8", "17", 17),
    ("int8", "-3", -3),
    ("float8", "1.5", 1.5),
    ("float8", "1e3", 1000.0),
    ("boolean", "true", True),
    ("boolean", "false", False),
    ("text", "a/b c", "a/b c"),
    ("date", "2016-01-28", date(2016, 1, 28)),
    ("json", '{"a": 1}', {"a": 1}),
])
def test_parse_literal(typename, text, value):
    assert coltypes.parse_literal(typename, text) == value


def test_timestamp_parsing_normalizes_to_utc():
    v = coltypes.parse_literal("timestamptz", "2016-02-24T10:00:00+02:00")
    assert v == datetime(2016, 2, 24, 8, 0, tzinfo=timezone.utc)
    assert coltypes.parse_literal("timestamptz", "2016-02-24T08:00:00Z") == v
    # no offset means UTC
    assert coltypes.parse_literal("timestamptz", "2016-02-24T08:00:00") == v


@pytest.mark.parametrize("typename,text", [
    ("int8", "1.5"),
    ("int8", "1_0"),
    ("int8", ""),
    ("int8", str(2**63)),
    ("float8", "nan"),
    ("float8", "inf"),
    ("float8", "1_0.5"),
    ("boolean", "True"),
    ("boolean", "1"),
    ("date", "2016-13-01"),
    ("timestamptz", "not-a-time"),
    ("json", "{broken"),
    ("json", "NaN"),
])
def test_parse_literal_rejects(typename, text):
    with pytest.raises(ValidationError):
        coltypes.parse_literal(typename, text)


def test_render_parse_round_trip_randomized():
    rng = random.Random(5)
    for _ in range(2000):
        typename = rng.choice(coltypes.TYPE_NAMES)
        value = _random_value(rng, typename)
        text = coltypes.render_literal(typename, value)
        back = coltypes.parse_literal(typename, text)
        assert coltypes.canonical(typename, back) == coltypes.canonical(typename, value)


def _random_value(rng, typename):
    if typename == "text":
        return "".join(rng.choice("ab州 /%,:=()!\n\"'\\") for _ in range(rng.randint(0, 8)))
    if typename == "int8":
        return rng.randint(coltypes.INT8_MIN, coltypes.INT8_MAX)
    if typename == "float8":
        return rng.choice([0.0, -1.5, 3.14159, 1e300, -1e-300, 42.0])
    if typename == "boolean":
        return rng.random() < 0.5
    if typename == "date":
        return date(rng.randint(1, 9999), rng.randint(1, 12), rng.randint(1, 28))
    if typename == "timestamptz":
        return datetime(rng.randint(1, 9999), rng.randint(1, 12), rng.randint(1, 28),
                        rng.randint(0, 23), rng.randint(0, 59), rng.randint(0, 59),
                        rng.choice([0, 123456]), tzinfo=timezone.utc)
    return rng.choice([None, True, 1, 2.5, "s", [1, [2]], {"a": {"b": None}}])


def test_from_json_type_checks():
    assert coltypes.from_json("int8", 5) == 5
    assert coltypes.from_json("float8", 5) == 5.0
    assert coltypes.from_json("int8", None) is None
    with pytest.raises(ValidationError):
        coltypes.from_json("int8", True)
    with pytest.raises(ValidationError):
        coltypes.from_json("int8", 1.5)
    with pytest.raises(ValidationError):
        coltypes.from_json("boolean", "true")
    with pytest.raises(ValidationError):
        coltypes.from_json("text", 3)
    with pytest.raises(ValidationError):
        coltypes.from_json("float8", float("inf"))


def test_json_canonical_is_order_insensitive():
    a = coltypes.canonical("json", {"x": 1, "y": [1, 2]})
    b = coltypes.canonical("json", {"y": [1, 2], "x": 1})
    assert a == b
    assert coltypes.canonical("json", {"x": 1}) != coltypes.canonical("json", {"x": 2})
