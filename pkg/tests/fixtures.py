"""Shared test fixtures: models, seed data, and service builders."""
from __future__ import annotations

import random

from ercatalog import Config, Service
from ercatalog import coltypes
from ercatalog import model as erm
from ercatalog import storage
from ercatalog.registry import ClientContext, Registry

ALICE = ClientContext(identity="alice", attributes=frozenset({"grp:lab"}))

TOKENS = {
    "alice-token": {"identity": "alice", "attributes": ["grp:lab"]},
    "bob-token": {"identity": "bob", "attributes": []},
    "carol-token": {"identity": "carol", "attributes": ["grp:curators"]},
    "dave-token": {"identity": "dave", "attributes": []},
}


def make_service(**overrides) -> Service:
    cfg = Config(tokens=dict(TOKENS), **overrides)
    return Service(cfg)


def auth(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}


# --- Subject/Image navigation model -----------------------------------------

SUBJECT_IMAGE_TABLES = [
    {
        "name": "Subject",
        "columns": [
            {"name": "id", "type": "int8", "nullable": False},
            {"name": "name", "type": "text"},
        ],
        "keys": [{"columns": ["id"]}],
    },
    {
        "name": "Image",
        "columns": [
            {"name": "id", "type": "int8", "nullable": False},
            {"name": "subject_id", "type": "int8"},
            {"name": "acquired", "type": "date"},
            {"name": "quality", "type": "float8"},
            {"name": "reviewed", "type": "boolean"},
        ],
        "keys": [{"columns": ["id"]}],
        "foreign_keys": [
            {"columns": ["subject_id"],
             "references": {"schema": "public", "table": "Subject", "columns": ["id"]}},
        ],
    },
]


def subject_image_rows(n_subjects=5, n_images=24, seed=7):
    rng = random.Random(seed)
    subjects = [{"id": i, "name": f"subject-{i}"} for i in range(1, n_subjects + 1)]
    images = []
    for i in range(1, n_images + 1):
        images.append({
            "id": i,
            "subject_id": rng.randint(1, n_subjects),
            "acquired": f"2016-{rng.randint(1, 3):02d}-{rng.randint(1, 28):02d}",
            "quality": rng.choice([None, round(rng.uniform(0, 1), 3)]),
            "reviewed": rng.choice([None, True, False]),
        })
    return {"Subject": subjects, "Image": images}


def load_tables(store, table_docs, rows_by_table):
    """Apply table documents and seed rows in one transaction."""
    txn = store.begin("write")
    try:
        for doc in table_docs:
            storage.apply_model_change(txn, erm.CreateTable("public", doc))
        for tname, rows in rows_by_table.items():
            table = txn.model.table("public", tname)
            types = {c.name: c.type for c in table.columns}
            stored = txn.rows_mut("public", tname)
            for obj in rows:
                stored.append({k: coltypes.from_json(types[k], v)
                               for k, v in obj.items()})
        storage.check_all(txn.state)
        return store.commit(txn)
    except BaseException:
        store.abort(txn)
        raise


def subject_image_store(registry=None):
    registry = registry or Registry()
    store = registry.create_catalog(ALICE)
    load_tables(store, SUBJECT_IMAGE_TABLES, subject_image_rows())
    return store


# --- randomized-suite model ---------------------------------------------------

ORACLE_TABLES = [
    {
        "name": "A",
        "columns": [
            {"name": "id", "type": "int8", "nullable": False},
            {"name": "name", "type": "text"},
            {"name": "flag", "type": "boolean"},
            {"name": "score", "type": "float8"},
            {"name": "born", "type": "date"},
            {"name": "ts", "type": "timestamptz"},
            {"name": "meta", "type": "json"},
        ],
        "keys": [{"columns": ["id"]}],
    },
    {
        "name": "B",
        "columns": [
            {"name": "id", "type": "int8", "nullable": False},
            {"name": "a_id", "type": "int8"},
            {"name": "label", "type": "text"},
            {"name": "qty", "type": "int8"},
        ],
        "keys": [{"columns": ["id"]}],
        "foreign_keys": [
            {"columns": ["a_id"],
             "references": {"schema": "public", "table": "A", "columns": ["id"]}},
        ],
    },
    {
        "name": "C",
        "columns": [
            {"name": "id", "type": "int8", "nullable": False},
            {"name": "b_id", "type": "int8"},
            {"name": "note", "type": "text"},
            {"name": "at", "type": "timestamptz"},
        ],
        "keys": [{"columns": ["id"]}],
        "foreign_keys": [
            {"columns": ["b_id"],
             "references": {"schema": "public", "table": "B", "columns": ["id"]}},
        ],
    },
    {
        # two foreign keys to A: implicit links between D and A are ambiguous
        # on purpose, so endpoint spellings get exercised
        "name": "D",
        "columns": [
            {"name": "id", "type": "int8", "nullable": False},
            {"name": "d_a_id", "type": "int8"},
            {"name": "owner_id", "type": "int8"},
            {"name": "tag", "type": "text"},
        ],
        "keys": [{"columns": ["id"]}],
        "foreign_keys": [
            {"columns": ["d_a_id"],
             "references": {"schema": "public", "table": "A", "columns": ["id"]}},
            {"columns": ["owner_id"],
             "references": {"schema": "public", "table": "A", "columns": ["id"]}},
        ],
    },
]

_WORDS = ("alpha", "beta", "gamma", "delta", "omega", "probe", "scans",
          "tested", "testing", "running", "ran", "cells", "cell", "fish")


def oracle_rows(seed=11, n_a=100, n_b=150, n_c=180, n_d=80):
    rng = random.Random(seed)

    def maybe(p, value):
        return value() if rng.random() < p else None

    a_rows = []
    for i in range(1, n_a + 1):
        a_rows.append({
            "id": i,
            "name": " ".join(rng.sample(_WORDS, rng.randint(1, 3))),
            "flag": maybe(0.8, lambda: rng.random() < 0.5),
            "score": maybe(0.8, lambda: round(rng.uniform(-5, 5), 3)),
            "born": maybe(0.8, lambda: f"20{rng.randint(10, 24)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"),
            "ts": maybe(0.7, lambda: f"2016-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}T{rng.randint(0, 23):02d}:00:00+00:00"),
            "meta": maybe(0.5, lambda: rng.choice([
                {"k": rng.randint(0, 3)}, [1, 2], "plain", True, 4.5])),
        })
    b_rows = []
    for i in range(1, n_b + 1):
        b_rows.append({
            "id": i,
            "a_id": maybe(0.9, lambda: rng.randint(1, n_a + 5)),  # some dangling-free
            "label": maybe(0.9, lambda: rng.choice(_WORDS)),
            "qty": maybe(0.8, lambda: rng.randint(0, 9)),
        })
    # keep foreign keys valid: clamp a_id into range or null
    for r in b_rows:
        if r["a_id"] is not None and r["a_id"] > n_a:
            r["a_id"] = None
    c_rows = []
    for i in range(1, n_c + 1):
        c_rows.append({
            "id": i,
            "b_id": maybe(0.9, lambda: rng.randint(1, n_b)),
            "note": maybe(0.7, lambda: " ".join(rng.sample(_WORDS, 2))),
            "at": maybe(0.7, lambda: f"2017-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}T{rng.randint(0, 23):02d}:{rng.choice([0, 30]):02d}:00+00:00"),
        })
    d_rows = []
    for i in range(1, n_d + 1):
        d_rows.append({
            "id": i,
            "d_a_id": maybe(0.85, lambda: rng.randint(1, n_a)),
            "owner_id": maybe(0.85, lambda: rng.randint(1, n_a)),
            "tag": maybe(0.9, lambda: rng.choice(_WORDS)),
        })
    return {"A": a_rows, "B": b_rows, "C": c_rows, "D": d_rows}


def oracle_store(registry=None):
    registry = registry or Registry()
    store = registry.create_catalog(ALICE)
    load_tables(store, ORACLE_TABLES, oracle_rows())
    return store
