"""Demo catalog: a three-table experiment/sample/asset model with seed rows.

The seed leaves two experiments without samples, so the outer-join
null-probe URL has a non-trivial answer out of the box:

    /ermrest/catalog/{id}/entity/S:=Sample/right(Experiment_ID)/S:ID::null::
"""
from __future__ import annotations

from . import coltypes
from . import model as erm
from . import storage
from .registry import ClientContext, Registry


def demo_table_docs() -> list[dict]:
    return [
        {
            "name": "Experiment",
            "comment": "one experimental run",
            "columns": [
                {"name": "ID", "type": "int8", "nullable": False},
                {"name": "Name", "type": "text", "nullable": False},
                {"name": "Started", "type": "date"},
            ],
            "keys": [{"columns": ["ID"]}],
        },
        {
            "name": "Sample",
            "columns": [
                {"name": "ID", "type": "int8", "nullable": False},
                {"name": "Experiment_ID", "type": "int8"},
                {"name": "Label", "type": "text"},
                {"name": "Quality", "type": "float8"},
            ],
            "keys": [{"columns": ["ID"]}],
            "foreign_keys": [
                {"columns": ["Experiment_ID"],
                 "references": {"schema": "public", "table": "Experiment",
                                "columns": ["ID"]}},
            ],
        },
        {
            "name": "SEC_Asset",
            "comment": "size-exclusion chromatography data file",
            "columns": [
                {"name": "ID", "type": "int8", "nullable": False},
                {"name": "Sample_ID", "type": "int8"},
                {"name": "URL", "type": "text"},
                {"name": "Acquired", "type": "timestamptz"},
            ],
            "keys": [{"columns": ["ID"]}],
            "foreign_keys": [
                {"columns": ["Sample_ID"],
                 "references": {"schema": "public", "table": "Sample",
                                "columns": ["ID"]}},
            ],
        },
    ]


def demo_rows() -> dict[str, list[dict]]:
    # experiments 5 and 6 have no samples
    return {
        "Experiment": [
            {"ID": i, "Name": f"exp-{i}", "Started": f"2016-01-{10 + i:02d}"}
            for i in range(1, 7)
        ],
        "Sample": [
            {"ID": 1, "Experiment_ID": 1, "Label": "alpha", "Quality": 0.91},
            {"ID": 2, "Experiment_ID": 2, "Label": "beta", "Quality": None},
            {"ID": 3, "Experiment_ID": 3, "Label": "gamma", "Quality": 0.42},
            {"ID": 4, "Experiment_ID": 4, "Label": "delta", "Quality": 0.77},
        ],
        "SEC_Asset": [
            {"ID": 1, "Sample_ID": 1, "URL": "https://assets.example/1.cdf",
             "Acquired": "2016-02-01T09:30:00+00:00"},
            {"ID": 2, "Sample_ID": 1, "URL": "https://assets.example/2.cdf",
             "Acquired": "2016-02-02T10:00:00+00:00"},
            {"ID": 3, "Sample_ID": 2, "URL": "https://assets.example/3.cdf",
             "Acquired": "2016-02-05T16:45:00+00:00"},
            {"ID": 4, "Sample_ID": 3, "URL": "https://assets.example/4.cdf",
             "Acquired": "2016-03-01T08:15:00+00:00"},
            {"ID": 5, "Sample_ID": 4, "URL": "https://assets.example/5.cdf",
             "Acquired": "2016-03-11T11:00:00+00:00"},
        ],
    }


def load_demo(registry: Registry, ctx: ClientContext):
    """Create a new catalog holding the demo model and seed rows."""
    store = registry.create_catalog(ctx)
    txn = store.begin("write")
    try:
        for doc in demo_table_docs():
            storage.apply_model_change(txn, erm.CreateTable("public", doc))
        for tname, rows in demo_rows().items():
            table = txn.model.table("public", tname)
            types = {c.name: c.type for c in table.columns}
            stored = txn.rows_mut("public", tname)
            for obj in rows:
                stored.append({k: coltypes.from_json(types[k], v)
                               for k, v in obj.items()})
        storage.check_all(txn.state)
        store.commit(txn)
    except BaseException:
        store.abort(txn)
        raise
    return store
