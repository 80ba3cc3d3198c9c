"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report; tolerances and budgets are pinned in the assertions themselves.
"""
import dataclasses
import json
import time
from collections import Counter
from contextlib import contextmanager

import pytest

import fixtures
import oracle as brute
from fixtures import auth
from urlgen import QueryGen
from ercatalog import coltypes, demo, planner, storage, urls
from ercatalog import model as erm
from ercatalog.registry import Registry

ALICE = auth("alice-token")


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


def _canon_row(row):
    return tuple(coltypes.canonical_json(v) if isinstance(v, (dict, list)) else v
                 for v in row)


# --- 1. URL conformance --------------------------------------------------------


def test_url_conformance_under_one_second():
    import test_urls as g
    with criterion("URL conformance: worked-example URLs + grammar suite in < 1 s"):
        started = time.monotonic()
        g.test_composite_url_parses_to_documented_ast()
        g.test_outer_join_url_parses_to_documented_ast()
        g.test_worked_example_urls_round_trip_byte_canonically()
        assert len(g.GRAMMAR_CASES) + len(g.ERROR_CASES) >= 50
        for path, query, check in g.GRAMMAR_CASES:
            ast = urls.parse(path, query)
            assert check(ast)
            rendered = urls.render(ast)
            rpath, _, rquery = rendered.partition("?")
            assert urls.parse(rpath, rquery or None) == ast
        for path, query, exc in g.ERROR_CASES:
            with pytest.raises(exc):
                urls.parse(path, query)
        elapsed = time.monotonic() - started
        assert elapsed < 1.0, f"grammar suite took {elapsed:.2f}s"


# --- 2. outer-join semantics ------------------------------------------------------


def test_outer_join_null_probe_matches_anti_join_oracle():
    with criterion("Outer-join semantics: sample-less experiments exactly"):
        store = demo.load_demo(Registry(), fixtures.ALICE)
        state = store.current
        # fixture shape pinned by the criterion: 6 experiments, 4 samples
        assert len(state.tables[("public", "Experiment")]) == 6
        assert len(state.tables[("public", "Sample")]) == 4

        ast = urls.parse("/ermrest/catalog/1/entity/S:=Sample"
                         "/right(Experiment_ID)/S:ID::null::")
        txn = store.begin("read")
        rowset = storage.execute(txn, planner.plan_retrieval(ast, txn.model))
        store.commit(txn)
        got = {row[0] for row in rowset.rows}

        # anti-join oracle: experiments with zero samples
        sampled = {s["Experiment_ID"] for s in state.tables[("public", "Sample")]}
        want = {e["ID"] for e in state.tables[("public", "Experiment")]
                if e["ID"] not in sampled}
        assert len(want) == 2
        assert got == want


# --- 3 & 4. randomized oracle equivalence and paging partition ----------------------


def _engine_rows(store, ast):
    txn = store.begin("read")
    try:
        plan = planner.plan_retrieval(ast, txn.model)
        return storage.execute(txn, plan), plan
    finally:
        store.commit(txn)


def _generate_suite(n=500, seed=20160224):
    gen = QueryGen(fixtures.oracle_rows(), seed=seed)
    return [gen.gen() for _ in range(n)]


def test_oracle_equivalence_500_random_urls(oracle_suite_store):
    store = oracle_suite_store
    state = store.current
    with criterion("Oracle equivalence: 500 random URLs vs naive evaluator < 60 s"):
        started = time.monotonic()
        suite = _generate_suite()
        assert len(suite) == 500
        for ast in suite:
            rendered = urls.render(ast)
            path, _, query = rendered.partition("?")
            parsed = urls.parse(path, query or None)
            assert parsed == ast
            rowset, _ = _engine_rows(store, parsed)
            names, orows, totality = brute.evaluate(parsed, state.model, state.tables)
            assert rowset.column_names() == list(names), rendered
            engine = [_canon_row(r) for r in rowset.rows]
            expected = [_canon_row(r) for r in orows]
            if parsed.sort and not totality[0]:
                assert Counter(engine) == Counter(expected), rendered
            else:
                assert engine == expected, rendered
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"500-URL suite took {elapsed:.1f}s"


def test_paging_partitions_every_sorted_query(oracle_suite_store):
    store = oracle_suite_store
    state = store.current
    with criterion("Paging partition: @after iteration covers exactly, "
                   "page sizes 1/3/7"):
        checked = 0
        for ast in _generate_suite():
            if ast.sort is None:
                continue
            base = dataclasses.replace(ast, limit=None, after=None)
            names, full, totality = brute.evaluate(base, state.model, state.tables)
            if not totality[1]:
                continue  # partition is defined only for explicitly total sorts
            _, plan = _engine_rows(store, base)
            key_types = [plan.order[i].typename for i in range(plan.explicit_order)]
            key_pos = [plan.order[i].out_index for i in range(plan.explicit_order)]
            expected = [_canon_row(r) for r in full]
            for size in (1, 3, 7):
                pages, after = [], None
                for _ in range(len(expected) // size + 2):
                    page_ast = dataclasses.replace(base, after=after, limit=size)
                    rowset, _ = _engine_rows(store, page_ast)
                    pages.extend(_canon_row(r) for r in rowset.rows)
                    if len(rowset.rows) < size:
                        break
                    boundary = rowset.rows[-1]
                    after = tuple(
                        None if boundary[p] is None
                        else coltypes.render_literal(t, boundary[p])
                        for p, t in zip(key_pos, key_types))
                assert pages == expected, urls.render(page_ast)
            checked += 1
        assert checked >= 60, f"only {checked} total-order sorted queries exercised"


# --- 5. mutation semantics -------------------------------------------------------------


def test_mutation_semantics_with_before_after_diffs():
    svc = fixtures.make_service()
    svc.request("POST", "/ermrest/catalog/", ALICE)
    for doc in fixtures.SUBJECT_IMAGE_TABLES:
        svc.request("POST", "/ermrest/catalog/1/schema/public/table", ALICE,
                    json.dumps(doc).encode())
    rows = fixtures.subject_image_rows()
    for t in ("Subject", "Image"):
        svc.request("POST", f"/ermrest/catalog/1/entity/{t}", ALICE,
                    json.dumps(rows[t]).encode())

    def snapshot(table):
        got = svc.request("GET", f"/ermrest/catalog/1/entity/{table}", ALICE).json()
        return {r["id"]: r for r in got}

    with criterion("Mutation semantics: upsert/clear/group-update vs oracle diff, "
                   "mapped statuses with row index"):
        # entity upsert: two updates + two inserts
        before = snapshot("Subject")
        payload = [{"id": 1, "name": "renamed-1"}, {"id": 2, "name": "renamed-2"},
                   {"id": 9001, "name": "new-1"}, {"id": 9002, "name": "new-2"}]
        r = svc.request("PUT", "/ermrest/catalog/1/entity/Subject", ALICE,
                        json.dumps(payload).encode())
        assert r.status == 200 and r.headers["X-Affected-Count"] == "4"
        expected = dict(before)
        for p in payload:
            expected[p["id"]] = {**expected.get(p["id"], {}), **p}
        assert snapshot("Subject") == expected

        # attribute clear on one filtered row
        before = snapshot("Image")
        r = svc.request("DELETE", "/ermrest/catalog/1/attribute/Image/id=5/quality",
                        ALICE)
        assert r.status == 204 and r.headers["X-Affected-Count"] == "1"
        expected = {i: dict(row) for i, row in before.items()}
        expected[5]["quality"] = None
        assert snapshot("Image") == expected

        # attributegroup correlated update
        before = snapshot("Image")
        r = svc.request("PUT",
                        "/ermrest/catalog/1/attributegroup/Image/subject_id;reviewed",
                        ALICE, json.dumps([{"subject_id": 2, "reviewed": True}]).encode())
        matching = [i for i, row in before.items() if row["subject_id"] == 2]
        assert r.status == 200
        assert r.headers["X-Affected-Count"] == str(len(matching))
        expected = {i: dict(row) for i, row in before.items()}
        for i in matching:
            expected[i]["reviewed"] = True
        assert snapshot("Image") == expected

        # constraint violations map to 409 with the offending row index
        r = svc.request("POST", "/ermrest/catalog/1/entity/Subject", ALICE,
                        json.dumps([{"id": 9100, "name": "ok"},
                                    {"id": 1, "name": "dup"}]).encode())
        assert r.status == 409
        assert r.json()["kind"] == "key_violation"
        assert r.json()["row_index"] == 1
        r = svc.request("POST", "/ermrest/catalog/1/entity/Image", ALICE,
                        json.dumps([{"id": 9200, "subject_id": 424242}]).encode())
        assert r.status == 409 and r.json()["kind"] == "fkey_violation"
        assert r.json()["row_index"] == 0
        # payload type errors map to 400
        r = svc.request("POST", "/ermrest/catalog/1/entity/Subject", ALICE,
                        json.dumps([{"id": "NaN-ish", "name": "x"}]).encode())
        assert r.status == 400


# --- 6. concurrency and ETag -----------------------------------------------------------


def test_concurrency_etag_and_snapshot_isolation():
    svc = fixtures.make_service()
    svc.request("POST", "/ermrest/catalog/", ALICE)
    svc.request("POST", "/ermrest/catalog/1/schema/public/table", ALICE,
                json.dumps(fixtures.SUBJECT_IMAGE_TABLES[0]).encode())
    svc.request("POST", "/ermrest/catalog/1/entity/Subject", ALICE,
                b'[{"id": 1, "name": "one"}]')

    with criterion("Concurrency/ETag: monotonic versions, 412 without side "
                   "effects, 304, snapshot isolation"):
        versions = [svc.request("GET", "/ermrest/catalog/1", ALICE).json()["version"]]

        # client A reads a tag, client B writes, A's conditional write fails
        tag_a = svc.request("GET", "/ermrest/catalog/1/entity/Subject",
                            ALICE).headers["ETag"]
        svc.request("POST", "/ermrest/catalog/1/entity/Subject", ALICE,
                    b'[{"id": 2, "name": "two"}]')
        versions.append(svc.request("GET", "/ermrest/catalog/1", ALICE).json()["version"])
        r = svc.request("PUT", "/ermrest/catalog/1/entity/Subject",
                        ALICE | {"If-Match": tag_a},
                        b'[{"id": 1, "name": "stale-write"}]')
        assert r.status == 412
        rows = svc.request("GET", "/ermrest/catalog/1/entity/Subject@sort(id)",
                           ALICE).json()
        assert rows == [{"id": 1, "name": "one"}, {"id": 2, "name": "two"}]

        # conditional GET with the current tag
        tag_now = svc.request("GET", "/ermrest/catalog/1/entity/Subject",
                              ALICE).headers["ETag"]
        r = svc.request("GET", "/ermrest/catalog/1/entity/Subject",
                        ALICE | {"If-None-Match": tag_now})
        assert r.status == 304

        # fresh conditional write succeeds and bumps the version
        r = svc.request("PUT", "/ermrest/catalog/1/entity/Subject",
                        ALICE | {"If-Match": tag_now},
                        b'[{"id": 1, "name": "fresh-write"}]')
        assert r.status == 200
        versions.append(svc.request("GET", "/ermrest/catalog/1", ALICE).json()["version"])
        assert versions == sorted(versions) and len(set(versions)) == len(versions)

        # snapshot isolation at the storage contract level
        store = svc.registry.get("1")
        reader = store.begin("read")
        before = [dict(r) for r in reader.rows("public", "Subject")]
        svc.request("POST", "/ermrest/catalog/1/entity/Subject", ALICE,
                    b'[{"id": 3, "name": "three"}]')
        assert [dict(r) for r in reader.rows("public", "Subject")] == before
        store.commit(reader)


# --- 7. model evolution and cascade ------------------------------------------------------


def test_model_evolution_cascade_and_portability(tmp_path):
    svc = fixtures.make_service()
    svc.request("POST", "/ermrest/catalog/", ALICE)

    with criterion("Model evolution + cascade: scripted sequence leaves no "
                   "orphans; export/import round trip equal"):
        # create schema with a table subtree en masse
        schema_doc = {
            "name": "lab",
            "tables": {
                "Run": {
                    "name": "Run",
                    "columns": [{"name": "id", "type": "int8", "nullable": False},
                                {"name": "kind", "type": "text"}],
                    "keys": [{"columns": ["id"]}],
                },
                "Measure": {
                    "name": "Measure",
                    "columns": [{"name": "id", "type": "int8", "nullable": False},
                                {"name": "run_id", "type": "int8"},
                                {"name": "value", "type": "float8"}],
                    "keys": [{"columns": ["id"]}],
                    "foreign_keys": [{"columns": ["run_id"],
                                      "references": {"schema": "lab", "table": "Run",
                                                     "columns": ["id"]}}],
                },
            },
        }
        r = svc.request("POST", "/ermrest/catalog/1/schema", ALICE,
                        json.dumps(schema_doc).encode())
        assert r.status == 201

        svc.request("POST", "/ermrest/catalog/1/entity/Run", ALICE,
                    json.dumps([{"id": i, "kind": "k"} for i in (1, 2)]).encode())
        svc.request("POST", "/ermrest/catalog/1/entity/Measure", ALICE,
                    json.dumps([{"id": i, "run_id": 1 + i % 2, "value": i / 2}
                                for i in range(6)]).encode())

        # drop the foreign-key column: constraint and stored values cascade away
        r = svc.request("DELETE",
                        "/ermrest/catalog/1/schema/lab/table/Measure/column/run_id",
                        ALICE)
        assert r.status == 204
        model_doc = svc.request("GET", "/ermrest/catalog/1/schema", ALICE).json()
        measure = model_doc["schemas"]["lab"]["tables"]["Measure"]
        assert measure["foreign_keys"] == []
        assert all(c["name"] != "run_id" for c in measure["columns"])
        rows = svc.request("GET", "/ermrest/catalog/1/entity/lab:Measure", ALICE).json()
        assert rows and all("run_id" not in row for row in rows)
        model = erm.model_from_doc(model_doc)
        assert erm.validate(model) == []

        # drop a whole table and prove nothing dangles
        r = svc.request("DELETE", "/ermrest/catalog/1/schema/lab/table/Run", ALICE)
        assert r.status == 204
        model_doc = svc.request("GET", "/ermrest/catalog/1/schema", ALICE).json()
        assert "Run" not in model_doc["schemas"]["lab"]["tables"]
        assert erm.validate(erm.model_from_doc(model_doc)) == []
        assert svc.request("GET", "/ermrest/catalog/1/entity/lab:Run",
                           ALICE).status == 404

        # export/import round trip is content-equal
        store = svc.registry.get("1")
        txn = store.begin("read")
        dump = storage.export_catalog(txn)
        store.commit(txn)
        storage.write_dump(dump, str(tmp_path / "dump"))
        again = storage.read_dump(str(tmp_path / "dump"))

        registry = Registry()
        fresh = registry.create_catalog(fixtures.ALICE)
        txn = fresh.begin("write")
        storage.import_catalog(txn, again)
        fresh.commit(txn)
        assert erm.model_doc(fresh.current.model) == erm.model_doc(store.current.model)

        def canon(rows):
            return sorted(repr(sorted(r.items())) for r in rows)

        assert set(fresh.current.tables) == set(store.current.tables)
        for key in store.current.tables:
            assert canon(fresh.current.tables[key]) == canon(store.current.tables[key])


# --- 8. ACL matrix -------------------------------------------------------------------------


def test_acl_matrix_sixteen_cells():
    svc = fixtures.make_service()
    svc.request("POST", "/ermrest/catalog/", ALICE)
    svc.request("POST", "/ermrest/catalog/1/schema/public/table", ALICE,
                json.dumps({"name": "T",
                            "columns": [{"name": "id", "type": "int8"}]}).encode())
    svc.request("PUT", "/ermrest/catalog/1/acl/model_write", ALICE, b'["carol"]')
    svc.request("PUT", "/ermrest/catalog/1/acl/data_write", ALICE, b'["bob"]')
    svc.request("PUT", "/ermrest/catalog/1/acl/data_read", ALICE, b'["dave"]')

    roles = {"owner": auth("alice-token"), "model_write": auth("carol-token"),
             "data_write": auth("bob-token"), "data_read": auth("dave-token")}

    def attempt(kind, headers):
        if kind == "admin":
            r = svc.request("PUT", "/ermrest/catalog/1/acl/data_read", headers,
                            b'["dave"]')
        elif kind == "model":
            r = svc.request("PUT",
                            "/ermrest/catalog/1/schema/public/table/T/comment",
                            headers | {"Content-Type": "text/plain"}, b"c")
        elif kind == "write":
            r = svc.request("DELETE", "/ermrest/catalog/1/entity/T/id=987654",
                            headers)
        else:
            r = svc.request("GET", "/ermrest/catalog/1/entity/T", headers)
        return r.status != 403

    expected = {
        ("owner", "admin"): True, ("owner", "model"): True,
        ("owner", "write"): True, ("owner", "read"): True,
        ("model_write", "admin"): False, ("model_write", "model"): True,
        ("model_write", "write"): True, ("model_write", "read"): True,
        ("data_write", "admin"): False, ("data_write", "model"): False,
        ("data_write", "write"): True, ("data_write", "read"): True,
        ("data_read", "admin"): False, ("data_read", "model"): False,
        ("data_read", "write"): False, ("data_read", "read"): True,
    }
    with criterion("ACL matrix: 4 roles x 4 request classes == expected grid"):
        grid = {}
        for role, headers in roles.items():
            for kind in ("admin", "model", "write", "read"):
                grid[(role, kind)] = attempt(kind, headers)
        assert grid == expected


# --- 9. empty-set contract --------------------------------------------------------------------


def test_empty_set_contract_never_404():
    svc = fixtures.make_service()
    svc.request("POST", "/ermrest/catalog/", ALICE)
    for doc in fixtures.SUBJECT_IMAGE_TABLES:
        svc.request("POST", "/ermrest/catalog/1/schema/public/table", ALICE,
                    json.dumps(doc).encode())
    with criterion("Empty-set contract: valid no-match data URLs answer 200"):
        cases = [
            "/ermrest/catalog/1/entity/Subject",
            "/ermrest/catalog/1/entity/Subject/id=999",
            "/ermrest/catalog/1/entity/Subject/Image/quality::gt::0.5",
            "/ermrest/catalog/1/attribute/Subject/name",
            "/ermrest/catalog/1/attributegroup/Image/subject_id;n:=cnt(*)",
            "/ermrest/catalog/1/entity/Subject/name::ciregexp::nothing",
        ]
        for u in cases:
            r = svc.request("GET", u, ALICE)
            assert r.status == 200, u
            assert r.json() == [], u
            r = svc.request("GET", u + "?accept=csv", ALICE)
            assert r.status == 200
            assert len(r.body.splitlines()) == 1  # header only
        # after deleting content the URL still denotes the (empty) set
        svc.request("POST", "/ermrest/catalog/1/entity/Subject", ALICE,
                    b'[{"id": 7, "name": "gone-soon"}]')
        assert svc.request("DELETE", "/ermrest/catalog/1/entity/Subject/id=7",
                           ALICE).status == 204
        r = svc.request("GET", "/ermrest/catalog/1/entity/Subject/id=7", ALICE)
        assert r.status == 200 and r.json() == []
