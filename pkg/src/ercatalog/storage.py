"""Embedded transactional store: per-catalog state, snapshot isolation with a
single writer, plan execution, constraint enforcement, and write-ahead
persistence.

State is copy-on-write: a committed CatalogState is never mutated, so any
number of read transactions can hold a snapshot while one writer prepares
the next state.  Commits append a logical record (model document, ACLs,
full content of touched tables) to a per-catalog WAL file; opening a
catalog replays the log.  Constraint checks run at statement end so bulk
payloads may be internally unordered.
"""
from __future__ import annotations

import json as _json
import os
import threading
import time
from functools import cmp_to_key

from . import coltypes, model as erm
from .errors import (NotFound, ValidationError, fkey_violation, key_violation,
                     not_null_violation, serialization_conflict, type_error)
from .planner import MutationPlan, QueryPlan, TAnd, TLeaf, TNot, TOr, stem_words
from .tabular import RowSet, decode_csv, encode_csv

WRITE_LOCK_TIMEOUT = 30.0


class CatalogState:
    """One immutable committed version of a catalog."""

    __slots__ = ("version", "model", "tables", "acls")

    def __init__(self, version, model, tables, acls):
        self.version = version
        self.model = model
        self.tables = tables  # (schema, table) -> list of row dicts
        self.acls = acls


class Txn:
    def __init__(self, store, mode, state):
        self.store = store
        self.mode = mode
        self.state = state
        self.active = True
        self.touched_tables: set = set()
        self.model_touched = False
        self.acls_touched = False

    @property
    def version(self):
        return self.state.version

    @property
    def model(self):
        return self.state.model

    def rows(self, schema, table) -> list:
        try:
            return self.state.tables[(schema, table)]
        except KeyError:
            raise NotFound(f"table {schema}:{table}")

    def rows_mut(self, schema, table) -> list:
        assert self.mode == "write"
        key = (schema, table)
        if key not in self.state.tables:
            raise NotFound(f"table {schema}:{table}")
        if key not in self.touched_tables:
            self.state.tables[key] = [dict(r) for r in self.state.tables[key]]
            self.touched_tables.add(key)
        return self.state.tables[key]

    def model_mut(self) -> erm.ErmModel:
        assert self.mode == "write"
        if not self.model_touched:
            self.state.model = erm.copy_model(self.state.model)
            self.model_touched = True
        return self.state.model

    def acls_mut(self) -> dict:
        assert self.mode == "write"
        if not self.acls_touched:
            self.state.acls = {k: list(v) for k, v in self.state.acls.items()}
            self.acls_touched = True
        return self.state.acls


class CatalogStore:
    def __init__(self, catalog_id: int, state: CatalogState, wal_path=None):
        self.id = catalog_id
        self._current = state
        self._wal_path = wal_path
        self._state_lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._version_cond = threading.Condition()

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def create(cls, catalog_id: int, owner: str, wal_path=None):
        acls = {"owner": [owner], "model_write": [], "data_write": [], "data_read": []}
        state = CatalogState(1, erm.empty_model(), {}, acls)
        store = cls(catalog_id, state, wal_path)
        if wal_path is not None:
            store._append_wal({
                "version": 1,
                "model": erm.model_doc(state.model),
                "acls": acls,
                "tables": [],
            })
        return store

    @classmethod
    def open(cls, catalog_id: int, wal_path):
        state = CatalogState(0, erm.empty_model(), {}, {})
        with open(wal_path, "rb") as fh:
            lines = [l.strip() for l in fh if l.strip()]
        for i, line in enumerate(lines):
            try:
                record = _json.loads(line.decode("utf-8"))
            except ValueError:
                if i == len(lines) - 1:
                    break  # torn final record from an interrupted append
                raise ValidationError(
                    f"write-ahead log {wal_path} is corrupt at record {i}")
            _replay(state, record)
        if state.version == 0:
            raise ValidationError(f"write-ahead log {wal_path} holds no commits")
        return cls(catalog_id, state, wal_path)

    @property
    def current(self) -> CatalogState:
        with self._state_lock:
            return self._current

    def close(self):
        pass

    # -- transactions ---------------------------------------------------------

    def begin(self, mode: str = "read") -> Txn:
        if mode == "read":
            return Txn(self, "read", self.current)
        if not self._write_lock.acquire(timeout=WRITE_LOCK_TIMEOUT):
            raise serialization_conflict(
                f"timed out waiting for the writer lock of catalog {self.id}")
        base = self.current
        draft = CatalogState(base.version, base.model, dict(base.tables), base.acls)
        return Txn(self, "write", draft)

    def commit(self, txn: Txn) -> int:
        if not txn.active:
            raise ValidationError("transaction is not active")
        txn.active = False
        if txn.mode == "read":
            return txn.state.version
        try:
            touched = txn.touched_tables or txn.model_touched or txn.acls_touched
            if not touched:
                return txn.state.version
            txn.state.version += 1
            if self._wal_path is not None:
                self._append_wal(_wal_record(txn))
            with self._state_lock:
                self._current = txn.state
            with self._version_cond:
                self._version_cond.notify_all()
            return txn.state.version
        finally:
            self._write_lock.release()

    def abort(self, txn: Txn):
        if not txn.active:
            return
        txn.active = False
        if txn.mode == "write":
            self._write_lock.release()

    def wait_version_above(self, since: int, timeout: float):
        """Block until version > since or timeout; returns the current version."""
        deadline = time.monotonic() + timeout
        with self._version_cond:
            while True:
                current = self.current.version
                remaining = deadline - time.monotonic()
                if current > since or remaining <= 0:
                    return current
                self._version_cond.wait(remaining)

    def _append_wal(self, record: dict):
        data = (_json.dumps(record, ensure_ascii=False) + "\n").encode("utf-8")
        with open(self._wal_path, "ab") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())


def _wal_record(txn: Txn) -> dict:
    record = {"version": txn.state.version}
    if txn.model_touched:
        record["model"] = erm.model_doc(txn.state.model)
    if txn.acls_touched:
        record["acls"] = txn.state.acls
    entries = []
    for (s, t) in sorted(txn.touched_tables):
        if (s, t) not in txn.state.tables:
            continue  # dropped later in the same txn; the model records that
        table = txn.state.model.table(s, t)
        types = {c.name: c.type for c in table.columns}
        entries.append({
            "schema": s,
            "table": t,
            "rows": [{k: coltypes.to_json(types[k], v) for k, v in row.items()}
                     for row in txn.state.tables[(s, t)]],
        })
    record["tables"] = entries
    return record


def _replay(state: CatalogState, record: dict):
    if "model" in record:
        state.model = erm.model_from_doc(record["model"])
        live = {(t.schema_name, t.name) for t in state.model.all_tables()}
        for key in list(state.tables):
            if key not in live:
                del state.tables[key]
        for key in live:
            state.tables.setdefault(key, [])
    if "acls" in record:
        state.acls = {k: list(v) for k, v in record["acls"].items()}
    for entry in record.get("tables", []):
        s, t = entry["schema"], entry["table"]
        table = state.model.table(s, t)
        types = {c.name: c.type for c in table.columns}
        rows = []
        for obj in entry["rows"]:
            rows.append({k: coltypes.from_json(types[k], v) for k, v in obj.items()})
        state.tables[(s, t)] = rows
    state.version = record["version"]


# --- plan execution ---------------------------------------------------------

def _tkey(table: erm.Table):
    return (table.schema_name, table.name)


def _join_product(state: CatalogState, plan: QueryPlan) -> list[list]:
    insts = plan.instances
    root = insts[0]
    combined = [[r] for r in state.tables[_tkey(root.table)]]
    for inst in insts[1:]:
        join = inst.join
        right_rows = state.tables[_tkey(inst.table)]
        rtypes = {c.name: c.type for c in inst.table.columns}
        ptable = insts[join.parent].table
        ptypes = {c.name: c.type for c in ptable.columns}
        pcols = [p for p, _ in join.pairs]
        ccols = [c for _, c in join.pairs]

        index: dict = {}
        for i, rrow in enumerate(right_rows):
            vals = [rrow[c] for c in ccols]
            if any(v is None for v in vals):
                continue  # null join values never match
            kv = tuple(coltypes.canonical(rtypes[c], v) for c, v in zip(ccols, vals))
            index.setdefault(kv, []).append((i, rrow))

        matched = [False] * len(right_rows)
        out = []
        for crow in combined:
            prow = crow[join.parent]
            hits = ()
            if prow is not None:
                vals = [prow[c] for c in pcols]
                if all(v is not None for v in vals):
                    kv = tuple(coltypes.canonical(ptypes[c], v)
                               for c, v in zip(pcols, vals))
                    hits = index.get(kv, ())
            if hits:
                for i, rrow in hits:
                    matched[i] = True
                    out.append(crow + [rrow])
            elif join.kind in ("left", "full"):
                out.append(crow + [None])
        if join.kind in ("right", "full"):
            nulls = [None] * inst.index
            for i, rrow in enumerate(right_rows):
                if not matched[i]:
                    out.append(nulls + [rrow])
        combined = out
    return combined


def _eval_pred(node, crow) -> bool:
    if isinstance(node, TLeaf):
        row = crow[node.instance]
        v = None if row is None else row.get(node.column)
        if node.op == "null":
            return v is None
        if v is None:
            return False
        if node.op == "=":
            return coltypes.canonical(node.typename, v) == \
                coltypes.canonical(node.typename, node.value)
        if node.op in ("lt", "leq", "gt", "geq"):
            c = coltypes.compare(v, node.value)
            return {"lt": c < 0, "leq": c <= 0, "gt": c > 0, "geq": c >= 0}[node.op]
        if node.op in ("regexp", "ciregexp"):
            return node.pattern.search(v) is not None
        if node.op == "ts":
            have = set(stem_words(v))
            return all(w in have for w in node.words)
        raise type_error(f"unknown operator {node.op!r}")
    if isinstance(node, TNot):
        return not _eval_pred(node.child, crow)
    if isinstance(node, TAnd):
        return all(_eval_pred(c, crow) for c in node.children)
    if isinstance(node, TOr):
        return any(_eval_pred(c, crow) for c in node.children)
    raise type_error(f"unknown predicate node {node!r}")


def _out_value(out, crow):
    row = crow[out.instance]
    return None if row is None else row.get(out.column)


def _aggregate(out, crows):
    if out.kind == "col":
        return _out_value(out, crows[0]) if crows else None
    if out.fn == "cnt" and out.column is None:
        return len(crows)
    values = [_out_value(out, c) for c in crows]
    if out.fn == "cnt":
        return sum(1 for v in values if v is not None)
    if out.fn == "cnt_d":
        return len({coltypes.canonical(out.arg_typename, v)
                    for v in values if v is not None})
    if out.fn in ("min", "max"):
        nonnull = [v for v in values if v is not None]
        if not nonnull:
            return None
        return min(nonnull) if out.fn == "min" else max(nonnull)
    if out.fn == "array":
        return [coltypes.to_json(out.arg_typename, v) for v in values]
    raise type_error(f"unknown aggregate {out.fn!r}")


def _cmp_values(a, b, descending: bool) -> int:
    if a is None and b is None:
        return 0
    if a is None:
        c = 1  # nulls last ascending
    elif b is None:
        c = -1
    else:
        c = coltypes.compare(a, b)
    return -c if descending else c


def execute(txn: Txn, plan: QueryPlan) -> RowSet:
    state = txn.state
    crows = _join_product(state, plan)
    if plan.predicate is not None:
        crows = [c for c in crows if _eval_pred(plan.predicate, c)]

    records: list[tuple[list, tuple]] = []  # (output values, hidden order values)
    hidden_keys = [k for k in plan.order if k.out_index is None]

    def hidden_of(crow):
        return tuple(None if crow[k.instance] is None else crow[k.instance].get(k.column)
                     for k in hidden_keys)

    if plan.mapping == "entity":
        target_cols = [o.column for o in plan.outputs]
        ttypes = [o.typename for o in plan.outputs]
        seen = set()
        for crow in crows:
            row = crow[plan.target]
            values = [None] * len(target_cols) if row is None \
                else [row.get(c) for c in target_cols]
            if plan.distinct:
                sig = tuple(coltypes.canonical(t, v) for t, v in zip(ttypes, values))
                if sig in seen:
                    continue
                seen.add(sig)
            records.append((values, ()))
    elif plan.mapping == "attribute":
        for crow in crows:
            records.append(([_out_value(o, crow) for o in plan.outputs],
                            hidden_of(crow)))
    elif plan.mapping == "attributegroup":
        gc = plan.group_count
        groups: dict = {}
        for crow in crows:
            kv = tuple(coltypes.canonical(plan.outputs[i].typename,
                                          _out_value(plan.outputs[i], crow))
                       for i in range(gc))
            groups.setdefault(kv, []).append(crow)
        for members in groups.values():
            values = [_out_value(o, members[0]) for o in plan.outputs[:gc]]
            values += [_aggregate(o, members) for o in plan.outputs[gc:]]
            records.append((values, ()))
    elif plan.mapping == "aggregate":
        records.append(([_aggregate(o, crows) for o in plan.outputs], ()))
    else:
        raise type_error(f"unknown mapping {plan.mapping!r}")

    if plan.order:
        accessors = []
        hidden_pos = 0
        for k in plan.order:
            if k.out_index is not None:
                accessors.append((k.out_index, None, k.descending))
            else:
                accessors.append((None, hidden_pos, k.descending))
                hidden_pos += 1

        def compare_records(a, b):
            for out_i, hid_i, desc in accessors:
                av = a[0][out_i] if out_i is not None else a[1][hid_i]
                bv = b[0][out_i] if out_i is not None else b[1][hid_i]
                c = _cmp_values(av, bv, desc)
                if c:
                    return c
            return 0

        records.sort(key=cmp_to_key(compare_records))

    if plan.after is not None:
        kept = []
        for rec in records:
            position = 0
            for i, after_v in enumerate(plan.after):
                key = plan.order[i]
                value = rec[0][key.out_index]
                position = _cmp_values(value, after_v, key.descending)
                if position:
                    break
            if position > 0:
                kept.append(rec)
        records = kept

    if plan.limit is not None:
        records = records[:plan.limit]

    return RowSet(columns=[(o.name, o.typename) for o in plan.outputs],
                  rows=[tuple(values) for values, _ in records])


# --- constraint checking ------------------------------------------------------

def _check_table(state: CatalogState, table: erm.Table, row_index=None):
    """Statement-end validation of one table: keys, not-null, outbound fkeys.

    row_index maps id(row) -> payload row index for error attribution.
    """
    rows = state.tables[_tkey(table)]
    path = f"{table.schema_name}:{table.name}"
    idx = (lambda r: row_index.get(id(r))) if row_index else (lambda r: None)

    for key in table.keys:
        seen = {}
        for r in rows:
            vals = [r.get(c) for c in key.columns]
            if any(v is None for v in vals):
                raise key_violation(
                    f"null value in key ({','.join(key.columns)}) of {path}",
                    path=path, row_index=idx(r))
            sig = tuple(coltypes.canonical(table.column(c).type, v)
                        for c, v in zip(key.columns, vals))
            if sig in seen:
                raise key_violation(
                    f"duplicate key ({','.join(key.columns)})="
                    f"({','.join(map(repr, vals))}) in {path}",
                    path=path, row_index=idx(r))
            seen[sig] = r

    for col in table.columns:
        if not col.nullable:
            for r in rows:
                if r.get(col.name) is None:
                    raise not_null_violation(
                        f"null value in non-nullable column {col.name} of {path}",
                        path=f"{path}.{col.name}", row_index=idx(r))

    for fkey in table.foreign_keys:
        ref = state.model.table(fkey.ref_schema, fkey.ref_table)
        ref_types = [ref.column(c).type for c in fkey.ref_columns]
        referenced = set()
        for rr in state.tables[_tkey(ref)]:
            vals = [rr.get(c) for c in fkey.ref_columns]
            if any(v is None for v in vals):
                continue
            referenced.add(tuple(coltypes.canonical(t, v)
                                 for t, v in zip(ref_types, vals)))
        own_types = [table.column(c).type for c in fkey.columns]
        for r in rows:
            vals = [r.get(c) for c in fkey.columns]
            if any(v is None for v in vals):
                continue
            sig = tuple(coltypes.canonical(t, v) for t, v in zip(own_types, vals))
            if sig not in referenced:
                raise fkey_violation(
                    f"({','.join(fkey.columns)})=({','.join(map(repr, vals))}) in "
                    f"{path} has no match in {fkey.ref_schema}:{fkey.ref_table}",
                    path=path, row_index=idx(r))


def _check_around(state: CatalogState, table: erm.Table, row_index=None):
    """Check the mutated table and every table referencing it."""
    _check_table(state, table, row_index)
    tk = _tkey(table)
    for other in state.model.all_tables():
        if _tkey(other) == tk:
            continue
        if any((f.ref_schema, f.ref_table) == tk for f in other.foreign_keys):
            _check_table(state, other)


def check_all(state: CatalogState):
    for table in state.model.all_tables():
        _check_table(state, table)


# --- mutation ----------------------------------------------------------------

def _typed_payload_rows(table: erm.Table, rowset: RowSet):
    """Payload rows as column dicts, validated against declared types."""
    cols = table.column_map()
    out = []
    for i, row in enumerate(rowset.rows):
        d = {}
        for (name, _), value in zip(rowset.columns, row):
            col = cols.get(name)
            if col is None:
                raise ValidationError(f"unknown payload column {name!r}", row_index=i)
            coltypes.check_value(col.type, value, where=f"row {i} column {name}")
            d[name] = value
        out.append(d)
    return out


def mutate(txn: Txn, plan: MutationPlan, input_rows: RowSet):
    """Apply a mutation plan; returns (affected_count, result RowSet or None)."""
    if txn.mode != "write":
        raise ValidationError("mutation requires a write transaction")
    table = txn.model.table(plan.schema, plan.table)

    if plan.kind == "entity_insert":
        payload = _typed_payload_rows(table, input_rows)
        rows = txn.rows_mut(plan.schema, plan.table)
        row_index = {}
        stored = []
        for i, p in enumerate(payload):
            row = {c.name: p.get(c.name, c.default) for c in table.columns}
            rows.append(row)
            stored.append(row)
            row_index[id(row)] = i
        _check_around(txn.state, table, row_index)
        return len(stored), _rows_to_rowset(table, stored)

    if plan.kind == "entity_update":
        payload = _typed_payload_rows(table, input_rows)
        rows = txn.rows_mut(plan.schema, plan.table)
        corr_cols = [c for _, c in plan.correlation]
        ctypes = [table.column(c).type for c in corr_cols]
        index = {}
        for r in rows:
            vals = [r.get(c) for c in corr_cols]
            if any(v is None for v in vals):
                continue
            index[tuple(coltypes.canonical(t, v) for t, v in zip(ctypes, vals))] = r
        row_index = {}
        stored = []
        for i, p in enumerate(payload):
            vals = [p.get(c) for c in corr_cols]
            if any(v is None for v in vals):
                raise key_violation(
                    f"null key value in update correlation ({','.join(corr_cols)})",
                    path=f"{plan.schema}:{plan.table}", row_index=i)
            sig = tuple(coltypes.canonical(t, v) for t, v in zip(ctypes, vals))
            existing = index.get(sig)
            if existing is None:
                row = {c.name: p.get(c.name, c.default) for c in table.columns}
                rows.append(row)
                index[sig] = row
            else:
                row = existing
                for name in p:
                    row[name] = p[name]
            stored.append(row)
            row_index[id(row)] = i
        _check_around(txn.state, table, row_index)
        return len(payload), _rows_to_rowset(table, stored)

    if plan.kind == "entity_delete":
        # copy-on-write first, so the selection sees the mutable row objects
        rows = txn.rows_mut(plan.schema, plan.table)
        doomed = _selected_target_rows(txn, plan.select)
        doomed_ids = {id(r) for r in doomed}
        rows[:] = [r for r in rows if id(r) not in doomed_ids]
        _check_around(txn.state, table)
        return len(doomed), None

    if plan.kind == "attribute_clear":
        txn.rows_mut(plan.schema, plan.table)
        targets = _selected_target_rows(txn, plan.select)
        for r in targets:
            for _, col in plan.assignments:
                r[col] = None
        _check_around(txn.state, table)
        return len(targets), None

    if plan.kind == "group_update":
        name_to_col = dict(plan.correlation) | dict(plan.assignments)
        positions = {name: i for i, (name, _) in enumerate(input_rows.columns)}
        cols = table.column_map()
        corr_cols = [c for _, c in plan.correlation]
        corr_names = [n for n, _ in plan.correlation]
        ctypes = [table.column(c).type for c in corr_cols]

        rows = txn.rows_mut(plan.schema, plan.table)
        groups: dict = {}
        for r in rows:
            vals = [r.get(c) for c in corr_cols]
            sig = tuple(coltypes.canonical(t, v) for t, v in zip(ctypes, vals))
            groups.setdefault(sig, []).append(r)

        count = 0
        for i, row in enumerate(input_rows.rows):
            for name in positions:
                col = cols.get(name_to_col.get(name))
                if col is None:
                    raise ValidationError(f"unknown payload column {name!r}", row_index=i)
                coltypes.check_value(col.type, row[positions[name]],
                                     where=f"row {i} column {name}")
            sig = tuple(coltypes.canonical(t, row[positions[n]])
                        for n, t in zip(corr_names, ctypes))
            for r in groups.get(sig, ()):
                for name, col in plan.assignments:
                    r[col] = row[positions[name]]
                count += 1
        _check_around(txn.state, table)
        return count, input_rows

    raise ValidationError(f"unknown mutation kind {plan.kind!r}")


def _selected_target_rows(txn: Txn, select: QueryPlan) -> list:
    """Distinct stored row objects of the select plan's target."""
    crows = _join_product(txn.state, select)
    if select.predicate is not None:
        crows = [c for c in crows if _eval_pred(select.predicate, c)]
    seen, out = set(), []
    for crow in crows:
        row = crow[select.target]
        if row is None or id(row) in seen:
            continue
        seen.add(id(row))
        out.append(row)
    return out


def _rows_to_rowset(table: erm.Table, stored: list[dict]) -> RowSet:
    return RowSet(columns=[(c.name, c.type) for c in table.columns],
                  rows=[tuple(r.get(c.name) for c in table.columns) for r in stored])


# --- model changes through a transaction ---------------------------------------

def apply_model_change(txn: Txn, change) -> object:
    if txn.mode != "write":
        raise ValidationError("model changes require a write transaction")
    m = txn.model_mut()
    # cascades touch data, so take a copy-on-write view of every table now
    for key in list(txn.state.tables):
        txn.rows_mut(*key)
    doc = erm.apply_change(m, txn.state.tables, change)
    check_all(txn.state)
    return doc


# --- dump / restore -------------------------------------------------------------

def _fs_atom(name: str) -> str:
    """Filename-safe atom: like URL encoding but '.' is reserved too."""
    out = []
    for b in name.encode("utf-8"):
        c = chr(b)
        if c.isalnum() or c in "_~-":
            out.append(c)
        else:
            out.append("%%%02X" % b)
    return "".join(out)


def table_file_name(schema: str, table: str) -> str:
    return f"{_fs_atom(schema)}.{_fs_atom(table)}.csv"


def export_catalog(txn: Txn) -> dict:
    """Portable dump: model document plus one CSV payload per table."""
    out = {"model": erm.model_doc(txn.model), "tables": {}}
    for table in txn.model.all_tables():
        stored = txn.rows(table.schema_name, table.name)
        rowset = _rows_to_rowset(table, stored)
        out["tables"][table_file_name(table.schema_name, table.name)] = encode_csv(rowset)
    return out


def write_dump(dump: dict, directory: str):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "model.json"), "w", encoding="utf-8") as fh:
        _json.dump(dump["model"], fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    for name, payload in dump["tables"].items():
        with open(os.path.join(directory, name), "wb") as fh:
            fh.write(payload)


def read_dump(directory: str) -> dict:
    model_path = os.path.join(directory, "model.json")
    try:
        with open(model_path, "r", encoding="utf-8") as fh:
            model_doc = _json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"dump section model.json missing in {directory}")
    except ValueError as e:
        raise ValidationError(f"dump section model.json is not valid JSON: {e}")
    m = erm.model_from_doc(model_doc)
    tables = {}
    for table in m.all_tables():
        name = table_file_name(table.schema_name, table.name)
        path = os.path.join(directory, name)
        try:
            with open(path, "rb") as fh:
                tables[name] = fh.read()
        except FileNotFoundError:
            raise ValidationError(f"dump section {name} missing in {directory}")
    return {"model": model_doc, "tables": tables}


def import_catalog(txn: Txn, dump: dict):
    """Load a dump into a freshly created catalog, atomically."""
    m = erm.model_from_doc(dump["model"])
    txn.model_mut()
    txn.state.model = m
    txn.model_touched = True
    txn.state.tables = {}
    for table in m.all_tables():
        key = (table.schema_name, table.name)
        txn.touched_tables.add(key)
        name = table_file_name(*key)
        payload = dump["tables"].get(name)
        if payload is None:
            raise ValidationError(f"dump section {name} is missing")
        types = {c.name: c.type for c in table.columns}
        try:
            rowset = decode_csv(payload, types)
        except ValidationError as e:
            raise ValidationError(f"dump section {name}: {e.message}")
        if set(rowset.column_names()) != set(types):
            raise ValidationError(
                f"dump section {name}: header does not cover the table columns")
        rows = [dict(zip(rowset.column_names(), row)) for row in rowset.rows]
        txn.state.tables[key] = rows
    check_all(txn.state)
