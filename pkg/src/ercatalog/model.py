"""Entity-relationship model: types, introspection documents, validation,
and incremental change application.

The model document is the single interchange form: introspection emits it,
bulk creation and dump/restore consume it, and the write-ahead log stores
it.  apply_change mutates a transaction-local copy of the model (and the
table data, for cascades) so a failed validation aborts with no trace.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import coltypes
from .errors import Conflict, NotFound, ValidationError


@dataclass
class Column:
    name: str
    type: str
    nullable: bool = True
    default: object = None
    comment: str | None = None
    annotations: dict = field(default_factory=dict)


@dataclass
class Key:
    columns: tuple[str, ...]


@dataclass
class ForeignKeyRef:
    columns: tuple[str, ...]
    ref_schema: str
    ref_table: str
    ref_columns: tuple[str, ...]
    name: str | None = None


@dataclass
class Table:
    schema_name: str
    name: str
    columns: list[Column] = field(default_factory=list)
    keys: list[Key] = field(default_factory=list)
    foreign_keys: list[ForeignKeyRef] = field(default_factory=list)
    comment: str | None = None
    annotations: dict = field(default_factory=dict)
    kind: str = "table"

    def column_map(self) -> dict[str, Column]:
        return {c.name: c for c in self.columns}

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise NotFound(f"column {name!r} in table {self.schema_name}:{self.name}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def find_key(self, columns) -> Key | None:
        want = frozenset(columns)
        for k in self.keys:
            if frozenset(k.columns) == want:
                return k
        return None


@dataclass
class Schema:
    name: str
    tables: dict[str, Table] = field(default_factory=dict)
    comment: str | None = None
    annotations: dict = field(default_factory=dict)


@dataclass
class ErmModel:
    schemas: dict[str, Schema] = field(default_factory=dict)

    def schema(self, name: str) -> Schema:
        try:
            return self.schemas[name]
        except KeyError:
            raise NotFound(f"schema {name!r}")

    def table(self, schema: str, name: str) -> Table:
        sch = self.schema(schema)
        try:
            return sch.tables[name]
        except KeyError:
            raise NotFound(f"table {name!r} in schema {schema!r}")

    def resolve_table(self, schema: str | None, name: str) -> Table:
        """Resolve a table reference; bare names must be unique model-wide."""
        if schema is not None:
            return self.table(schema, name)
        hits = [s.tables[name] for s in self.schemas.values() if name in s.tables]
        if not hits:
            raise NotFound(f"table {name!r}")
        if len(hits) > 1:
            names = ", ".join(sorted(f"{t.schema_name}:{t.name}" for t in hits))
            raise ValidationError(f"table name {name!r} is ambiguous among {names}")
        return hits[0]

    def all_tables(self):
        for sch in self.schemas.values():
            yield from sch.tables.values()


def empty_model() -> ErmModel:
    return ErmModel(schemas={"public": Schema(name="public")})


# --- element addressing ---------------------------------------------------

@dataclass(frozen=True)
class ElementPath:
    """Typed address of one model element, as parsed from a model URL."""

    kind: str  # schema | table | column | key | fkey
    schema: str
    table: str | None = None
    column: str | None = None
    key_columns: tuple[str, ...] | None = None
    fkey_columns: tuple[str, ...] | None = None
    fkey_ref: tuple[str, str, tuple[str, ...]] | None = None

    def __str__(self):
        parts = [f"schema {self.schema}"]
        if self.table:
            parts.append(f"table {self.table}")
        if self.kind == "column":
            parts.append(f"column {self.column}")
        elif self.kind == "key":
            parts.append("key (%s)" % ",".join(self.key_columns))
        elif self.kind == "fkey":
            s, t, cols = self.fkey_ref
            parts.append("foreign key (%s) -> %s:%s (%s)"
                         % (",".join(self.fkey_columns), s, t, ",".join(cols)))
        return " / ".join(parts)


# --- documents -------------------------------------------------------------

def column_doc(c: Column) -> dict:
    return {
        "name": c.name,
        "type": c.type,
        "nullable": c.nullable,
        "default": coltypes.to_json(c.type, c.default),
        "comment": c.comment,
        "annotations": dict(c.annotations),
    }


def key_doc(k: Key) -> dict:
    return {"columns": list(k.columns)}


def fkey_doc(f: ForeignKeyRef) -> dict:
    return {
        "name": f.name,
        "columns": list(f.columns),
        "references": {
            "schema": f.ref_schema,
            "table": f.ref_table,
            "columns": list(f.ref_columns),
        },
    }


def table_doc(t: Table) -> dict:
    return {
        "schema_name": t.schema_name,
        "name": t.name,
        "kind": t.kind,
        "comment": t.comment,
        "annotations": dict(t.annotations),
        "columns": [column_doc(c) for c in t.columns],
        "keys": [key_doc(k) for k in t.keys],
        "foreign_keys": [fkey_doc(f) for f in t.foreign_keys],
    }


def schema_doc(s: Schema) -> dict:
    return {
        "name": s.name,
        "comment": s.comment,
        "annotations": dict(s.annotations),
        "tables": {name: table_doc(t) for name, t in s.tables.items()},
    }


def model_doc(m: ErmModel) -> dict:
    return {"schemas": {name: schema_doc(s) for name, s in m.schemas.items()}}


def _expect(doc, key, types, path, default=None, required=False):
    if key not in doc:
        if required:
            raise ValidationError(f"{path}: missing field {key!r}", path=path)
        return default
    value = doc[key]
    if value is None and not required:
        return None
    if not isinstance(value, types):
        raise ValidationError(f"{path}: field {key!r} has wrong type", path=path)
    return value


def _annotations_from_doc(doc, path) -> dict:
    anns = _expect(doc, "annotations", dict, path) or {}
    for k, v in anns.items():
        if not isinstance(k, str) or not k:
            raise ValidationError(f"{path}: annotation keys must be non-empty strings", path=path)
        coltypes.check_json_data(v, where=f"{path} annotation {k}")
    return dict(anns)


def column_from_doc(doc, path) -> Column:
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: column document must be an object", path=path)
    name = _expect(doc, "name", str, path, required=True)
    ctype = _expect(doc, "type", str, path, required=True)
    if not coltypes.is_type_name(ctype):
        raise ValidationError(f"{path}: unknown column type {ctype!r}", path=path)
    nullable = doc.get("nullable", True)
    if not isinstance(nullable, bool):
        raise ValidationError(f"{path}: nullable must be boolean", path=path)
    default = coltypes.from_json(ctype, doc.get("default"), where=f"{path} default")
    comment = _expect(doc, "comment", str, path)
    return Column(name=name, type=ctype, nullable=nullable, default=default,
                  comment=comment, annotations=_annotations_from_doc(doc, path))


def _name_list(doc, key, path, required=True) -> tuple[str, ...]:
    value = _expect(doc, key, list, path, required=required)
    if value is None:
        return ()
    if not value or not all(isinstance(v, str) and v for v in value):
        raise ValidationError(f"{path}: {key} must be a non-empty list of names", path=path)
    return tuple(value)


def key_from_doc(doc, path) -> Key:
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: key document must be an object", path=path)
    return Key(columns=_name_list(doc, "columns", path))


def fkey_from_doc(doc, path) -> ForeignKeyRef:
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: foreign key document must be an object", path=path)
    columns = _name_list(doc, "columns", path)
    ref = _expect(doc, "references", dict, path, required=True)
    rs = _expect(ref, "schema", str, f"{path} references", required=True)
    rt = _expect(ref, "table", str, f"{path} references", required=True)
    rc = _name_list(ref, "columns", f"{path} references")
    name = _expect(doc, "name", str, path)
    return ForeignKeyRef(columns=columns, ref_schema=rs, ref_table=rt,
                         ref_columns=rc, name=name)


def table_from_doc(doc, schema_name, path) -> Table:
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: table document must be an object", path=path)
    name = _expect(doc, "name", str, path, required=True)
    kind = doc.get("kind", "table")
    if kind != "table":
        raise ValidationError(f"{path}: unsupported table kind {kind!r}", path=path)
    cols_doc = _expect(doc, "columns", list, path) or []
    columns = [column_from_doc(c, f"{path}/column[{i}]") for i, c in enumerate(cols_doc)]
    keys = [key_from_doc(k, f"{path}/key[{i}]")
            for i, k in enumerate(_expect(doc, "keys", list, path) or [])]
    fkeys = [fkey_from_doc(f, f"{path}/foreignkey[{i}]")
             for i, f in enumerate(_expect(doc, "foreign_keys", list, path) or [])]
    return Table(schema_name=schema_name, name=name, columns=columns, keys=keys,
                 foreign_keys=fkeys, comment=_expect(doc, "comment", str, path),
                 annotations=_annotations_from_doc(doc, path))


def schema_from_doc(doc, path) -> Schema:
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: schema document must be an object", path=path)
    name = _expect(doc, "name", str, path, required=True)
    tables_doc = _expect(doc, "tables", dict, path) or {}
    sch = Schema(name=name, comment=_expect(doc, "comment", str, path),
                 annotations=_annotations_from_doc(doc, path))
    for tname, tdoc in tables_doc.items():
        table = table_from_doc(tdoc, name, f"{path}/table {tname}")
        if table.name != tname:
            raise ValidationError(f"{path}: table key {tname!r} != document name {table.name!r}")
        sch.tables[tname] = table
    return sch


def model_from_doc(doc) -> ErmModel:
    if not isinstance(doc, dict):
        raise ValidationError("model document must be an object")
    schemas_doc = _expect(doc, "schemas", dict, "model", required=True)
    m = ErmModel()
    for sname, sdoc in schemas_doc.items():
        sch = schema_from_doc(sdoc, f"schema {sname}")
        if sch.name != sname:
            raise ValidationError(f"schema key {sname!r} != document name {sch.name!r}")
        m.schemas[sname] = sch
    violations = validate(m)
    if violations:
        path, reason = violations[0]
        raise ValidationError(f"{path}: {reason}", path=path)
    return m


def copy_model(m: ErmModel) -> ErmModel:
    return model_from_doc(model_doc(m))


# --- validation ------------------------------------------------------------

def validate(m: ErmModel) -> list[tuple[str, str]]:
    """Total check of model invariants; returns (path, reason) violations."""
    out = []
    for sch in m.schemas.values():
        for t in sch.tables.values():
            tpath = f"schema {sch.name}/table {t.name}"
            seen_cols = set()
            for c in t.columns:
                cpath = f"{tpath}/column {c.name}"
                if c.name in seen_cols:
                    out.append((cpath, "duplicate column name"))
                seen_cols.add(c.name)
                if not coltypes.is_type_name(c.type):
                    out.append((cpath, f"unknown type {c.type!r}"))
                    continue
                try:
                    coltypes.check_value(c.type, c.default, where="default")
                except ValidationError as e:
                    out.append((cpath, e.message))
            key_sets = set()
            for k in t.keys:
                kpath = f"{tpath}/key ({','.join(k.columns)})"
                if not k.columns:
                    out.append((kpath, "key has no columns"))
                    continue
                if len(set(k.columns)) != len(k.columns):
                    out.append((kpath, "duplicate column within key"))
                missing = [c for c in k.columns if c not in seen_cols]
                if missing:
                    out.append((kpath, f"unknown key columns {missing}"))
                fs = frozenset(k.columns)
                if fs in key_sets:
                    out.append((kpath, "duplicate key column set"))
                key_sets.add(fs)
            for f in t.foreign_keys:
                fpath = (f"{tpath}/foreign key ({','.join(f.columns)}) -> "
                         f"{f.ref_schema}:{f.ref_table}")
                if len(f.columns) != len(f.ref_columns):
                    out.append((fpath, "foreign key arity mismatch"))
                    continue
                if not f.columns:
                    out.append((fpath, "foreign key has no columns"))
                    continue
                missing = [c for c in f.columns if c not in seen_cols]
                if missing:
                    out.append((fpath, f"unknown foreign key columns {missing}"))
                    continue
                ref_schema = m.schemas.get(f.ref_schema)
                ref_table = ref_schema.tables.get(f.ref_table) if ref_schema else None
                if ref_table is None:
                    out.append((fpath, "referenced table does not exist"))
                    continue
                missing = [c for c in f.ref_columns if not ref_table.has_column(c)]
                if missing:
                    out.append((fpath, f"unknown referenced columns {missing}"))
                    continue
                if ref_table.find_key(f.ref_columns) is None:
                    out.append((fpath, "referenced columns are not a declared key"))
    return out


# --- change operations -----------------------------------------------------

@dataclass(frozen=True)
class CreateSchema:
    doc: dict


@dataclass(frozen=True)
class CreateTable:
    schema: str
    doc: dict


@dataclass(frozen=True)
class AddColumn:
    schema: str
    table: str
    doc: dict


@dataclass(frozen=True)
class AddKey:
    schema: str
    table: str
    doc: dict


@dataclass(frozen=True)
class AddForeignKey:
    schema: str
    table: str
    doc: dict


@dataclass(frozen=True)
class DeleteElement:
    path: ElementPath


@dataclass(frozen=True)
class SetComment:
    path: ElementPath
    text: str | None


@dataclass(frozen=True)
class PutAnnotation:
    path: ElementPath
    key: str
    payload: object


@dataclass(frozen=True)
class DeleteAnnotation:
    path: ElementPath
    key: str


def apply_change(m: ErmModel, tables: dict, change):
    """Apply one model change in place; returns the element document.

    m and tables must be transaction-local copies: on error the change may
    be partially applied and the transaction must be aborted.
    """
    if isinstance(change, CreateSchema):
        sch = schema_from_doc(change.doc, "schema")
        if sch.name in m.schemas:
            raise Conflict(f"schema {sch.name!r} already exists")
        m.schemas[sch.name] = sch
        for t in sch.tables.values():
            tables[(sch.name, t.name)] = []
        _check(m)
        return schema_doc(sch)

    if isinstance(change, CreateTable):
        sch = m.schema(change.schema)
        t = table_from_doc(change.doc, sch.name, f"schema {sch.name}/table")
        if t.name in sch.tables:
            raise Conflict(f"table {t.name!r} already exists in schema {sch.name!r}")
        sch.tables[t.name] = t
        tables[(sch.name, t.name)] = []
        _check(m)
        return table_doc(t)

    if isinstance(change, AddColumn):
        t = m.table(change.schema, change.table)
        c = column_from_doc(change.doc, f"schema {t.schema_name}/table {t.name}/column")
        if t.has_column(c.name):
            raise Conflict(f"column {c.name!r} already exists in table {t.name!r}")
        t.columns.append(c)
        if not c.nullable and c.default is None and tables[(t.schema_name, t.name)]:
            raise Conflict(f"column {c.name!r} is not nullable and table has rows but no default")
        for row in tables[(t.schema_name, t.name)]:
            row[c.name] = c.default
        _check(m)
        return column_doc(c)

    if isinstance(change, AddKey):
        t = m.table(change.schema, change.table)
        k = key_from_doc(change.doc, f"schema {t.schema_name}/table {t.name}/key")
        if t.find_key(k.columns) is not None:
            raise Conflict(f"key ({','.join(k.columns)}) already exists on table {t.name!r}")
        t.keys.append(k)
        _check(m)
        return key_doc(k)

    if isinstance(change, AddForeignKey):
        t = m.table(change.schema, change.table)
        f = fkey_from_doc(change.doc, f"schema {t.schema_name}/table {t.name}/foreignkey")
        if _find_fkey(t, f.columns, (f.ref_schema, f.ref_table, f.ref_columns)) is not None:
            raise Conflict("identical foreign key already exists")
        t.foreign_keys.append(f)
        _check(m)
        return fkey_doc(f)

    if isinstance(change, DeleteElement):
        return _delete_element(m, tables, change.path)

    if isinstance(change, SetComment):
        el = _resolve_commentable(m, change.path)
        if change.text is not None and not isinstance(change.text, str):
            raise ValidationError("comment must be text")
        el.comment = change.text
        return {"comment": el.comment}

    if isinstance(change, PutAnnotation):
        el = _resolve_commentable(m, change.path)
        coltypes.check_json_data(change.payload, where=f"annotation {change.key}")
        el.annotations[change.key] = change.payload
        return change.payload

    if isinstance(change, DeleteAnnotation):
        el = _resolve_commentable(m, change.path)
        if change.key not in el.annotations:
            raise NotFound(f"annotation {change.key!r} on {change.path}")
        del el.annotations[change.key]
        return None

    raise ValidationError(f"unknown model change {type(change).__name__}")


def _check(m):
    violations = validate(m)
    if violations:
        path, reason = violations[0]
        raise ValidationError(f"{path}: {reason}", path=path)


def _find_fkey(t: Table, columns, ref) -> ForeignKeyRef | None:
    for f in t.foreign_keys:
        if tuple(f.columns) == tuple(columns) and \
                (f.ref_schema, f.ref_table, tuple(f.ref_columns)) == (ref[0], ref[1], tuple(ref[2])):
            return f
    return None


def _resolve_commentable(m: ErmModel, path: ElementPath):
    """Comments and annotations live on schemas, tables, and columns."""
    if path.kind == "schema":
        return m.schema(path.schema)
    if path.kind == "table":
        return m.table(path.schema, path.table)
    if path.kind == "column":
        return m.table(path.schema, path.table).column(path.column)
    raise NotFound(f"{path} does not carry comments or annotations")


def _delete_element(m: ErmModel, tables: dict, path: ElementPath):
    if path.kind == "schema":
        sch = m.schema(path.schema)
        for tname in list(sch.tables):
            _drop_table(m, tables, path.schema, tname)
        del m.schemas[path.schema]
        return None
    if path.kind == "table":
        m.table(path.schema, path.table)
        _drop_table(m, tables, path.schema, path.table)
        return None
    if path.kind == "column":
        t = m.table(path.schema, path.table)
        t.column(path.column)
        _drop_column(m, tables, t, path.column)
        return None
    if path.kind == "key":
        t = m.table(path.schema, path.table)
        k = t.find_key(path.key_columns)
        if k is None:
            raise NotFound(f"{path}")
        want = frozenset(k.columns)
        for other in m.all_tables():
            for f in other.foreign_keys:
                if (f.ref_schema, f.ref_table) == (t.schema_name, t.name) \
                        and frozenset(f.ref_columns) == want:
                    raise Conflict(
                        f"key is referenced by foreign key ({','.join(f.columns)}) "
                        f"of table {other.schema_name}:{other.name}",
                        path=str(path))
        t.keys.remove(k)
        return None
    if path.kind == "fkey":
        t = m.table(path.schema, path.table)
        f = _find_fkey(t, path.fkey_columns, path.fkey_ref)
        if f is None:
            raise NotFound(f"{path}")
        t.foreign_keys.remove(f)
        return None
    raise NotFound(f"{path}")


def _drop_table(m: ErmModel, tables: dict, schema: str, name: str):
    # inbound references cascade away with the table, like column deletion
    for other in m.all_tables():
        if other.schema_name == schema and other.name == name:
            continue
        other.foreign_keys = [
            f for f in other.foreign_keys
            if (f.ref_schema, f.ref_table) != (schema, name)]
    del m.schema(schema).tables[name]
    tables.pop((schema, name), None)


def _drop_column(m: ErmModel, tables: dict, t: Table, cname: str):
    t.columns = [c for c in t.columns if c.name != cname]

    kept, seen = [], set()
    for k in t.keys:
        cols = tuple(c for c in k.columns if c != cname)
        if not cols:
            continue
        fs = frozenset(cols)
        if fs in seen:
            continue
        seen.add(fs)
        kept.append(Key(columns=cols))
    t.keys = kept

    for other in m.all_tables():
        out = []
        for f in other.foreign_keys:
            if (f.ref_schema, f.ref_table) == (t.schema_name, t.name) and cname in f.ref_columns:
                continue  # inbound reference to the dropped column
            if other is t and cname in f.columns:
                pairs = [(a, b) for a, b in zip(f.columns, f.ref_columns) if a != cname]
                if not pairs:
                    continue
                f = replace(f, columns=tuple(a for a, _ in pairs),
                            ref_columns=tuple(b for _, b in pairs))
            out.append(f)
        other.foreign_keys = out

    # a shrunk key may strand foreign keys whose reference set is no longer
    # declared; resolvability demands they go too
    for other in m.all_tables():
        other.foreign_keys = [
            f for f in other.foreign_keys
            if _ref_table(m, f) is not None and _ref_table(m, f).find_key(f.ref_columns) is not None]

    for row in tables[(t.schema_name, t.name)]:
        row.pop(cname, None)


def _ref_table(m: ErmModel, f: ForeignKeyRef) -> Table | None:
    sch = m.schemas.get(f.ref_schema)
    return sch.tables.get(f.ref_table) if sch else None
