"""HTTP binding: routing, authentication, ACL enforcement, content
negotiation, ETag preconditions, status mapping, and change notices.

The Service object is transport-agnostic: request() takes the raw request
target (still percent-encoded; http.server hands it over unmodified) and
returns a Response.  run_server wraps it in a threading HTTP server.

Request discipline: every request runs in exactly one transaction; nothing
is sent before the transaction resolves; If-Match is checked against the
transaction's snapshot version before any side effect.
"""
from __future__ import annotations

import json as _json
import logging
import sys
import threading
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import model as erm
from . import planner, storage, tabular, urls
from .errors import (AuthenticationRequired, BadSyntax, Conflict, Forbidden,
                     MethodNotAllowed, NotAcceptable, NotFound,
                     PreconditionFailed, ServiceError, StorageError,
                     ValidationError)
from .registry import (ACL_NAMES, ClientContext, Registry, check_acl_update,
                       enforce_right)

log = logging.getLogger("ercatalog")

SERIALIZATION_RETRIES = 3


@dataclass
class Config:
    listen: str = "127.0.0.1:8080"
    data_dir: str | None = None
    tokens: dict = field(default_factory=dict)  # token -> {identity, attributes}
    trust_headers: bool = False
    hard_row_cap: int | None = None
    notice_log: str | None = None
    cors_permissive: bool = False
    changes_timeout: float = 30.0

    @classmethod
    def from_file(cls, path: str) -> "Config":
        with open(path, "r", encoding="utf-8") as fh:
            doc = _json.load(fh)
        version = doc.pop("config_version", 1)
        if version != 1:
            raise ValidationError(f"unsupported config_version {version}")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        tokens = doc.get("tokens", {})
        if not isinstance(tokens, dict):
            raise ValidationError("tokens must map token strings to client entries")
        for token, entry in tokens.items():
            if not isinstance(entry, dict) or not isinstance(entry.get("identity"), str):
                raise ValidationError(f"token {token!r} needs an identity string")
            attrs = entry.get("attributes", [])
            if not isinstance(attrs, list) or not all(isinstance(a, str) for a in attrs):
                raise ValidationError(f"token {token!r} attributes must be strings")
        return cls(**doc)


@dataclass
class Response:
    status: int
    headers: dict
    body: bytes

    def json(self):
        return _json.loads(self.body.decode("utf-8"))


class NoticePublisher:
    """Appends one change notice per committed write to a log file.

    Sink failures are logged and swallowed: notification must never fail
    the client's request.
    """

    def __init__(self, path: str | None):
        self.path = path
        self._lock = threading.Lock()

    def publish(self, catalog_id: int, version: int):
        if self.path is None:
            return
        notice = {"catalog": catalog_id, "version": version,
                  "ts": datetime.now(timezone.utc).isoformat()}
        try:
            with self._lock, open(self.path, "a", encoding="utf-8") as fh:
                fh.write(_json.dumps(notice) + "\n")
        except OSError as e:
            log.warning("change notice for catalog %s version %s lost: %s",
                        catalog_id, version, e)


def _status_of(error: ServiceError) -> int:
    if isinstance(error, StorageError):
        return {"key_violation": 409, "fkey_violation": 409,
                "not_null_violation": 409, "type_error": 400,
                "serialization_conflict": 503}[error.kind]
    for klass, code in ((BadSyntax, 400), (ValidationError, 400),
                        (AuthenticationRequired, 401), (Forbidden, 403),
                        (NotFound, 404), (MethodNotAllowed, 405),
                        (NotAcceptable, 406), (Conflict, 409),
                        (PreconditionFailed, 412)):
        if isinstance(error, klass):
            return code
    return 500


class Service:
    def __init__(self, config: Config | None = None):
        self.config = config or Config()
        self.registry = Registry(self.config.data_dir)
        self.notices = NoticePublisher(self.config.notice_log)

    # -- entry point ---------------------------------------------------------

    def request(self, method: str, target: str, headers: dict | None = None,
                body: bytes = b"") -> Response:
        headers = {k.lower(): v for k, v in (headers or {}).items()}
        method = method.upper()
        try:
            if method == "OPTIONS" and self.config.cors_permissive:
                return self._respond(204, {}, b"")
            ctx = self._authenticate(headers)
            path, _, query = target.partition("?")
            last = None
            for _attempt in range(SERIALIZATION_RETRIES):
                try:
                    return self._route(ctx, method, path, query, headers, body)
                except StorageError as e:
                    if e.kind != "serialization_conflict":
                        raise
                    last = e
            raise last
        except ServiceError as e:
            status = _status_of(e)
            extra = {}
            if isinstance(e, MethodNotAllowed) and e.allowed:
                extra["Allow"] = ", ".join(e.allowed)
            return self._respond(status, extra | {"Content-Type": "application/json"},
                                 _json.dumps(e.to_doc()).encode("utf-8"))
        except Exception:
            log.exception("unhandled error serving %s %s", method, target)
            doc = {"error": "InternalError", "message": "internal server error"}
            return self._respond(500, {"Content-Type": "application/json"},
                                 _json.dumps(doc).encode("utf-8"))

    def _respond(self, status, headers, body) -> Response:
        out = dict(headers)
        if self.config.cors_permissive:
            out.setdefault("Access-Control-Allow-Origin", "*")
            out.setdefault("Access-Control-Allow-Methods",
                           "GET, POST, PUT, DELETE, OPTIONS")
            out.setdefault("Access-Control-Allow-Headers",
                           "Content-Type, Authorization, If-Match, If-None-Match")
            out.setdefault("Access-Control-Expose-Headers",
                           "ETag, Location, X-Affected-Count")
        return Response(status, out, body)

    # -- authentication --------------------------------------------------------

    def _authenticate(self, headers) -> ClientContext:
        auth = headers.get("authorization")
        if auth:
            parts = auth.split(None, 1)
            if len(parts) != 2 or parts[0].lower() != "bearer" or not parts[1].strip():
                raise AuthenticationRequired("malformed Authorization header")
            entry = self.config.tokens.get(parts[1].strip())
            if entry is None:
                raise AuthenticationRequired("unknown bearer token")
            return ClientContext(identity=entry["identity"],
                                 attributes=frozenset(entry.get("attributes", ())))
        if self.config.trust_headers and headers.get("x-client-identity"):
            attrs = [a.strip() for a in headers.get("x-client-attributes", "").split(",")
                     if a.strip()]
            return ClientContext(identity=headers["x-client-identity"],
                                 attributes=frozenset(attrs))
        return ClientContext()

    # -- routing ----------------------------------------------------------------

    def _route(self, ctx, method, path, query, headers, body) -> Response:
        segments = path.split("/")
        if len(segments) >= 3 and segments[1] == "ermrest" and segments[2] == "catalog":
            rest = segments[3:]
            if rest == [] or rest == [""]:
                return self._catalog_collection(ctx, method)
            catalog_id = urls.decode_atom(rest[0])
            tail = rest[1:]
            if not tail:
                return self._catalog_resource(ctx, method, catalog_id, headers)
            if tail[0] == "acl":
                return self._acl_resource(ctx, method, catalog_id, tail[1:], headers, body)
            if tail[0] == "schema":
                return self._model_resource(ctx, method, path, headers, body)
            if tail[0] in urls.MAPPINGS:
                return self._data_resource(ctx, method, path, query, headers, body)
            if tail[0] == "changes" and len(tail) == 1:
                return self._changes_resource(ctx, method, catalog_id, query)
        raise NotFound(f"no route for {path!r}")

    # -- preconditions and tags ----------------------------------------------------

    @staticmethod
    def _tag(catalog_id, version) -> str:
        return f'"{catalog_id}-{version}"'

    @staticmethod
    def _tag_set(value: str):
        return {t.strip() for t in value.split(",") if t.strip()}

    def _check_preconditions(self, headers, tag: str, method: str):
        """412 on failed preconditions; 'not_modified' for a 304-able GET."""
        if_match = headers.get("if-match")
        if if_match is not None:
            tags = self._tag_set(if_match)
            if "*" not in tags and tag not in tags:
                raise PreconditionFailed(
                    f"entity tag {tag} does not match If-Match {if_match!r}")
        inm = headers.get("if-none-match")
        if inm is not None:
            tags = self._tag_set(inm)
            if "*" in tags or tag in tags:
                if method in ("GET", "HEAD"):
                    return "not_modified"
                raise PreconditionFailed(
                    f"entity tag {tag} matches If-None-Match {inm!r}")
        return None

    # -- catalog management ----------------------------------------------------------

    def _catalog_doc(self, store, state) -> dict:
        return {"id": str(store.id), "acls": state.acls, "version": state.version}

    def _catalog_collection(self, ctx, method) -> Response:
        if method != "POST":
            raise MethodNotAllowed("catalog collection supports POST", allowed=("POST",))
        store = self.registry.create_catalog(ctx)
        self.notices.publish(store.id, 1)
        doc = self._catalog_doc(store, store.current)
        return self._respond(201, {
            "Location": f"/ermrest/catalog/{store.id}",
            "Content-Type": "application/json",
            "ETag": self._tag(store.id, 1),
        }, _json.dumps(doc).encode("utf-8"))

    def _catalog_resource(self, ctx, method, catalog_id, headers) -> Response:
        if method == "GET":
            store = self.registry.get(catalog_id)
            txn = store.begin("read")
            try:
                enforce_right(txn.state.acls, "data_read", ctx)
                tag = self._tag(store.id, txn.version)
                if self._check_preconditions(headers, tag, method) == "not_modified":
                    return self._respond(304, {"ETag": tag}, b"")
                doc = self._catalog_doc(store, txn.state)
            finally:
                store.abort(txn)
            return self._respond(200, {"Content-Type": "application/json", "ETag": tag},
                                 _json.dumps(doc).encode("utf-8"))
        if method == "DELETE":
            store = self.registry.get(catalog_id)
            tag = self._tag(store.id, store.current.version)
            self._check_preconditions(headers, tag, method)
            self.registry.delete_catalog(ctx, catalog_id)
            return self._respond(204, {}, b"")
        raise MethodNotAllowed("catalog supports GET and DELETE",
                               allowed=("GET", "DELETE"))

    # -- ACL resources -------------------------------------------------------------

    def _acl_resource(self, ctx, method, catalog_id, tail, headers, body) -> Response:
        store = self.registry.get(catalog_id)
        if len(tail) > 1:
            raise NotFound("no such ACL resource")
        name = urls.decode_atom(tail[0]) if tail else None
        if method == "GET":
            txn = store.begin("read")
            try:
                enforce_right(txn.state.acls, "data_read", ctx)
                tag = self._tag(store.id, txn.version)
                if self._check_preconditions(headers, tag, method) == "not_modified":
                    return self._respond(304, {"ETag": tag}, b"")
                if name is None:
                    doc = txn.state.acls
                elif name in ACL_NAMES:
                    doc = txn.state.acls[name]
                else:
                    raise NotFound(f"unknown ACL name {name!r}")
            finally:
                store.abort(txn)
            return self._respond(200, {"Content-Type": "application/json", "ETag": tag},
                                 _json.dumps(doc).encode("utf-8"))
        if method == "PUT" and name is not None:
            members = _parse_json_body(body)
            txn = store.begin("write")
            try:
                enforce_right(txn.state.acls, "owner", ctx)
                tag = self._tag(store.id, txn.version)
                self._check_preconditions(headers, tag, method)
                check_acl_update(name, members)
                txn.acls_mut()[name] = list(members)
                version = store.commit(txn)
            except BaseException:
                store.abort(txn)
                raise
            self.notices.publish(store.id, version)
            return self._respond(200, {"Content-Type": "application/json",
                                       "ETag": self._tag(store.id, version)},
                                 _json.dumps(members).encode("utf-8"))
        raise MethodNotAllowed("ACLs support GET and PUT",
                               allowed=("GET", "PUT") if name else ("GET",))

    # -- model resources --------------------------------------------------------------

    def _model_resource(self, ctx, method, path, headers, body) -> Response:
        mt = urls.parse_model_url(path)
        store = self.registry.get(mt.catalog)

        if method == "GET":
            txn = store.begin("read")
            try:
                enforce_right(txn.state.acls, "data_read", ctx)
                tag = self._tag(store.id, txn.version)
                if self._check_preconditions(headers, tag, method) == "not_modified":
                    return self._respond(304, {"ETag": tag}, b"")
                ctype, payload = _model_get(txn.model, mt)
            finally:
                store.abort(txn)
            return self._respond(200, {"Content-Type": ctype, "ETag": tag}, payload)

        change = _model_change(mt, method, headers, body)
        txn = store.begin("write")
        try:
            enforce_right(txn.state.acls, "model_write", ctx)
            tag = self._tag(store.id, txn.version)
            self._check_preconditions(headers, tag, method)
            resolved = _resolve_change(change, txn.model)
            doc = storage.apply_model_change(txn, resolved)
            version = store.commit(txn)
        except BaseException:
            store.abort(txn)
            raise
        self.notices.publish(store.id, version)
        new_tag = self._tag(store.id, version)
        if method == "DELETE":
            return self._respond(204, {"ETag": new_tag}, b"")
        if mt.resource == "comment":
            return self._respond(200, {"Content-Type": "text/plain", "ETag": new_tag},
                                 (doc["comment"] or "").encode("utf-8"))
        status = 201 if method == "POST" else 200
        return self._respond(status, {"Content-Type": "application/json", "ETag": new_tag},
                             _json.dumps(doc).encode("utf-8"))

    # -- data resources -----------------------------------------------------------------

    def _data_resource(self, ctx, method, path, query, headers, body) -> Response:
        query, explain_flag = _extract_explain(query)
        ast = urls.parse(path, query)
        store = self.registry.get(ast.catalog)

        if method == "GET":
            txn = store.begin("read")
            try:
                enforce_right(txn.state.acls, "data_read", ctx)
                tag = self._tag(store.id, txn.version)
                if self._check_preconditions(headers, tag, method) == "not_modified":
                    return self._respond(304, {"ETag": tag}, b"")
                plan = planner.plan_retrieval(ast, txn.model)
                if explain_flag:
                    enforce_right(txn.state.acls, "owner", ctx)
                    text = planner.explain(plan)
                    return self._respond(200, {"Content-Type": "text/plain", "ETag": tag},
                                         text.encode("utf-8"))
                rowset = storage.execute(txn, plan)
            finally:
                store.abort(txn)
            if self.config.hard_row_cap is not None:
                rowset.rows = rowset.rows[:self.config.hard_row_cap]
            fmt = _negotiate(ast.accept, headers)
            return self._respond(200, {"Content-Type": _media_type(fmt), "ETag": tag},
                                 tabular.encode(rowset, fmt))

        if explain_flag:
            raise ValidationError("explain applies to retrieval requests only")
        if method not in ("POST", "PUT", "DELETE"):
            raise MethodNotAllowed("data URLs support GET, POST, PUT, DELETE",
                                   allowed=("GET", "POST", "PUT", "DELETE"))

        txn = store.begin("write")
        try:
            enforce_right(txn.state.acls, "data_write", ctx)
            tag = self._tag(store.id, txn.version)
            self._check_preconditions(headers, tag, method)
            fmt = _negotiate(ast.accept, headers)
            if method == "DELETE":
                plan = planner.plan_mutation(ast, txn.model, method, None)
                count, _ = storage.mutate(txn, plan, tabular.RowSet())
                version = store.commit(txn)
                self.notices.publish(store.id, version)
                return self._respond(204, {"X-Affected-Count": str(count),
                                           "ETag": self._tag(store.id, version)}, b"")
            type_map = planner.payload_type_map(ast, txn.model, method)
            input_rows = tabular.decode(body, _payload_format(headers), type_map)
            if not input_rows.rows:
                store.abort(txn)
                return self._respond(200, {"Content-Type": _media_type(fmt),
                                           "X-Affected-Count": "0",
                                           "ETag": tag},
                                     tabular.encode(tabular.RowSet(), fmt))
            plan = planner.plan_mutation(ast, txn.model, method,
                                         tuple(input_rows.column_names()))
            count, result = storage.mutate(txn, plan, input_rows)
            version = store.commit(txn)
        except BaseException:
            store.abort(txn)
            raise
        self.notices.publish(store.id, version)
        return self._respond(200, {"Content-Type": _media_type(fmt),
                                   "X-Affected-Count": str(count),
                                   "ETag": self._tag(store.id, version)},
                             tabular.encode(result, fmt))

    # -- change notices -------------------------------------------------------------------

    def _changes_resource(self, ctx, method, catalog_id, query) -> Response:
        if method != "GET":
            raise MethodNotAllowed("changes supports GET", allowed=("GET",))
        store = self.registry.get(catalog_id)
        enforce_right(store.current.acls, "data_read", ctx)
        since = 0
        for part in (query or "").split("&"):
            if not part:
                continue
            k, _, v = part.partition("=")
            if k != "since" or not v.isdigit():
                raise BadSyntax("changes accepts ?since=<version>")
            since = int(v)
        version = store.wait_version_above(since, self.config.changes_timeout)
        doc = {"catalog": str(store.id), "version": version}
        return self._respond(200, {"Content-Type": "application/json"},
                             _json.dumps(doc).encode("utf-8"))


# --- helpers -----------------------------------------------------------------

def _parse_json_body(body: bytes):
    try:
        return _json.loads(body.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise ValidationError(f"malformed JSON body: {e}")


def _extract_explain(query: str):
    if not query:
        return query, False
    kept, explain = [], False
    for part in query.split("&"):
        k, _, v = part.partition("=")
        if k == "explain":
            if v not in ("true", "false"):
                raise BadSyntax("explain must be true or false")
            explain = v == "true"
        else:
            kept.append(part)
    return "&".join(kept), explain


def _payload_format(headers) -> str:
    ctype = headers.get("content-type", "application/json")
    base = ctype.split(";")[0].strip().lower()
    if base in ("application/json", ""):
        return "json"
    if base == "text/csv":
        return "csv"
    raise ValidationError(f"unsupported payload content type {ctype!r}")


def _media_type(fmt: str) -> str:
    return {"json": "application/json", "csv": "text/csv"}[fmt]


def _negotiate(accept_override: str | None, headers) -> str:
    """Pick json or csv; the ?accept= query parameter wins over the header."""
    if accept_override is not None:
        return accept_override
    accept = headers.get("accept")
    if accept is None or accept.strip() == "":
        return "json"
    choices = []
    for i, part in enumerate(accept.split(",")):
        bits = part.strip().split(";")
        media = bits[0].strip().lower()
        q = 1.0
        for p in bits[1:]:
            k, _, v = p.strip().partition("=")
            if k == "q":
                try:
                    q = float(v)
                except ValueError:
                    q = 0.0
        choices.append((-q, i, media))
    for _, _, media in sorted(choices):
        if media in ("application/json", "application/*"):
            return "json"
        if media == "text/csv":
            return "csv"
        if media == "text/*":
            return "csv"
        if media == "*/*":
            return "json"
    raise NotAcceptable(f"cannot satisfy Accept: {accept}")


def _model_get(model: erm.ErmModel, mt: urls.ModelTarget):
    """GET rendering for every model resource kind."""
    if mt.resource == "model":
        return "application/json", _dump_json(erm.model_doc(model))
    el = mt.element
    if mt.resource == "container":
        if mt.container == "table":
            sch = model.schema(el.schema)
            return "application/json", _dump_json(
                {name: erm.table_doc(t) for name, t in sch.tables.items()})
        t = model.table(el.schema, el.table)
        if mt.container == "column":
            return "application/json", _dump_json([erm.column_doc(c) for c in t.columns])
        if mt.container == "key":
            return "application/json", _dump_json([erm.key_doc(k) for k in t.keys])
        if mt.container in ("fkey", "fkey_reference"):
            fks = t.foreign_keys
            if mt.container == "fkey_reference":
                fks = [f for f in fks if tuple(f.columns) == el.fkey_columns]
            return "application/json", _dump_json([erm.fkey_doc(f) for f in fks])
    element = _resolve_element(model, el)
    if mt.resource == "doc":
        doc = {
            "schema": erm.schema_doc, "table": erm.table_doc,
            "column": erm.column_doc, "key": erm.key_doc, "fkey": erm.fkey_doc,
        }[el.kind](element)
        return "application/json", _dump_json(doc)
    if mt.resource == "comment":
        return "text/plain", (element.comment or "").encode("utf-8")
    if mt.resource == "annotations":
        return "application/json", _dump_json(element.annotations)
    if mt.resource == "annotation":
        if mt.annotation_key not in element.annotations:
            raise NotFound(f"annotation {mt.annotation_key!r} on {el}")
        return "application/json", _dump_json(element.annotations[mt.annotation_key])
    raise NotFound(f"no such model resource {mt.resource!r}")


def _dump_json(doc) -> bytes:
    return _json.dumps(doc, ensure_ascii=False).encode("utf-8")


def _resolve_element(model: erm.ErmModel, el: erm.ElementPath):
    if el.kind == "schema":
        return model.schema(el.schema)
    t = model.table(el.schema, el.table)
    if el.kind == "table":
        return t
    if el.kind == "column":
        return t.column(el.column)
    if el.kind == "key":
        k = t.find_key(el.key_columns)
        if k is None:
            raise NotFound(f"{el}")
        return k
    if el.kind == "fkey":
        ref_schema, ref_table, ref_cols = el.fkey_ref
        if ref_schema is None:
            ref = model.resolve_table(None, ref_table)
            ref_schema = ref.schema_name
        f = erm_find_fkey(t, el.fkey_columns, (ref_schema, ref_table, ref_cols))
        if f is None:
            raise NotFound(f"{el}")
        return f
    raise NotFound(f"{el}")


def erm_find_fkey(t, columns, ref):
    for f in t.foreign_keys:
        if tuple(f.columns) == tuple(columns) and \
                (f.ref_schema, f.ref_table, tuple(f.ref_columns)) == \
                (ref[0], ref[1], tuple(ref[2])):
            return f
    return None


def _model_change(mt: urls.ModelTarget, method: str, headers, body):
    """Map a model URL + method + body to a change operation."""
    el = mt.element
    if method == "POST":
        doc = _parse_json_body(body)
        if mt.resource == "model":
            return erm.CreateSchema(doc)
        if mt.resource == "container":
            if mt.container == "table":
                return erm.CreateTable(el.schema, doc)
            if mt.container == "column":
                return erm.AddColumn(el.schema, el.table, doc)
            if mt.container == "key":
                return erm.AddKey(el.schema, el.table, doc)
            if mt.container == "fkey":
                return erm.AddForeignKey(el.schema, el.table, doc)
        raise MethodNotAllowed("this model resource does not support POST",
                               allowed=("GET",))
    if method == "DELETE":
        if mt.resource == "doc":
            return erm.DeleteElement(el)
        if mt.resource == "annotation":
            return erm.DeleteAnnotation(el, mt.annotation_key)
        if mt.resource == "comment":
            return erm.SetComment(el, None)
        raise MethodNotAllowed("this model resource does not support DELETE",
                               allowed=("GET",))
    if method == "PUT":
        if mt.resource == "comment":
            try:
                text = body.decode("utf-8")
            except UnicodeDecodeError:
                raise ValidationError("comment must be UTF-8 text")
            return erm.SetComment(el, text)
        if mt.resource == "annotation":
            payload = _parse_json_body(body)
            return erm.PutAnnotation(el, mt.annotation_key, payload)
        raise MethodNotAllowed(
            "model mutation uses POST for elements and PUT only for "
            "comment and annotation payloads", allowed=("GET", "POST", "DELETE"))
    raise MethodNotAllowed("unsupported method for model resources",
                           allowed=("GET", "POST", "PUT", "DELETE"))


def _resolve_change(change, model: erm.ErmModel):
    """Resolve bare referenced-table names in foreign key element paths."""
    if isinstance(change, erm.DeleteElement) and change.path.kind == "fkey":
        ref_schema, ref_table, ref_cols = change.path.fkey_ref
        if ref_schema is None:
            ref = model.resolve_table(None, ref_table)
            path = erm.ElementPath(kind="fkey", schema=change.path.schema,
                                   table=change.path.table,
                                   fkey_columns=change.path.fkey_columns,
                                   fkey_ref=(ref.schema_name, ref_table, ref_cols))
            return erm.DeleteElement(path)
    return change


# --- HTTP transport -----------------------------------------------------------

class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    service: Service = None

    def _run(self):
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        response = self.service.request(
            self.command, self.path, dict(self.headers.items()), body)
        self.send_response(response.status)
        for k, v in response.headers.items():
            self.send_header(k, v)
        self.send_header("Content-Length", str(len(response.body)))
        self.end_headers()
        if response.body and self.command != "HEAD":
            self.wfile.write(response.body)

    do_GET = do_POST = do_PUT = do_DELETE = do_OPTIONS = do_HEAD = _run

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)


def run_server(service: Service, host: str, port: int) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    return server


def serve_forever(service: Service):
    host, _, port = service.config.listen.partition(":")
    server = run_server(service, host or "127.0.0.1", int(port or 8080))
    print(f"listening on http://{server.server_address[0]}:{server.server_address[1]}/ermrest/",
          file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
