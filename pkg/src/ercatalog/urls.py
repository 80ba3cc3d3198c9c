"""Data and model URL grammar: tokenizer, parser, and canonical renderer.

The full grammar ships in GRAMMAR.md; the shape, informally:

    data-url    = "/ermrest/catalog/" id "/" mapping "/" path [sort] [after]
    mapping     = "entity" | "attribute" | "attributegroup" | "aggregate"
    path        = element *("/" element) ["/" projection]   ; projection
                                                            ; iff mapping
                                                            ; is not entity
    element     = instance | filter | "$" alias
    instance    = [alias ":="] (tableref | endpoint)
    tableref    = [schema ":"] table
    endpoint    = ["left"|"right"|"full"] "(" col *("," col) ")"
    filter      = or ; ";" = or, "&" = and, "!" = not, parens group,
                     and binds tighter than or
    leaf        = [alias ":"] (col | "*") op [operand]
    op          = "=" | "::lt::" | "::leq::" | "::gt::" | "::geq::"
                | "::null::" | "::regexp::" | "::ciregexp::" | "::ts::"
    projection  = outcols | groupkeys ";" outcols            ; attributegroup
    outcol      = [outname ":="] ([alias ":"] col | fn "(" (col|"*") ")")
    sort        = "@sort(" col ["::desc::"] *("," ...) ")"
    after       = "@after(" (value | "::null::") *("," ...) ")"

Syntax characters are only recognized unencoded; data atoms are
percent-decoded exactly once.  The canonical renderer percent-encodes
every byte of a data atom outside [A-Za-z0-9._~-], which makes
parse(render(ast)) the identity and render idempotent on its own output.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import BadSyntax, DecodeError, NotFound
from .model import ElementPath

MAPPINGS = ("entity", "attribute", "attributegroup", "aggregate")
OPERATORS = ("=", "lt", "leq", "gt", "geq", "null", "regexp", "ciregexp", "ts")
TEXT_PATTERN_OPS = ("regexp", "ciregexp", "ts")
AGG_FNS = ("cnt", "cnt_d", "min", "max", "array")
OUTER_DIRECTIONS = ("left", "right", "full")

_HEX = "0123456789abcdefABCDEF"
_SAFE = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789._~-")
# characters an identifier atom may not contain unencoded
_IDENT_STOP = frozenset(":;&!(),=@$*/?")
# characters that terminate a filter operand
_OPERAND_STOP = frozenset(";&()@/")
# characters that terminate a sort/after atom
_LIST_STOP = frozenset(",()@/")


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class TableRef:
    schema: str | None
    name: str


@dataclass(frozen=True)
class Endpoint:
    direction: str  # inner | left | right | full
    columns: tuple[str, ...]


@dataclass(frozen=True)
class TableInstance:
    alias: str | None = None
    table: TableRef | None = None  # None only for endpoint-linked elements
    link: Endpoint | None = None   # None = implicit foreign key resolution


@dataclass(frozen=True)
class FilterElement:
    predicate: object


@dataclass(frozen=True)
class ContextReset:
    alias: str


@dataclass(frozen=True)
class Leaf:
    alias: str | None
    column: str  # "*" = all-text-columns wildcard
    op: str
    operand: str | None = None


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class ColRef:
    alias: str | None
    column: str


@dataclass(frozen=True)
class AggCall:
    fn: str
    arg: ColRef | None  # None = "*"


@dataclass(frozen=True)
class OutCol:
    name: str | None  # output alias; None = bare column keeps its own name
    source: object    # ColRef | AggCall

    def output_name(self) -> str:
        if self.name is not None:
            return self.name
        return self.source.column


@dataclass(frozen=True)
class Projection:
    groups: tuple[OutCol, ...] | None  # attributegroup group keys
    outputs: tuple[OutCol, ...]


@dataclass(frozen=True)
class SortKey:
    column: str
    descending: bool = False


@dataclass(frozen=True)
class DataRequestAst:
    catalog: str
    mapping: str
    path: tuple
    projection: Projection | None = None
    sort: tuple[SortKey, ...] | None = None
    after: tuple | None = None  # raw text constants; None entries are nulls
    limit: int | None = None
    accept: str | None = None


@dataclass(frozen=True)
class ModelTarget:
    """A parsed model URL: an element (None = whole model) plus which of its
    sub-resources is addressed."""

    catalog: str
    element: ElementPath | None
    resource: str  # model | doc | container | comment | annotations | annotation
    container: str | None = None
    annotation_key: str | None = None


# --- percent encoding ------------------------------------------------------

def decode_atom(text: str, offset: int = 0) -> str:
    """Decode one percent-encoded atom; offset anchors error positions."""
    out = bytearray()
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "%":
            if i + 2 >= n or text[i + 1] not in _HEX or text[i + 2] not in _HEX:
                raise DecodeError(f"malformed percent-escape at byte {offset + i}",
                                  offset=offset + i)
            out.append(int(text[i + 1:i + 3], 16))
            i += 3
        else:
            out.extend(c.encode("utf-8"))
            i += 1
    try:
        return out.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DecodeError(f"invalid UTF-8 in percent-encoded data at byte {offset + e.start}",
                          offset=offset + e.start)


def encode_atom(text: str) -> str:
    out = []
    for b in text.encode("utf-8"):
        c = chr(b)
        if c in _SAFE:
            out.append(c)
        else:
            out.append("%%%02X" % b)
    return "".join(out)


# --- segment scanner -------------------------------------------------------

class _Scanner:
    """Cursor over one raw (still percent-encoded) path segment."""

    def __init__(self, text: str, offset: int, segment: int):
        self.text = text
        self.pos = 0
        self.offset = offset
        self.segment = segment

    def error(self, message: str) -> BadSyntax:
        return BadSyntax(f"{message} (segment {self.segment}, byte {self.offset + self.pos})",
                         segment=self.segment, offset=self.offset + self.pos)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def take(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def _atom(self, stop: frozenset) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in stop:
            self.pos += 1
        return decode_atom(self.text[start:self.pos], self.offset + start)

    def ident(self) -> str:
        value = self._atom(_IDENT_STOP)
        if not value:
            raise self.error("expected a name")
        return value

    def operand(self) -> str:
        return self._atom(_OPERAND_STOP)

    def list_atom_raw(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _LIST_STOP:
            self.pos += 1
        return self.text[start:self.pos]


# --- filter parsing --------------------------------------------------------

def _parse_or(sc: _Scanner):
    children = [_parse_and(sc)]
    while sc.take(";"):
        children.append(_parse_and(sc))
    return children[0] if len(children) == 1 else Or(tuple(children))


def _parse_and(sc: _Scanner):
    children = [_parse_unary(sc)]
    while sc.take("&"):
        children.append(_parse_unary(sc))
    return children[0] if len(children) == 1 else And(tuple(children))


def _parse_unary(sc: _Scanner):
    if sc.take("!"):
        return Not(_parse_unary(sc))
    if sc.take("("):
        node = _parse_or(sc)
        if not sc.take(")"):
            raise sc.error("unbalanced parentheses in filter")
        return node
    return _parse_leaf(sc)


def _parse_leaf(sc: _Scanner):
    alias = None
    if sc.peek() == "*":
        sc.pos += 1
        column = "*"
    else:
        name = sc.ident()
        if sc.peek() == ":" and sc.peek(1) != ":" and sc.peek(1) != "=":
            sc.pos += 1
            alias = name
            if sc.peek() == "*":
                sc.pos += 1
                column = "*"
            else:
                column = sc.ident()
        else:
            column = name
    op = _parse_op(sc)
    if column == "*" and op not in TEXT_PATTERN_OPS:
        raise sc.error('the "*" wildcard column requires a text-pattern operator')
    if op == "null":
        return Leaf(alias, column, op, None)
    return Leaf(alias, column, op, sc.operand())


def _parse_op(sc: _Scanner) -> str:
    if sc.take("="):
        return "="
    if sc.take("::"):
        start = sc.pos
        while sc.pos < len(sc.text) and sc.text[sc.pos] not in _IDENT_STOP:
            sc.pos += 1
        name = sc.text[start:sc.pos]
        if not sc.take("::"):
            sc.pos = start
            raise sc.error("dangling '::' operator token")
        if name not in OPERATORS:
            sc.pos = start
            raise sc.error(f"unknown operator ::{name}::")
        return name
    raise sc.error("expected a filter operator")


def parse_filter(segment_text: str, offset: int = 0, segment: int = 0):
    """Parse one path segment (raw text) as a predicate tree."""
    sc = _Scanner(segment_text, offset, segment)
    if sc.at_end():
        raise sc.error("empty filter")
    node = _parse_or(sc)
    if not sc.at_end():
        raise sc.error("trailing characters after filter")
    return node


# --- path element parsing --------------------------------------------------

def _try_instance(sc: _Scanner) -> TableInstance | None:
    """Parse a table-instance segment, or return None to fall back to filter."""
    save = sc.pos
    alias = None
    body_start = sc.pos
    if sc.peek() not in ("(", ""):
        try:
            name = sc.ident()
        except BadSyntax:
            sc.pos = save
            return None
        if sc.take(":="):
            alias = name
            body_start = sc.pos
        else:
            sc.pos = body_start

    # endpoint form: [dir] "(" cols ")"
    ep = _try_endpoint(sc)
    if ep is not None:
        if sc.at_end():
            return TableInstance(alias=alias, table=None, link=ep)
        sc.pos = save
        return None

    try:
        first = sc.ident()
    except BadSyntax:
        sc.pos = save
        return None
    schema = None
    name = first
    if sc.peek() == ":" and sc.peek(1) != ":" and sc.peek(1) != "=":
        sc.pos += 1
        schema = first
        try:
            name = sc.ident()
        except BadSyntax:
            sc.pos = save
            return None
    if sc.at_end():
        return TableInstance(alias=alias, table=TableRef(schema, name), link=None)
    sc.pos = save
    return None


def _try_endpoint(sc: _Scanner) -> Endpoint | None:
    save = sc.pos
    direction = "inner"
    if sc.peek() != "(":
        for d in OUTER_DIRECTIONS:
            if sc.text.startswith(d + "(", sc.pos):
                direction = d
                sc.pos += len(d)
                break
        else:
            return None
    if not sc.take("("):
        sc.pos = save
        return None
    try:
        cols = [sc.ident()]
        while sc.take(","):
            cols.append(sc.ident())
    except BadSyntax:
        sc.pos = save
        return None
    if not sc.take(")"):
        sc.pos = save
        return None
    return Endpoint(direction, tuple(cols))


def _parse_element(raw: str, offset: int, segment: int, bound: set, first: bool):
    sc = _Scanner(raw, offset, segment)
    if sc.at_end():
        raise sc.error("empty path segment")
    if sc.peek() == "$":
        sc.pos += 1
        alias = sc.ident()
        if not sc.at_end():
            raise sc.error("trailing characters after context reset")
        if alias not in bound:
            raise sc.error(f"context reset to unbound alias {alias!r}")
        return ContextReset(alias)

    inst = _try_instance(sc)
    if inst is not None:
        if first and (inst.link is not None or inst.table is None):
            raise sc.error("the first path element must name a table without a link")
        if inst.alias is not None:
            if inst.alias in bound:
                raise sc.error(f"alias {inst.alias!r} is already bound")
            bound.add(inst.alias)
        return inst

    if first:
        raise sc.error("the first path element must name a table")
    return FilterElement(parse_filter(raw, offset, segment))


# --- suffix (@sort/@after) parsing ------------------------------------------

def _split_suffixes(raw: str, offset: int, segment: int):
    i = raw.find("@")
    if i < 0:
        return raw, None, None
    body, rest = raw[:i], raw[i:]
    rest_off = offset + i
    sort_text = after_text = None
    sc = _Scanner(rest, rest_off, segment)
    if sc.take("@sort("):
        j = rest.find(")", sc.pos)
        if j < 0:
            raise sc.error("unterminated @sort(")
        sort_text = (rest[sc.pos:j], rest_off + sc.pos)
        sc.pos = j + 1
    if sc.take("@after("):
        if sort_text is None:
            raise sc.error("@after requires @sort")
        j = rest.find(")", sc.pos)
        if j < 0:
            raise sc.error("unterminated @after(")
        after_text = (rest[sc.pos:j], rest_off + sc.pos)
        sc.pos = j + 1
    if not sc.at_end():
        raise sc.error("unexpected text after page hints")
    if sort_text is None and after_text is None:
        raise sc.error("unexpected '@' in path data (encode it as %40)")
    return body, sort_text, after_text


def _parse_sort(text: str, offset: int, segment: int) -> tuple[SortKey, ...]:
    sc = _Scanner(text, offset, segment)
    keys = []
    while True:
        raw = sc.list_atom_raw()
        desc = False
        if raw.endswith("::desc::"):
            desc = True
            raw = raw[:-len("::desc::")]
        name = decode_atom(raw, offset)
        if not name:
            raise sc.error("empty sort key")
        keys.append(SortKey(name, desc))
        if not sc.take(","):
            break
    if not sc.at_end():
        raise sc.error("malformed @sort list")
    return tuple(keys)


def _parse_after(text: str, offset: int, segment: int) -> tuple:
    sc = _Scanner(text, offset, segment)
    values = []
    while True:
        start = sc.pos
        raw = sc.list_atom_raw()
        if raw == "::null::":
            values.append(None)
        else:
            values.append(decode_atom(raw, offset + start))
        if not sc.take(","):
            break
    if not sc.at_end():
        raise sc.error("malformed @after list")
    return tuple(values)


# --- projection parsing ----------------------------------------------------

def _split_top(raw: str, sep: str):
    """Split on an unencoded separator at paren depth zero, keeping offsets."""
    parts, depth, start = [], 0, 0
    for i, c in enumerate(raw):
        if c == "(":
            depth += 1
        elif c == ")":
            depth = max(0, depth - 1)
        elif c == sep and depth == 0:
            parts.append((raw[start:i], start))
            start = i + 1
    parts.append((raw[start:], start))
    return parts


def _parse_outcol(raw: str, offset: int, segment: int) -> OutCol:
    sc = _Scanner(raw, offset, segment)
    if sc.at_end():
        raise sc.error("empty projection column")
    out_name = None
    save = sc.pos
    if sc.peek() != "(":
        name = sc.ident()
        if sc.take(":="):
            out_name = name
        else:
            sc.pos = save

    start = sc.pos
    first = sc.ident()
    if sc.peek() == "(":
        if first not in AGG_FNS:
            raise sc.error(f"unknown aggregate function {first!r}")
        sc.pos += 1
        if sc.peek() == "*":
            sc.pos += 1
            arg = None
        else:
            arg = _parse_colref(sc)
        if not sc.take(")"):
            raise sc.error("unterminated aggregate call")
        if not sc.at_end():
            raise sc.error("trailing characters after aggregate call")
        if out_name is None:
            raise sc.error("aggregate outputs require an output alias (name:=fn(...))")
        return OutCol(out_name, AggCall(first, arg))

    sc.pos = start
    ref = _parse_colref(sc)
    if not sc.at_end():
        raise sc.error("trailing characters in projection column")
    return OutCol(out_name, ref)


def _parse_colref(sc: _Scanner) -> ColRef:
    name = sc.ident()
    if sc.peek() == ":" and sc.peek(1) != ":" and sc.peek(1) != "=":
        sc.pos += 1
        return ColRef(name, sc.ident())
    return ColRef(None, name)


def _parse_projection(raw: str, offset: int, segment: int, mapping: str) -> Projection:
    halves = _split_top(raw, ";")
    if mapping == "attributegroup":
        if len(halves) > 2:
            raise BadSyntax(f"attributegroup projection has more than one ';' (segment {segment})",
                            segment=segment)
        groups = _parse_outcol_list(halves[0][0], offset + halves[0][1], segment)
        if any(isinstance(o.source, AggCall) for o in groups):
            raise BadSyntax(f"group keys may not be aggregates (segment {segment})",
                            segment=segment)
        outputs = ()
        if len(halves) == 2:
            outputs = _parse_outcol_list(halves[1][0], offset + halves[1][1], segment)
        _check_output_names(tuple(groups) + tuple(outputs), segment)
        return Projection(groups=groups, outputs=outputs)
    if len(halves) > 1:
        raise BadSyntax(f"';' is only valid in attributegroup projections (segment {segment})",
                        segment=segment)
    outputs = _parse_outcol_list(raw, offset, segment)
    _check_output_names(outputs, segment)
    return Projection(groups=None, outputs=outputs)


def _parse_outcol_list(raw: str, offset: int, segment: int) -> tuple[OutCol, ...]:
    if raw == "":
        raise BadSyntax(f"empty projection (segment {segment})", segment=segment)
    return tuple(_parse_outcol(part, offset + off, segment)
                 for part, off in _split_top(raw, ","))


def _check_output_names(outs, segment):
    seen = set()
    for o in outs:
        name = o.output_name()
        if name in seen:
            raise BadSyntax(f"duplicate output column name {name!r} (segment {segment})",
                            segment=segment)
        seen.add(name)


# --- top-level parse -------------------------------------------------------

def _split_path(path_text: str):
    """Split raw path on unencoded '/', tracking each segment's offset."""
    segments, start = [], 0
    for i, c in enumerate(path_text):
        if c == "/":
            segments.append((path_text[start:i], start))
            start = i + 1
    segments.append((path_text[start:], start))
    return segments


def _parse_prefix(segments):
    if len(segments) < 4 or segments[0][0] != "" or segments[1][0] != "ermrest" \
            or segments[2][0] != "catalog":
        raise NotFound("no such resource (expected /ermrest/catalog/...)")
    catalog = decode_atom(segments[3][0], segments[3][1])
    if not catalog:
        raise BadSyntax("empty catalog id", segment=3)
    return catalog


def parse(path_text: str, query_text: str | None = None) -> DataRequestAst:
    """Parse a raw (percent-encoded) data URL path plus query string."""
    segments = _split_path(path_text)
    catalog = _parse_prefix(segments)
    if len(segments) < 5:
        raise NotFound("expected an access mapping segment")
    mapping = segments[4][0]
    if mapping not in MAPPINGS:
        raise NotFound(f"unknown access mapping {mapping!r}")
    data_segs = segments[5:]
    if not data_segs:
        raise BadSyntax("data path requires at least one table element", segment=5)

    # page hints ride on the final segment
    last_raw, last_off = data_segs[-1]
    last_index = len(segments) - 1
    body, sort_text, after_text = _split_suffixes(last_raw, last_off, last_index)
    data_segs = data_segs[:-1] + [(body, last_off)]

    projection = None
    if mapping != "entity":
        if len(data_segs) < 2:
            raise BadSyntax(f"{mapping} URLs require a projection after the path",
                            segment=last_index)
        proj_raw, proj_off = data_segs[-1]
        projection = _parse_projection(proj_raw, proj_off, last_index, mapping)
        data_segs = data_segs[:-1]

    bound: set = set()
    path = []
    for k, (raw, off) in enumerate(data_segs):
        index = 5 + k
        path.append(_parse_element(raw, off, index, bound, first=(k == 0)))

    sort = _parse_sort(*sort_text, last_index) if sort_text else None
    after = _parse_after(*after_text, last_index) if after_text else None
    if after is not None:
        if sort is None:
            raise BadSyntax("@after requires @sort", segment=last_index)
        if len(after) != len(sort):
            raise BadSyntax(
                f"@after arity {len(after)} != @sort arity {len(sort)}",
                segment=last_index)

    limit, accept = _parse_query(query_text)
    return DataRequestAst(catalog=catalog, mapping=mapping, path=tuple(path),
                          projection=projection, sort=sort, after=after,
                          limit=limit, accept=accept)


def _parse_query(query_text: str | None):
    limit = accept = None
    if not query_text:
        return None, None
    seen = set()
    for part in query_text.split("&"):
        if not part:
            raise BadSyntax("empty query parameter")
        if "=" not in part:
            raise BadSyntax(f"query parameter {part!r} lacks a value")
        k, _, v = part.partition("=")
        key = decode_atom(k)
        value = decode_atom(v)
        if key in seen:
            raise BadSyntax(f"duplicate query parameter {key!r}")
        seen.add(key)
        if key == "limit":
            if not value.isdigit() or int(value) < 1:
                raise BadSyntax("limit must be a positive integer")
            limit = int(value)
        elif key == "accept":
            if value not in ("json", "csv"):
                raise BadSyntax(f"accept must be json or csv, not {value!r}")
            accept = value
        else:
            raise BadSyntax(f"unknown query parameter {key!r}")
    return limit, accept


# --- canonical rendering ----------------------------------------------------

def _render_colref(ref: ColRef) -> str:
    if ref.alias is not None:
        return encode_atom(ref.alias) + ":" + encode_atom(ref.column)
    return encode_atom(ref.column)


def _render_leaf(leaf: Leaf) -> str:
    col = "*" if leaf.column == "*" else encode_atom(leaf.column)
    head = (encode_atom(leaf.alias) + ":" + col) if leaf.alias is not None else col
    op = "=" if leaf.op == "=" else f"::{leaf.op}::"
    if leaf.op == "null":
        return head + op
    return head + op + encode_atom(leaf.operand)


def _render_pred(node, parent: str) -> str:
    # parenthesize any combinator under another combinator or negation, so
    # the output re-parses to the identical tree
    if isinstance(node, Leaf):
        return _render_leaf(node)
    if isinstance(node, Not):
        return "!" + _render_pred(node.child, "not")
    if isinstance(node, And):
        text = "&".join(_render_pred(c, "and") for c in node.children)
        return f"({text})" if parent in ("and", "or", "not") else text
    if isinstance(node, Or):
        text = ";".join(_render_pred(c, "or") for c in node.children)
        return f"({text})" if parent in ("and", "or", "not") else text
    raise TypeError(f"not a predicate node: {node!r}")


def _render_element(el) -> str:
    if isinstance(el, ContextReset):
        return "$" + encode_atom(el.alias)
    if isinstance(el, FilterElement):
        return _render_pred(el.predicate, "top")
    if isinstance(el, TableInstance):
        prefix = (encode_atom(el.alias) + ":=") if el.alias is not None else ""
        if el.link is not None:
            d = "" if el.link.direction == "inner" else el.link.direction
            return prefix + d + "(" + ",".join(encode_atom(c) for c in el.link.columns) + ")"
        ref = el.table
        body = encode_atom(ref.name)
        if ref.schema is not None:
            body = encode_atom(ref.schema) + ":" + body
        return prefix + body
    raise TypeError(f"not a path element: {el!r}")


def _render_outcol(o: OutCol) -> str:
    prefix = (encode_atom(o.name) + ":=") if o.name is not None else ""
    src = o.source
    if isinstance(src, AggCall):
        arg = "*" if src.arg is None else _render_colref(src.arg)
        return f"{prefix}{src.fn}({arg})"
    return prefix + _render_colref(src)


def render(ast: DataRequestAst) -> str:
    """Render an AST to its canonical URL text; parse(render(x)) == x."""
    parts = ["/ermrest/catalog/", encode_atom(ast.catalog), "/", ast.mapping]
    for el in ast.path:
        parts.append("/" + _render_element(el))
    if ast.projection is not None:
        proj = ast.projection
        text = ",".join(_render_outcol(o) for o in proj.outputs)
        if proj.groups is not None:
            groups = ",".join(_render_outcol(o) for o in proj.groups)
            text = groups + (";" + text if proj.outputs else "")
        parts.append("/" + text)
    if ast.sort is not None:
        keys = ",".join(encode_atom(k.column) + ("::desc::" if k.descending else "")
                        for k in ast.sort)
        parts.append(f"@sort({keys})")
    if ast.after is not None:
        vals = ",".join("::null::" if v is None else encode_atom(v) for v in ast.after)
        parts.append(f"@after({vals})")
    query = []
    if ast.limit is not None:
        query.append(f"limit={ast.limit}")
    if ast.accept is not None:
        query.append(f"accept={ast.accept}")
    if query:
        parts.append("?" + "&".join(query))
    return "".join(parts)


# --- model URLs ------------------------------------------------------------

def _split_names(raw: str, offset: int) -> tuple[str, ...]:
    parts = []
    start = 0
    for i, c in enumerate(raw + ","):
        if c == ",":
            parts.append(decode_atom(raw[start:i], offset + start))
            start = i + 1
    if any(not p for p in parts):
        raise BadSyntax("empty name in column list")
    return tuple(parts)


def parse_model_url(path_text: str) -> ModelTarget:
    """Parse a /ermrest/catalog/{id}/schema... URL into a typed target."""
    segments = _split_path(path_text)
    catalog = _parse_prefix(segments)
    if len(segments) < 5 or segments[4][0] != "schema":
        raise NotFound("expected a /schema resource")
    rest = segments[5:]

    def dec(i):
        raw, off = rest[i]
        value = decode_atom(raw, off)
        if not value:
            raise BadSyntax(f"empty path segment (segment {5 + i})", segment=5 + i)
        return value

    def target(element, resource, i, container=None):
        """Consume optional comment/annotation sub-resource at position i."""
        if i == len(rest):
            return ModelTarget(catalog, element, resource, container=container)
        word = rest[i][0]
        if resource == "doc" and element.kind in ("schema", "table", "column"):
            if word == "comment" and i + 1 == len(rest):
                return ModelTarget(catalog, element, "comment")
            if word == "annotation":
                if i + 1 == len(rest):
                    return ModelTarget(catalog, element, "annotations")
                if i + 2 == len(rest):
                    return ModelTarget(catalog, element, "annotation",
                                       annotation_key=dec(i + 1))
        raise NotFound(f"no such model resource {word!r}")

    if not rest:
        return ModelTarget(catalog, None, "model")
    schema = dec(0)
    el = ElementPath(kind="schema", schema=schema)
    if len(rest) == 1:
        return target(el, "doc", 1)
    if rest[1][0] != "table":
        return target(el, "doc", 1)  # raises unless comment/annotation
    if len(rest) == 2:
        return ModelTarget(catalog, el, "container", container="table")
    table = dec(2)
    el = ElementPath(kind="table", schema=schema, table=table)
    if len(rest) == 3:
        return ModelTarget(catalog, el, "doc")
    word = rest[3][0]
    if word in ("comment", "annotation"):
        return target(el, "doc", 3)
    if word == "column":
        if len(rest) == 4:
            return ModelTarget(catalog, el, "container", container="column")
        cel = ElementPath(kind="column", schema=schema, table=table, column=dec(4))
        return target(cel, "doc", 5)
    if word == "key":
        if len(rest) == 4:
            return ModelTarget(catalog, el, "container", container="key")
        if len(rest) == 5:
            cols = _split_names(rest[4][0], rest[4][1])
            kel = ElementPath(kind="key", schema=schema, table=table, key_columns=cols)
            return ModelTarget(catalog, kel, "doc")
        raise NotFound("no such model resource under key")
    if word == "foreignkey":
        if len(rest) == 4:
            return ModelTarget(catalog, el, "container", container="fkey")
        cols = _split_names(rest[4][0], rest[4][1])
        if len(rest) != 8 or rest[5][0] != "reference":
            raise NotFound("foreign key URLs are .../foreignkey/{cols}/reference/{s}:{t}/{cols}")
        ref_raw, ref_off = rest[6]
        colon = ref_raw.find(":")
        if colon >= 0:
            ref_schema = decode_atom(ref_raw[:colon], ref_off)
            ref_table = decode_atom(ref_raw[colon + 1:], ref_off + colon + 1)
        else:
            ref_schema = None
            ref_table = decode_atom(ref_raw, ref_off)
        if not ref_table:
            raise BadSyntax("empty referenced table name")
        ref_cols = _split_names(rest[7][0], rest[7][1])
        fel = ElementPath(kind="fkey", schema=schema, table=table, fkey_columns=cols,
                          fkey_ref=(ref_schema, ref_table, ref_cols))
        return ModelTarget(catalog, fel, "doc")
    raise NotFound(f"no such model resource {word!r}")
