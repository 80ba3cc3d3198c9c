"""Resolves parsed data requests against a model snapshot into executable
plans.

Planning is pure: a plan holds references into an immutable model snapshot
plus fully typed predicates (operands parsed per column type, wildcards
expanded, regexes compiled), so the engine never touches raw URL text.

Semantics pinned here:
  - every join derives from exactly one foreign key; implicit links
    require a unique constraint between the two tables, endpoint links
    name the columns of either side of one.
  - the filter is evaluated over the join product as a whole.
  - entity output is the distinct whole rows of the target when the path
    joins; attribute projects per product row; attributegroup groups by
    its key outputs; aggregate reduces everything to exactly one row.
  - ordering is totalized with the target's first declared key as an
    implicit ascending tie-break; nulls sort last ascending, first
    descending; @after is a strict row-constructor comparison over the
    explicit sort keys.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace as _dc_replace

from . import coltypes, urls
from .errors import MethodNotAllowed, NotFound, ValidationError
from .model import ErmModel, Table


# --- plan structures --------------------------------------------------------

@dataclass(frozen=True)
class Join:
    kind: str  # inner | left | right | full
    parent: int
    pairs: tuple[tuple[str, str], ...]  # (parent column, own column)


@dataclass(frozen=True)
class Instance:
    index: int
    alias: str | None
    table: Table
    join: Join | None  # None for the root


@dataclass(frozen=True)
class TLeaf:
    instance: int
    column: str
    typename: str
    op: str
    value: object = None
    pattern: object = None          # compiled regex for regexp/ciregexp
    words: tuple[str, ...] = ()     # stemmed operand words for ts


@dataclass(frozen=True)
class TNot:
    child: object


@dataclass(frozen=True)
class TAnd:
    children: tuple


@dataclass(frozen=True)
class TOr:
    children: tuple


@dataclass(frozen=True)
class PlanOut:
    name: str
    kind: str  # col | agg
    instance: int | None = None
    column: str | None = None
    fn: str | None = None
    typename: str | None = None      # output type
    arg_typename: str | None = None  # aggregate argument's column type


@dataclass(frozen=True)
class OrderKey:
    out_index: int | None  # explicit keys address outputs
    instance: int | None = None  # hidden tie-break keys address raw columns
    column: str | None = None
    descending: bool = False
    typename: str | None = None


@dataclass(frozen=True)
class QueryPlan:
    mapping: str
    instances: tuple[Instance, ...]
    predicate: object | None
    target: int
    outputs: tuple[PlanOut, ...]
    group_count: int | None  # attributegroup: leading outputs are group keys
    distinct: bool
    order: tuple[OrderKey, ...]
    explicit_order: int
    after: tuple | None
    limit: int | None


@dataclass(frozen=True)
class MutationPlan:
    kind: str  # entity_insert | entity_update | entity_delete | attribute_clear | group_update
    schema: str
    table: str
    payload_columns: tuple[str, ...] = ()
    correlation: tuple[tuple[str, str], ...] = ()  # (payload name, target column)
    assignments: tuple[tuple[str, str], ...] = ()  # (payload name, target column)
    select: QueryPlan | None = None


# --- path resolution --------------------------------------------------------

class _Scope:
    def __init__(self, model: ErmModel):
        self.model = model
        self.instances: list[Instance] = []
        self.aliases: dict[str, int] = {}
        self.context: int = -1

    def add(self, alias, table, join):
        inst = Instance(index=len(self.instances), alias=alias, table=table, join=join)
        self.instances.append(inst)
        if alias is not None:
            self.aliases[alias] = inst.index
        self.context = inst.index
        return inst

    def instance_of(self, alias: str) -> Instance:
        if alias not in self.aliases:
            raise NotFound(f"unbound table alias {alias!r}")
        return self.instances[self.aliases[alias]]

    def current(self) -> Instance:
        return self.instances[self.context]


def _table_key(t: Table):
    return (t.schema_name, t.name)


def _fkey_desc(owner: Table, f) -> str:
    return (f"({','.join(f.columns)}) of {owner.schema_name}:{owner.name} -> "
            f"{f.ref_schema}:{f.ref_table}({','.join(f.ref_columns)})")


def _implicit_candidates(model: ErmModel, ctx: Table, new: Table):
    """Foreign keys relating two tables, in either direction."""
    out = []
    for f in new.foreign_keys:
        if (f.ref_schema, f.ref_table) == _table_key(ctx):
            # new table is the referring side
            out.append((f, tuple(zip(f.ref_columns, f.columns)), new, _fkey_desc(new, f)))
    for f in ctx.foreign_keys:
        if (f.ref_schema, f.ref_table) == _table_key(new):
            out.append((f, tuple(zip(f.columns, f.ref_columns)), ctx, _fkey_desc(ctx, f)))
    return out


def _endpoint_candidates(model: ErmModel, ctx: Table, cols: tuple[str, ...]):
    """Resolve endpoint columns naming one side of a foreign key touching ctx.

    Returns (new_table, pairs, description) candidates where pairs are
    (context column, new-instance column).
    """
    out = []
    seen = set()

    def add(owner, f, new_table, pairs):
        sig = (_table_key(owner), f.columns, f.ref_schema, f.ref_table, f.ref_columns,
               _table_key(new_table), pairs)
        if sig in seen:
            return
        seen.add(sig)
        out.append((new_table, pairs, _fkey_desc(owner, f)))

    ctx_key = _table_key(ctx)
    for owner in model.all_tables():
        for f in owner.foreign_keys:
            ref_key = (f.ref_schema, f.ref_table)
            if tuple(f.columns) == cols or tuple(f.ref_columns) == cols:
                if _table_key(owner) == ctx_key:
                    # outbound: context holds the foreign key
                    ref = model.table(f.ref_schema, f.ref_table)
                    add(owner, f, ref, tuple(zip(f.columns, f.ref_columns)))
                if ref_key == ctx_key:
                    # inbound: context is the referenced table
                    add(owner, f, owner, tuple(zip(f.ref_columns, f.columns)))
    return out


def resolve_path(ast: urls.DataRequestAst, model: ErmModel) -> _Scope:
    """Build the join scope for a parsed path; raises on unrelated tables,
    ambiguous links, and unbound aliases."""
    scope = _Scope(model)
    for el in ast.path:
        if isinstance(el, urls.ContextReset):
            scope.context = scope.instance_of(el.alias).index
        elif isinstance(el, urls.FilterElement):
            if scope.context < 0:
                raise ValidationError("filter before any table element")
        elif isinstance(el, urls.TableInstance):
            if scope.context < 0:
                table = model.resolve_table(el.table.schema, el.table.name)
                scope.add(el.alias, table, None)
                continue
            ctx = scope.current()
            if el.link is not None:
                cands = _endpoint_candidates(model, ctx.table, el.link.columns)
                if not cands:
                    raise NotFound(
                        f"no foreign key with endpoint ({','.join(el.link.columns)}) "
                        f"relates to {ctx.table.schema_name}:{ctx.table.name}")
                if len(cands) > 1:
                    descs = "; ".join(sorted(d for _, _, d in cands))
                    raise ValidationError(
                        f"endpoint ({','.join(el.link.columns)}) is ambiguous among "
                        f"foreign keys: {descs}")
                new_table, pairs, _ = cands[0]
                join = Join(kind=el.link.direction, parent=ctx.index, pairs=pairs)
                scope.add(el.alias, new_table, join)
            else:
                new_table = model.resolve_table(el.table.schema, el.table.name)
                cands = _implicit_candidates(model, ctx.table, new_table)
                if not cands:
                    raise NotFound(
                        f"tables {ctx.table.schema_name}:{ctx.table.name} and "
                        f"{new_table.schema_name}:{new_table.name} are not related "
                        f"by any foreign key")
                if len(cands) > 1:
                    descs = "; ".join(sorted(d for _, _, _, d in cands))
                    raise ValidationError(
                        f"more than one foreign key relates "
                        f"{ctx.table.schema_name}:{ctx.table.name} and "
                        f"{new_table.schema_name}:{new_table.name}; "
                        f"name an endpoint to choose among: {descs}")
                _, pairs, _, _ = cands[0]
                join = Join(kind="inner", parent=ctx.index, pairs=pairs)
                scope.add(el.alias, new_table, join)
        else:
            raise ValidationError(f"unknown path element {el!r}")
    return scope


# --- predicate typing -------------------------------------------------------

_BACKREF = re.compile(r"\\[1-9]|\(\?P=")


def _compile_pattern(op: str, operand: str) -> re.Pattern:
    if _BACKREF.search(operand):
        raise ValidationError("backreferences are not supported in patterns")
    flags = re.IGNORECASE if op == "ciregexp" else 0
    try:
        return re.compile(operand, flags)
    except re.error as e:
        raise ValidationError(f"invalid pattern {operand!r}: {e}")


_STEM_RULES = (("ies", "y", 4), ("sses", "ss", 5), ("es", "", 4),
               ("ing", "", 6), ("ed", "", 5))


def stem(word: str) -> str:
    w = word.lower()
    for suffix, repl, minlen in _STEM_RULES:
        if w.endswith(suffix) and len(w) >= minlen:
            return w[:-len(suffix)] + repl
    if w.endswith("s") and not w.endswith("ss") and len(w) >= 4:
        return w[:-1]
    return w


_WORDS = re.compile(r"\w+", re.UNICODE)


def stem_words(text: str) -> tuple[str, ...]:
    return tuple(stem(w) for w in _WORDS.findall(text))


def _type_leaf(leaf: urls.Leaf, scope: _Scope, ctx_index: int):
    if leaf.alias is not None:
        inst = scope.instance_of(leaf.alias)
    else:
        inst = scope.instances[ctx_index]
    if leaf.column == "*":
        # wildcard: the disjunction of this pattern over all text columns
        children = tuple(
            _typed_pattern(inst.index, c.name, leaf.op, leaf.operand)
            for c in inst.table.columns if c.type == "text")
        if not children:
            return TOr(())
        if len(children) == 1:
            return children[0]
        return TOr(children)
    col = inst.table.column(leaf.column)
    if leaf.op == "null":
        return TLeaf(inst.index, col.name, col.type, "null")
    if leaf.op in urls.TEXT_PATTERN_OPS:
        if col.type != "text":
            raise ValidationError(
                f"text-pattern operator ::{leaf.op}:: requires a text column, "
                f"not {col.name} ({col.type})")
        return _typed_pattern(inst.index, col.name, leaf.op, leaf.operand)
    if leaf.op != "=" and col.type not in coltypes.ORDERED_TYPES:
        raise ValidationError(f"type {col.type} has no ordering for ::{leaf.op}::")
    value = coltypes.parse_literal(col.type, leaf.operand)
    return TLeaf(inst.index, col.name, col.type, leaf.op, value=value)


def _typed_pattern(instance: int, column: str, op: str, operand: str):
    if op == "ts":
        return TLeaf(instance, column, "text", "ts", value=operand,
                     words=stem_words(operand))
    return TLeaf(instance, column, "text", op, value=operand,
                 pattern=_compile_pattern(op, operand))


def _type_tree(node, scope: _Scope, ctx_index: int):
    if isinstance(node, urls.Leaf):
        return _type_leaf(node, scope, ctx_index)
    if isinstance(node, urls.Not):
        return TNot(_type_tree(node.child, scope, ctx_index))
    if isinstance(node, urls.And):
        return TAnd(tuple(_type_tree(c, scope, ctx_index) for c in node.children))
    if isinstance(node, urls.Or):
        return TOr(tuple(_type_tree(c, scope, ctx_index) for c in node.children))
    raise ValidationError(f"unknown predicate node {node!r}")


def _typed_predicate(ast: urls.DataRequestAst, scope: _Scope):
    """Conjunction of every filter element, each typed at its path position."""
    parts = []
    next_instance = 0
    ctx_index = -1
    for el in ast.path:
        if isinstance(el, urls.TableInstance):
            ctx_index = next_instance
            next_instance += 1
        elif isinstance(el, urls.ContextReset):
            ctx_index = scope.instance_of(el.alias).index
        elif isinstance(el, urls.FilterElement):
            parts.append(_type_tree(el.predicate, scope, ctx_index))
    if not parts:
        return None
    if len(parts) == 1:
        return parts[0]
    return TAnd(tuple(parts))


# --- projection and ordering -------------------------------------------------

_AGG_STAR_OK = ("cnt",)


def _resolve_colref(ref: urls.ColRef, scope: _Scope, target: int):
    inst = scope.instance_of(ref.alias) if ref.alias is not None else scope.instances[target]
    col = inst.table.column(ref.column)
    return inst, col


def _plan_out(out: urls.OutCol, scope: _Scope, target: int, mapping: str) -> PlanOut:
    src = out.source
    if isinstance(src, urls.AggCall):
        if mapping == "attribute":
            raise ValidationError("aggregate functions require the aggregate or "
                                  "attributegroup mapping")
        if src.arg is None:
            if src.fn not in _AGG_STAR_OK:
                raise ValidationError(f"{src.fn}(*) is not defined; name a column")
            return PlanOut(name=out.output_name(), kind="agg", fn="cnt", typename="int8")
        inst, col = _resolve_colref(src.arg, scope, target)
        if src.fn in ("cnt", "cnt_d"):
            rtype = "int8"
        elif src.fn in ("min", "max"):
            if col.type not in coltypes.ORDERED_TYPES:
                raise ValidationError(f"{src.fn}() over {col.type} has no ordering")
            rtype = col.type
        elif src.fn == "array":
            rtype = "json"
        else:
            raise ValidationError(f"unknown aggregate function {src.fn!r}")
        return PlanOut(name=out.output_name(), kind="agg", instance=inst.index,
                       column=col.name, fn=src.fn, typename=rtype,
                       arg_typename=col.type)
    inst, col = _resolve_colref(src, scope, target)
    return PlanOut(name=out.output_name(), kind="col", instance=inst.index,
                   column=col.name, typename=col.type)


def _entity_outputs(scope: _Scope, target: int) -> tuple[PlanOut, ...]:
    t = scope.instances[target].table
    return tuple(PlanOut(name=c.name, kind="col", instance=target, column=c.name,
                         typename=c.type)
                 for c in t.columns)


def _resolve_order(ast, outputs, group_count, scope, target, mapping):
    by_name = {o.name: i for i, o in enumerate(outputs)}
    order: list[OrderKey] = []
    seen_outs = set()
    for key in (ast.sort or ()):
        if key.column not in by_name:
            raise ValidationError(f"sort key {key.column!r} is not an output column")
        i = by_name[key.column]
        out = outputs[i]
        if out.typename not in coltypes.ORDERED_TYPES:
            raise ValidationError(f"sort key {key.column!r} has unorderable type "
                                  f"{out.typename}")
        order.append(OrderKey(out_index=i, descending=key.descending,
                              typename=out.typename))
        seen_outs.add(i)
    explicit = len(order)
    if order:
        # implicit tie-break for a deterministic, pageable total order
        if mapping == "attributegroup":
            for i in range(group_count):
                if i not in seen_outs and outputs[i].typename in coltypes.ORDERED_TYPES:
                    order.append(OrderKey(out_index=i, typename=outputs[i].typename))
        elif mapping in ("entity", "attribute"):
            t = scope.instances[target].table
            if t.keys:
                for cname in t.keys[0].columns:
                    col = t.column(cname)
                    if col.type not in coltypes.ORDERED_TYPES:
                        continue
                    if mapping == "entity":
                        i = by_name[cname]
                        if i in seen_outs:
                            continue
                        order.append(OrderKey(out_index=i, typename=col.type))
                    else:
                        order.append(OrderKey(out_index=None, instance=target,
                                              column=cname, typename=col.type))
    return tuple(order), explicit


def _typed_after(ast, order, explicit):
    if ast.after is None:
        return None
    values = []
    for raw, key in zip(ast.after, order[:explicit]):
        if raw is None:
            values.append(None)
        else:
            values.append(coltypes.parse_literal(key.typename, raw))
    return tuple(values)


def plan_retrieval(ast: urls.DataRequestAst, model: ErmModel) -> QueryPlan:
    scope = resolve_path(ast, model)
    predicate = _typed_predicate(ast, scope)
    target = scope.context
    mapping = ast.mapping

    group_count = None
    if mapping == "entity":
        outputs = _entity_outputs(scope, target)
    elif mapping == "attribute":
        outputs = tuple(_plan_out(o, scope, target, mapping)
                        for o in ast.projection.outputs)
    elif mapping == "aggregate":
        outputs = tuple(_plan_out(o, scope, target, mapping)
                        for o in ast.projection.outputs)
    elif mapping == "attributegroup":
        groups = tuple(_plan_out(o, scope, target, mapping)
                       for o in ast.projection.groups)
        aggs = tuple(_plan_out(o, scope, target, mapping)
                     for o in ast.projection.outputs)
        outputs = groups + aggs
        group_count = len(groups)
    else:
        raise ValidationError(f"unknown mapping {mapping!r}")

    order, explicit = _resolve_order(ast, outputs, group_count, scope, target, mapping)
    after = _typed_after(ast, order, explicit)
    distinct = mapping == "entity" and len(scope.instances) > 1
    return QueryPlan(mapping=mapping, instances=tuple(scope.instances),
                     predicate=predicate, target=target, outputs=outputs,
                     group_count=group_count, distinct=distinct, order=order,
                     explicit_order=explicit, after=after, limit=ast.limit)


# --- mutation planning --------------------------------------------------------

_RETRIEVAL_METHODS = {"GET"}


def payload_type_map(ast: urls.DataRequestAst, model: ErmModel, method: str) -> dict[str, str]:
    """Column name -> typename map used to decode a mutation payload."""
    if ast.mapping == "entity":
        first = ast.path[0]
        table = model.resolve_table(first.table.schema, first.table.name)
        return {c.name: c.type for c in table.columns}
    if ast.mapping == "attributegroup":
        scope = resolve_path(ast, model)
        target = scope.context
        out = {}
        for o in tuple(ast.projection.groups) + tuple(ast.projection.outputs):
            if isinstance(o.source, urls.AggCall):
                raise ValidationError("aggregates cannot be update targets")
            _, col = _resolve_colref(o.source, scope, target)
            out[o.output_name()] = col.type
        return out
    raise MethodNotAllowed(f"{ast.mapping} URLs do not accept {method}",
                           allowed=_allowed_for(ast.mapping))


def _allowed_for(mapping: str):
    return {
        "entity": ("GET", "POST", "PUT", "DELETE"),
        "attribute": ("GET", "DELETE"),
        "attributegroup": ("GET", "PUT"),
        "aggregate": ("GET",),
    }[mapping]


def _single_element_target(ast, model, method) -> Table:
    if len(ast.path) != 1 or not isinstance(ast.path[0], urls.TableInstance) \
            or ast.path[0].link is not None:
        raise MethodNotAllowed(
            f"{method} requires a single-table path without filters or joins",
            allowed=("GET", "DELETE"))
    first = ast.path[0]
    return model.resolve_table(first.table.schema, first.table.name)


def _reject_page_hints(ast):
    if ast.sort is not None or ast.after is not None or ast.limit is not None:
        raise ValidationError("sort and paging apply only to retrieval")


def plan_mutation(ast: urls.DataRequestAst, model: ErmModel, method: str,
                  payload_header: tuple[str, ...] | None) -> MutationPlan:
    mapping = ast.mapping
    allowed = _allowed_for(mapping)
    if method not in allowed:
        raise MethodNotAllowed(f"{mapping} URLs do not accept {method}", allowed=allowed)
    _reject_page_hints(ast)

    if mapping == "entity" and method in ("POST", "PUT"):
        table = _single_element_target(ast, model, method)
        cols = table.column_map()
        header = tuple(payload_header or ())
        for name in header:
            if name not in cols:
                raise ValidationError(f"unknown payload column {name!r}")
        assignments = tuple((name, name) for name in header)
        if method == "POST":
            return MutationPlan(kind="entity_insert", schema=table.schema_name,
                                table=table.name, payload_columns=header,
                                assignments=assignments)
        present = set(header)
        correlation = None
        for key in table.keys:
            if set(key.columns) <= present:
                correlation = tuple((c, c) for c in key.columns)
                break
        if correlation is None:
            raise ValidationError(
                "entity update requires the payload to include a complete "
                "declared key of the target table")
        return MutationPlan(kind="entity_update", schema=table.schema_name,
                            table=table.name, payload_columns=header,
                            correlation=correlation, assignments=assignments)

    if mapping == "entity" and method == "DELETE":
        select = plan_retrieval(_dc_replace(ast, sort=None, after=None, limit=None), model)
        t = select.instances[select.target].table
        return MutationPlan(kind="entity_delete", schema=t.schema_name, table=t.name,
                            select=select)

    if mapping == "attribute" and method == "DELETE":
        entity_ast = _dc_replace(ast, mapping="entity", projection=None,
                                 sort=None, after=None, limit=None)
        select = plan_retrieval(entity_ast, model)
        scope = resolve_path(ast, model)
        target = scope.context
        t = scope.instances[target].table
        assignments = []
        for o in ast.projection.outputs:
            if isinstance(o.source, urls.AggCall):
                raise ValidationError("aggregates cannot be cleared")
            inst, col = _resolve_colref(o.source, scope, target)
            if inst.index != target:
                raise ValidationError(
                    f"cannot clear column {col.name!r} of a joined table; "
                    f"clears apply to the path context table only")
            assignments.append((o.output_name(), col.name))
        return MutationPlan(kind="attribute_clear", schema=t.schema_name, table=t.name,
                            assignments=tuple(assignments), select=select)

    # attributegroup PUT
    table = _single_element_target(ast, model, method)
    scope = resolve_path(ast, model)
    target = scope.context
    groups, assigns = [], []
    for o in ast.projection.groups:
        if isinstance(o.source, urls.AggCall):
            raise ValidationError("group keys may not be aggregates")
        inst, col = _resolve_colref(o.source, scope, target)
        groups.append((o.output_name(), col.name))
    group_cols = {c for _, c in groups}
    for o in ast.projection.outputs:
        if isinstance(o.source, urls.AggCall):
            raise ValidationError("aggregates cannot be update targets")
        inst, col = _resolve_colref(o.source, scope, target)
        if col.name in group_cols:
            raise ValidationError(f"assignment column {col.name!r} repeats a group key")
        assigns.append((o.output_name(), col.name))
    expected = {name for name, _ in groups} | {name for name, _ in assigns}
    header = set(payload_header or ())
    if header != expected:
        raise ValidationError(
            "attributegroup update payload columns %s do not match the "
            "projection outputs %s" % (sorted(header), sorted(expected)))
    return MutationPlan(kind="group_update", schema=table.schema_name, table=table.name,
                        payload_columns=tuple(payload_header or ()),
                        correlation=tuple(groups), assignments=tuple(assigns))


# --- explain -----------------------------------------------------------------

_JOIN_NAMES = {"inner": "inner", "left": "left_outer", "right": "right_outer",
               "full": "full_outer"}


def _inst_name(inst: Instance) -> str:
    return inst.alias if inst.alias is not None else inst.table.name


def _explain_pred(node, instances) -> str:
    if isinstance(node, TLeaf):
        head = f"{_inst_name(instances[node.instance])}:{node.column}"
        if node.op == "null":
            return head + "::null::"
        if node.op == "=":
            op = "="
        else:
            op = f"::{node.op}::"
        if node.op in ("regexp", "ciregexp", "ts"):
            rendered = node.value
        else:
            rendered = coltypes.render_literal(node.typename, node.value)
        return head + op + rendered
    if isinstance(node, TNot):
        return "!(" + _explain_pred(node.child, instances) + ")"
    if isinstance(node, TAnd):
        return "(" + "&".join(_explain_pred(c, instances) for c in node.children) + ")"
    if isinstance(node, TOr):
        return "(" + ";".join(_explain_pred(c, instances) for c in node.children) + ")"
    raise TypeError(node)


def explain(plan: QueryPlan) -> str:
    """Deterministic, whitespace-normalized text form of a plan."""
    lines = [f"{plan.mapping} target={_inst_name(plan.instances[plan.target])}"]
    for inst in plan.instances:
        if inst.join is None:
            lines.append(f"scan({inst.table.name},alias={_inst_name(inst)})")
        else:
            parent = plan.instances[inst.join.parent]
            on = ",".join(f"{p}={c}" for p, c in inst.join.pairs)
            lines.append(f"{_JOIN_NAMES[inst.join.kind]}({parent.table.name},"
                         f"{inst.table.name},on {on})")
    if plan.predicate is not None:
        lines.append(f"filter({_explain_pred(plan.predicate, plan.instances)})")
    if plan.distinct:
        lines.append("distinct")
    if plan.group_count is not None:
        keys = ",".join(o.name for o in plan.outputs[:plan.group_count])
        lines.append(f"group({keys})")
    outs = []
    for o in plan.outputs:
        if o.kind == "agg":
            arg = "*" if o.column is None else f"{_inst_name(plan.instances[o.instance])}:{o.column}"
            outs.append(f"{o.name}:={o.fn}({arg})")
        else:
            outs.append(f"{o.name}:={_inst_name(plan.instances[o.instance])}:{o.column}")
    lines.append(f"project({','.join(outs)})")
    if plan.order:
        keys = []
        for k in plan.order:
            name = plan.outputs[k.out_index].name if k.out_index is not None \
                else f"{_inst_name(plan.instances[k.instance])}:{k.column}"
            keys.append(name + ("::desc::" if k.descending else ""))
        lines.append(f"sort({','.join(keys)})")
    if plan.after is not None or plan.limit is not None:
        after = "" if plan.after is None else ",".join(
            "null" if v is None else coltypes.render_literal(plan.order[i].typename, v)
            for i, v in enumerate(plan.after))
        lines.append(f"window(after=[{after}],limit="
                     f"{'none' if plan.limit is None else plan.limit})")
    return "\n".join(lines)
