"""Random retrieval-URL generator over the randomized-suite fixture model.

Generates DataRequestAst values that are valid by construction (resolvable
links, type-correct operands, unique output names, totalizing sorts) and
renders them to URL text with the canonical renderer.
"""
from __future__ import annotations

import random

from ercatalog import coltypes, urls

# (table, columns with types, declared key)
COLS = {
    "A": [("id", "int8"), ("name", "text"), ("flag", "boolean"), ("score", "float8"),
          ("born", "date"), ("ts", "timestamptz"), ("meta", "json")],
    "B": [("id", "int8"), ("a_id", "int8"), ("label", "text"), ("qty", "int8")],
    "C": [("id", "int8"), ("b_id", "int8"), ("note", "text"), ("at", "timestamptz")],
    "D": [("id", "int8"), ("d_a_id", "int8"), ("owner_id", "int8"), ("tag", "text")],
}

# implicit-joinable neighbors (unique foreign key between the pair)
IMPLICIT = {
    "A": ["B"],
    "B": ["A", "C"],
    "C": ["B"],
    "D": [],
}

# endpoint spellings usable from each context table: (columns, other table)
ENDPOINTS = {
    "A": [(("d_a_id",), "D"), (("owner_id",), "D"), (("a_id",), "B")],
    "B": [(("a_id",), "A"), (("b_id",), "C")],
    "C": [(("b_id",), "B")],
    "D": [(("d_a_id",), "A"), (("owner_id",), "A")],
}

WORDS = ("alpha", "beta", "gamma", "delta", "omega", "probe", "scans",
         "tested", "testing", "running", "ran", "cells", "cell", "fish")


class QueryGen:
    def __init__(self, rows_by_table: dict, seed=0):
        self.rng = random.Random(seed)
        self.rows = rows_by_table

    # -- helpers ---------------------------------------------------------------

    def _sample_value(self, table, column, typename):
        pool = [r[column] for r in self.rows[table] if r.get(column) is not None]
        if pool and self.rng.random() < 0.8:
            value = self.rng.choice(pool)
            return coltypes.render_literal(typename, coltypes.from_json(typename, value))
        fallback = {
            "int8": lambda: str(self.rng.randint(0, 120)),
            "float8": lambda: repr(round(self.rng.uniform(-5, 5), 2)),
            "boolean": lambda: self.rng.choice(["true", "false"]),
            "date": lambda: f"20{self.rng.randint(10, 24)}-06-15",
            "timestamptz": lambda: "2016-06-15T12:00:00+00:00",
            "text": lambda: self.rng.choice(WORDS),
            "json": lambda: self.rng.choice(['{"k":1}', "[1,2]", '"plain"', "true"]),
        }[typename]
        return fallback()

    def _leaf(self, scope, context):
        # unqualified references resolve against the current path context
        qualified = [s for s in scope if s[0] is not None]
        if qualified and self.rng.random() < 0.3:
            alias, table = self.rng.choice(qualified)
        else:
            alias, table = None, context
        if self.rng.random() < 0.08:
            return urls.Leaf(alias, "*", "ciregexp", self.rng.choice(WORDS))
        column, typename = self.rng.choice(COLS[table])
        ops = {
            "text": ("=", "null", "regexp", "ciregexp", "ts"),
            "int8": ("=", "lt", "leq", "gt", "geq", "null"),
            "float8": ("=", "lt", "leq", "gt", "geq", "null"),
            "date": ("=", "lt", "leq", "gt", "geq", "null"),
            "timestamptz": ("=", "lt", "leq", "gt", "geq", "null"),
            "boolean": ("=", "null"),
            "json": ("=", "null"),
        }[typename]
        op = self.rng.choice(ops)
        if op == "null":
            return urls.Leaf(alias, column, "null", None)
        if op in ("regexp", "ciregexp", "ts"):
            return urls.Leaf(alias, column, op, self.rng.choice(WORDS))
        return urls.Leaf(alias, column, op, self._sample_value(table, column, typename))

    def _tree(self, scope, leaves_left, context):
        n = self.rng.randint(1, min(2, leaves_left))
        nodes = [self._leaf(scope, context) for _ in range(n)]
        if len(nodes) == 1:
            node = nodes[0]
        else:
            node = self.rng.choice((urls.And, urls.Or))(tuple(nodes))
        if self.rng.random() < 0.15:
            node = urls.Not(node)
        return node, n

    # -- path ------------------------------------------------------------------

    def _path(self, max_joins=3, max_filter_leaves=4):
        root = self.rng.choice(list(COLS))
        alias_n = 0
        elements = []
        scope = []

        def bind():
            nonlocal alias_n
            if self.rng.random() < 0.35:
                alias_n += 1
                return f"t{alias_n}"
            return None

        a = bind()
        elements.append(urls.TableInstance(alias=a, table=urls.TableRef(None, root)))
        scope.append((a, root))
        context = root

        joins = self.rng.randint(0, max_joins)
        leaves_left = self.rng.randint(0, max_filter_leaves)
        for _ in range(joins):
            if leaves_left and self.rng.random() < 0.4:
                tree, used = self._tree(scope, leaves_left, context)
                elements.append(urls.FilterElement(tree))
                leaves_left -= used
            aliased = [s for s in scope if s[0] is not None]
            if len(scope) > 1 and aliased and self.rng.random() < 0.2:
                alias, table = self.rng.choice(aliased)
                elements.append(urls.ContextReset(alias))
                context = table
            use_endpoint = self.rng.random() < 0.4 or not IMPLICIT[context]
            a = bind()
            if use_endpoint and ENDPOINTS[context]:
                cols, other = self.rng.choice(ENDPOINTS[context])
                direction = self.rng.choice(
                    ["inner", "inner", "inner", "left", "right", "full"])
                elements.append(urls.TableInstance(
                    alias=a, table=None, link=urls.Endpoint(direction, cols)))
                scope.append((a, other))
                context = other
            elif IMPLICIT[context]:
                other = self.rng.choice(IMPLICIT[context])
                elements.append(urls.TableInstance(
                    alias=a, table=urls.TableRef(None, other)))
                scope.append((a, other))
                context = other
        while leaves_left > 0 and self.rng.random() < 0.6:
            tree, used = self._tree(scope, leaves_left, context)
            elements.append(urls.FilterElement(tree))
            leaves_left -= used
        return tuple(elements), scope, context

    # -- projections -------------------------------------------------------------

    def _pick_col(self, scope, context, ordered_only=False):
        qualified = [s for s in scope if s[0] is not None]
        if qualified and self.rng.random() < 0.4:
            alias, table = self.rng.choice(qualified)
        else:
            alias, table = None, context
        choices = [(c, t) for c, t in COLS[table]
                   if not ordered_only or t in coltypes.ORDERED_TYPES]
        column, typename = self.rng.choice(choices)
        return urls.ColRef(alias, column), typename

    def _outcols(self, scope, context, n, used_names, allow_agg, agg_only=False):
        outs = []
        for _ in range(n):
            if allow_agg and (agg_only or self.rng.random() < 0.6):
                fn = self.rng.choice(("cnt", "cnt", "cnt_d", "min", "max", "array"))
                if fn == "cnt" and self.rng.random() < 0.5:
                    arg, name_hint = None, "cnt"
                else:
                    ref, typename = self._pick_col(
                        scope, context, ordered_only=fn in ("min", "max"))
                    arg, name_hint = ref, f"{fn}_{ref.column}"
                name = self._fresh(name_hint, used_names)
                outs.append(urls.OutCol(name, urls.AggCall(fn, arg)))
            else:
                ref, typename = self._pick_col(scope, context)
                name = ref.column
                if name in used_names or self.rng.random() < 0.3:
                    name = self._fresh(f"o_{ref.column}", used_names)
                    outs.append(urls.OutCol(name, ref))
                else:
                    used_names.add(name)
                    outs.append(urls.OutCol(None, ref))
        return outs

    def _fresh(self, hint, used):
        name = hint
        i = 1
        while name in used:
            i += 1
            name = f"{hint}{i}"
        used.add(name)
        return name

    # -- whole queries ---------------------------------------------------------------

    def gen(self, catalog="1"):
        path, scope, context = self._path()
        mapping = self.rng.choices(
            ("entity", "attribute", "attributegroup", "aggregate"),
            weights=(35, 30, 20, 15))[0]
        projection = None
        used = set()
        sortable = []    # (output name, typename) candidates
        totalizers = []  # output names a paging client would append

        if mapping == "entity":
            sortable = [(c, t) for c, t in COLS[context] if t in coltypes.ORDERED_TYPES]
            totalizers = ["id"]
        elif mapping == "attribute":
            outs = self._outcols(scope, context, self.rng.randint(1, 4), used,
                                 allow_agg=False)
            # sorted attribute queries carry the target key for totality
            if self.rng.random() < 0.7:
                totalizers = [self._ensure_key_out(outs, used, context)]
            projection = urls.Projection(groups=None, outputs=tuple(outs))
            sortable = self._out_types(outs, scope, context)
        elif mapping == "attributegroup":
            groups = self._outcols(scope, context, self.rng.randint(1, 2), used,
                                   allow_agg=False)
            aggs = self._outcols(scope, context, self.rng.randint(0, 2), used,
                                 allow_agg=True)
            projection = urls.Projection(groups=tuple(groups), outputs=tuple(aggs))
            sortable = self._out_types(groups, scope, context)
            totalizers = [name for name, _ in sortable]
        else:
            outs = self._outcols(scope, context, self.rng.randint(1, 3), used,
                                 allow_agg=True, agg_only=self.rng.random() < 0.7)
            projection = urls.Projection(groups=None, outputs=tuple(outs))

        sort = None
        if mapping != "aggregate" and sortable and self.rng.random() < 0.55:
            picks = self.rng.sample(sortable, k=min(len(sortable),
                                                    self.rng.randint(1, 2)))
            keys = [urls.SortKey(name, self.rng.random() < 0.4) for name, _ in picks]
            # totalize client side, the way paging clients do
            for name in totalizers:
                if not any(k.column == name for k in keys):
                    keys.append(urls.SortKey(name, False))
            sort = tuple(keys)

        limit = self.rng.randint(1, 50) if self.rng.random() < 0.3 else None
        return urls.DataRequestAst(
            catalog=catalog, mapping=mapping, path=path, projection=projection,
            sort=sort, after=None, limit=limit, accept=None)

    def _ensure_key_out(self, outs, used, context):
        for o in outs:
            if o.source.alias is None and o.source.column == "id":
                return o.output_name()
        name = "id" if "id" not in used else self._fresh("o_id", used)
        if name == "id":
            used.add(name)
            outs.append(urls.OutCol(None, urls.ColRef(None, "id")))
        else:
            outs.append(urls.OutCol(name, urls.ColRef(None, "id")))
        return name

    def _out_types(self, outs, scope, context):
        by_alias = {s[0]: s[1] for s in scope if s[0] is not None}
        result = []
        for o in outs:
            src = o.source
            table = by_alias.get(src.alias, context) if src.alias else context
            typename = dict(COLS[table])[src.column]
            if typename in coltypes.ORDERED_TYPES:
                result.append((o.output_name(), typename))
        return result
