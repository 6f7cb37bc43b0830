"""Embedded relational store: typed row storage and query evaluation.

Values are Python natives: str (text), int/float (number), naive UTC
datetime (time), bool (boolean), None (null).  Evaluation semantics:

* integer comparisons are exact; floats compare with relative tolerance
  1e-9 (abs 1e-12); comparisons involving null or incompatible types are
  false;
* a time column compares against ISO-8601 string literals;
* aggregates skip nulls, COUNT(*) counts rows, empty aggregates yield
  null (COUNT yields 0);
* result rows keep a deterministic evaluation order but are semantically
  unordered unless the query has ORDER BY.

Writes take the database lock; ``execute`` works on a snapshot taken under
the lock, so one writer and many concurrent readers are safe.
"""

from __future__ import annotations

import math
import threading
import time as _time
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Iterable, Sequence

from . import sql as _sql
from .errors import (
    ArityMismatch,
    ParseError,
    QueryTimeout,
    TypeMismatch,
    UnknownIdentifier,
    UnknownTable,
)
from .schema import ColumnDef, DatabaseSchema, TableSchema, norm_ident

DEFAULT_TIMEOUT = 5.0

_REL_TOL = 1e-9
_ABS_TOL = 1e-12
_CHECK_EVERY = 4096


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]

    def __len__(self) -> int:
        return len(self.rows)


def parse_time_literal(text: str) -> datetime | None:
    """ISO-8601 (date or date+time, 'T' or space separator), else None."""
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        return None


def _is_number(v: object) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def numbers_equal(a: float, b: float) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    return math.isclose(a, b, rel_tol=_REL_TOL, abs_tol=_ABS_TOL)


def values_eq(a: object, b: object) -> bool | None:
    """Equality with null/type strictness: None when not comparable."""
    if a is None or b is None:
        return None
    if _is_number(a) and _is_number(b):
        return numbers_equal(a, b)
    if isinstance(a, bool) and isinstance(b, bool):
        return a == b
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, datetime) and isinstance(b, datetime):
        return a == b
    if isinstance(a, datetime) and isinstance(b, str):
        parsed = parse_time_literal(b)
        return None if parsed is None else a == parsed
    if isinstance(a, str) and isinstance(b, datetime):
        return values_eq(b, a)
    return None


def values_lt(a: object, b: object) -> bool | None:
    if a is None or b is None:
        return None
    if _is_number(a) and _is_number(b):
        if numbers_equal(a, b):
            return False
        return a < b
    if isinstance(a, str) and isinstance(b, str):
        return a < b
    if isinstance(a, datetime) and isinstance(b, datetime):
        return a < b
    if isinstance(a, datetime) and isinstance(b, str):
        parsed = parse_time_literal(b)
        return None if parsed is None else a < parsed
    if isinstance(a, str) and isinstance(b, datetime):
        parsed = parse_time_literal(a)
        return None if parsed is None else parsed < b
    return None


def _cmp_closure(op: str) -> Callable[[object, object], bool]:
    if op == "=":
        return lambda a, b: values_eq(a, b) is True
    if op == "!=":
        return lambda a, b: values_eq(a, b) is False
    if op == "<":
        return lambda a, b: values_lt(a, b) is True
    if op == ">":
        return lambda a, b: values_lt(b, a) is True
    if op == "<=":
        return lambda a, b: (values_lt(a, b) is True) or (values_eq(a, b) is True)
    if op == ">=":
        return lambda a, b: (values_lt(b, a) is True) or (values_eq(a, b) is True)
    raise ParseError(f"unsupported operator {op!r}")


def _coerce_value(value: object, col: ColumnDef, table: str) -> object:
    if value is None:
        return None
    attr = col.attribute
    if attr == "text":
        if isinstance(value, str):
            return value
    elif attr == "number":
        if _is_number(value):
            return value
    elif attr == "time":
        if isinstance(value, datetime):
            return value
        if isinstance(value, str):
            parsed = parse_time_literal(value)
            if parsed is not None:
                return parsed
    elif attr == "boolean":
        if isinstance(value, bool):
            return value
    raise TypeMismatch(
        f"table {table!r}, column {col.name!r} ({attr}): bad value {value!r}"
    )


class Database:
    """Schema-validated row store with a minimal SQL front end."""

    def __init__(self, schema: DatabaseSchema):
        self.schema = schema
        self._rows: dict[str, list[tuple]] = {norm_ident(t.name): [] for t in schema.tables}
        self._lock = threading.Lock()

    def load_records(self, table: str, records: Iterable[Sequence]) -> int:
        """Validate and append rows; returns the number inserted."""
        tschema = self.schema.table(table)
        if tschema is None:
            raise UnknownTable(f"no such table {table!r}")
        ncols = len(tschema.columns)
        staged: list[tuple] = []
        for record in records:
            row = tuple(record)
            if len(row) != ncols:
                raise ArityMismatch(
                    f"table {table!r} expects {ncols} values, got {len(row)}"
                )
            staged.append(
                tuple(
                    _coerce_value(v, col, tschema.name)
                    for v, col in zip(row, tschema.columns)
                )
            )
        with self._lock:
            self._rows[norm_ident(tschema.name)].extend(staged)
        return len(staged)

    def row_count(self, table: str) -> int:
        tschema = self.schema.table(table)
        if tschema is None:
            raise UnknownTable(f"no such table {table!r}")
        with self._lock:
            return len(self._rows[norm_ident(tschema.name)])

    def snapshot(self) -> dict[str, tuple]:
        with self._lock:
            return {name: tuple(rows) for name, rows in self._rows.items()}

    def execute(self, query: str, timeout: float = DEFAULT_TIMEOUT) -> ResultTable:
        parsed = _sql.parse(query)
        deadline = _time.monotonic() + timeout
        snap = self.snapshot()
        return _run_query(parsed, self.schema, snap, deadline)


# ---------------------------------------------------------------------------
# Evaluation


class _Scope:
    """Column resolution over one table or a joined pair."""

    def __init__(self, tables: list[tuple[TableSchema, int]]):
        # tables: (schema, base offset into the combined row)
        self.tables = tables
        self._by_table: dict[str, tuple[TableSchema, int]] = {
            norm_ident(t.name): (t, base) for t, base in tables
        }
        self._unqualified: dict[str, list[tuple[int, ColumnDef]]] = {}
        for t, base in tables:
            for i, col in enumerate(t.columns):
                self._unqualified.setdefault(norm_ident(col.name), []).append(
                    (base + i, col)
                )

    def resolve(self, raw: str) -> tuple[int, ColumnDef]:
        key = norm_ident(raw)
        hits = self._unqualified.get(key, [])
        if len(hits) == 1:
            return hits[0]
        if len(hits) > 1:
            raise UnknownIdentifier(f"ambiguous column {raw!r}; qualify with a table name")
        # qualified form: longest table-name prefix split at a dot
        for split in range(len(raw) - 1, 0, -1):
            if raw[split] != ".":
                continue
            prefix, suffix = raw[:split], raw[split + 1 :]
            entry = self._by_table.get(norm_ident(prefix))
            if entry is None:
                continue
            tschema, base = entry
            idx = tschema.column_index(suffix)
            if idx is not None:
                return base + idx, tschema.columns[idx]
        raise UnknownIdentifier(f"unknown column {raw!r}")

    def all_columns(self) -> list[ColumnDef]:
        out: list[ColumnDef] = []
        for t, _ in self.tables:
            out.extend(t.columns)
        return out


def _resolve_table(schema: DatabaseSchema, raw: str) -> TableSchema:
    t = schema.table(raw)
    if t is None:
        raise UnknownIdentifier(f"unknown table {raw!r}")
    return t


def _check_deadline(deadline: float) -> None:
    if _time.monotonic() > deadline:
        raise QueryTimeout("query exceeded its time budget")


class _AggSpec:
    """One aggregate computation over a group of rows."""

    def __init__(self, call: _sql.AggCall, scope: _Scope):
        self.op = call.op
        if isinstance(call.arg, _sql.Star):
            self.index: int | None = None
            self.label = f"{call.op}(*)"
        else:
            idx, col = scope.resolve(call.arg.name)
            if call.op in ("AVG", "SUM") and col.attribute not in ("number",):
                raise ParseError(f"{call.op} requires a number column, got {col.name!r} ({col.attribute})")
            self.index = idx
            self.label = f"{call.op}({col.name})"
        self.key = (self.op, self.index)

    def compute(self, rows: Sequence[tuple]) -> object:
        if self.op == "COUNT":
            if self.index is None:
                return len(rows)
            idx = self.index
            return sum(1 for r in rows if r[idx] is not None)
        idx = self.index
        values = [r[idx] for r in rows if r[idx] is not None]
        if not values:
            return None
        if self.op == "AVG":
            return sum(values) / len(values)
        if self.op == "SUM":
            return sum(values)
        if self.op == "MIN":
            return min(values)
        return max(values)


def _compile_row_operand(node, scope: _Scope) -> Callable[[tuple], object]:
    if isinstance(node, _sql.ColumnRef):
        idx, _ = scope.resolve(node.name)
        return lambda row: row[idx]
    if isinstance(node, _sql.Literal):
        value = node.value
        return lambda row: value
    raise ParseError("aggregates are not allowed in WHERE or JOIN conditions")


def _literal_for_column(literal_value: object, other) -> object:
    # Pre-parse ISO strings compared against a time column, once per query.
    if isinstance(other, ColumnDef) and other.attribute == "time" and isinstance(literal_value, str):
        parsed = parse_time_literal(literal_value)
        return parsed if parsed is not None else literal_value
    return literal_value


def _compile_condition(
    cond,
    scope: _Scope,
    schema: DatabaseSchema,
    snap: dict[str, tuple],
    deadline: float,
) -> Callable[[tuple], bool]:
    if isinstance(cond, _sql.And):
        parts = [_compile_condition(c, scope, schema, snap, deadline) for c in cond.items]
        return lambda row: all(p(row) for p in parts)
    if isinstance(cond, _sql.Or):
        parts = [_compile_condition(c, scope, schema, snap, deadline) for c in cond.items]
        return lambda row: any(p(row) for p in parts)
    if isinstance(cond, _sql.Comparison):
        lhs_col = _operand_column(cond.lhs, scope)
        rhs_col = _operand_column(cond.rhs, scope)
        lhs = _compile_row_operand(_pretyped(cond.lhs, rhs_col), scope)
        rhs = _compile_row_operand(_pretyped(cond.rhs, lhs_col), scope)
        cmp = _cmp_closure(cond.op)
        return lambda row: cmp(lhs(row), rhs(row))
    if isinstance(cond, _sql.Between):
        col = _operand_column(cond.operand, scope)
        operand = _compile_row_operand(cond.operand, scope)
        lo = _literal_for_column(cond.lo.value, col)
        hi = _literal_for_column(cond.hi.value, col)
        ge = _cmp_closure(">=")
        le = _cmp_closure("<=")
        return lambda row: ge(operand(row), lo) and le(operand(row), hi)
    if isinstance(cond, _sql.SubqueryCmp):
        value = _scalar_subquery(cond.query, schema, snap, deadline)
        lhs = _compile_row_operand(cond.lhs, scope)
        cmp = _cmp_closure(cond.op)
        return lambda row: cmp(lhs(row), value)
    if isinstance(cond, _sql.InSubquery):
        values = _column_subquery(cond.query, schema, snap, deadline)
        operand = _compile_row_operand(cond.operand, scope)
        hashable = all(not isinstance(v, float) for v in values)
        if hashable:
            value_set = set(values)
            return lambda row: row is not None and operand(row) in value_set
        eq = _cmp_closure("=")
        return lambda row: any(eq(operand(row), v) for v in values)
    raise ParseError(f"unsupported condition {cond!r}")


def _pretyped(node, other_col: ColumnDef | None):
    if isinstance(node, _sql.Literal) and other_col is not None:
        return _sql.Literal(_literal_for_column(node.value, other_col))
    return node


def _operand_column(node, scope: _Scope) -> ColumnDef | None:
    if isinstance(node, _sql.ColumnRef):
        _, col = scope.resolve(node.name)
        return col
    return None


def _scalar_subquery(query, schema, snap, deadline) -> object:
    result = _run_query(query, schema, snap, deadline)
    if len(result.columns) != 1:
        raise ParseError("scalar subquery must select exactly one column")
    if len(result.rows) == 0:
        return None
    if len(result.rows) > 1:
        raise ParseError("scalar subquery returned more than one row")
    return result.rows[0][0]


def _column_subquery(query, schema, snap, deadline) -> list:
    result = _run_query(query, schema, snap, deadline)
    if len(result.columns) != 1:
        raise ParseError("IN subquery must select exactly one column")
    return [row[0] for row in result.rows if row[0] is not None]


def _run_query(
    query: _sql.Query,
    schema: DatabaseSchema,
    snap: dict[str, tuple],
    deadline: float,
) -> ResultTable:
    _check_deadline(deadline)
    if query.table is None:
        values = tuple(item.value for item in query.select)
        return ResultTable(columns=[_render_literal_name(v) for v in values], rows=[values])
    main = _resolve_table(schema, query.table)
    rows: Sequence[tuple] = snap[norm_ident(main.name)]

    if query.join is not None:
        right = _resolve_table(schema, query.join.table)
        if norm_ident(right.name) == norm_ident(main.name):
            raise ParseError("self-joins are not supported")
        scope = _Scope([(main, 0), (right, len(main.columns))])
        left_idx, _ = scope.resolve(query.join.left.name)
        right_idx, _ = scope.resolve(query.join.right.name)
        base = len(main.columns)
        if left_idx >= base and right_idx < base:
            left_idx, right_idx = right_idx, left_idx
        elif not (left_idx < base <= right_idx):
            raise ParseError("JOIN condition must relate one column from each table")
        rows = _hash_join(
            rows, snap[norm_ident(right.name)], left_idx, right_idx - base, deadline
        )
    else:
        scope = _Scope([(main, 0)])

    if query.where is not None:
        predicate = _compile_condition(query.where, scope, schema, snap, deadline)
        kept = []
        for i, row in enumerate(rows):
            if not i % _CHECK_EVERY:
                _check_deadline(deadline)
            if predicate(row):
                kept.append(row)
        rows = kept

    select = list(query.select)
    has_star = any(isinstance(item, _sql.Star) for item in select)
    agg_items = [item for item in select if isinstance(item, _sql.AggCall)]
    grouped = bool(query.group_by) or bool(agg_items) or query.having is not None

    if not grouped:
        if has_star:
            columns = [c.name for c in scope.all_columns()]
            projected = [(row, row) for row in rows]
        else:
            getters = []
            columns = []
            for item in select:
                if isinstance(item, _sql.ColumnRef):
                    idx, col = scope.resolve(item.name)
                    getters.append(lambda row, i=idx: row[i])
                    columns.append(col.name)
                elif isinstance(item, _sql.Literal):
                    getters.append(lambda row, v=item.value: v)
                    columns.append(_render_literal_name(item.value))
                else:
                    raise ParseError("select items must be columns, literals, or aggregates")
            projected = [(row, tuple(g(row) for g in getters)) for row in rows]
        order_keys = _row_order_keys(query, scope, projected, select)
        return _finish(query, columns, projected, order_keys)

    # grouped evaluation
    if has_star:
        raise ParseError("'*' cannot be combined with aggregation or GROUP BY")
    group_idxs: list[int] = []
    group_cols: list[ColumnDef] = []
    for ref in query.group_by:
        idx, col = scope.resolve(ref.name)
        group_idxs.append(idx)
        group_cols.append(col)

    # aggregates needed anywhere in the query, computed once per group
    agg_specs: dict[tuple, _AggSpec] = {}

    def agg_spec(call: _sql.AggCall) -> _AggSpec:
        spec = _AggSpec(call, scope)
        return agg_specs.setdefault(spec.key, spec)

    columns = []
    select_plan: list[tuple[str, object]] = []
    for item in select:
        if isinstance(item, _sql.AggCall):
            spec = agg_spec(item)
            select_plan.append(("agg", spec.key))
            columns.append(spec.label)
        elif isinstance(item, _sql.ColumnRef):
            idx, col = scope.resolve(item.name)
            if idx not in group_idxs:
                raise ParseError(
                    f"column {col.name!r} must appear in GROUP BY or inside an aggregate"
                )
            select_plan.append(("key", group_idxs.index(idx)))
            columns.append(col.name)
        else:
            raise ParseError("select items must be columns or aggregates")

    having_fn = None
    if query.having is not None:
        having_fn = _compile_having(query.having, scope, group_idxs, agg_spec, schema, snap, deadline)

    order_plan = []
    for item in query.order_by:
        if isinstance(item.expr, _sql.AggCall):
            order_plan.append((("agg", agg_spec(item.expr).key), item.desc))
        else:
            idx, col = scope.resolve(item.expr.name)
            if idx not in group_idxs:
                raise ParseError("ORDER BY in a grouped query must use group columns or aggregates")
            order_plan.append((("key", group_idxs.index(idx)), item.desc))

    groups: dict[tuple, list[tuple]] = {}
    if group_idxs:
        for i, row in enumerate(rows):
            if not i % _CHECK_EVERY:
                _check_deadline(deadline)
            key = tuple(row[i] for i in group_idxs)
            groups.setdefault(key, []).append(row)
    else:
        groups[()] = list(rows)

    out_rows: list[tuple] = []
    out_keys: list[list] = []
    for key, members in groups.items():
        _check_deadline(deadline)
        agg_values = {k: spec.compute(members) for k, spec in agg_specs.items()}
        if having_fn is not None and not having_fn(key, agg_values):
            continue
        rendered = tuple(
            agg_values[ref] if kind == "agg" else key[ref] for kind, ref in select_plan
        )
        out_rows.append(rendered)
        if order_plan:
            out_keys.append(
                [agg_values[ref] if kind == "agg" else key[ref] for (kind, ref), _ in order_plan]
            )
    projected = list(zip(out_keys or [None] * len(out_rows), out_rows))
    order_keys = [(vals, [desc for _, desc in order_plan]) for vals, _ in projected] if order_plan else None
    return _finish(query, columns, projected, order_keys)


def _hash_join(left_rows, right_rows, left_idx, right_idx, deadline) -> list[tuple]:
    buckets: dict[object, list[tuple]] = {}
    for i, row in enumerate(right_rows):
        if not i % _CHECK_EVERY:
            _check_deadline(deadline)
        key = row[right_idx]
        if key is None or isinstance(key, float):
            continue  # float join keys fall through to the scan below
        buckets.setdefault(key, []).append(row)
    float_rights = [r for r in right_rows if isinstance(r[right_idx], float)]
    joined: list[tuple] = []
    for i, lrow in enumerate(left_rows):
        if not i % _CHECK_EVERY:
            _check_deadline(deadline)
        key = lrow[left_idx]
        if key is None:
            continue
        if float_rights:
            for rrow in float_rights:
                if values_eq(key, rrow[right_idx]) is True:
                    joined.append(lrow + rrow)
        if isinstance(key, float):
            # numbers hash-bucketed as ints; probe those a float key can equal
            if key.is_integer():
                for rrow in buckets.get(int(key), ()):
                    joined.append(lrow + rrow)
        else:
            for rrow in buckets.get(key, ()):
                joined.append(lrow + rrow)
    return joined


def _compile_having(cond, scope, group_idxs, agg_spec, schema, snap, deadline):
    """HAVING predicate over (group key, computed aggregates)."""

    def compile_operand(node):
        if isinstance(node, _sql.AggCall):
            key = agg_spec(node).key
            return lambda gkey, aggs: aggs[key]
        if isinstance(node, _sql.ColumnRef):
            idx, col = scope.resolve(node.name)
            if idx not in group_idxs:
                raise ParseError(
                    f"HAVING may only use group columns or aggregates, not {col.name!r}"
                )
            pos = group_idxs.index(idx)
            return lambda gkey, aggs: gkey[pos]
        if isinstance(node, _sql.Literal):
            value = node.value
            return lambda gkey, aggs: value
        raise ParseError("unsupported HAVING operand")

    if isinstance(cond, _sql.And):
        parts = [
            _compile_having(c, scope, group_idxs, agg_spec, schema, snap, deadline)
            for c in cond.items
        ]
        return lambda gkey, aggs: all(p(gkey, aggs) for p in parts)
    if isinstance(cond, _sql.Or):
        parts = [
            _compile_having(c, scope, group_idxs, agg_spec, schema, snap, deadline)
            for c in cond.items
        ]
        return lambda gkey, aggs: any(p(gkey, aggs) for p in parts)
    if isinstance(cond, _sql.Comparison):
        lhs = compile_operand(cond.lhs)
        rhs = compile_operand(cond.rhs)
        cmp = _cmp_closure(cond.op)
        return lambda gkey, aggs: cmp(lhs(gkey, aggs), rhs(gkey, aggs))
    if isinstance(cond, _sql.Between):
        operand = compile_operand(cond.operand)
        ge = _cmp_closure(">=")
        le = _cmp_closure("<=")
        lo, hi = cond.lo.value, cond.hi.value
        return lambda gkey, aggs: ge(operand(gkey, aggs), lo) and le(operand(gkey, aggs), hi)
    if isinstance(cond, _sql.SubqueryCmp):
        value = _scalar_subquery(cond.query, schema, snap, deadline)
        lhs = compile_operand(cond.lhs)
        cmp = _cmp_closure(cond.op)
        return lambda gkey, aggs: cmp(lhs(gkey, aggs), value)
    if isinstance(cond, _sql.InSubquery):
        values = _column_subquery(cond.query, schema, snap, deadline)
        operand = compile_operand(cond.operand)
        eq = _cmp_closure("=")
        return lambda gkey, aggs: any(eq(operand(gkey, aggs), v) for v in values)
    raise ParseError(f"unsupported HAVING condition {cond!r}")


def _row_order_keys(query, scope, projected, select):
    """ORDER BY key extraction for non-grouped queries."""
    if not query.order_by:
        return None
    extractors = []
    for item in query.order_by:
        if isinstance(item.expr, _sql.AggCall):
            raise ParseError("aggregate ORDER BY requires GROUP BY")
        idx, col = scope.resolve(item.expr.name)
        if query.distinct:
            sel_idx = None
            for j, sel in enumerate(select):
                if isinstance(sel, _sql.ColumnRef) and scope.resolve(sel.name)[0] == idx:
                    sel_idx = j
                    break
            if sel_idx is None and not any(isinstance(s, _sql.Star) for s in select):
                raise ParseError("ORDER BY with DISTINCT must use selected columns")
        extractors.append((idx, item.desc))
    keys = []
    for row, _ in projected:
        keys.append(([row[idx] for idx, _ in extractors], [desc for _, desc in extractors]))
    return keys


def _render_literal_name(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


_TYPE_RANK = {bool: 0, int: 1, float: 1, datetime: 2, str: 3}


def _sort_token(value: object):
    if value is None:
        return (0, 0, 0)
    rank = _TYPE_RANK.get(type(value), 4)
    if isinstance(value, bool):
        return (1, rank, int(value))
    return (1, rank, value)


def _finish(query, columns, projected, order_keys) -> ResultTable:
    """Shared tail: DISTINCT, ORDER BY (stable, nulls first asc), LIMIT."""
    paired = list(zip(projected, order_keys or [None] * len(projected)))

    if query.distinct:
        seen = set()
        deduped = []
        for (ctx, out), key in paired:
            if out not in seen:
                seen.add(out)
                deduped.append(((ctx, out), key))
        paired = deduped

    if order_keys is not None and paired:
        n_keys = len(paired[0][1][0])
        for pos in range(n_keys - 1, -1, -1):
            desc = paired[0][1][1][pos]
            paired.sort(key=lambda item: _sort_token(item[1][0][pos]), reverse=desc)

    rows = [out for (_, out), _ in paired]
    if query.limit is not None:
        rows = rows[: query.limit]
    return ResultTable(columns=columns, rows=rows)


def execute(query: str, db: Database, timeout: float = DEFAULT_TIMEOUT) -> ResultTable:
    """Module-level convenience wrapper around Database.execute."""
    return db.execute(query, timeout=timeout)
