"""Template instantiation and corpus generation.

Binding draws tables and columns that satisfy each slot's attribute
constraints and samples condition values from cells actually present in
the database, so every emitted query executes on the database it came
from.  Corpus generation derives one RNG per candidate index from the
seed, de-duplicates on (question, sql), and keeps a floor of pairs with
datetime predicates when the database has populated time columns.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass
from datetime import datetime

from ..store import Database, norm_ident
from ..store import sql as _sql
from ..store.schema import ColumnDef, DatabaseSchema, TableSchema
from .bank import (
    PLACEHOLDER_RE,
    QueryTemplate,
    SlotKind,
    SlotSpec,
    TemplateError,
    UnboundPlaceholder,
    UnsatisfiableSlot,
    default_bank,
    slot_suffix,
)


class ExhaustedResampling(TemplateError):
    pass


class ManualPairError(TemplateError):
    pass


@dataclass(frozen=True)
class TextSqlPair:
    question: str
    sql: str
    template_id: str | None = None  # absent means manually authored
    tables_referenced: frozenset = frozenset()
    category: str | None = None


_OP_WORDS = {
    "=": "equal to",
    "!=": "not equal to",
    "<": "less than",
    "<=": "at most",
    ">": "greater than",
    ">=": "at least",
}

_AGG_WORDS = {"AVG": "average", "SUM": "total", "MIN": "minimum", "MAX": "maximum", "COUNT": "count"}

_DEFAULT_AGG_OPS = ("AVG", "MIN", "MAX", "SUM")
_ALL_COND_OPS = ("=", "!=", "<", "<=", ">", ">=")

_OP_ATTRS = {
    "AVG": ("number",),
    "SUM": ("number",),
    "MIN": ("number", "time"),
    "MAX": ("number", "time"),
    "COUNT": ("text", "number", "time", "boolean"),
}


def _ops_for_attr(attr: str) -> tuple[str, ...]:
    if attr in ("text", "boolean"):
        return ("=", "!=")
    return _ALL_COND_OPS


def sql_table_name(name: str) -> str:
    """SQL-facing table identifier: dots folded to underscores, upper-case."""
    return name.replace(".", "_").upper()


def _pretty_table(name: str) -> str:
    return name.replace(".", " ").upper()


def _short_table(name: str) -> str:
    return name.split(".")[0].upper()


def render_sql_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime):
        return f'"{value.isoformat()}"'
    if isinstance(value, str):
        if '"' not in value:
            return f'"{value}"'
        return f"'{value}'"
    return repr(value)


def render_nl_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime):
        return value.isoformat(sep=" ")
    return str(value)


@dataclass(frozen=True)
class Bound:
    """One bound slot: the raw value plus its SQL and NL renderings."""

    kind: SlotKind
    value: object

    def sql_text(self) -> str:
        if self.kind in (SlotKind.TABLE, SlotKind.JOIN_TABLE):
            return sql_table_name(self.value.name)
        if self.kind in (SlotKind.AGG_COLUMN, SlotKind.COND_COLUMN, SlotKind.ORDER_COLUMN):
            return self.value.name
        if self.kind is SlotKind.JOIN_KEY:
            return self.value
        if self.kind in (SlotKind.AGG_OP, SlotKind.COND_OP):
            return self.value
        if self.kind is SlotKind.LIMIT_N:
            return str(self.value)
        return render_sql_value(self.value)

    def nl_text(self, mode: str | None) -> str:
        if self.kind in (SlotKind.TABLE, SlotKind.JOIN_TABLE):
            if mode == "pretty":
                return _pretty_table(self.value.name)
            if mode == "short":
                return _short_table(self.value.name)
            return self.value.name
        if self.kind is SlotKind.AGG_OP:
            return _AGG_WORDS[self.value] if mode == "words" else self.value
        if self.kind is SlotKind.COND_OP:
            return _OP_WORDS[self.value] if mode == "words" else self.value
        if self.kind in (SlotKind.AGG_COLUMN, SlotKind.COND_COLUMN, SlotKind.ORDER_COLUMN):
            return self.value.name
        if self.kind is SlotKind.JOIN_KEY:
            return self.value
        if self.kind is SlotKind.LIMIT_N:
            return str(self.value)
        return render_nl_value(self.value)


def substitute(pattern: str, bindings: dict, for_sql: bool) -> str:
    def repl(match: re.Match) -> str:
        name = match.group("braced") or match.group("bare")
        mode = match.group("mode")
        if name not in bindings:
            raise UnboundPlaceholder(f"no binding for placeholder {name}")
        bound = bindings[name]
        return bound.sql_text() if for_sql else bound.nl_text(mode)

    return PLACEHOLDER_RE.sub(repl, pattern)


def realize_question(template: QueryTemplate, bindings: dict, variant_index: int) -> str:
    if not 0 <= variant_index < len(template.nl_patterns):
        raise TemplateError(
            f"template {template.id}: variant {variant_index} out of range"
        )
    return substitute(template.nl_patterns[variant_index], bindings, for_sql=False)


def render_sql(template: QueryTemplate, bindings: dict) -> str:
    return substitute(template.sql_pattern, bindings, for_sql=True)


class _RetryBind(Exception):
    """Internal: this table assignment cannot satisfy the slots; try another."""


class ValueIndex:
    """Distinct non-null cell values per (table, column), sorted for determinism."""

    def __init__(self, db: Database):
        self._db = db
        self._snap = db.snapshot()
        self._cache: dict[tuple[str, str], list] = {}

    def distinct(self, table: TableSchema, column: ColumnDef) -> list:
        key = (norm_ident(table.name), norm_ident(column.name))
        if key not in self._cache:
            idx = table.column_index(column.name)
            seen = {row[idx] for row in self._snap[key[0]]}
            seen.discard(None)
            usable = [v for v in seen if not (isinstance(v, str) and '"' in v and "'" in v)]
            self._cache[key] = sorted(usable, key=lambda v: (str(type(v)), v))
        return self._cache[key]


class TemplateBinder:
    """Binds template slots against one database snapshot."""

    def __init__(self, db: Database):
        self.db = db
        self.schema: DatabaseSchema = db.schema
        self.values = ValueIndex(db)
        self._join_options = self._enumerate_join_options()

    def _enumerate_join_options(self) -> list[tuple[TableSchema, TableSchema, str]]:
        options = []
        for t1 in self.schema.tables:
            for t2 in self.schema.tables:
                if t1 is t2:
                    continue
                names1 = {norm_ident(c.name): c for c in t1.columns}
                for c2 in t2.columns:
                    c1 = names1.get(norm_ident(c2.name))
                    if c1 is not None and c1.attribute == c2.attribute == "text":
                        options.append((t1, t2, c1.name))
        return options

    # -- satisfiability filters (attribute level; value existence is retried)

    def _columns_matching(self, table: TableSchema, attrs) -> list[ColumnDef]:
        if attrs is None:
            return list(table.columns)
        return [c for c in table.columns if c.attribute in attrs]

    _AGG_COLUMN_DEFAULT_ATTRS = ("number", "time")

    def _table_viable(self, template: QueryTemplate, table: TableSchema, table_slot: str) -> bool:
        for spec in template.slots.values():
            if spec.kind not in (SlotKind.AGG_COLUMN, SlotKind.COND_COLUMN, SlotKind.ORDER_COLUMN):
                continue
            if spec.table_slot != table_slot:
                continue
            attrs = spec.attrs
            if spec.kind is SlotKind.AGG_COLUMN:
                agg_slot = template.slots.get(f"AGG_OP{spec.suffix}")
                if agg_slot is not None and spec.name == f"AGG_COLUMN{spec.suffix}":
                    ops = agg_slot.ops or _DEFAULT_AGG_OPS
                    allowed = set()
                    for op in ops:
                        allowed.update(_OP_ATTRS[op])
                    attrs = tuple(allowed if attrs is None else allowed & set(attrs))
            if not self._columns_matching(table, attrs):
                return False
        return True

    def bind(self, template: QueryTemplate, rng: random.Random) -> dict:
        has_join = any(s.kind is SlotKind.JOIN_TABLE for s in template.slots.values())
        if has_join:
            options = [
                (t1, t2, key)
                for t1, t2, key in self._join_options
                if self._table_viable(template, t1, "TABLE")
                and self._table_viable(template, t2, "JOIN_TABLE")
            ]
            if not options:
                raise UnsatisfiableSlot(
                    f"template {template.id}: no joinable table pair satisfies the slots"
                )
            for t1, t2, key in rng.sample(options, len(options)):
                table_map = {"TABLE": t1, "JOIN_TABLE": t2}
                try:
                    return self._bind_with_tables(template, rng, table_map, key)
                except _RetryBind:
                    continue
            raise UnsatisfiableSlot(
                f"template {template.id}: no join option has sampleable values"
            )
        options2 = [
            t for t in self.schema.tables if self._table_viable(template, t, "TABLE")
        ]
        if not options2:
            raise UnsatisfiableSlot(
                f"template {template.id}: no table satisfies the column constraints"
            )
        for t in rng.sample(options2, len(options2)):
            try:
                return self._bind_with_tables(template, rng, {"TABLE": t}, None)
            except _RetryBind:
                continue
        raise UnsatisfiableSlot(
            f"template {template.id}: no table has sampleable values for the slots"
        )

    def _bind_with_tables(
        self,
        template: QueryTemplate,
        rng: random.Random,
        table_map: dict[str, TableSchema],
        join_key: str | None,
    ) -> dict:
        bindings: dict[str, Bound] = {}
        col_tables: dict[str, TableSchema] = {}
        for name, table in table_map.items():
            if name in template.slots or name in ("TABLE", "JOIN_TABLE"):
                kind = SlotKind.TABLE if name == "TABLE" else SlotKind.JOIN_TABLE
                bindings[name] = Bound(kind=kind, value=table)
        for spec in template.slots.values():
            if spec.kind is SlotKind.JOIN_KEY:
                bindings[spec.name] = Bound(kind=SlotKind.JOIN_KEY, value=join_key)

        # aggregate op/column pairs first (op restricts the column's attrs)
        for spec in template.slots.values():
            if spec.kind is not SlotKind.AGG_OP:
                continue
            col_spec = template.slots.get(f"AGG_COLUMN{spec.suffix}")
            ops = list(spec.ops or _DEFAULT_AGG_OPS)
            if col_spec is None:
                bindings[spec.name] = Bound(kind=SlotKind.AGG_OP, value=rng.choice(ops))
                continue
            table = table_map[col_spec.table_slot]
            viable: dict[str, list[ColumnDef]] = {}
            for op in ops:
                attrs = set(_OP_ATTRS[op])
                if col_spec.attrs is not None:
                    attrs &= set(col_spec.attrs)
                cols = self._columns_matching(table, tuple(attrs))
                if cols:
                    viable[op] = cols
            if not viable:
                raise _RetryBind
            op = rng.choice(sorted(viable))
            col = rng.choice(viable[op])
            bindings[spec.name] = Bound(kind=SlotKind.AGG_OP, value=op)
            bindings[col_spec.name] = Bound(kind=SlotKind.AGG_COLUMN, value=col)
            col_tables[col_spec.name] = table

        # remaining column slots
        value_sources = self._value_sources(template)
        for spec in template.slots.values():
            if spec.kind not in (SlotKind.AGG_COLUMN, SlotKind.COND_COLUMN, SlotKind.ORDER_COLUMN):
                continue
            if spec.name in bindings:
                continue
            table = table_map[spec.table_slot]
            attrs = spec.attrs
            if attrs is None and spec.kind is SlotKind.AGG_COLUMN:
                attrs = self._AGG_COLUMN_DEFAULT_ATTRS
            candidates = self._columns_matching(table, attrs)
            if spec.name in value_sources:
                candidates = [c for c in candidates if self.values.distinct(table, c)]
            if not candidates:
                raise _RetryBind
            col = rng.choice(candidates)
            bindings[spec.name] = Bound(kind=spec.kind, value=col)
            col_tables[spec.name] = table

        # condition operators (constrained by the compared operand's type)
        for spec in template.slots.values():
            if spec.kind is not SlotKind.COND_OP:
                continue
            attr = self._cond_operand_attr(template, spec, bindings)
            allowed = [op for op in (spec.ops or _ALL_COND_OPS) if op in _ops_for_attr(attr)]
            if not allowed:
                raise _RetryBind
            bindings[spec.name] = Bound(kind=SlotKind.COND_OP, value=rng.choice(allowed))

        # sampled values
        time_pairs: dict[str, list[SlotSpec]] = {}
        for spec in template.slots.values():
            if spec.kind in (SlotKind.TIME_LO, SlotKind.TIME_HI):
                time_pairs.setdefault(spec.source or "", []).append(spec)
                continue
            if spec.kind is not SlotKind.COND_VALUE:
                continue
            source = spec.source or f"COND_COLUMN{spec.suffix}"
            if source not in bindings:
                raise _RetryBind
            col = bindings[source].value
            pool = self.values.distinct(col_tables[source], col)
            if not pool:
                raise _RetryBind
            bindings[spec.name] = Bound(kind=SlotKind.COND_VALUE, value=rng.choice(pool))

        for source, specs in time_pairs.items():
            if source not in bindings:
                raise _RetryBind
            col = bindings[source].value
            pool = self.values.distinct(col_tables[source], col)
            if not pool:
                raise _RetryBind
            picks = sorted(rng.choice(pool) for _ in specs)
            for spec, value in zip(sorted(specs, key=lambda s: s.kind.value, reverse=True), picks):
                # TIME_LO sorts after TIME_HI reversed; pair low value with TIME_LO
                bindings[spec.name] = Bound(kind=spec.kind, value=value)

        for spec in template.slots.values():
            if spec.kind is SlotKind.LIMIT_N:
                bindings[spec.name] = Bound(kind=SlotKind.LIMIT_N, value=rng.randint(spec.lo, spec.hi))

        return bindings

    def _value_sources(self, template: QueryTemplate) -> set[str]:
        sources = set()
        for spec in template.slots.values():
            if spec.kind is SlotKind.COND_VALUE:
                sources.add(spec.source or f"COND_COLUMN{spec.suffix}")
            elif spec.kind in (SlotKind.TIME_LO, SlotKind.TIME_HI) and spec.source:
                sources.add(spec.source)
        return sources

    def _cond_operand_attr(self, template: QueryTemplate, spec: SlotSpec, bindings: dict) -> str:
        """Type of the operand compared by a COND_OP: nearest placeholder on its left."""
        pattern = template.sql_pattern
        marker = re.search(rf"\$\{{?{re.escape(spec.name)}\b\}}?", pattern)
        if marker is None:
            return "number"
        before = pattern[: marker.start()]
        if re.search(r"COUNT\(\*\)\s*$", before):
            return "number"
        names = [m.group("braced") or m.group("bare") for m in PLACEHOLDER_RE.finditer(before)]
        for name in reversed(names):
            bound = bindings.get(name)
            if bound is not None and isinstance(bound.value, ColumnDef):
                return bound.value.attribute
        return "number"


def instantiate(
    template: QueryTemplate,
    db: Database,
    rng: random.Random,
    binder: TemplateBinder | None = None,
    verify: bool = True,
) -> TextSqlPair:
    """Bind all slots and emit one text-SQL pair; the SQL is run against the
    database to uphold the executability guarantee."""
    binder = binder or TemplateBinder(db)
    bindings = binder.bind(template, rng)
    sql_text = render_sql(template, bindings)
    if verify:
        db.execute(sql_text)
    variant = rng.randrange(len(template.nl_patterns))
    question = realize_question(template, bindings, variant)
    return TextSqlPair(
        question=question,
        sql=sql_text,
        template_id=template.id,
        tables_referenced=canonical_tables(sql_text, db.schema),
        category=template.category,
    )


def canonical_tables(sql_text: str, schema: DatabaseSchema) -> frozenset:
    names = set()
    for raw in _sql.referenced_tables(sql_text):
        t = schema.table(raw)
        names.add(t.name if t is not None else raw)
    return frozenset(names)


def has_datetime_predicate(sql_text: str, schema: DatabaseSchema) -> bool:
    """True when WHERE/HAVING compares a time-attribute column (temporal pair)."""
    try:
        query = _sql.parse(sql_text)
    except Exception:
        return False
    return _query_has_time_pred(query, schema)


def _query_has_time_pred(query: _sql.Query, schema: DatabaseSchema) -> bool:
    tables = [schema.table(raw) for raw in ([query.table] if query.table else [])]
    if query.join is not None:
        tables.append(schema.table(query.join.table))
    tables = [t for t in tables if t is not None]

    def col_is_time(ref: _sql.ColumnRef) -> bool:
        raw = ref.name
        for t in tables:
            col = t.column(raw)
            if col is not None:
                return col.attribute == "time"
        for split in range(len(raw) - 1, 0, -1):
            if raw[split] != ".":
                continue
            t = schema.table(raw[:split])
            if t is not None:
                col = t.column(raw[split + 1 :])
                if col is not None:
                    return col.attribute == "time"
        return False

    def walk(cond) -> bool:
        if cond is None:
            return False
        if isinstance(cond, (_sql.And, _sql.Or)):
            return any(walk(c) for c in cond.items)
        if isinstance(cond, _sql.Comparison):
            return any(isinstance(o, _sql.ColumnRef) and col_is_time(o) for o in (cond.lhs, cond.rhs))
        if isinstance(cond, _sql.Between):
            return isinstance(cond.operand, _sql.ColumnRef) and col_is_time(cond.operand)
        if isinstance(cond, _sql.SubqueryCmp):
            lhs_time = isinstance(cond.lhs, _sql.ColumnRef) and col_is_time(cond.lhs)
            return lhs_time or _query_has_time_pred(cond.query, schema)
        if isinstance(cond, _sql.InSubquery):
            op_time = isinstance(cond.operand, _sql.ColumnRef) and col_is_time(cond.operand)
            return op_time or _query_has_time_pred(cond.query, schema)
        return False

    return walk(query.where) or walk(query.having)


@dataclass
class CorpusConfig:
    n_pairs: int
    seed: int = 0
    template_weights: dict | None = None  # template id -> weight; None = uniform
    bank: list | None = None
    temporal_floor: float = 0.10
    temporal_stride: int = 5  # every k-th candidate draws from temporal templates
    max_attempt_factor: int = 60


def _candidate_rng(seed: int, index: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def generate_corpus(db: Database, config: CorpusConfig) -> list[TextSqlPair]:
    """Generate exactly n distinct pairs, deterministic in the seed."""
    if config.n_pairs == 0:
        return []
    bank = config.bank if config.bank is not None else default_bank()
    weights = {t.id: 1.0 for t in bank}
    if config.template_weights is not None:
        weights.update(config.template_weights)
    active = [t for t in bank if weights.get(t.id, 0) > 0]
    if not active:
        raise ExhaustedResampling("no template has positive weight")
    binder = TemplateBinder(db)
    temporal = [t for t in active if t.is_temporal and _temporal_possible(binder, t)]

    pairs: list[TextSqlPair] = []
    seen: set[tuple[str, str]] = set()
    temporal_count = 0
    need_temporal = int(config.temporal_floor * config.n_pairs + 0.999999) if temporal else 0
    max_attempts = max(1000, config.max_attempt_factor * config.n_pairs)

    for k in range(max_attempts):
        if len(pairs) >= config.n_pairs:
            break
        rng = _candidate_rng(config.seed, k)
        remaining = config.n_pairs - len(pairs)
        force_temporal = bool(temporal) and (need_temporal - temporal_count) >= remaining
        reserve_temporal = bool(temporal) and (k % config.temporal_stride == 0)
        pool = temporal if (force_temporal or reserve_temporal) else active
        template = rng.choices(pool, weights=[weights[t.id] for t in pool])[0]
        try:
            pair = instantiate(template, db, rng, binder=binder)
        except UnsatisfiableSlot:
            continue
        key = (pair.question, pair.sql)
        if key in seen:
            continue
        seen.add(key)
        pairs.append(pair)
        if has_datetime_predicate(pair.sql, db.schema):
            temporal_count += 1
    if len(pairs) < config.n_pairs:
        raise ExhaustedResampling(
            f"could only produce {len(pairs)} of {config.n_pairs} distinct pairs"
        )
    return pairs


def _temporal_possible(binder: TemplateBinder, template: QueryTemplate) -> bool:
    try:
        binder.bind(template, random.Random(0))
        return True
    except UnsatisfiableSlot:
        return False


# ---------------------------------------------------------------------------
# corpus file I/O and reporting


def write_corpus(pairs: list[TextSqlPair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(pair_to_json(pair) + "\n")


def pair_to_json(pair: TextSqlPair) -> str:
    return json.dumps(
        {
            "question": pair.question,
            "sql": pair.sql,
            "template_id": pair.template_id,
            "tables_referenced": sorted(pair.tables_referenced),
            "category": pair.category,
        },
        ensure_ascii=False,
        sort_keys=True,
    )


def read_corpus(stream) -> list[TextSqlPair]:
    """Load a corpus file; every pair's SQL must parse in the store dialect."""
    if isinstance(stream, str):
        lines = stream.splitlines()
    elif hasattr(stream, "read"):
        lines = stream.read().splitlines()
    else:
        lines = list(stream)
    pairs = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            question, sql_text = obj["question"], obj["sql"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise TemplateError(f"corpus line {line_no}: bad record ({exc})") from exc
        try:
            _sql.parse(sql_text)
        except Exception as exc:
            raise TemplateError(f"corpus line {line_no}: sql does not parse: {exc}") from exc
        pairs.append(
            TextSqlPair(
                question=question,
                sql=sql_text,
                template_id=obj.get("template_id"),
                tables_referenced=frozenset(obj.get("tables_referenced", [])),
                category=obj.get("category"),
            )
        )
    return pairs


def read_manual_pairs(stream, db: Database) -> list[TextSqlPair]:
    """Hand-written pairs from a JSONL side channel, validated by execution."""
    if hasattr(stream, "read"):
        lines = stream.read().splitlines()
    elif isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = list(stream)
    pairs = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            question, sql_text = obj["question"], obj["sql"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ManualPairError(f"line {line_no}: bad record ({exc})") from exc
        try:
            db.execute(sql_text)
        except Exception as exc:
            raise ManualPairError(f"line {line_no}: sql does not execute: {exc}") from exc
        pairs.append(
            TextSqlPair(
                question=question,
                sql=sql_text,
                template_id=None,
                tables_referenced=canonical_tables(sql_text, db.schema),
                category=None,
            )
        )
    return pairs


def corpus_stats(pairs: list[TextSqlPair]) -> dict:
    """Whitespace-token length stats, reported for questions and SQL separately."""
    qlens = [len(p.question.split()) for p in pairs]
    slens = [len(p.sql.split()) for p in pairs]

    def block(lens: list[int]) -> dict:
        if not lens:
            return {"avg": 0.0, "min": 0, "max": 0}
        return {"avg": round(sum(lens) / len(lens), 2), "min": min(lens), "max": max(lens)}

    return {"n_pairs": len(pairs), "question_length": block(qlens), "sql_length": block(slens)}


def construct_coverage(pairs: list[TextSqlPair]) -> dict:
    """How many pairs use each construct (join, having, nested, each aggregate...)."""
    counts = {
        key: 0
        for key in ("join", "having", "nested", "distinct", "order_by", "limit",
                    "group_by", "AVG", "MIN", "MAX", "SUM", "COUNT")
    }
    for pair in pairs:
        try:
            query = _sql.parse(pair.sql)
        except Exception:
            continue
        if query.join is not None:
            counts["join"] += 1
        if query.having is not None:
            counts["having"] += 1
        if query.distinct:
            counts["distinct"] += 1
        if query.order_by:
            counts["order_by"] += 1
        if query.limit is not None:
            counts["limit"] += 1
        if query.group_by:
            counts["group_by"] += 1
        if _has_subquery(query):
            counts["nested"] += 1
        for op in _agg_ops_used(query):
            counts[op] += 1
    return counts


def _has_subquery(query: _sql.Query) -> bool:
    def walk(cond) -> bool:
        if cond is None:
            return False
        if isinstance(cond, (_sql.And, _sql.Or)):
            return any(walk(c) for c in cond.items)
        return isinstance(cond, (_sql.InSubquery, _sql.SubqueryCmp))

    return walk(query.where) or walk(query.having)


def _agg_ops_used(query: _sql.Query) -> set[str]:
    ops: set[str] = set()

    def visit_operand(node) -> None:
        if isinstance(node, _sql.AggCall):
            ops.add(node.op)

    for item in query.select:
        visit_operand(item)

    def walk(cond) -> None:
        if cond is None:
            return
        if isinstance(cond, (_sql.And, _sql.Or)):
            for c in cond.items:
                walk(c)
            return
        if isinstance(cond, _sql.Comparison):
            visit_operand(cond.lhs)
            visit_operand(cond.rhs)
        elif isinstance(cond, _sql.Between):
            visit_operand(cond.operand)
        elif isinstance(cond, (_sql.InSubquery, _sql.SubqueryCmp)):
            sub = cond.query
            ops.update(_agg_ops_used(sub))

    walk(query.where)
    walk(query.having)
    for item in query.order_by:
        visit_operand(item.expr)
    return ops
