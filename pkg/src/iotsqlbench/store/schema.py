"""Schema model for the embedded store plus its flat token serialization.

A database schema is an ordered list of tables; each table an ordered list
of columns; each column carries one of four datatype attributes.  The
linearized form is the token sequence prepended to model inputs:
``[*, table1, col1, attr1, col2, attr2, table2, ...]``.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from typing import Iterable, TextIO

ATTRIBUTES = ("text", "number", "time", "boolean")


class SchemaError(ValueError):
    """Base for schema construction and schema-file problems."""


class EmptySchema(SchemaError):
    pass


class DuplicateTable(SchemaError):
    pass


class DuplicateColumn(SchemaError):
    pass


class SchemaFormatError(SchemaError):
    """Malformed schema file."""


def norm_ident(name: str) -> str:
    """Fold an identifier for lookup: case-insensitive, '.' and '_' equivalent."""
    return name.casefold().replace(".", "_")


@dataclass(frozen=True)
class ColumnDef:
    name: str
    attribute: str

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("column name must be nonempty")
        if self.attribute not in ATTRIBUTES:
            raise SchemaError(
                f"column {self.name!r}: attribute must be one of {ATTRIBUTES}, got {self.attribute!r}"
            )


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[ColumnDef, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("table name must be nonempty")
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        if not cols:
            raise SchemaError(f"table {self.name!r} must have at least one column")
        seen: set[str] = set()
        for col in cols:
            key = norm_ident(col.name)
            if key in seen:
                raise DuplicateColumn(f"table {self.name!r}: duplicate column {col.name!r}")
            seen.add(key)

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column_index(self, name: str) -> int | None:
        key = norm_ident(name)
        for i, col in enumerate(self.columns):
            if norm_ident(col.name) == key:
                return i
        return None

    def column(self, name: str) -> ColumnDef | None:
        idx = self.column_index(name)
        return None if idx is None else self.columns[idx]


@dataclass(frozen=True)
class DatabaseSchema:
    tables: tuple[TableSchema, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tables", tuple(self.tables))

    def table(self, name: str) -> TableSchema | None:
        key = norm_ident(name)
        for t in self.tables:
            if norm_ident(t.name) == key:
                return t
        return None

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]

    @property
    def n_columns(self) -> int:
        return sum(len(t.columns) for t in self.tables)


@dataclass(frozen=True)
class LinearizedSchema:
    tokens: tuple[str, ...]

    def joined(self, sep: str = ", ") -> str:
        return sep.join(self.tokens)


def define_schema(tables: Iterable[TableSchema]) -> DatabaseSchema:
    """Validate and assemble a database schema from table definitions."""
    tables = tuple(tables)
    if not tables:
        raise EmptySchema("schema must contain at least one table")
    seen: set[str] = set()
    for t in tables:
        key = norm_ident(t.name)
        if key in seen:
            raise DuplicateTable(f"duplicate table {t.name!r}")
        seen.add(key)
    return DatabaseSchema(tables=tables)


def linearize_schema(schema: DatabaseSchema) -> LinearizedSchema:
    """Flatten a schema to its model-input token sequence.

    Token layout: a leading ``*``, then per table the table name followed by
    (column name, attribute) for every column in declared order.  Token count
    is ``1 + sum(1 + 2 * n_columns)`` over tables.
    """
    tokens: list[str] = ["*"]
    for table in schema.tables:
        tokens.append(table.name)
        for col in table.columns:
            tokens.append(col.name)
            tokens.append(col.attribute)
    return LinearizedSchema(tokens=tuple(tokens))


def parse_schema_text(stream: TextIO | str) -> DatabaseSchema:
    """Parse the line-oriented schema format.

    Format: ``table <name>`` lines, each followed by indented
    ``column <name> <attribute>`` lines.  ``#`` starts a comment; blank
    lines are ignored.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()

    tables: list[TableSchema] = []
    current_name: str | None = None
    current_cols: list[ColumnDef] = []

    def flush() -> None:
        nonlocal current_name, current_cols
        if current_name is not None:
            tables.append(TableSchema(name=current_name, columns=tuple(current_cols)))
        current_name, current_cols = None, []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] == "table":
            if len(parts) != 2:
                raise SchemaFormatError(f"line {lineno}: expected 'table <name>'")
            flush()
            current_name = parts[1]
        elif parts[0] == "column":
            if current_name is None:
                raise SchemaFormatError(f"line {lineno}: column outside a table block")
            if len(parts) != 3:
                raise SchemaFormatError(f"line {lineno}: expected 'column <name> <attribute>'")
            current_cols.append(ColumnDef(name=parts[1], attribute=parts[2]))
        else:
            raise SchemaFormatError(f"line {lineno}: unrecognized directive {parts[0]!r}")
    flush()
    return define_schema(tables)


def dump_schema_text(schema: DatabaseSchema) -> str:
    lines: list[str] = []
    for table in schema.tables:
        lines.append(f"table {table.name}")
        for col in table.columns:
            lines.append(f"    column {col.name} {col.attribute}")
    return "\n".join(lines) + "\n"


def load_schema_file(path: str) -> DatabaseSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_schema_text(fh)


def default_schema() -> DatabaseSchema:
    """The shipped 12-table smart-building schema (Zeek logs + sensors + devices).

    conn.log follows the standard 21-column Zeek connection log; the other
    Zeek tables are reconstructed from Zeek's field documentation, and the
    sensor/device tables are toolkit-defined.
    """
    text = (
        importlib.resources.files("iotsqlbench.data")
        .joinpath("default_schema.txt")
        .read_text(encoding="utf-8")
    )
    return parse_schema_text(text)
