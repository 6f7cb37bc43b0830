"""Embedded relational store: schema model, SQL dialect, query evaluation."""

from .engine import Database, ResultTable, execute, parse_time_literal
from .errors import (
    ArityMismatch,
    ParseError,
    QueryTimeout,
    StoreError,
    TypeMismatch,
    UnknownIdentifier,
    UnknownTable,
)
from .schema import (
    ATTRIBUTES,
    ColumnDef,
    DatabaseSchema,
    DuplicateColumn,
    DuplicateTable,
    EmptySchema,
    LinearizedSchema,
    SchemaError,
    SchemaFormatError,
    TableSchema,
    default_schema,
    define_schema,
    dump_schema_text,
    linearize_schema,
    load_schema_file,
    norm_ident,
    parse_schema_text,
)
from .sql import parse, referenced_tables

__all__ = [
    "ATTRIBUTES",
    "ArityMismatch",
    "ColumnDef",
    "Database",
    "DatabaseSchema",
    "DuplicateColumn",
    "DuplicateTable",
    "EmptySchema",
    "LinearizedSchema",
    "ParseError",
    "QueryTimeout",
    "ResultTable",
    "SchemaError",
    "SchemaFormatError",
    "StoreError",
    "TableSchema",
    "TypeMismatch",
    "UnknownIdentifier",
    "UnknownTable",
    "default_schema",
    "define_schema",
    "dump_schema_text",
    "execute",
    "linearize_schema",
    "load_schema_file",
    "norm_ident",
    "parse",
    "parse_schema_text",
    "parse_time_literal",
    "referenced_tables",
]
