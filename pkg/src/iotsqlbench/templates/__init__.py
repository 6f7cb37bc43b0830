"""Text-SQL pair generation from slot templates."""

from .bank import (
    BankFormatError,
    QueryTemplate,
    SlotKind,
    SlotSpec,
    TemplateError,
    UnboundPlaceholder,
    UnsatisfiableSlot,
    default_bank,
    dump_bank_text,
    parse_bank_text,
    placeholder_names,
)
from .generate import (
    CorpusConfig,
    ExhaustedResampling,
    ManualPairError,
    TemplateBinder,
    TextSqlPair,
    canonical_tables,
    construct_coverage,
    corpus_stats,
    generate_corpus,
    has_datetime_predicate,
    instantiate,
    pair_to_json,
    read_corpus,
    read_manual_pairs,
    realize_question,
    render_sql,
    sql_table_name,
    write_corpus,
)

__all__ = [
    "BankFormatError",
    "CorpusConfig",
    "ExhaustedResampling",
    "ManualPairError",
    "QueryTemplate",
    "SlotKind",
    "SlotSpec",
    "TemplateBinder",
    "TemplateError",
    "TextSqlPair",
    "UnboundPlaceholder",
    "UnsatisfiableSlot",
    "canonical_tables",
    "construct_coverage",
    "corpus_stats",
    "default_bank",
    "dump_bank_text",
    "generate_corpus",
    "has_datetime_predicate",
    "instantiate",
    "pair_to_json",
    "parse_bank_text",
    "placeholder_names",
    "read_corpus",
    "read_manual_pairs",
    "realize_question",
    "render_sql",
    "sql_table_name",
    "write_corpus",
]
