"""Error types raised by the embedded store."""


class StoreError(Exception):
    """Base class for store failures."""


class ParseError(StoreError):
    """Query text is not valid in the supported dialect."""


class UnknownIdentifier(StoreError):
    """A table or column name in a query could not be resolved."""


class UnknownTable(StoreError):
    """Attempt to load rows into a table that does not exist."""


class ArityMismatch(StoreError):
    """A row's value count does not match its table's column count."""


class TypeMismatch(StoreError):
    """A value does not fit its column's datatype attribute."""


class QueryTimeout(StoreError):
    """Query evaluation exceeded its time budget."""
