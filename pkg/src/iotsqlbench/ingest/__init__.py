"""Parsers for Zeek logs, IoT-23 labels, and sensor data, plus synthesis."""

from .records import (
    CONN_FIELDS,
    KIND_FIELDS,
    SENSOR_TYPES,
    TABLE_FOR_KIND,
    ZEEK_KINDS,
    AttackLabel,
    ConnRecord,
    IngestError,
    RecordInvariantError,
    SensorReading,
    UnknownKind,
    UnknownLabel,
    ZeekRecord,
    conn_from_fields,
    conn_to_row,
    parse_iot23_label,
)
from .sensors import BadTimestamp, BadValue, ingest_sensors, sensor_rows, serialize_sensors
from .synth import (
    ALL_KINDS,
    InvalidSpec,
    SynthSpec,
    apportion,
    device_rows,
    parse_devices,
    serialize_devices,
    synthesize_logs,
)
from .zeek import (
    MissingFieldsHeader,
    ParseIssue,
    ZeekParseResult,
    datetime_to_epoch,
    epoch_to_datetime,
    parse_zeek,
    rows_for_table,
    serialize_zeek,
    table_name,
)

__all__ = [
    "ALL_KINDS",
    "AttackLabel",
    "BadTimestamp",
    "BadValue",
    "CONN_FIELDS",
    "ConnRecord",
    "IngestError",
    "InvalidSpec",
    "KIND_FIELDS",
    "MissingFieldsHeader",
    "ParseIssue",
    "RecordInvariantError",
    "SENSOR_TYPES",
    "SensorReading",
    "SynthSpec",
    "TABLE_FOR_KIND",
    "UnknownKind",
    "UnknownLabel",
    "ZEEK_KINDS",
    "ZeekParseResult",
    "ZeekRecord",
    "apportion",
    "conn_from_fields",
    "conn_to_row",
    "datetime_to_epoch",
    "device_rows",
    "epoch_to_datetime",
    "ingest_sensors",
    "parse_devices",
    "parse_iot23_label",
    "parse_zeek",
    "rows_for_table",
    "sensor_rows",
    "serialize_devices",
    "serialize_sensors",
    "serialize_zeek",
    "synthesize_logs",
    "table_name",
]
