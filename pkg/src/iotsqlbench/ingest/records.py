"""Typed records for Zeek logs, attack labels, and sensor readings."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime


class IngestError(Exception):
    pass


class UnknownLabel(IngestError):
    pass


class UnknownKind(IngestError):
    pass


class RecordInvariantError(IngestError):
    """A record value violates its declared range (never silently coerced)."""


class AttackLabel(enum.Enum):
    Attack = "Attack"
    Benign = "Benign"
    CandC = "C&C"
    DDoS = "DDoS"
    FileDownload = "FileDownload"
    HeartBeat = "HeartBeat"
    Mirai = "Mirai"
    Okiru = "Okiru"
    Torii = "Torii"
    PartOfAHorizontalPortScan = "PartOfAHorizontalPortScan"


_LABEL_LOOKUP = {
    label.value.casefold().replace(" ", "").replace("-", "").replace("&", "and"): label
    for label in AttackLabel
}


def _fold_label(text: str) -> str:
    return text.strip().casefold().replace(" ", "").replace("-", "").replace("&", "and")


def parse_iot23_label(raw_label: str, raw_detail: str = "-") -> AttackLabel:
    """Map (label, detailed-label) strings to the ten-variant taxonomy.

    Tolerates case and spacing differences; ``C&C`` maps to CandC.  Raises
    UnknownLabel naming the offending string for anything outside the set.
    """
    coarse = _fold_label(raw_label or "")
    detail = _fold_label(raw_detail or "")
    if coarse == "benign" or (coarse in ("", "unset") and detail in ("", "benign")):
        return AttackLabel.Benign
    if coarse == "malicious":
        if detail in _LABEL_LOOKUP:
            return _LABEL_LOOKUP[detail]
        raise UnknownLabel(f"unknown detailed label {raw_detail!r}")
    if coarse in _LABEL_LOOKUP:
        return _LABEL_LOOKUP[coarse]
    raise UnknownLabel(f"unknown label {raw_label!r}")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise RecordInvariantError(message)


def _check_port(value: int | None, name: str) -> None:
    if value is not None:
        _require(0 <= value <= 65535, f"{name} out of range: {value}")


def _check_count(value: int | None, name: str) -> None:
    if value is not None:
        _require(value >= 0, f"{name} must be nonnegative: {value}")


@dataclass(frozen=True)
class ConnRecord:
    """One Zeek conn.log session plus its attack label."""

    ts: datetime
    uid: str
    orig_h: str
    orig_p: int
    resp_h: str
    resp_p: int
    proto: str
    service: str | None
    duration: float | None
    orig_bytes: int | None
    resp_bytes: int | None
    conn_state: str
    local_orig: bool | None
    local_resp: bool | None
    missed_bytes: int
    history: str
    orig_pkts: int
    orig_ip_bytes: int
    resp_pkts: int
    resp_ip_bytes: int
    tunnel_parents: str | None
    label: AttackLabel = AttackLabel.Benign

    def __post_init__(self) -> None:
        _check_port(self.orig_p, "orig_p")
        _check_port(self.resp_p, "resp_p")
        if self.duration is not None:
            _require(self.duration >= 0, f"duration must be nonnegative: {self.duration}")
        for name in ("orig_bytes", "resp_bytes", "missed_bytes", "orig_pkts",
                     "orig_ip_bytes", "resp_pkts", "resp_ip_bytes"):
            _check_count(getattr(self, name), name)

    @property
    def is_malicious(self) -> bool:
        return self.label is not AttackLabel.Benign


SENSOR_TYPES = ("humidity", "co2", "temperature", "luminosity", "motion")


@dataclass(frozen=True)
class SensorReading:
    sensor_type: str
    room: str
    ts: datetime
    value: float

    def __post_init__(self) -> None:
        if self.sensor_type not in SENSOR_TYPES:
            raise RecordInvariantError(f"unknown sensor type {self.sensor_type!r}")
        if self.sensor_type == "motion" and self.value not in (0, 1):
            raise RecordInvariantError(f"motion value must be 0 or 1: {self.value}")


@dataclass(frozen=True)
class ZeekRecord:
    """Generic typed record for the non-conn Zeek log kinds."""

    kind: str
    fields: tuple  # values in KIND_FIELDS order

    def get(self, name: str):
        return self.fields[_FIELD_INDEX[self.kind][name]]


@dataclass(frozen=True)
class FieldSpec:
    name: str       # record / database column name
    zeek_name: str  # name in the #fields directive
    zeek_type: str  # entry in the #types directive
    vtype: str      # time | str | int | float | bool | port | count | duration


def _f(name, zeek_type, vtype, zeek_name=None) -> FieldSpec:
    return FieldSpec(name=name, zeek_name=zeek_name or name, zeek_type=zeek_type, vtype=vtype)


_ID_FIELDS = [
    _f("orig_h", "addr", "str", zeek_name="id.orig_h"),
    _f("orig_p", "port", "port", zeek_name="id.orig_p"),
    _f("resp_h", "addr", "str", zeek_name="id.resp_h"),
    _f("resp_p", "port", "port", zeek_name="id.resp_p"),
]

CONN_FIELDS = [
    _f("ts", "time", "time"),
    _f("uid", "string", "str"),
    *_ID_FIELDS,
    _f("proto", "enum", "str"),
    _f("service", "string", "str"),
    _f("duration", "interval", "duration"),
    _f("orig_bytes", "count", "count"),
    _f("resp_bytes", "count", "count"),
    _f("conn_state", "string", "str"),
    _f("local_orig", "bool", "bool"),
    _f("local_resp", "bool", "bool"),
    _f("missed_bytes", "count", "count"),
    _f("history", "string", "str"),
    _f("orig_pkts", "count", "count"),
    _f("orig_ip_bytes", "count", "count"),
    _f("resp_pkts", "count", "count"),
    _f("resp_ip_bytes", "count", "count"),
    _f("tunnel_parents", "set[string]", "str"),
]

DNS_FIELDS = [
    _f("ts", "time", "time"),
    _f("uid", "string", "str"),
    *_ID_FIELDS,
    _f("proto", "enum", "str"),
    _f("trans_id", "count", "count"),
    _f("rtt", "interval", "duration"),
    _f("query", "string", "str"),
    _f("qclass", "count", "count"),
    _f("qclass_name", "string", "str"),
    _f("qtype", "count", "count"),
    _f("qtype_name", "string", "str"),
    _f("rcode", "count", "count"),
    _f("rcode_name", "string", "str"),
    _f("AA", "bool", "bool"),
    _f("TC", "bool", "bool"),
    _f("RD", "bool", "bool"),
    _f("RA", "bool", "bool"),
    _f("Z", "count", "count"),
    _f("answers", "vector[string]", "str"),
    _f("TTLs", "vector[interval]", "float"),
    _f("rejected", "bool", "bool"),
]

HTTP_FIELDS = [
    _f("ts", "time", "time"),
    _f("uid", "string", "str"),
    *_ID_FIELDS,
    _f("trans_depth", "count", "count"),
    _f("method", "string", "str"),
    _f("host", "string", "str"),
    _f("uri", "string", "str"),
    _f("referrer", "string", "str"),
    _f("version", "string", "str"),
    _f("user_agent", "string", "str"),
    _f("origin", "string", "str"),
    _f("request_body_len", "count", "count"),
    _f("response_body_len", "count", "count"),
    _f("status_code", "count", "count"),
    _f("status_msg", "string", "str"),
    _f("info_code", "count", "count"),
    _f("info_msg", "string", "str"),
    _f("tags", "set[enum]", "str"),
    _f("username", "string", "str"),
    _f("password", "string", "str"),
    _f("proxied", "set[string]", "str"),
    _f("orig_fuids", "vector[string]", "str"),
    _f("orig_filenames", "vector[string]", "str"),
    _f("orig_mime_types", "vector[string]", "str"),
    _f("resp_fuids", "vector[string]", "str"),
    _f("resp_filenames", "vector[string]", "str"),
    _f("resp_mime_types", "vector[string]", "str"),
]

FILES_FIELDS = [
    _f("ts", "time", "time"),
    _f("fuid", "string", "str"),
    _f("uid", "string", "str"),
    *_ID_FIELDS,
    _f("source", "string", "str"),
    _f("depth", "count", "count"),
    _f("analyzers", "set[string]", "str"),
    _f("mime_type", "string", "str"),
    _f("filename", "string", "str"),
    _f("duration", "interval", "duration"),
    _f("local_orig", "bool", "bool"),
    _f("is_orig", "bool", "bool"),
    _f("seen_bytes", "count", "count"),
    _f("total_bytes", "count", "count"),
    _f("missing_bytes", "count", "count"),
    _f("overflow_bytes", "count", "count"),
    _f("timedout", "bool", "bool"),
    _f("parent_fuid", "string", "str"),
    _f("md5", "string", "str"),
    _f("sha1", "string", "str"),
    _f("sha256", "string", "str"),
    _f("extracted", "string", "str"),
    _f("extracted_cutoff", "bool", "bool"),
    _f("extracted_size", "count", "count"),
]

NTP_FIELDS = [
    _f("ts", "time", "time"),
    _f("uid", "string", "str"),
    *_ID_FIELDS,
    _f("version", "count", "count"),
    _f("mode", "count", "count"),
    _f("stratum", "count", "count"),
    _f("poll", "interval", "float"),
    _f("precision", "interval", "float"),
    _f("root_delay", "interval", "float"),
    _f("root_disp", "interval", "float"),
    _f("ref_id", "string", "str"),
    _f("ref_time", "time", "time"),
    _f("org_time", "time", "time"),
    _f("rec_time", "time", "time"),
    _f("xmt_time", "time", "time"),
    _f("num_exts", "count", "count"),
]

WEIRD_FIELDS = [
    _f("ts", "time", "time"),
    _f("uid", "string", "str"),
    *_ID_FIELDS,
    _f("name", "string", "str"),
    _f("addl", "string", "str"),
    _f("notice", "bool", "bool"),
    _f("peer", "string", "str"),
    _f("source", "string", "str"),
]

ZEEK_KINDS = ("conn", "dns", "http", "files", "ntp", "weird")

KIND_FIELDS = {
    "conn": CONN_FIELDS,
    "dns": DNS_FIELDS,
    "http": HTTP_FIELDS,
    "files": FILES_FIELDS,
    "ntp": NTP_FIELDS,
    "weird": WEIRD_FIELDS,
}

TABLE_FOR_KIND = {kind: f"{kind}.log" for kind in ZEEK_KINDS}

_FIELD_INDEX = {
    kind: {spec.name: i for i, spec in enumerate(fields)}
    for kind, fields in KIND_FIELDS.items()
}

LABEL_FIELDS = [
    FieldSpec(name="label", zeek_name="label", zeek_type="string", vtype="str"),
    FieldSpec(name="detailed_label", zeek_name="detailed-label", zeek_type="string", vtype="str"),
]


def conn_to_row(record: ConnRecord) -> tuple:
    """A 21-value row for the conn.log table (label excluded)."""
    return tuple(getattr(record, spec.name) for spec in CONN_FIELDS)


def zeek_to_row(record: ZeekRecord) -> tuple:
    return record.fields


def conn_from_fields(values: tuple, label: AttackLabel = AttackLabel.Benign) -> ConnRecord:
    kwargs = {spec.name: v for spec, v in zip(CONN_FIELDS, values)}
    return ConnRecord(label=label, **kwargs)
