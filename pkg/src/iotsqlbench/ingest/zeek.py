"""Zeek log parsing and serialization.

Handles both classic TSV (``#separator``/``#fields`` directive headers)
and line-delimited JSON.  ``-`` is the unset marker, ``(empty)`` the empty
collection.  Labeled IoT-23 conn logs are accepted in the three shapes
seen in the wild: label columns declared in ``#fields``, appended as extra
TSV columns, or glued onto the final field with spaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import IO, Iterable, Union

from .records import (
    CONN_FIELDS,
    KIND_FIELDS,
    LABEL_FIELDS,
    TABLE_FOR_KIND,
    AttackLabel,
    ConnRecord,
    FieldSpec,
    IngestError,
    RecordInvariantError,
    UnknownKind,
    UnknownLabel,
    ZeekRecord,
    parse_iot23_label,
)

_EPOCH = datetime(1970, 1, 1)


class MissingFieldsHeader(IngestError):
    pass


@dataclass(frozen=True)
class ParseIssue:
    line_no: int
    message: str


@dataclass
class ZeekParseResult:
    records: list
    issues: list[ParseIssue]

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def epoch_to_datetime(text: str) -> datetime:
    """Zeek epoch-seconds string to naive UTC datetime, exact to the microsecond."""
    if "." in text:
        secs_part, frac = text.split(".", 1)
        usec = int((frac + "000000")[:6])
    else:
        secs_part, usec = text, 0
    return _EPOCH + timedelta(seconds=int(secs_part), microseconds=usec)


def datetime_to_epoch(dt: datetime) -> str:
    delta = dt - _EPOCH
    secs = delta.days * 86400 + delta.seconds
    return f"{secs}.{delta.microseconds:06d}"


def _convert(value: str, spec: FieldSpec, unset: str, empty: str):
    if value == unset:
        return None
    if value == empty:
        return ""
    vtype = spec.vtype
    if vtype == "str":
        return value
    if vtype == "time":
        return epoch_to_datetime(value)
    if vtype in ("count", "port", "int"):
        out = int(value)
    elif vtype in ("float", "duration"):
        out = float(value)
    elif vtype == "bool":
        if value in ("T", "true", "True"):
            return True
        if value in ("F", "false", "False"):
            return False
        raise ValueError(f"bad bool {value!r}")
    else:
        raise ValueError(f"unhandled field type {vtype!r}")
    if vtype == "port" and not 0 <= out <= 65535:
        raise ValueError(f"{spec.name} out of range: {out}")
    if vtype in ("count", "duration") and out < 0:
        raise ValueError(f"{spec.name} must be nonnegative: {out}")
    return out


def _render(value, spec: FieldSpec) -> str:
    if value is None:
        return "-"
    if value == "" and spec.vtype == "str":
        return "(empty)"
    if spec.vtype == "time":
        return datetime_to_epoch(value)
    if spec.vtype == "bool":
        return "T" if value else "F"
    if spec.vtype in ("float", "duration"):
        return f"{value:.6f}"
    return str(value)


def _read_lines(stream: Union[str, IO[str], Iterable[str]]) -> list[str]:
    if isinstance(stream, str):
        return stream.splitlines()
    if hasattr(stream, "read"):
        return stream.read().splitlines()
    return [line.rstrip("\n") for line in stream]


def parse_zeek(stream, kind: str) -> ZeekParseResult:
    """Parse one Zeek log stream into typed records.

    Returns the records plus per-line issues for malformed rows (wrong
    field count, out-of-range values); bad lines are reported, never
    silently coerced into records.
    """
    if kind not in KIND_FIELDS:
        raise UnknownKind(f"unknown Zeek log kind {kind!r}")
    lines = _read_lines(stream)
    for line in lines:
        if not line.strip():
            continue
        if line.lstrip().startswith("{"):
            return _parse_json(lines, kind)
        break
    return _parse_tsv(lines, kind)


def _field_plan(kind: str, names: list[str]) -> list[FieldSpec | None]:
    """Match ``#fields`` names to specs; unknown columns map to None (skipped)."""
    by_zeek = {spec.zeek_name: spec for spec in KIND_FIELDS[kind]}
    by_name = {spec.name: spec for spec in KIND_FIELDS[kind]}
    label_specs = {spec.zeek_name: spec for spec in LABEL_FIELDS}
    label_specs.update({spec.name: spec for spec in LABEL_FIELDS})
    plan: list[FieldSpec | None] = []
    for name in names:
        spec = by_zeek.get(name) or by_name.get(name)
        if spec is None and kind == "conn":
            spec = label_specs.get(name)
        plan.append(spec)
    return plan


def _parse_tsv(lines: list[str], kind: str) -> ZeekParseResult:
    separator = "\t"
    unset, empty, set_sep = "-", "(empty)", ","
    field_names: list[str] | None = None
    records: list = []
    issues: list[ParseIssue] = []

    plan: list | None = None
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        if raw.startswith("#"):
            directive = raw[1:].split(separator)[0].split(" ")[0]
            if directive == "separator":
                value = raw[1:].split(" ", 1)[1] if " " in raw[1:] else raw[1:].split(separator)[1]
                separator = value.encode().decode("unicode_escape")
            elif directive == "fields":
                field_names = raw[1:].split(separator)[1:]
                plan = _field_plan(kind, field_names)
            elif directive == "unset_field":
                unset = raw[1:].split(separator)[1]
            elif directive == "empty_field":
                empty = raw[1:].split(separator)[1]
            elif directive == "set_separator":
                set_sep = raw[1:].split(separator)[1]  # noqa: F841 - sets stay comma-joined text
            continue
        if plan is None:
            raise MissingFieldsHeader("data line before #fields directive")
        values = raw.split(separator)
        values, line_plan, issue = _reconcile_arity(values, plan, kind, line_no)
        if issue is not None:
            issues.append(issue)
            continue
        try:
            records.append(_build_record(kind, line_plan, values, unset, empty))
        except (ValueError, RecordInvariantError, UnknownLabel) as exc:
            issues.append(ParseIssue(line_no=line_no, message=str(exc)))
    if field_names is None:
        raise MissingFieldsHeader("no #fields directive found")
    return ZeekParseResult(records=records, issues=issues)


def _reconcile_arity(values: list[str], plan: list, kind: str, line_no: int):
    """Handle IoT-23 label-column quirks; otherwise enforce the field count."""
    expected = len(plan)
    if len(values) == expected:
        # labels glued into the final column with spaces
        if kind == "conn" and len(plan) == len(CONN_FIELDS) and "  " in values[-1].strip():
            tail = values[-1].split()
            if len(tail) == 3:
                return values[:-1] + tail, plan + LABEL_FIELDS, None
        return values, plan, None
    if kind == "conn" and len(values) == expected + 2 and not any(
        spec in LABEL_FIELDS for spec in plan
    ):
        return values, plan + LABEL_FIELDS, None
    return values, plan, ParseIssue(
        line_no=line_no,
        message=f"expected {expected} fields, got {len(values)}",
    )


def _build_record(kind: str, plan: list, values: list[str], unset: str, empty: str):
    converted: dict[str, object] = {}
    raw_label = None
    raw_detail = None
    for spec, value in zip(plan, values):
        if spec is None:
            continue
        if spec.name == "label":
            raw_label = value
            continue
        if spec.name == "detailed_label":
            raw_detail = value
            continue
        converted[spec.name] = _convert(value, spec, unset, empty)
    if kind == "conn":
        label = AttackLabel.Benign
        if raw_label is not None:
            label = parse_iot23_label(raw_label, raw_detail if raw_detail is not None else "-")
        kwargs = {spec.name: converted.get(spec.name) for spec in CONN_FIELDS}
        _require_present(kwargs)
        return ConnRecord(label=label, **kwargs)
    ordered = tuple(converted.get(spec.name) for spec in KIND_FIELDS[kind])
    return ZeekRecord(kind=kind, fields=ordered)


def _require_present(kwargs: dict) -> None:
    required = ("ts", "uid", "orig_h", "orig_p", "resp_h", "resp_p",
                "proto", "conn_state", "missed_bytes", "history",
                "orig_pkts", "orig_ip_bytes", "resp_pkts", "resp_ip_bytes")
    for name in required:
        if kwargs.get(name) is None:
            raise ValueError(f"required field {name} is unset")


def _parse_json(lines: list[str], kind: str) -> ZeekParseResult:
    records: list = []
    issues: list[ParseIssue] = []
    specs = KIND_FIELDS[kind]
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            issues.append(ParseIssue(line_no=line_no, message=f"bad json: {exc}"))
            continue
        try:
            converted = {}
            for spec in specs:
                value = obj.get(spec.zeek_name, obj.get(spec.name))
                converted[spec.name] = _convert_json(value, spec)
            if kind == "conn":
                label = AttackLabel.Benign
                if "label" in obj or "detailed-label" in obj:
                    label = parse_iot23_label(
                        str(obj.get("label", "-")), str(obj.get("detailed-label", "-"))
                    )
                _require_present(converted)
                records.append(ConnRecord(label=label, **converted))
            else:
                records.append(
                    ZeekRecord(kind=kind, fields=tuple(converted[s.name] for s in specs))
                )
        except (ValueError, RecordInvariantError, UnknownLabel) as exc:
            issues.append(ParseIssue(line_no=line_no, message=str(exc)))
    return ZeekParseResult(records=records, issues=issues)


def _convert_json(value, spec: FieldSpec):
    if value is None:
        return None
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    if spec.vtype == "time":
        return epoch_to_datetime(repr(value) if isinstance(value, float) else str(value))
    if spec.vtype in ("count", "port", "int"):
        out = int(value)
        if spec.vtype == "port" and not 0 <= out <= 65535:
            raise ValueError(f"{spec.name} out of range: {out}")
        if spec.vtype == "count" and out < 0:
            raise ValueError(f"{spec.name} must be nonnegative: {out}")
        return out
    if spec.vtype in ("float", "duration"):
        out = float(value)
        if spec.vtype == "duration" and out < 0:
            raise ValueError(f"{spec.name} must be nonnegative: {out}")
        return out
    if spec.vtype == "bool":
        if isinstance(value, bool):
            return value
        raise ValueError(f"bad bool {value!r}")
    return str(value)


def serialize_zeek(records: Iterable, kind: str, labeled: bool | None = None) -> str:
    """Render records as a Zeek TSV log (deterministic header, no wall clock)."""
    if kind not in KIND_FIELDS:
        raise UnknownKind(f"unknown Zeek log kind {kind!r}")
    records = list(records)
    specs = list(KIND_FIELDS[kind])
    if kind == "conn":
        if labeled is None:
            labeled = any(isinstance(r, ConnRecord) for r in records)
        if labeled:
            specs = specs + LABEL_FIELDS
    lines = [
        "#separator \\x09",
        "#set_separator\t,",
        "#empty_field\t(empty)",
        "#unset_field\t-",
        f"#path\t{kind}",
        "#open\t2000-01-01-00-00-00",
        "#fields\t" + "\t".join(spec.zeek_name for spec in specs),
        "#types\t" + "\t".join(spec.zeek_type for spec in specs),
    ]
    for record in records:
        if kind == "conn":
            row = [_render(getattr(record, spec.name), spec) for spec in CONN_FIELDS]
            if labeled:
                if record.label is AttackLabel.Benign:
                    row += ["Benign", "-"]
                else:
                    row += ["Malicious", record.label.value]
        else:
            row = [_render(v, spec) for v, spec in zip(record.fields, specs)]
        lines.append("\t".join(row))
    lines.append("#close\t2000-01-01-00-00-00")
    return "\n".join(lines) + "\n"


def rows_for_table(records: Iterable, kind: str) -> list[tuple]:
    """Store-ready rows (conn label columns excluded; table schema order)."""
    out = []
    for record in records:
        if isinstance(record, ConnRecord):
            out.append(tuple(getattr(record, spec.name) for spec in CONN_FIELDS))
        else:
            out.append(record.fields)
    return out


def table_name(kind: str) -> str:
    if kind not in TABLE_FOR_KIND:
        raise UnknownKind(f"unknown Zeek log kind {kind!r}")
    return TABLE_FOR_KIND[kind]
