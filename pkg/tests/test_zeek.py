import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotsqlbench.ingest import (
    AttackLabel,
    ConnRecord,
    MissingFieldsHeader,
    SynthSpec,
    UnknownKind,
    UnknownLabel,
    parse_iot23_label,
    parse_zeek,
    serialize_zeek,
    synthesize_logs,
)

HEADER = "\n".join([
    "#separator \\x09",
    "#set_separator\t,",
    "#empty_field\t(empty)",
    "#unset_field\t-",
    "#path\tconn",
    "#open\t2020-01-01-00-00-00",
    "#fields\t" + "\t".join([
        "ts", "uid", "id.orig_h", "id.orig_p", "id.resp_h", "id.resp_p", "proto",
        "service", "duration", "orig_bytes", "resp_bytes", "conn_state", "local_orig",
        "local_resp", "missed_bytes", "history", "orig_pkts", "orig_ip_bytes",
        "resp_pkts", "resp_ip_bytes", "tunnel_parents",
    ]),
    "#types\t" + "\t".join([
        "time", "string", "addr", "port", "addr", "port", "enum", "string", "interval",
        "count", "count", "string", "bool", "bool", "count", "string", "count", "count",
        "count", "count", "set[string]",
    ]),
])

GOOD_LINE = "\t".join([
    "1616161616.123456", "CAbc1", "192.168.1.5", "51234", "10.0.0.9", "80", "tcp",
    "http", "1.500000", "450", "2300", "SF", "T", "F", "0", "ShADadFf", "7", "730",
    "9", "2660", "-",
])


def test_header_only_stream_yields_zero_records():
    result = parse_zeek(HEADER + "\n", "conn")
    assert len(result.records) == 0
    assert result.issues == []


def test_conn_line_parses_all_21_columns():
    result = parse_zeek(HEADER + "\n" + GOOD_LINE + "\n", "conn")
    assert not result.issues
    (rec,) = result.records
    assert isinstance(rec, ConnRecord)
    assert rec.uid == "CAbc1"
    assert rec.orig_p == 51234 and rec.resp_p == 80
    assert rec.duration == pytest.approx(1.5)
    assert rec.orig_bytes == 450 and rec.resp_ip_bytes == 2660
    assert rec.local_orig is True and rec.local_resp is False
    assert rec.tunnel_parents is None
    assert rec.ts.year == 2021 and rec.ts.microsecond == 123456
    assert rec.label is AttackLabel.Benign and rec.is_malicious is False


def test_dash_maps_to_unset():
    line = GOOD_LINE.split("\t")
    line[8] = "-"   # duration
    line[9] = "-"   # orig_bytes
    line[7] = "-"   # service
    result = parse_zeek(HEADER + "\n" + "\t".join(line) + "\n", "conn")
    (rec,) = result.records
    assert rec.duration is None and rec.orig_bytes is None and rec.service is None


def test_labels_as_declared_columns():
    header = HEADER.replace("#fields\t", "#fields\t").replace(
        "\ttunnel_parents", "\ttunnel_parents\tlabel\tdetailed-label"
    ).replace("\tset[string]", "\tset[string]\tstring\tstring")
    line = GOOD_LINE + "\tMalicious\tOkiru"
    result = parse_zeek(header + "\n" + line + "\n", "conn")
    (rec,) = result.records
    assert rec.label is AttackLabel.Okiru and rec.is_malicious


def test_labels_as_extra_trailing_columns():
    line = GOOD_LINE + "\tMalicious\tPartOfAHorizontalPortScan"
    result = parse_zeek(HEADER + "\n" + line + "\n", "conn")
    (rec,) = result.records
    assert rec.label is AttackLabel.PartOfAHorizontalPortScan


def test_labels_glued_with_spaces():
    parts = GOOD_LINE.split("\t")
    parts[-1] = "(empty)   Malicious   Okiru"
    result = parse_zeek(HEADER + "\n" + "\t".join(parts) + "\n", "conn")
    (rec,) = result.records
    assert rec.label is AttackLabel.Okiru
    assert rec.tunnel_parents == ""


def test_field_count_mismatch_reported_with_line_number():
    bad = "\t".join(GOOD_LINE.split("\t")[:15])
    result = parse_zeek(HEADER + "\n" + GOOD_LINE + "\n" + bad + "\n", "conn")
    assert len(result.records) == 1
    (issue,) = result.issues
    assert issue.line_no == 10  # header is 8 lines, good line 9
    assert "15" in issue.message


def test_out_of_range_port_reported_not_coerced():
    parts = GOOD_LINE.split("\t")
    parts[3] = "70000"
    result = parse_zeek(HEADER + "\n" + "\t".join(parts) + "\n", "conn")
    assert not result.records
    (issue,) = result.issues
    assert "orig_p" in issue.message


def test_negative_count_reported():
    parts = GOOD_LINE.split("\t")
    parts[16] = "-3"
    result = parse_zeek(HEADER + "\n" + "\t".join(parts) + "\n", "conn")
    assert not result.records and len(result.issues) == 1


def test_missing_fields_header():
    with pytest.raises(MissingFieldsHeader):
        parse_zeek("#separator \\x09\n" + GOOD_LINE + "\n", "conn")


def test_unknown_kind():
    with pytest.raises(UnknownKind):
        parse_zeek(HEADER, "ssl")


def test_json_lines_format():
    line = (
        '{"ts": 1616161616.5, "uid": "CJson1", "id.orig_h": "192.168.1.2",'
        ' "id.orig_p": 1024, "id.resp_h": "10.0.0.1", "id.resp_p": 443,'
        ' "proto": "tcp", "conn_state": "SF", "missed_bytes": 0, "history": "S",'
        ' "orig_pkts": 1, "orig_ip_bytes": 40, "resp_pkts": 1, "resp_ip_bytes": 40,'
        ' "label": "Malicious", "detailed-label": "C&C"}'
    )
    result = parse_zeek(line + "\n", "conn")
    (rec,) = result.records
    assert rec.uid == "CJson1"
    assert rec.label is AttackLabel.CandC
    assert rec.duration is None


def test_parse_iot23_label_cases():
    assert parse_iot23_label("Benign", "-") is AttackLabel.Benign
    assert parse_iot23_label("benign", "") is AttackLabel.Benign
    assert parse_iot23_label("Malicious", "PartOfAHorizontalPortScan") is AttackLabel.PartOfAHorizontalPortScan
    assert parse_iot23_label("MALICIOUS", " okiru ") is AttackLabel.Okiru
    assert parse_iot23_label("Malicious", "C&C") is AttackLabel.CandC
    assert parse_iot23_label("Malicious", "c and c".replace(" ", "")) is AttackLabel.CandC
    assert parse_iot23_label("DDoS", "-") is AttackLabel.DDoS
    with pytest.raises(UnknownLabel) as exc:
        parse_iot23_label("Malicious", "Zerg")
    assert "Zerg" in str(exc.value)


def test_label_taxonomy_closed():
    assert len(AttackLabel) == 10
    expected = {
        "Attack", "Benign", "C&C", "DDoS", "FileDownload", "HeartBeat",
        "Mirai", "Okiru", "Torii", "PartOfAHorizontalPortScan",
    }
    assert {label.value for label in AttackLabel} == expected


def test_round_trip_all_kinds(synth_data):
    for kind in ("conn", "dns", "http", "files", "ntp", "weird"):
        text = serialize_zeek(synth_data[kind], kind)
        back = parse_zeek(text, kind)
        assert not back.issues
        assert back.records == synth_data[kind]
        assert serialize_zeek(back.records, kind) == text


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 40))
def test_generator_parser_duality(seed, n):
    spec = SynthSpec(
        counts={"conn": n},
        label_mix={AttackLabel.Benign: 0.5, AttackLabel.Okiru: 0.25, AttackLabel.DDoS: 0.25},
        seed=seed,
    )
    records = synthesize_logs(spec)["conn"]
    text = serialize_zeek(records, "conn")
    back = parse_zeek(text, "conn")
    assert not back.issues
    assert back.records == records
