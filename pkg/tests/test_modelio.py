from datetime import datetime

import pytest

from iotsqlbench.ingest import AttackLabel, ConnRecord
from iotsqlbench.modelio import (
    DuplicateId,
    EmptyQuestion,
    MissingId,
    ParseError,
    bool_to_label,
    build_detection_input,
    build_sql_input,
    detection_row,
    echo_gold_detection,
    echo_gold_sql,
    label_to_bool,
    read_detection_examples,
    read_predictions,
    read_sql_examples,
    write_detection_examples,
    write_sql_examples,
)
from iotsqlbench.store import default_schema, linearize_schema
from iotsqlbench.templates import TextSqlPair

REFERENCE_RECORD = ConnRecord(
    ts=datetime(2021, 3, 1, 12, 0, 0),
    uid="CRef01",
    orig_h="192.168.1.1",
    orig_p=80,
    resp_h="192.161.2.2",
    resp_p=8080,
    proto="tcp",
    service="http",
    duration=1.5,
    orig_bytes=100,
    resp_bytes=230,
    conn_state="SF",
    local_orig=True,
    local_resp=False,
    missed_bytes=0,
    history="ShADadFf",
    orig_pkts=4,
    orig_ip_bytes=260,
    resp_pkts=5,
    resp_ip_bytes=430,
    tunnel_parents=None,
    label=AttackLabel.PartOfAHorizontalPortScan,
)


def test_build_sql_input_toy_schema(toy_schema):
    out = build_sql_input("How many sessions?", toy_schema)
    assert out == "How many sessions? | *, T, c, number"


def test_build_sql_input_contains_all_tokens():
    schema = default_schema()
    out = build_sql_input("List everything.", schema)
    question, _, rest = out.partition(" | ")
    assert question == "List everything."
    tokens = rest.split(", ")
    assert len(tokens) == 359
    assert tokens == list(linearize_schema(schema).tokens)


def test_build_sql_input_empty_question(toy_schema):
    with pytest.raises(EmptyQuestion):
        build_sql_input("", toy_schema)
    with pytest.raises(EmptyQuestion):
        build_sql_input("   ", toy_schema)


def test_detection_input_begins_with_instruction_and_ips():
    example = build_detection_input(REFERENCE_RECORD)
    assert example.input.startswith(
        "Is the following network information Malicious? 192.168.1.1 80 192.161.2.2 8080"
    )
    assert example.gold is True
    assert "\t" not in example.row


def test_detection_row_unset_renders_dashes_fixed_arity():
    record = ConnRecord(
        ts=datetime(2021, 3, 1), uid="CDash", orig_h="10.0.0.1", orig_p=1, resp_h="10.0.0.2",
        resp_p=2, proto="udp", service=None, duration=None, orig_bytes=None, resp_bytes=None,
        conn_state="S0", local_orig=None, local_resp=None, missed_bytes=0, history="D",
        orig_pkts=1, orig_ip_bytes=40, resp_pkts=0, resp_ip_bytes=0, tunnel_parents=None,
    )
    fields = detection_row(record).split(" ")
    assert len(fields) == 19
    assert fields[4:9] == ["udp", "-", "-", "-", "-"]  # service..resp_bytes unset
    assert fields[-1] == "-"


def test_detection_input_differs_iff_values_differ():
    import dataclasses

    same = dataclasses.replace(REFERENCE_RECORD)
    assert detection_row(same) == detection_row(REFERENCE_RECORD)
    changed = dataclasses.replace(REFERENCE_RECORD, resp_bytes=231)
    assert detection_row(changed) != detection_row(REFERENCE_RECORD)
    # ts and uid are not part of the row
    shifted = dataclasses.replace(REFERENCE_RECORD, uid="COther", ts=datetime(2022, 1, 1))
    assert detection_row(shifted) == detection_row(REFERENCE_RECORD)


def test_detection_row_stable_across_calls():
    assert detection_row(REFERENCE_RECORD) == detection_row(REFERENCE_RECORD)


def test_label_normalization_both_directions():
    assert label_to_bool("Malicious") is True
    assert label_to_bool("malicious") is True
    assert label_to_bool(" BENIGN ") is False
    assert bool_to_label(True) == "Malicious"
    assert bool_to_label(False) == "Benign"
    assert label_to_bool(bool_to_label(True)) is True
    assert label_to_bool(bool_to_label(False)) is False
    with pytest.raises(ParseError):
        label_to_bool("maybe")


def test_read_predictions_well_formed():
    text = "\n".join(
        '{"id": "p%d", "payload": "SELECT 1"}' % i for i in range(3)
    )
    records = read_predictions(text + "\n", kind="sql")
    assert len(records) == 3
    assert records[0].id == "p0"


def test_read_predictions_duplicate_id():
    text = '{"id": "a", "payload": "x"}\n{"id": "a", "payload": "y"}\n'
    with pytest.raises(DuplicateId):
        read_predictions(text, kind="sql")


def test_read_predictions_missing_id():
    with pytest.raises(MissingId):
        read_predictions('{"payload": "x"}\n', kind="sql")


def test_read_predictions_bad_json_and_label():
    with pytest.raises(ParseError):
        read_predictions("not json\n", kind="sql")
    with pytest.raises(ParseError):
        read_predictions('{"id": "a", "payload": "Sus"}\n', kind="detection")
    ok = read_predictions('{"id": "a", "payload": "benign"}\n', kind="detection")
    assert label_to_bool(ok[0].payload) is False


def test_examples_round_trip(tmp_path, synth_data):
    pairs = [
        TextSqlPair(question="How many rows are in the table?", sql="SELECT COUNT(*) FROM conn.log"),
        TextSqlPair(question="Show every protocol value.", sql="SELECT proto FROM conn.log"),
    ]
    sql_path = tmp_path / "sql.jsonl"
    schema = default_schema()
    written = write_sql_examples(pairs, schema, sql_path)
    again = read_sql_examples(sql_path)
    assert again == written

    det_path = tmp_path / "det.jsonl"
    records = synth_data["conn"][:20]
    examples = write_detection_examples(records, det_path)
    back = read_detection_examples(det_path)
    assert [e.id for e in back] == [e.id for e in examples]
    assert [e.gold for e in back] == [e.gold for e in examples]
    assert [e.input for e in back] == [e.input for e in examples]

    golds = echo_gold_detection(examples)
    assert all(label_to_bool(g.payload) == e.gold for g, e in zip(golds, examples))
    sql_golds = echo_gold_sql(written)
    assert all(g.payload == e.gold_sql for g, e in zip(sql_golds, written))
