import pytest

from iotsqlbench.evaluation import (
    Empty,
    GoldExecutionError,
    LengthMismatch,
    MissingPrediction,
    UnknownId,
    detection_metrics,
    execution_accuracy,
    logical_accuracy,
    normalize_sql,
    score_sql_corpus,
)
from iotsqlbench.modelio import PredictionRecord, SqlExample
from iotsqlbench.store import ColumnDef, Database, TableSchema, define_schema
from iotsqlbench.templates import CorpusConfig, generate_corpus


@pytest.fixture()
def ab_db():
    schema = define_schema([
        TableSchema(name="t", columns=(
            ColumnDef("a", "number"), ColumnDef("b", "number"), ColumnDef("x", "text"),
        )),
    ])
    db = Database(schema)
    db.load_records("t", [(1, 10, "Ab"), (2, 20, "ab"), (3, 30, "Ab")])
    return db


# -- logical accuracy


def test_logical_case_insensitive_identifiers():
    assert logical_accuracy("select A from T", "SELECT a FROM t")


def test_logical_differs_on_extra_condition():
    assert not logical_accuracy("SELECT a FROM t", "SELECT a FROM t WHERE x=1")


def test_logical_preserves_literal_case(ab_db):
    upper = "SELECT * FROM t WHERE x = 'Ab'"
    lower = "SELECT * FROM t WHERE x = 'ab'"
    # the case change alters execution results, so logical must distinguish
    rows_upper = ab_db.execute(upper.replace("'", '"')).rows
    rows_lower = ab_db.execute(lower.replace("'", '"')).rows
    assert rows_upper != rows_lower
    assert not logical_accuracy(upper, lower)


def test_logical_whitespace_and_punctuation_normalization():
    assert logical_accuracy("SELECT  AVG( x )  FROM t", "select avg(x) from t")
    assert logical_accuracy("SELECT a , b FROM t", "SELECT a,b FROM t")
    assert logical_accuracy("SELECT a FROM t;", "SELECT a FROM t")
    assert logical_accuracy("SELECT x FROM t WHERE y = 'Key'", 'SELECT x FROM t WHERE y = "Key"')


def test_normalize_never_raises_on_junk():
    assert isinstance(normalize_sql("DROP ??? ~~ garbage ("), str)


# -- execution accuracy


def test_execution_identity(ab_db):
    assert execution_accuracy("SELECT a FROM t", "SELECT a FROM t", ab_db)


def test_execution_swapped_columns_false(ab_db):
    # oracle: positional multisets computed by hand from the three rows
    ab = {(1, 10), (2, 20), (3, 30)}
    ba = {(10, 1), (20, 2), (30, 3)}
    assert ab != ba
    assert not execution_accuracy("SELECT b, a FROM t", "SELECT a, b FROM t", ab_db)


def test_execution_true_for_equivalent_but_different_queries(ab_db):
    # brute force over the three rows: both forms return exactly {(3, 30)}
    rows = [(1, 10), (2, 20), (3, 30)]
    max_a = max(a for a, _ in rows)
    by_filter = {(a, b) for a, b in rows if a == max_a}
    assert by_filter == {(3, 30)}
    pred = "SELECT a, b FROM t WHERE (a = (SELECT MAX(a) FROM t))"
    gold = "SELECT a, b FROM t WHERE (a >= 3)"
    assert not logical_accuracy(pred, gold)
    assert execution_accuracy(pred, gold, ab_db)
    # and an inequality rewrite on integer data: a > 1 is a >= 2
    brute_gt = {a for a, _ in rows if a > 1}
    brute_ge = {a for a, _ in rows if a >= 2}
    assert brute_gt == brute_ge
    assert execution_accuracy(
        "SELECT a FROM t WHERE (a > 1)", "SELECT a FROM t WHERE (a >= 2)", ab_db
    )


def test_execution_row_order_insensitive_without_order_by(ab_db):
    # same rows either way; gold has no ORDER BY so order is ignored
    assert execution_accuracy("SELECT a FROM t ORDER BY a DESC", "SELECT a FROM t", ab_db)


def test_execution_order_sensitive_with_gold_order_by(ab_db):
    assert not execution_accuracy(
        "SELECT a FROM t ORDER BY a DESC", "SELECT a FROM t ORDER BY a", ab_db
    )
    assert execution_accuracy(
        "SELECT a FROM t ORDER BY a ASC", "SELECT a FROM t ORDER BY a", ab_db
    )


def test_execution_column_names_ignored(ab_db):
    assert execution_accuracy("SELECT a FROM t", "SELECT a FROM t", ab_db)
    # a and b differ in values, so this is false despite equal arity
    assert not execution_accuracy("SELECT b FROM t", "SELECT a FROM t", ab_db)


def test_execution_pred_error_is_false(ab_db):
    assert not execution_accuracy("SELECT nope FROM t", "SELECT a FROM t", ab_db)
    assert not execution_accuracy("garbage", "SELECT a FROM t", ab_db)


def test_execution_gold_error_raises(ab_db):
    with pytest.raises(GoldExecutionError):
        execution_accuracy("SELECT a FROM t", "SELECT nope FROM t", ab_db)


def test_execution_numeric_tolerance(ab_db):
    db = Database(define_schema([
        TableSchema(name="u", columns=(ColumnDef("v", "number"),)),
    ]))
    db.load_records("u", [(0.1,), (0.2,), (0.3,)])
    # AVG computed by different association orders may differ in the last ulp
    assert execution_accuracy("SELECT AVG(v) FROM u", "SELECT AVG(v) FROM u", db)


# -- corpus scoring


def _examples(ab_db):
    pairs = [
        ("SELECT a FROM t", "SELECT a FROM t"),
        ("SELECT b FROM t", "SELECT b FROM t"),
        ("SELECT COUNT(*) FROM t", "SELECT COUNT(*) FROM t"),
        ("SELECT a, b FROM t", "SELECT a, b FROM t"),
    ]
    examples = [SqlExample(id=f"e{i}", input=f"q{i}", gold_sql=g) for i, (_, g) in enumerate(pairs)]
    predictions = [PredictionRecord(id=f"e{i}", payload=p) for i, (p, _) in enumerate(pairs)]
    return examples, predictions


def test_score_echo_is_perfect(ab_db):
    examples, predictions = _examples(ab_db)
    report = score_sql_corpus(examples, predictions, ab_db)
    assert report.execution_acc == 1.0 and report.logical_acc == 1.0
    assert report.per_table["t"].n == 4
    assert not report.failures


def test_score_one_wrong_of_four(ab_db):
    examples, predictions = _examples(ab_db)
    predictions[1] = PredictionRecord(id="e1", payload="SELECT a FROM t")
    report = score_sql_corpus(examples, predictions, ab_db)
    assert report.execution_acc == pytest.approx(0.75)
    assert report.logical_acc == pytest.approx(0.75)
    assert [f[0] for f in report.failures] == ["e1"]


def test_score_missing_prediction(ab_db):
    examples, predictions = _examples(ab_db)
    with pytest.raises(MissingPrediction):
        score_sql_corpus(examples, predictions[:-1], ab_db)


def test_score_unknown_id(ab_db):
    examples, predictions = _examples(ab_db)
    predictions.append(PredictionRecord(id="zzz", payload="SELECT 1"))
    with pytest.raises(UnknownId):
        score_sql_corpus(examples, predictions, ab_db)


def test_score_monotone_aggregation(ab_db):
    examples, predictions = _examples(ab_db)
    base = score_sql_corpus(examples, predictions, ab_db)
    predictions[2] = PredictionRecord(id="e2", payload="SELECT a FROM t")
    flipped = score_sql_corpus(examples, predictions, ab_db)
    n = len(examples)
    assert base.execution_acc - flipped.execution_acc == pytest.approx(1 / n)
    assert base.logical_acc - flipped.logical_acc == pytest.approx(1 / n)


def test_score_per_table_buckets(ab_db):
    examples = [
        SqlExample(id="a", input="q", gold_sql="SELECT a FROM t"),
        SqlExample(id="b", input="q", gold_sql="SELECT 1"),
    ]
    predictions = [
        PredictionRecord(id="a", payload="SELECT a FROM t"),
        PredictionRecord(id="b", payload="SELECT 1"),
    ]
    report = score_sql_corpus(examples, predictions, ab_db)
    assert report.per_table["t"].n == 1
    assert sum(bucket.n for bucket in report.per_table.values()) >= 1


def test_per_table_bucket_counts_match_gold_scan(synth_db):
    # bucket size must equal the number of goldens whose SQL references the
    # table, counted by scanning tables_referenced independently
    pairs = generate_corpus(synth_db, CorpusConfig(n_pairs=1500, seed=142))
    conn_pairs = [p for p in pairs if "conn.log" in p.tables_referenced][:142]
    other_pairs = [p for p in pairs if "conn.log" not in p.tables_referenced][:58]
    assert len(conn_pairs) == 142
    chosen = conn_pairs + other_pairs
    examples = [SqlExample(id=f"e{i}", input=p.question, gold_sql=p.sql) for i, p in enumerate(chosen)]
    predictions = [PredictionRecord(id=ex.id, payload=ex.gold_sql) for ex in examples]
    report = score_sql_corpus(examples, predictions, synth_db)
    assert report.per_table["conn.log"].n == 142
    assert sum(b.n for b in report.per_table.values()) >= len(chosen)


def test_report_deterministic_bytes(ab_db):
    examples, predictions = _examples(ab_db)
    a = score_sql_corpus(examples, predictions, ab_db).to_json()
    b = score_sql_corpus(examples, predictions, ab_db).to_json()
    assert a == b


def test_soundness_logical_implies_execution(synth_db):
    pairs = generate_corpus(synth_db, CorpusConfig(n_pairs=150, seed=77))
    for pair in pairs:
        # gold against itself: logical true must imply execution true
        assert logical_accuracy(pair.sql, pair.sql)
        assert execution_accuracy(pair.sql, pair.sql, synth_db)


# -- detection metrics


def test_detection_perfect():
    report = detection_metrics([True, False, True], [True, False, True])
    assert report.macro_precision == 1.0
    assert report.macro_recall == 1.0
    assert report.macro_f1 == 1.0


def test_detection_hand_computed_confusion():
    golds = [True] * 50 + [False] * 50
    preds = [True] * 40 + [False] * 10 + [True] * 20 + [False] * 30
    report = detection_metrics(golds, preds)
    assert report.confusion == {"tp": 40, "fn": 10, "fp": 20, "tn": 30}
    # hand computation from the standard formulas:
    #   precision: malicious 40/60, benign 30/40 -> macro 17/24
    #   recall:    malicious 40/50, benign 30/50 -> macro 7/10
    #   F1:        malicious 8/11,  benign 2/3   -> macro 23/33
    assert report.macro_precision == pytest.approx(17 / 24, abs=1e-9)
    assert report.macro_recall == pytest.approx(7 / 10, abs=1e-9)
    assert report.macro_f1 == pytest.approx(23 / 33, abs=1e-9)


def test_detection_all_one_class_on_balanced():
    golds = [True] * 50 + [False] * 50
    preds = [True] * 100
    report = detection_metrics(golds, preds)
    # positive class: P=.5 R=1 F1=2/3; negative class: all zero
    assert report.macro_f1 == pytest.approx(1 / 3, abs=1e-9)
    assert report.per_class["benign"].f1 == 0.0


def test_detection_errors():
    with pytest.raises(LengthMismatch):
        detection_metrics([True], [True, False])
    with pytest.raises(Empty):
        detection_metrics([], [])


def test_detection_bounds_and_macro_le_max():
    golds = [True, True, False, False, True, False]
    preds = [True, False, True, False, True, False]
    report = detection_metrics(golds, preds)
    for value in (report.macro_precision, report.macro_recall, report.macro_f1):
        assert 0.0 <= value <= 1.0
    assert report.macro_f1 <= max(m.f1 for m in report.per_class.values())
