"""Command-line pipeline: synth | ingest | gen-pairs | split | emit |
eval-sql | eval-detect | baseline.

Every stage writes its artifacts under the output directory plus a run
manifest (config hash, inputs, artifact digests).  Stages are pure
functions of (config, seed, inputs): reruns produce byte-identical trees.
Exit codes: 0 success, 1 data error, 2 config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import baselines, evaluation, modelio, splitter, templates
from .config import ConfigError, RunConfig, default_config_text
from .ingest import (
    SENSOR_TYPES,
    ZEEK_KINDS,
    IngestError,
    SynthSpec,
    ingest_sensors,
    parse_devices,
    parse_zeek,
    serialize_devices,
    serialize_sensors,
    serialize_zeek,
    synthesize_logs,
)
from .ingest.sensors import sensor_rows
from .ingest.synth import device_rows
from .ingest.zeek import rows_for_table, table_name
from .store import Database, StoreError, default_schema, dump_schema_text, load_schema_file

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONFIG = 2

DATA_ERRORS = (
    IngestError,
    StoreError,
    templates.TemplateError,
    splitter.SplitError,
    modelio.ModelIOError,
    evaluation.EvalError,
    baselines.BaselineError,
    baselines.FeatureError,
    baselines.ModelFileError,
)


class OutputLock:
    """One run owns an output directory at a time."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / ".lock"

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(
                f"output dir is locked by another run (remove {self.path} if stale)"
            ) from None
        os.close(fd)
        return self

    def __exit__(self, *exc):
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass
        return False


class ArtifactWriter:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.artifacts: dict[str, str] = {}

    def write(self, rel: str, text: str) -> Path:
        path = self.out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.artifacts[rel] = hashlib.sha256(data).hexdigest()
        return path

    def _portable(self, value) -> str:
        # inputs inside the output dir are recorded relative to it, so a
        # rerun rooted elsewhere produces the same manifest bytes
        try:
            rel = Path(value).resolve().relative_to(self.out_dir.resolve())
            return f"out:{rel}"
        except (ValueError, OSError):
            return str(value)

    def manifest(self, command: str, cfg: RunConfig, inputs: dict) -> None:
        payload = {
            "command": command,
            "config_hash": cfg.config_hash(),
            "seed": cfg.get_int("seed"),
            "inputs": {k: self._portable(v) for k, v in sorted(inputs.items())},
            "artifacts": dict(sorted(self.artifacts.items())),
        }
        rel = f"run-{command}.json"
        path = self.out_dir / rel
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_schema(cfg: RunConfig):
    path = cfg.raw("schema")
    return load_schema_file(path) if path else default_schema()


# ---------------------------------------------------------------------------
# database directory: schema.txt + normalized per-table logs


def write_db_dir(writer: ArtifactWriter, rel_dir: str, schema, data: dict) -> None:
    writer.write(f"{rel_dir}/schema.txt", dump_schema_text(schema))
    for kind in ZEEK_KINDS:
        if data.get(kind):
            writer.write(f"{rel_dir}/{kind}.log.tsv", serialize_zeek(data[kind], kind))
    for sensor in SENSOR_TYPES:
        if data.get(sensor):
            writer.write(f"{rel_dir}/{sensor}.csv", serialize_sensors(data[sensor]))
    if data.get("devices"):
        writer.write(f"{rel_dir}/devices.csv", serialize_devices(data["devices"]))


def read_logs_dir(path: Path) -> dict:
    """Parse every recognized log file in a directory; returns records per kind."""
    data: dict = {}
    issues = []
    for kind in ZEEK_KINDS:
        for name in (f"{kind}.log.tsv", f"{kind}.log", f"{kind}.log.labeled"):
            candidate = path / name
            if candidate.exists():
                result = parse_zeek(candidate.read_text(encoding="utf-8"), kind)
                data[kind] = result.records
                issues.extend((f"{name}:{i.line_no}", i.message) for i in result.issues)
                break
    for sensor in SENSOR_TYPES:
        candidate = path / f"{sensor}.csv"
        if candidate.exists():
            data[sensor] = ingest_sensors(candidate.read_text(encoding="utf-8"), sensor)
    candidate = path / "devices.csv"
    if candidate.exists():
        data["devices"] = parse_devices(candidate.read_text(encoding="utf-8"))
    if not data:
        raise IngestError(f"no recognizable log files under {path}")
    return data | {"_issues": issues}


def build_database(schema, data: dict) -> Database:
    db = Database(schema)
    for kind in ZEEK_KINDS:
        records = data.get(kind)
        if records:
            db.load_records(table_name(kind), rows_for_table(records, kind))
    for sensor in SENSOR_TYPES:
        readings = data.get(sensor)
        if readings:
            db.load_records(sensor, sensor_rows(readings))
    devices = data.get("devices")
    if devices:
        db.load_records("devices", device_rows(devices))
    return db


def load_db_dir(path: Path):
    schema_file = path / "schema.txt"
    schema = load_schema_file(str(schema_file)) if schema_file.exists() else default_schema()
    data = read_logs_dir(path)
    data.pop("_issues", None)
    return schema, build_database(schema, data), data


# ---------------------------------------------------------------------------
# commands


def cmd_synth(cfg: RunConfig, out: Path, args) -> int:
    counts = {kind: cfg.get_int(f"synth.{kind}") for kind in ZEEK_KINDS}
    for sensor in SENSOR_TYPES:
        counts[sensor] = cfg.get_int("synth.sensors")
    counts["devices"] = cfg.get_int("synth.devices")
    spec = SynthSpec(
        counts=counts,
        label_mix=cfg.get_label_mix("synth.mix"),
        window=cfg.get_window("synth.window"),
        address_pool_size=cfg.get_int("synth.pool"),
        seed=cfg.get_int("seed"),
    )
    data = synthesize_logs(spec)
    with_schema = _load_schema(cfg)
    writer = ArtifactWriter(out)
    write_db_dir(writer, "synth", with_schema, data)
    writer.manifest("synth", cfg, inputs={})
    print(f"synth: wrote {len(writer.artifacts)} files under {out / 'synth'}")
    return EXIT_OK


def cmd_ingest(cfg: RunConfig, out: Path, args) -> int:
    logs_dir = Path(args.logs)
    if not logs_dir.is_dir():
        raise ConfigError(f"--logs {logs_dir} is not a directory")
    data = read_logs_dir(logs_dir)
    issues = data.pop("_issues")
    schema = _load_schema(cfg)
    build_database(schema, data)  # validates types/arity before writing
    writer = ArtifactWriter(out)
    write_db_dir(writer, "db", schema, data)
    if issues:
        writer.write("db/ingest_issues.txt", "".join(f"{loc}\t{msg}\n" for loc, msg in issues))
        print(f"ingest: {len(issues)} malformed lines reported", file=sys.stderr)
    writer.manifest("ingest", cfg, inputs={"logs": logs_dir})
    counts = {k: len(v) for k, v in data.items()}
    print(f"ingest: {counts}")
    return EXIT_OK


def cmd_gen_pairs(cfg: RunConfig, out: Path, args) -> int:
    _, db, _ = load_db_dir(Path(args.db))
    corpus_cfg = templates.CorpusConfig(
        n_pairs=cfg.get_int("corpus.n_pairs"),
        seed=cfg.get_int("seed"),
        template_weights=cfg.get_weights("corpus.weights"),
        temporal_floor=cfg.get_float("corpus.temporal_floor"),
    )
    pairs = templates.generate_corpus(db, corpus_cfg)
    writer = ArtifactWriter(out)
    writer.write("corpus/corpus.jsonl", "".join(templates.pair_to_json(p) + "\n" for p in pairs))
    stats = templates.corpus_stats(pairs)
    stats["construct_coverage"] = templates.construct_coverage(pairs)
    stats["temporal_pairs"] = sum(
        templates.has_datetime_predicate(p.sql, db.schema) for p in pairs
    )
    writer.write("corpus/stats.json", json.dumps(stats, indent=2, sort_keys=True) + "\n")
    writer.manifest("gen-pairs", cfg, inputs={"db": args.db})
    print(f"gen-pairs: {len(pairs)} pairs; stats: {json.dumps(stats['question_length'])}")
    return EXIT_OK


def cmd_split(cfg: RunConfig, out: Path, args) -> int:
    writer = ArtifactWriter(out)
    inputs: dict = {}
    seed = cfg.get_int("seed")
    if args.corpus:
        pairs = templates.read_corpus(Path(args.corpus).read_text(encoding="utf-8"))
        manifest = splitter.split_pairs(pairs, ratios=cfg.get_floats("split.ratios"), seed=seed)
        writer.write("splits/pairs_manifest.txt", splitter.dump_manifest(manifest))
        inputs["corpus"] = args.corpus
        print(f"split: pairs {manifest.counts()}")
    if args.db:
        _, _, data = load_db_dir(Path(args.db))
        records = data.get("conn") or []
        if not records:
            raise IngestError("network split requested but no conn records found")
        anonymized, maps = splitter.anonymize(
            records, seed=seed, max_offset_days=cfg.get_int("split.max_offset_days")
        )
        totals = cfg.get_ints("split.totals") or None
        mal_totals = cfg.get_ints("split.malicious_totals") or None
        net_cfg = splitter.NetworkSplitConfig(
            benign_fracs=cfg.get_floats("split.benign_fracs"),
            totals=totals,
            malicious_totals=mal_totals,
        )
        manifest = splitter.split_network(
            anonymized,
            train_attacks=cfg.get_labels("split.train_attacks"),
            seed=seed,
            config=net_cfg,
        )
        kept = {r.uid for r in anonymized} & set(manifest.assignment)
        writer.write("splits/network_manifest.txt", splitter.dump_manifest(manifest))
        writer.write(
            "splits/conn.anonymized.tsv",
            serialize_zeek([r for r in anonymized if r.uid in kept], "conn"),
        )
        # maps stay out of released splits; kept beside them for audit only
        writer.write(
            "splits/private_anonymization_maps.json",
            splitter.dump_anonymization_maps(maps) + "\n",
        )
        inputs["db"] = args.db
        print(f"split: network {manifest.counts()}")
    if not inputs:
        raise ConfigError("split needs --corpus and/or --db")
    writer.manifest("split", cfg, inputs=inputs)
    return EXIT_OK


def cmd_emit(cfg: RunConfig, out: Path, args) -> int:
    writer = ArtifactWriter(out)
    inputs: dict = {}
    schema = _load_schema(cfg)
    if args.corpus and args.pairs_manifest:
        pairs = templates.read_corpus(Path(args.corpus).read_text(encoding="utf-8"))
        manifest = splitter.load_manifest(Path(args.pairs_manifest).read_text(encoding="utf-8"))
        for split in splitter.SPLITS:
            subset = [pairs[int(i)] for i in manifest.ids_for(split)]
            path = writer.out_dir / f"model_io/sql_{split}.jsonl"
            path.parent.mkdir(parents=True, exist_ok=True)
            modelio.write_sql_examples(subset, schema, path, separator=cfg.raw("emit.separator"))
            writer.artifacts[f"model_io/sql_{split}.jsonl"] = hashlib.sha256(
                path.read_bytes()
            ).hexdigest()
        inputs.update({"corpus": args.corpus, "pairs_manifest": args.pairs_manifest})
    if args.anonymized and args.network_manifest:
        result = parse_zeek(Path(args.anonymized).read_text(encoding="utf-8"), "conn")
        by_uid = {r.uid: r for r in result.records}
        manifest = splitter.load_manifest(Path(args.network_manifest).read_text(encoding="utf-8"))
        for split in splitter.SPLITS:
            subset = [by_uid[i] for i in manifest.ids_for(split) if i in by_uid]
            path = writer.out_dir / f"model_io/detect_{split}.jsonl"
            path.parent.mkdir(parents=True, exist_ok=True)
            modelio.write_detection_examples(subset, path, instruction=cfg.raw("emit.instruction"))
            writer.artifacts[f"model_io/detect_{split}.jsonl"] = hashlib.sha256(
                path.read_bytes()
            ).hexdigest()
        inputs.update({"anonymized": args.anonymized, "network_manifest": args.network_manifest})
    if not inputs:
        raise ConfigError("emit needs (--corpus, --pairs-manifest) and/or (--anonymized, --network-manifest)")
    writer.manifest("emit", cfg, inputs=inputs)
    print(f"emit: wrote {len(writer.artifacts)} model input files")
    return EXIT_OK


def cmd_eval_sql(cfg: RunConfig, out: Path, args) -> int:
    _, db, _ = load_db_dir(Path(args.db))
    examples = modelio.read_sql_examples(Path(args.examples))
    predictions = modelio.read_predictions(Path(args.predictions), kind="sql")
    report = evaluation.score_sql_corpus(
        examples, predictions, db, timeout=cfg.get_float("eval.timeout")
    )
    writer = ArtifactWriter(out)
    writer.write("eval/sql_report.json", report.to_json() + "\n")
    writer.write("eval/sql_report.txt", report.to_text() + "\n")
    writer.manifest("eval-sql", cfg, inputs={
        "db": args.db, "examples": args.examples, "predictions": args.predictions,
    })
    print(report.to_text())
    return EXIT_OK


def cmd_eval_detect(cfg: RunConfig, out: Path, args) -> int:
    examples = modelio.read_detection_examples(Path(args.examples))
    predictions = modelio.read_predictions(Path(args.predictions), kind="detection")
    by_id = {p.id: p for p in predictions}
    known = {ex.id for ex in examples}
    for p in predictions:
        if p.id not in known:
            raise evaluation.UnknownId(f"prediction for unknown id {p.id!r}")
    golds, preds = [], []
    for ex in examples:
        if ex.id not in by_id:
            raise evaluation.MissingPrediction(f"no prediction for example {ex.id!r}")
        golds.append(ex.gold)
        preds.append(modelio.label_to_bool(by_id[ex.id].payload))
    report = evaluation.detection_metrics(golds, preds)
    writer = ArtifactWriter(out)
    writer.write("eval/detect_report.json", report.to_json() + "\n")
    writer.write("eval/detect_report.txt", report.to_text() + "\n")
    writer.manifest("eval-detect", cfg, inputs={
        "examples": args.examples, "predictions": args.predictions,
    })
    print(report.to_text())
    return EXIT_OK


def cmd_baseline(cfg: RunConfig, out: Path, args) -> int:
    result = parse_zeek(Path(args.anonymized).read_text(encoding="utf-8"), "conn")
    by_uid = {r.uid: r for r in result.records}
    manifest = splitter.load_manifest(Path(args.network_manifest).read_text(encoding="utf-8"))
    subsets = {
        split: [by_uid[i] for i in manifest.ids_for(split) if i in by_uid]
        for split in splitter.SPLITS
    }
    if not subsets["train"]:
        raise baselines.Empty("no training records in the manifest")
    seed = cfg.get_int("seed")
    kind = cfg.raw("baseline.kind")
    if kind not in baselines.KINDS:
        raise ConfigError(f"baseline.kind must be one of {baselines.KINDS}")
    hp = baselines.Hyperparams(
        n_trees=cfg.get_int("baseline.n_trees"),
        max_depth=cfg.get_int("baseline.max_depth"),
        svm_epochs=cfg.get_int("baseline.svm_epochs"),
        svm_lr=cfg.get_float("baseline.svm_lr"),
        svm_l2=cfg.get_float("baseline.svm_l2"),
    )
    featurizer = baselines.fit_featurizer(subsets["train"])
    X_train = featurizer.transform(subsets["train"])
    y_train = [r.is_malicious for r in subsets["train"]]
    model = baselines.train(kind, X_train, y_train, hyperparams=hp, seed=seed, featurizer=featurizer)

    writer = ArtifactWriter(out)
    model_path = writer.out_dir / "baseline/model.json"
    model_path.parent.mkdir(parents=True, exist_ok=True)
    baselines.save_model(model, model_path)
    writer.artifacts["baseline/model.json"] = hashlib.sha256(model_path.read_bytes()).hexdigest()
    if kind == "linear_svm":
        log_lines = [f"epoch {i + 1}: loss {loss:.6f}" for i, loss in enumerate(model.model.epoch_losses)]
        writer.write("baseline/svm_training.log", "\n".join(log_lines) + "\n")
    for split in ("dev", "test"):
        records = subsets[split]
        if not records:
            continue
        X = featurizer.transform(records)
        golds = [r.is_malicious for r in records]
        preds = baselines.predict(model, X, seed=seed)
        report = evaluation.detection_metrics(golds, list(preds))
        writer.write(f"baseline/report_{split}.json", report.to_json() + "\n")
        writer.write(f"baseline/report_{split}.txt", report.to_text() + "\n")
        print(f"[{split}] {kind}: macro-F1 {report.macro_f1:.3f}")
    writer.manifest("baseline", cfg, inputs={
        "anonymized": args.anonymized, "network_manifest": args.network_manifest,
    })
    return EXIT_OK


def cmd_config(cfg: RunConfig, out: Path, args) -> int:
    print(default_config_text())
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iotsqlbench",
        description="IoT text-to-SQL benchmark builder and model scorer",
    )
    parser.add_argument("--config", help="config file (key = value lines)")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synth", help="generate synthetic logs, sensors, devices")

    p = sub.add_parser("ingest", help="parse logs into a normalized database dir")
    p.add_argument("--logs", required=True, help="directory of Zeek/sensor/device files")

    p = sub.add_parser("gen-pairs", help="generate the text-SQL corpus from a database dir")
    p.add_argument("--db", default="out/db", help="database dir (from ingest or synth)")

    p = sub.add_parser("split", help="split pairs and/or network records")
    p.add_argument("--corpus", help="corpus.jsonl to split by ratio")
    p.add_argument("--db", help="database dir holding labeled conn records")

    p = sub.add_parser("emit", help="write model input files from manifests")
    p.add_argument("--corpus", help="corpus.jsonl")
    p.add_argument("--pairs-manifest", help="pairs manifest file")
    p.add_argument("--anonymized", help="anonymized conn TSV")
    p.add_argument("--network-manifest", help="network manifest file")

    p = sub.add_parser("eval-sql", help="score SQL predictions")
    p.add_argument("--db", required=True, help="database dir to execute against")
    p.add_argument("--examples", required=True, help="emitted sql examples jsonl")
    p.add_argument("--predictions", required=True, help="prediction jsonl (id, payload)")

    p = sub.add_parser("eval-detect", help="score detection predictions")
    p.add_argument("--examples", required=True, help="emitted detection examples jsonl")
    p.add_argument("--predictions", required=True, help="prediction jsonl (id, payload)")

    p = sub.add_parser("baseline", help="train and evaluate a traffic baseline")
    p.add_argument("--anonymized", required=True, help="anonymized conn TSV")
    p.add_argument("--network-manifest", required=True, help="network manifest file")

    sub.add_parser("config", help="print the documented default config")
    return parser


_HANDLERS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "gen-pairs": cmd_gen_pairs,
    "split": cmd_split,
    "emit": cmd_emit,
    "eval-sql": cmd_eval_sql,
    "eval-detect": cmd_eval_detect,
    "baseline": cmd_baseline,
    "config": cmd_config,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, overrides=args.set)
        if args.seed is not None:
            cfg.values["seed"] = str(args.seed)
        out = Path(args.out)
        handler = _HANDLERS[args.command]
        if args.command == "config":
            return handler(cfg, out, args)
        with OutputLock(out):
            return handler(cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
