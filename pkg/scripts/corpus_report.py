#!/usr/bin/env python3
"""Inspect a generated corpus: length stats, construct coverage, temporal share.

Reads a corpus.jsonl (from gen-pairs) and the database dir it came from,
then prints standard dataset-card statistics:
question and SQL token lengths (both, explicitly), category balance, and
per-construct counts.
"""

import argparse
import json
import sys
from pathlib import Path

from iotsqlbench.cli import load_db_dir
from iotsqlbench.templates import construct_coverage, corpus_stats, has_datetime_predicate, read_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("corpus", help="corpus.jsonl path")
    parser.add_argument("--db", help="database dir (enables the temporal scan)")
    args = parser.parse_args()

    pairs = read_corpus(Path(args.corpus).read_text(encoding="utf-8"))
    stats = corpus_stats(pairs)
    print(json.dumps(stats, indent=2, sort_keys=True))

    categories = {}
    for p in pairs:
        categories[p.category] = categories.get(p.category, 0) + 1
    print("categories:", json.dumps(categories, sort_keys=True))
    print("coverage:", json.dumps(construct_coverage(pairs), sort_keys=True))

    if args.db:
        _, db, _ = load_db_dir(Path(args.db))
        temporal = sum(has_datetime_predicate(p.sql, db.schema) for p in pairs)
        print(f"temporal pairs: {temporal}/{len(pairs)} ({temporal / max(len(pairs), 1):.1%})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
