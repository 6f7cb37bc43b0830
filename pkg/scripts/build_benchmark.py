#!/usr/bin/env python3
"""End-to-end benchmark build on synthetic data.

Chains the CLI stages (synth -> gen-pairs -> split -> emit) into one
reproducible run. Everything lands under --out; re-running with the same
seed produces a byte-identical tree.
"""

import argparse
import sys

from iotsqlbench.cli import main as cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/benchmark")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--n-pairs", type=int, default=10_985)
    parser.add_argument("--conn", type=int, default=2000, help="synthetic conn.log rows")
    args = parser.parse_args()

    base = ["--seed", str(args.seed), "--out", args.out,
            "--set", f"synth.conn={args.conn}",
            "--set", f"corpus.n_pairs={args.n_pairs}"]
    stages = [
        base + ["synth"],
        base + ["gen-pairs", "--db", f"{args.out}/synth"],
        base + ["split", "--corpus", f"{args.out}/corpus/corpus.jsonl", "--db", f"{args.out}/synth"],
        base + ["emit",
                "--corpus", f"{args.out}/corpus/corpus.jsonl",
                "--pairs-manifest", f"{args.out}/splits/pairs_manifest.txt",
                "--anonymized", f"{args.out}/splits/conn.anonymized.tsv",
                "--network-manifest", f"{args.out}/splits/network_manifest.txt"],
    ]
    for stage in stages:
        code = cli(stage)
        if code != 0:
            return code
    print(f"benchmark built under {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
