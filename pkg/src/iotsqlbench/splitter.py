"""Train/dev/test splitting with leakage controls.

Text-SQL pairs split by ratio (floor sizes, remainder to train).  Network
records split attack-disjointly: malicious classes seen in training never
appear in dev or test, benign rows are allocated to hit per-split targets,
and IPs/timestamps are randomized before release (consistent IP bijection,
independent per-record time offsets).
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from datetime import timedelta

from .ingest.records import AttackLabel, ConnRecord

SPLITS = ("train", "dev", "test")

DEFAULT_TRAIN_ATTACKS = frozenset(
    {AttackLabel.PartOfAHorizontalPortScan, AttackLabel.Okiru}
)


class SplitError(Exception):
    pass


class BadRatios(SplitError):
    pass


class InsufficientBenign(SplitError):
    pass


class EmptyAttackClass(SplitError):
    pass


@dataclass
class SplitManifest:
    assignment: dict  # item id -> "train" | "dev" | "test"
    ratios: tuple | None
    seed: int
    train_attack_labels: frozenset = frozenset()
    ip_map: dict = field(default_factory=dict)
    time_offsets: dict = field(default_factory=dict)  # record id -> signed seconds

    def ids_for(self, split: str) -> list:
        return [i for i, s in self.assignment.items() if s == split]

    def counts(self) -> dict:
        out = {s: 0 for s in SPLITS}
        for s in self.assignment.values():
            out[s] += 1
        return out

    def check_attack_disjoint(self, labels_by_id: dict) -> None:
        """Assert no malicious class leaks from train into dev/test."""
        train = {
            labels_by_id[i]
            for i, s in self.assignment.items()
            if s == "train" and labels_by_id[i] is not AttackLabel.Benign
        }
        other = {
            labels_by_id[i]
            for i, s in self.assignment.items()
            if s != "train" and labels_by_id[i] is not AttackLabel.Benign
        }
        overlap = train & other
        if overlap:
            raise SplitError(f"attack classes leak across splits: {sorted(l.value for l in overlap)}")


def _check_ratios(ratios) -> tuple:
    ratios = tuple(ratios)
    if len(ratios) != 3:
        raise BadRatios(f"expected 3 ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise BadRatios("ratios must be nonnegative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatios(f"ratios must sum to 1, got {sum(ratios)}")
    return ratios


def split_pairs(pairs: list, ratios=(0.6, 0.2, 0.2), seed: int = 0) -> SplitManifest:
    """Ratio split over pairs; ids are input positions as strings.

    Sizes are floor(n * ratio) per split with the remainder on train.
    """
    ratios = _check_ratios(ratios)
    n = len(pairs)
    n_dev = int(n * ratios[1])
    n_test = int(n * ratios[2])
    n_train = n - n_dev - n_test
    order = list(range(n))
    random.Random(seed).shuffle(order)
    assignment: dict = {}
    for pos, idx in enumerate(order):
        if pos < n_train:
            split = "train"
        elif pos < n_train + n_dev:
            split = "dev"
        else:
            split = "test"
        assignment[str(idx)] = split
    assignment = {str(i): assignment[str(i)] for i in range(n)}
    return SplitManifest(assignment=assignment, ratios=ratios, seed=seed)


@dataclass(frozen=True)
class NetworkSplitConfig:
    """Benign allocation and optional exact per-split targets.

    With no explicit targets: all train-attack malicious records go to
    train, the remaining malicious records split evenly between dev and
    test, and benign records are allocated by ``benign_fracs``.  Explicit
    ``totals``/``malicious_totals`` reproduce fixed-size splits.
    """

    benign_fracs: tuple = (0.5, 0.25, 0.25)
    totals: tuple | None = None            # (train, dev, test) total sizes
    malicious_totals: tuple | None = None  # (train, dev, test) malicious sizes


def split_network(
    records: list,
    train_attacks=DEFAULT_TRAIN_ATTACKS,
    seed: int = 0,
    config: NetworkSplitConfig | None = None,
) -> SplitManifest:
    """Attack-disjoint split keyed by record uid."""
    config = config or NetworkSplitConfig()
    train_attacks = frozenset(train_attacks)
    if AttackLabel.Benign in train_attacks:
        raise SplitError("train_attacks must not include Benign")
    _check_ratios(config.benign_fracs)

    rng = random.Random(seed)
    benign = [r for r in records if r.label is AttackLabel.Benign]
    train_mal = [r for r in records if r.label is not AttackLabel.Benign and r.label in train_attacks]
    other_mal = [r for r in records if r.label is not AttackLabel.Benign and r.label not in train_attacks]
    rng.shuffle(benign)
    rng.shuffle(train_mal)
    rng.shuffle(other_mal)

    if config.malicious_totals is not None:
        m_train, m_dev, m_test = config.malicious_totals
        if m_train > 0 and not train_mal:
            raise EmptyAttackClass("no records from the train attack classes")
        if (m_dev > 0 or m_test > 0) and not other_mal:
            raise EmptyAttackClass("no records from the held-out attack classes")
        if m_train > len(train_mal):
            raise SplitError(f"need {m_train} train-attack records, have {len(train_mal)}")
        if m_dev + m_test > len(other_mal):
            raise SplitError(
                f"need {m_dev + m_test} held-out malicious records, have {len(other_mal)}"
            )
        train_mal = train_mal[:m_train]
        dev_mal = other_mal[:m_dev]
        test_mal = other_mal[m_dev : m_dev + m_test]
    else:
        half = len(other_mal) // 2
        dev_mal = other_mal[:half]
        test_mal = other_mal[half:]

    if config.totals is not None:
        b_targets = [
            config.totals[i] - n_mal
            for i, n_mal in enumerate((len(train_mal), len(dev_mal), len(test_mal)))
        ]
        if any(b < 0 for b in b_targets):
            raise SplitError("totals smaller than malicious counts")
    else:
        b_targets = _benign_targets(len(benign), config.benign_fracs)
    if sum(b_targets) > len(benign):
        raise InsufficientBenign(
            f"need {sum(b_targets)} benign records, have {len(benign)}"
        )

    assignment: dict = {}
    cursor = 0
    benign_parts = []
    for target in b_targets:
        benign_parts.append(benign[cursor : cursor + target])
        cursor += target
    for split, part in zip(SPLITS, ([*train_mal], [*dev_mal], [*test_mal])):
        for r in part:
            assignment[r.uid] = split
    for split, part in zip(SPLITS, benign_parts):
        for r in part:
            assignment[r.uid] = split
    manifest = SplitManifest(
        assignment=assignment,
        ratios=None,
        seed=seed,
        train_attack_labels=train_attacks,
    )
    manifest.check_attack_disjoint({r.uid: r.label for r in records if r.uid in assignment})
    return manifest


def _benign_targets(n: int, fracs) -> list[int]:
    targets = [int(n * f) for f in fracs]
    targets[0] += n - sum(targets)
    return targets


@dataclass(frozen=True)
class MergedRecord:
    """Binary-labeled view of a record; the detailed label stays for audit."""

    record: ConnRecord
    is_malicious: bool

    @property
    def audit_label(self) -> AttackLabel:
        return self.record.label


def merge_labels(records: list) -> list[MergedRecord]:
    """Collapse the ten attack classes to a single malicious flag."""
    return [MergedRecord(record=r, is_malicious=r.label is not AttackLabel.Benign) for r in records]


_ANON_BLOCKS = ("198.18", "198.19")  # benchmarking range, disjoint from real captures


@dataclass
class AnonymizationMaps:
    ip_map: dict
    time_offsets: dict


def anonymize(records: list, seed: int = 0, max_offset_days: int = 30):
    """Randomize identifiers: one IP bijection for all records, independent
    per-record timestamp offsets.  All other fields are untouched."""
    rng = random.Random(seed)
    input_ips = sorted({r.orig_h for r in records} | {r.resp_h for r in records})
    pool_iter = _synthetic_ips(set(input_ips))
    shuffled = list(input_ips)
    rng.shuffle(shuffled)
    ip_map = {ip: next(pool_iter) for ip in shuffled}

    out = []
    offsets = {}
    max_offset = max_offset_days * 86400
    for r in records:
        offset = rng.randint(-max_offset, max_offset)
        offsets[r.uid] = offset
        out.append(
            dataclasses.replace(
                r,
                orig_h=ip_map[r.orig_h],
                resp_h=ip_map[r.resp_h],
                ts=r.ts + timedelta(seconds=offset),
            )
        )
    return out, AnonymizationMaps(ip_map=ip_map, time_offsets=offsets)


def _synthetic_ips(exclude: set):
    for block in _ANON_BLOCKS:
        for third in range(256):
            for fourth in range(1, 255):
                candidate = f"{block}.{third}.{fourth}"
                if candidate not in exclude:
                    yield candidate
    raise SplitError("synthetic address pool exhausted")


# ---------------------------------------------------------------------------
# manifest file format: header block then one "<id>\t<split>" line per item


def dump_manifest(manifest: SplitManifest) -> str:
    header = {
        "seed": manifest.seed,
        "ratios": list(manifest.ratios) if manifest.ratios else None,
        "train_attacks": sorted(l.value for l in manifest.train_attack_labels),
    }
    lines = [f"# {json.dumps(header, sort_keys=True)}"]
    for item_id in manifest.assignment:
        lines.append(f"{item_id}\t{manifest.assignment[item_id]}")
    return "\n".join(lines) + "\n"


def load_manifest(stream) -> SplitManifest:
    if hasattr(stream, "read"):
        text = stream.read()
    else:
        text = stream
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise SplitError("manifest missing header")
    header = json.loads(lines[0][2:])
    assignment = {}
    for raw in lines[1:]:
        if not raw.strip():
            continue
        item_id, split = raw.split("\t")
        if split not in SPLITS:
            raise SplitError(f"bad split name {split!r}")
        assignment[item_id] = split
    return SplitManifest(
        assignment=assignment,
        ratios=tuple(header["ratios"]) if header.get("ratios") else None,
        seed=header.get("seed", 0),
        train_attack_labels=frozenset(
            AttackLabel(v) for v in header.get("train_attacks", [])
        ),
    )


def dump_anonymization_maps(maps: AnonymizationMaps) -> str:
    return json.dumps(
        {"ip_map": maps.ip_map, "time_offsets": maps.time_offsets},
        sort_keys=True,
        indent=2,
    )
