"""Feature extraction for the traffic classifiers.

Identifier columns (ts, uid, orig_h, resp_h, tunnel_parents) never
contribute features.  Numeric columns pass through (unset becomes 0 plus
a presence flag); categorical columns are one-hot over a training-time
vocabulary with an explicit "other" slot for unseen values.
"""

from __future__ import annotations

import numpy as np

from ..ingest.records import ConnRecord


class FeatureError(Exception):
    pass


class Empty(FeatureError):
    pass


class DimensionMismatch(FeatureError):
    pass


NUMERIC_FIELDS = (
    "duration", "orig_bytes", "resp_bytes", "missed_bytes", "orig_pkts",
    "orig_ip_bytes", "resp_pkts", "resp_ip_bytes", "orig_p", "resp_p",
)
OPTIONAL_NUMERIC_FIELDS = ("duration", "orig_bytes", "resp_bytes")
CATEGORICAL_FIELDS = ("proto", "service", "conn_state", "history", "local_orig", "local_resp")
EXCLUDED_FIELDS = ("ts", "uid", "orig_h", "resp_h", "tunnel_parents")

DEFAULT_VOCAB_BUDGET = {
    "proto": 8,
    "service": 12,
    "conn_state": 16,
    "history": 24,
    "local_orig": 4,
    "local_resp": 4,
}

OTHER = "<other>"


def _categorical_text(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "T" if value else "F"
    return str(value)


class Featurizer:
    """Frozen vocabularies from training data; pure transform afterwards."""

    def __init__(self, vocab_budget: dict | None = None):
        self.vocab_budget = dict(DEFAULT_VOCAB_BUDGET)
        if vocab_budget:
            self.vocab_budget.update(vocab_budget)
        self.vocab: dict[str, list[str]] = {}
        self._fitted = False

    def fit(self, records: list[ConnRecord]) -> "Featurizer":
        if not records:
            raise Empty("cannot fit a featurizer on zero records")
        for name in CATEGORICAL_FIELDS:
            counts: dict[str, int] = {}
            for r in records:
                text = _categorical_text(getattr(r, name))
                counts[text] = counts.get(text, 0) + 1
            budget = self.vocab_budget[name]
            ranked = sorted(counts, key=lambda v: (-counts[v], v))[:budget]
            self.vocab[name] = sorted(ranked)
        self._fitted = True
        return self

    # -- descriptive surface

    @property
    def feature_names(self) -> list[str]:
        """The named features (numerics, presence flags, categoricals)."""
        names = list(NUMERIC_FIELDS)
        names += [f"{f}_present" for f in OPTIONAL_NUMERIC_FIELDS]
        names += list(CATEGORICAL_FIELDS)
        return names

    @property
    def expanded_names(self) -> list[str]:
        """Column names of the numeric matrix (one-hot slots expanded)."""
        self._require_fitted()
        names = list(NUMERIC_FIELDS)
        names += [f"{f}_present" for f in OPTIONAL_NUMERIC_FIELDS]
        for field in CATEGORICAL_FIELDS:
            names += [f"{field}={v}" for v in self.vocab[field]]
            names.append(f"{field}={OTHER}")
        return names

    @property
    def n_dims(self) -> int:
        self._require_fitted()
        base = len(NUMERIC_FIELDS) + len(OPTIONAL_NUMERIC_FIELDS)
        return base + sum(len(self.vocab[f]) + 1 for f in CATEGORICAL_FIELDS)

    @property
    def numeric_dims(self) -> list[int]:
        return list(range(len(NUMERIC_FIELDS)))

    def _require_fitted(self) -> None:
        if not self._fitted:
            raise FeatureError("featurizer is not fitted")

    def transform(self, records: list[ConnRecord]) -> np.ndarray:
        self._require_fitted()
        n = len(records)
        X = np.zeros((n, self.n_dims), dtype=np.float64)
        for i, r in enumerate(records):
            col = 0
            for name in NUMERIC_FIELDS:
                value = getattr(r, name)
                X[i, col] = 0.0 if value is None else float(value)
                col += 1
            for name in OPTIONAL_NUMERIC_FIELDS:
                X[i, col] = 0.0 if getattr(r, name) is None else 1.0
                col += 1
            for name in CATEGORICAL_FIELDS:
                vocab = self.vocab[name]
                text = _categorical_text(getattr(r, name))
                width = len(vocab) + 1
                try:
                    slot = vocab.index(text)
                except ValueError:
                    slot = width - 1  # other
                X[i, col + slot] = 1.0
                col += width
        return X

    def state(self) -> dict:
        self._require_fitted()
        return {"vocab_budget": self.vocab_budget, "vocab": self.vocab}

    @classmethod
    def from_state(cls, state: dict) -> "Featurizer":
        out = cls(vocab_budget=state["vocab_budget"])
        out.vocab = {k: list(v) for k, v in state["vocab"].items()}
        out._fitted = True
        return out


def fit_featurizer(records: list[ConnRecord], vocab_budget: dict | None = None) -> Featurizer:
    return Featurizer(vocab_budget=vocab_budget).fit(records)
