"""Versioned model save/load (JSON).

The file carries the featurizer state and feature names alongside the
learned parameters, so a saved model documents its own reconstruction of
the feature set.
"""

from __future__ import annotations

import json

from .classifiers import (
    ClassifierModel,
    Hyperparams,
    LinearSVM,
    StratifiedBaseline,
    UniformBaseline,
)
from .features import Featurizer
from .forest import RandomForest

FORMAT_VERSION = 1


class ModelFileError(Exception):
    pass


def save_model(model: ClassifierModel, path) -> None:
    payload: dict = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "n_dims": model.n_dims,
        "hyperparams": vars(model.hyperparams),
        "featurizer": model.featurizer.state() if model.featurizer else None,
        "feature_names": model.featurizer.feature_names if model.featurizer else None,
        "expanded_names": model.featurizer.expanded_names if model.featurizer else None,
    }
    if model.kind == "stratified":
        payload["params"] = {"p_malicious": model.model.p_malicious}
    elif model.kind == "uniform":
        payload["params"] = {}
    elif model.kind == "random_forest":
        payload["params"] = model.model.state()
    elif model.kind == "linear_svm":
        payload["params"] = model.model.state()
    else:
        raise ModelFileError(f"unknown kind {model.kind!r}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> ClassifierModel:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format version {version!r}")
    kind = payload["kind"]
    params = payload["params"]
    if kind == "stratified":
        model: object = StratifiedBaseline(p_malicious=params["p_malicious"])
    elif kind == "uniform":
        model = UniformBaseline()
    elif kind == "random_forest":
        model = RandomForest.from_state(params)
    elif kind == "linear_svm":
        model = LinearSVM.from_state(params)
    else:
        raise ModelFileError(f"unknown kind {kind!r}")
    featurizer = Featurizer.from_state(payload["featurizer"]) if payload.get("featurizer") else None
    return ClassifierModel(
        kind=kind,
        model=model,
        n_dims=payload["n_dims"],
        featurizer=featurizer,
        hyperparams=Hyperparams(**payload["hyperparams"]),
    )
