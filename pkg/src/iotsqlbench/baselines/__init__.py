"""Malicious-traffic baseline classifiers (stratified, uniform, forest, SVM)."""

from .classifiers import (
    KINDS,
    BaselineError,
    ClassifierModel,
    Hyperparams,
    LinearSVM,
    SingleClass,
    StratifiedBaseline,
    UniformBaseline,
    predict,
    train,
)
from .features import (
    CATEGORICAL_FIELDS,
    EXCLUDED_FIELDS,
    NUMERIC_FIELDS,
    OPTIONAL_NUMERIC_FIELDS,
    DimensionMismatch,
    Empty,
    FeatureError,
    Featurizer,
    fit_featurizer,
)
from .forest import DecisionTree, RandomForest
from .persist import ModelFileError, load_model, save_model

__all__ = [
    "BaselineError",
    "CATEGORICAL_FIELDS",
    "ClassifierModel",
    "DecisionTree",
    "DimensionMismatch",
    "EXCLUDED_FIELDS",
    "Empty",
    "FeatureError",
    "Featurizer",
    "Hyperparams",
    "KINDS",
    "LinearSVM",
    "ModelFileError",
    "NUMERIC_FIELDS",
    "OPTIONAL_NUMERIC_FIELDS",
    "RandomForest",
    "SingleClass",
    "StratifiedBaseline",
    "UniformBaseline",
    "fit_featurizer",
    "load_model",
    "predict",
    "save_model",
    "train",
]
