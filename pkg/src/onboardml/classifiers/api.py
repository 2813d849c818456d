"""Uniform train/predict/persist interface over the four classifier kinds.

A ModelSpec names the kind, its hyperparameters, and the seed; train() fills
in defaults, validates everything, and dispatches. Fitted models serialize to
a self-describing JSON document that embeds the vocabulary plus its hash, so
a loaded model can featurize new issues and detect artifact corruption.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..features.vectorize import (
    EXTRA_FEATURE_NAMES,
    FeatureMatrix,
    Vocabulary,
    vocabulary_from_dict,
    vocabulary_hash,
    vocabulary_to_dict,
)
from . import forest as forest_mod
from . import naive_bayes as nb_mod
from . import svm as svm_mod
from . import tree as tree_mod
from .forest import ForestNodes
from .naive_bayes import NbParams
from .svm import SvmParams
from .tree import TreeNodes, canonical_csc, canonical_csr

MODEL_KINDS = ("RandomForest", "DecisionTree", "GaussianNB", "SVM")

MODEL_FORMAT = "onboardml-model"
MODEL_FORMAT_VERSION = 1

MAX_SEED = (1 << 64) - 1


class TrainingError(Exception):
    """Invalid training inputs or hyperparameters."""


class ArtifactError(Exception):
    """Persisted model fails validation (corrupt, wrong shape, bad hash)."""


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparameters: Mapping[str, object]
    seed: int


@dataclass(frozen=True)
class Prediction:
    """label is positive iff the score clears the kind's threshold:
    vote fraction or posterior strictly above 0.5 (ties fall negative),
    SVM margin at or above 0."""

    label: str
    score: float


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    vocabulary: Vocabulary
    negative_count: int
    positive_count: int
    params: TreeNodes | ForestNodes | NbParams | SvmParams
    metadata: Mapping[str, object] = field(default_factory=dict)


_HP_DEFAULTS = {
    "RandomForest": {"n_estimators": 100, "max_features": "auto"},
    "DecisionTree": {
        "criterion": "gini",
        "splitter": "best",
        "min_samples_split": 2,
        "min_samples_leaf": 1,
        "max_features": "all",
    },
    "GaussianNB": {"var_smoothing": 1e-9},
    "SVM": {"C": 1.0, "epochs": 100},
}


def _require_int(hp: dict, key: str, minimum: int) -> int:
    value = hp[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise TrainingError(f"hyperparameter {key} must be an integer, got {value!r}")
    if value < minimum:
        raise TrainingError(f"hyperparameter {key} must be >= {minimum}, got {value}")
    return value


def _require_choice(hp: dict, key: str, choices: tuple[str, ...]) -> str:
    value = hp[key]
    if value not in choices:
        raise TrainingError(
            f"hyperparameter {key} must be one of {', '.join(choices)}, got {value!r}"
        )
    return value


def _require_positive_float(hp: dict, key: str) -> float:
    value = hp[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TrainingError(f"hyperparameter {key} must be a number, got {value!r}")
    value = float(value)
    if not value > 0.0 or not np.isfinite(value):
        raise TrainingError(f"hyperparameter {key} must be finite and > 0, got {value}")
    return value


def validate_hyperparameters(kind: str, supplied: Mapping[str, object]) -> dict:
    """Merge defaults, reject unknown names, and type-check every value."""
    if kind not in MODEL_KINDS:
        raise TrainingError(f"unknown model kind: {kind!r}")
    defaults = _HP_DEFAULTS[kind]
    unknown = sorted(set(supplied) - set(defaults))
    if unknown:
        raise TrainingError(f"unknown hyperparameters for {kind}: {', '.join(unknown)}")
    hp = {**defaults, **dict(supplied)}
    if kind == "RandomForest":
        _require_int(hp, "n_estimators", 1)
        _require_choice(hp, "max_features", tree_mod.FEATURE_OPTIONS)
    elif kind == "DecisionTree":
        _require_choice(hp, "criterion", tree_mod.CRITERIA)
        _require_choice(hp, "splitter", tree_mod.SPLITTERS)
        _require_int(hp, "min_samples_split", 2)
        _require_int(hp, "min_samples_leaf", 1)
        _require_choice(hp, "max_features", tree_mod.FEATURE_OPTIONS)
    elif kind == "GaussianNB":
        hp["var_smoothing"] = _require_positive_float(hp, "var_smoothing")
    else:
        hp["C"] = _require_positive_float(hp, "C")
        _require_int(hp, "epochs", 1)
    return hp


def _validate_labels(features: FeatureMatrix, labels: Sequence[int]) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != features.n_rows:
        raise TrainingError(
            f"labels length {y.shape[0] if y.ndim == 1 else y.shape} does not match "
            f"{features.n_rows} feature rows"
        )
    if y.shape[0] == 0:
        raise TrainingError("training set is empty")
    values = set(np.unique(y).tolist())
    if not values <= {0, 1}:
        raise TrainingError(f"labels must be 0 or 1, got {sorted(values)}")
    if values != {0, 1}:
        raise TrainingError("training set must contain both classes")
    return y


def train(spec: ModelSpec, features: FeatureMatrix, labels: Sequence[int]) -> TrainedModel:
    """Fit spec.kind on the feature matrix; deterministic given spec.seed."""
    hp = validate_hyperparameters(spec.kind, spec.hyperparameters)
    if not isinstance(spec.seed, int) or isinstance(spec.seed, bool) or not (
        0 <= spec.seed <= MAX_SEED
    ):
        raise TrainingError(f"seed must be an integer in [0, 2^64), got {spec.seed!r}")
    y = _validate_labels(features, labels)
    X = features.combined()
    if spec.kind == "RandomForest":
        params: object = forest_mod.fit(
            canonical_csc(X),
            y,
            n_estimators=hp["n_estimators"],
            max_features=hp["max_features"],
            seed=spec.seed,
        )
    elif spec.kind == "DecisionTree":
        params = tree_mod.fit(
            canonical_csc(X),
            y,
            criterion=hp["criterion"],
            splitter=hp["splitter"],
            max_features=hp["max_features"],
            min_samples_split=hp["min_samples_split"],
            min_samples_leaf=hp["min_samples_leaf"],
            seed=spec.seed,
        )
    elif spec.kind == "GaussianNB":
        params = nb_mod.fit(canonical_csr(X), y, var_smoothing=hp["var_smoothing"])
    else:
        try:
            params = svm_mod.fit(
                canonical_csr(X), y, c=hp["C"], epochs=hp["epochs"], seed=spec.seed
            )
        except ValueError as exc:
            raise TrainingError(str(exc)) from exc
    resolved = ModelSpec(spec.kind, hp, spec.seed)
    return TrainedModel(
        spec=resolved,
        vocabulary=features.vocabulary,
        negative_count=int(np.count_nonzero(y == 0)),
        positive_count=int(np.count_nonzero(y == 1)),
        params=params,
    )


def scores(model: TrainedModel, features: FeatureMatrix) -> np.ndarray:
    """Raw per-row scores under the model's kind-specific scale."""
    expected = len(model.vocabulary) + len(EXTRA_FEATURE_NAMES)
    X = canonical_csr(features.combined())
    if X.shape[1] != expected:
        raise ArtifactError(
            f"feature width {X.shape[1]} does not match the model's {expected}"
        )
    kind = model.spec.kind
    if kind == "RandomForest":
        return forest_mod.vote_scores(model.params, X)
    if kind == "DecisionTree":
        return tree_mod.positive_scores(model.params, X)
    if kind == "GaussianNB":
        return nb_mod.positive_posterior(model.params, X)
    return svm_mod.decision_scores(model.params, X)


def label_for_score(kind: str, score: float) -> str:
    if kind == "SVM":
        return "positive" if score >= 0.0 else "negative"
    return "positive" if score > 0.5 else "negative"


def predict(model: TrainedModel, features: FeatureMatrix) -> list[Prediction]:
    """One Prediction per row; pure function of (model, features)."""
    raw = scores(model, features)
    kind = model.spec.kind
    return [Prediction(label_for_score(kind, float(s)), float(s)) for s in raw]


def _arrays_to_lists(payload: dict) -> dict:
    return {
        key: value.tolist() if isinstance(value, np.ndarray) else value
        for key, value in payload.items()
    }


def _params_to_dict(model: TrainedModel) -> dict:
    p = model.params
    if isinstance(p, ForestNodes):
        return _arrays_to_lists(
            {
                "feature": p.feature,
                "threshold": p.threshold,
                "left": p.left,
                "right": p.right,
                "positive": p.positive,
                "negative": p.negative,
                "tree_offsets": p.offsets,
            }
        )
    if isinstance(p, TreeNodes):
        return _arrays_to_lists(
            {
                "feature": p.feature,
                "threshold": p.threshold,
                "left": p.left,
                "right": p.right,
                "positive": p.positive,
                "negative": p.negative,
            }
        )
    if isinstance(p, NbParams):
        return _arrays_to_lists(
            {
                "log_prior": p.log_prior,
                "mean": p.mean,
                "variance": p.variance,
                "epsilon": p.epsilon,
            }
        )
    return _arrays_to_lists({"weights": p.weights, "bias": p.bias})


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "kind": model.spec.kind,
        "hyperparameters": dict(model.spec.hyperparameters),
        "seed": model.spec.seed,
        "class_counts": {
            "negative": model.negative_count,
            "positive": model.positive_count,
        },
        "vocabulary": vocabulary_to_dict(model.vocabulary),
        "vocabulary_sha256": vocabulary_hash(model.vocabulary),
        "metadata": dict(model.metadata),
        "parameters": _params_to_dict(model),
    }


def save_model(model: TrainedModel, path: str | Path) -> None:
    doc = json.dumps(model_to_dict(model), sort_keys=True, indent=2)
    Path(path).write_text(doc + "\n", encoding="utf-8")


def _params_from_dict(kind: str, payload: dict) -> TreeNodes | ForestNodes | NbParams | SvmParams:
    if kind in ("RandomForest", "DecisionTree"):
        feature = np.asarray(payload["feature"], dtype=np.int64)
        threshold = np.asarray(payload["threshold"], dtype=np.float64)
        left = np.asarray(payload["left"], dtype=np.int64)
        right = np.asarray(payload["right"], dtype=np.int64)
        positive = np.asarray(payload["positive"], dtype=np.int64)
        negative = np.asarray(payload["negative"], dtype=np.int64)
        lengths = {a.shape[0] for a in (feature, threshold, left, right, positive, negative)}
        if len(lengths) != 1:
            raise ArtifactError("tree node arrays have mismatched lengths")
        if kind == "DecisionTree":
            return TreeNodes(feature, threshold, left, right, positive, negative)
        offsets = np.asarray(payload["tree_offsets"], dtype=np.int64)
        if offsets.shape[0] < 2 or offsets[0] != 0 or offsets[-1] != feature.shape[0]:
            raise ArtifactError("forest tree offsets are inconsistent")
        return ForestNodes(feature, threshold, left, right, positive, negative, offsets)
    if kind == "GaussianNB":
        return NbParams(
            np.asarray(payload["log_prior"], dtype=np.float64),
            np.asarray(payload["mean"], dtype=np.float64),
            np.asarray(payload["variance"], dtype=np.float64),
            float(payload["epsilon"]),
        )
    return SvmParams(
        np.asarray(payload["weights"], dtype=np.float64), float(payload["bias"])
    )


def model_from_dict(doc: dict) -> TrainedModel:
    try:
        if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_FORMAT_VERSION:
            raise ArtifactError(
                f"not a {MODEL_FORMAT} v{MODEL_FORMAT_VERSION} document"
            )
        kind = doc["kind"]
        if kind not in MODEL_KINDS:
            raise ArtifactError(f"unknown model kind: {kind!r}")
        vocabulary = vocabulary_from_dict(doc["vocabulary"])
        stored_hash = doc["vocabulary_sha256"]
        actual_hash = vocabulary_hash(vocabulary)
        if stored_hash != actual_hash:
            raise ArtifactError(
                f"vocabulary hash mismatch: stored {stored_hash[:12]}.., "
                f"recomputed {actual_hash[:12]}.."
            )
        params = _params_from_dict(kind, doc["parameters"])
        spec = ModelSpec(kind, dict(doc["hyperparameters"]), int(doc["seed"]))
        counts = doc["class_counts"]
        return TrainedModel(
            spec=spec,
            vocabulary=vocabulary,
            negative_count=int(counts["negative"]),
            positive_count=int(counts["positive"]),
            params=params,
            metadata=dict(doc.get("metadata") or {}),
        )
    except ArtifactError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed model document: {exc}") from exc


def load_model(path: str | Path) -> TrainedModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArtifactError("model file does not hold a JSON object")
    return model_from_dict(doc)
