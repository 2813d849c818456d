"""Four from-scratch binary classifiers behind one train/predict interface."""

from .api import (
    MODEL_KINDS,
    ArtifactError,
    ModelSpec,
    Prediction,
    TrainedModel,
    TrainingError,
    label_for_score,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    scores,
    train,
    validate_hyperparameters,
)
from .forest import ForestNodes, thread_count
from .naive_bayes import NbParams
from .svm import SvmParams
from .tree import TreeNodes

__all__ = [
    "MODEL_KINDS",
    "ArtifactError",
    "ForestNodes",
    "ModelSpec",
    "NbParams",
    "Prediction",
    "SvmParams",
    "TrainedModel",
    "TrainingError",
    "TreeNodes",
    "label_for_score",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "predict",
    "save_model",
    "scores",
    "thread_count",
    "train",
    "validate_hyperparameters",
]
