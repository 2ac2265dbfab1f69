"""The four regressors and the model file format."""

from .artifact import FORMAT_VERSION, MAGIC, ModelArtifact, load_model, save_model
from .forest import RandomForest, forest_fit, forest_predict
from .lstm import (
    LstmConfig,
    LstmModel,
    RmspropState,
    init_lstm,
    lstm_backward,
    lstm_forward,
    lstm_predict,
    rmsprop_step,
    train_lstm,
)
from .ridge import RidgeModel, ridge_fit, ridge_predict
from .tree import LEAF, DecisionTree, apply, tree_fit, tree_predict

__all__ = [
    "FORMAT_VERSION", "LEAF", "MAGIC", "apply",
    "DecisionTree", "LstmConfig", "LstmModel", "ModelArtifact", "RandomForest", "RidgeModel",
    "RmspropState", "forest_fit", "forest_predict", "init_lstm", "load_model", "lstm_backward",
    "lstm_forward", "lstm_predict", "ridge_fit", "ridge_predict", "rmsprop_step", "save_model",
    "train_lstm", "tree_fit", "tree_predict",
]
