"""Shadow-length regression: features, model, hybrid height loss, training."""
from .features import FEATURE_SPEC, N_FEATURES, extract_features, feature_spec_hash
from .losses import LOSS_KINDS, height_loss, normalize_loss_kind
from .model import (
    RegressorModel,
    forward,
    init_model,
    load_model,
    predict_shadow_length,
    save_model,
    softplus,
)
from .train import (
    GRID_ROWS,
    TrainConfig,
    TrainReport,
    TrainSample,
    build_synthetic_training_set,
    format_grid_table,
    run_hyperparameter_grid,
    train,
)

__all__ = [
    "FEATURE_SPEC", "GRID_ROWS", "LOSS_KINDS", "N_FEATURES", "RegressorModel",
    "TrainConfig", "TrainReport", "TrainSample", "build_synthetic_training_set",
    "extract_features", "feature_spec_hash", "format_grid_table", "forward",
    "height_loss", "init_model", "load_model", "normalize_loss_kind",
    "predict_shadow_length", "run_hyperparameter_grid", "save_model",
    "softplus", "train",
]
