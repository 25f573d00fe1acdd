"""The trainable shadow-length head: standardization, a small MLP, and
a softplus output map that keeps predictions non-negative with gradient flow
everywhere (no dead clamp region).

Serialized as structured text (JSON) with a format version and the feature
spec hash; loading refuses mismatched hashes so old weights never run
against a different feature extractor.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ModelFormatError, ShapeMismatch
from .features import N_FEATURES, extract_features, feature_spec_hash

MODEL_FORMAT_VERSION = 1
DEFAULT_HIDDEN = 32
DEFAULT_OUTPUT_SCALE_M = 25.0


@dataclass
class RegressorModel:
    """Weights and input/output scaling of the shadow-length regressor."""

    w1: np.ndarray  # (hidden, n_features)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    feature_mean: np.ndarray  # (n_features,)
    feature_scale: np.ndarray  # (n_features,)
    output_scale_m: float = DEFAULT_OUTPUT_SCALE_M
    feature_hash: str = field(default_factory=feature_spec_hash)
    config_digest: str = ""

    @property
    def n_features(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    def parameters(self):
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2,
                "b2": np.array([self.b2])}

    def set_parameters(self, params) -> None:
        self.w1 = params["w1"]
        self.b1 = params["b1"]
        self.w2 = params["w2"]
        self.b2 = float(params["b2"][0])


def softplus(x: np.ndarray) -> np.ndarray:
    # log(1 + e^x), overflow-safe in both tails.
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


DEFAULT_OUTPUT_BIAS = -4.0


def init_model(seed: int, hidden: int = DEFAULT_HIDDEN,
               output_scale_m: float = DEFAULT_OUTPUT_SCALE_M,
               output_bias: float = DEFAULT_OUTPUT_BIAS) -> RegressorModel:
    """Fresh model: random first layer, zero output weights, saturated bias.

    With zero output weights every patch maps to the same constant,
    softplus(output_bias) * scale, and the default bias puts that constant
    near zero meters: an untrained model claims "no shadow" rather than an
    arbitrary length.
    """
    rng = np.random.default_rng(seed)
    w1 = rng.normal(0.0, 1.0 / np.sqrt(N_FEATURES), size=(hidden, N_FEATURES))
    return RegressorModel(
        w1=w1,
        b1=np.zeros(hidden),
        w2=np.zeros(hidden),
        b2=output_bias,
        feature_mean=np.zeros(N_FEATURES),
        feature_scale=np.ones(N_FEATURES),
        output_scale_m=output_scale_m,
    )


def forward(model: RegressorModel, features: np.ndarray):
    """Batch forward pass; returns (pred_shadow_m (n,), cache for backward)."""
    x = (features - model.feature_mean) / model.feature_scale
    z1 = x @ model.w1.T + model.b1
    a1 = np.tanh(z1)
    z2 = a1 @ model.w2 + model.b2
    pred = softplus(z2) * model.output_scale_m
    return pred, (x, a1, z2)


def backward(model: RegressorModel, cache, dloss_dpred: np.ndarray):
    """Parameter gradients of the summed batch loss from per-sample d(loss)/d(pred).

    Sum reduction (the classical convention) rather than mean: Adam's
    per-parameter normalization makes it invariant to the choice, while
    plain SGD sees the full summed gradient at the stated learning rate.
    """
    x, a1, z2 = cache
    with np.errstate(over="ignore"):
        sigmoid = np.where(z2 >= 0, 1.0 / (1.0 + np.exp(-z2)),
                           np.exp(z2) / (1.0 + np.exp(z2)))
    dz2 = dloss_dpred * sigmoid * model.output_scale_m
    grad_w2 = a1.T @ dz2
    grad_b2 = dz2.sum()
    da1 = np.outer(dz2, model.w2)
    dz1 = da1 * (1.0 - a1 * a1)
    grad_w1 = dz1.T @ x
    grad_b1 = dz1.sum(axis=0)
    return {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2,
            "b2": np.array([grad_b2])}


def predict_shadow_length(model: RegressorModel, patch: np.ndarray,
                          sun_azimuth_deg: float) -> float:
    """Predicted shadow length in meters for one patch; always >= 0."""
    features = extract_features(patch, sun_azimuth_deg)
    pred, _ = forward(model, features[None, :])
    return float(pred[0])


def save_model(model: RegressorModel, path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "feature_hash": model.feature_hash,
        "config_digest": model.config_digest,
        "output_scale_m": model.output_scale_m,
        "hidden": model.hidden,
        "n_features": model.n_features,
        "feature_mean": model.feature_mean.tolist(),
        "feature_scale": model.feature_scale.tolist(),
        "w1": model.w1.tolist(),
        "b1": model.b1.tolist(),
        "w2": model.w2.tolist(),
        "b2": model.b2,
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def load_model(path) -> RegressorModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version!r}")
    expected = feature_spec_hash()
    if payload.get("feature_hash") != expected:
        raise ModelFormatError(
            f"model was trained against feature spec {payload.get('feature_hash')!r}; "
            f"this build computes {expected!r} - refusing to load")
    model = RegressorModel(
        w1=np.asarray(payload["w1"], dtype=np.float64),
        b1=np.asarray(payload["b1"], dtype=np.float64),
        w2=np.asarray(payload["w2"], dtype=np.float64),
        b2=float(payload["b2"]),
        feature_mean=np.asarray(payload["feature_mean"], dtype=np.float64),
        feature_scale=np.asarray(payload["feature_scale"], dtype=np.float64),
        output_scale_m=float(payload["output_scale_m"]),
        feature_hash=payload["feature_hash"],
        config_digest=payload.get("config_digest", ""),
    )
    if model.w1.shape != (payload["hidden"], payload["n_features"]):
        raise ModelFormatError("weight shapes inconsistent with declared sizes")
    return model
