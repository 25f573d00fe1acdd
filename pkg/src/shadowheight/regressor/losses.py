"""Hybrid height loss: penalize in height space, backpropagate into shadow space.

The regressor predicts shadow length, but what matters is the height it
implies. With estimated height E = pred * tan(sigma) and ground truth H:

    L1:  loss = |E - H|      dloss/dpred = sign(E - H) * tan(sigma)
    MSE: loss = (E - H)^2    dloss/dpred = 2 (E - H) * tan(sigma)

so the analytic conversion sits inside the training loop and its tan(sigma)
factor scales every gradient. The L1 subgradient at the kink is defined as 0,
keeping the zero-loss point a fixed point.
"""
from __future__ import annotations

import math

from ..errors import SunAtZenith, SunBelowHorizon
from ..solar import SolarPosition

LOSS_KINDS = ("l1", "mse")


def _tan_elevation(sigma) -> float:
    elevation = sigma.elevation_deg if isinstance(sigma, SolarPosition) else float(sigma)
    if elevation <= 0.0:
        raise SunBelowHorizon(f"elevation {elevation:.3f} deg: height loss undefined")
    if elevation >= 90.0:
        raise SunAtZenith(f"elevation {elevation:.3f} deg: height loss undefined")
    return math.tan(math.radians(elevation))


def normalize_loss_kind(loss_kind: str) -> str:
    kind = loss_kind.strip().lower()
    if kind not in LOSS_KINDS:
        raise ValueError(f"loss_kind must be one of {LOSS_KINDS}, got {loss_kind!r}")
    return kind


def height_loss(pred_shadow_m: float, sigma, gt_height_m: float,
                loss_kind: str = "l1") -> tuple[float, float]:
    """Loss and d(loss)/d(pred_shadow) for one prediction."""
    kind = normalize_loss_kind(loss_kind)
    tan_sigma = _tan_elevation(sigma)
    err = pred_shadow_m * tan_sigma - gt_height_m
    if kind == "l1":
        grad = 0.0 if err == 0.0 else math.copysign(tan_sigma, err)
        return abs(err), grad
    return err * err, 2.0 * err * tan_sigma
