"""RMSE computation, per-height-bin error statistics, and plot-data export.

Bins are keyed by the dataset's ground-truth height labels (3 m floor
increments up to 30, plus the 33 m cap label). Per-bin statistics are
computed over absolute height errors and labelled as such. A static table of
published benchmark figures for the 42-cities dataset ships for side-by-side
printing; those numbers are reported results, not reproduced by this
toolkit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset.cleaning import height_bin_label
from .errors import EmptyInput, LengthMismatch

# Published RMSE (meters) on the 42-cities benchmark, for reference printing
# only; none of these are reproduced here.
REFERENCE_RMSE_M = (
    ("Random forest (multi-view, multi-spectral)", 7.46),
    ("MM3Net (multi-view, multi-spectral)", 6.26),
    ("Stereoential Net (multi-view)", 5.95),
    ("Stereollax Net (multi-view)", 5.74),
    ("Shadow-length model (monocular, reported)", 3.84),
)


@dataclass(frozen=True)
class BinStats:
    label_m: float
    n: int
    mean_abs_err_m: float
    min_m: float
    q1_m: float
    median_m: float
    q3_m: float
    max_m: float


@dataclass(frozen=True)
class EvalReport:
    overall_rmse_m: float
    n_total: int
    bins: tuple[BinStats, ...]


def rmse(pred, gt) -> float:
    """Root-mean-square difference of two equal-length sequences."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 1:
        raise LengthMismatch(f"shapes differ: {pred.shape} vs {gt.shape}")
    if pred.size == 0:
        raise EmptyInput("rmse of empty sequences is undefined")
    if not (np.all(np.isfinite(pred)) and np.all(np.isfinite(gt))):
        raise ValueError("rmse inputs must be finite")
    return float(np.sqrt(np.mean((pred - gt) ** 2)))


def per_bin_stats(pred_heights, gt_heights, *, exclude_capped: bool = False) -> EvalReport:
    """Per-label absolute-error statistics; empty bins are omitted.

    exclude_capped drops pairs whose ground truth is the 33 m cap label
    before any statistics are computed.
    """
    pred = np.asarray(pred_heights, dtype=np.float64)
    gt = np.asarray(gt_heights, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 1:
        raise LengthMismatch(f"shapes differ: {pred.shape} vs {gt.shape}")
    if exclude_capped:
        labels_all = np.array([height_bin_label(h) for h in gt])
        keep = labels_all != 33.0
        pred, gt = pred[keep], gt[keep]
    if pred.size == 0:
        raise EmptyInput("no records to evaluate")

    labels = np.array([height_bin_label(h) for h in gt])
    abs_err = np.abs(pred - gt)
    bins = []
    for label in sorted(set(labels.tolist())):
        err = abs_err[labels == label]
        q0, q1, q2, q3, q4 = np.percentile(err, [0, 25, 50, 75, 100])
        bins.append(BinStats(
            label_m=float(label), n=int(err.size),
            mean_abs_err_m=float(err.mean()),
            min_m=float(q0), q1_m=float(q1), median_m=float(q2),
            q3_m=float(q3), max_m=float(q4)))
    return EvalReport(
        overall_rmse_m=rmse(pred, gt),
        n_total=int(pred.size),
        bins=tuple(bins))


def export_plot_data(report: EvalReport, path) -> None:
    """CSV of per-bin statistics, one row per populated bin, ordered by bin."""
    lines = ["bin,n,mean,min,q1,median,q3,max"]
    for b in report.bins:
        lines.append(f"{b.label_m:g},{b.n},{b.mean_abs_err_m:.6f},{b.min_m:.6f},"
                     f"{b.q1_m:.6f},{b.median_m:.6f},{b.q3_m:.6f},{b.max_m:.6f}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def format_report(report: EvalReport, *, fmt: str = "text",
                  include_reference: bool = False) -> str:
    """Render a report as an aligned text table or CSV lines."""
    if fmt == "csv":
        lines = [f"overall_rmse_m,{report.overall_rmse_m:.6f}",
                 f"n_total,{report.n_total}",
                 "bin,n,mean,min,q1,median,q3,max"]
        for b in report.bins:
            lines.append(f"{b.label_m:g},{b.n},{b.mean_abs_err_m:.6f},{b.min_m:.6f},"
                         f"{b.q1_m:.6f},{b.median_m:.6f},{b.q3_m:.6f},{b.max_m:.6f}")
    elif fmt == "text":
        lines = [f"overall RMSE: {report.overall_rmse_m:.6f} m over {report.n_total} records",
                 "bin_m      n   mean_abs    min     q1_m  median     q3_m     max",
                 "-----  -----  ---------  ------  ------  ------  ------  ------"]
        for b in report.bins:
            lines.append(f"{b.label_m:5g}  {b.n:5d}  {b.mean_abs_err_m:9.3f}  "
                         f"{b.min_m:6.3f}  {b.q1_m:6.3f}  {b.median_m:6.3f}  "
                         f"{b.q3_m:6.3f}  {b.max_m:6.3f}")
    else:
        raise ValueError(f"fmt must be 'text' or 'csv', got {fmt!r}")
    if include_reference:
        lines.append("")
        lines.append("published 42-cities benchmark (reported, not reproduced):")
        for name, value in REFERENCE_RMSE_M:
            lines.append(f"  {name:<44s} {value:5.2f} m")
    return "\n".join(lines)
