"""Command-line entry point.

Subcommands are thin wrappers over the library: `estimate` (shadow to
height), `synth` (scene generation), `clean` (noise rules), `select`
(analytic test-subset filter), `infer-time` (capture-time fit), `train`
(single run or the 4-way loss/optimizer comparison), `eval` (RMSE and
per-bin statistics), and `serve` (annotation backend).

Exit codes: 0 success, 1 domain error, 2 usage error. The environment
variable SHADOWHEIGHT_STORE provides the default annotation store path.
All randomness is controlled by --seed.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from datetime import date, datetime, timezone
from pathlib import Path

from . import evaluation
from .dataset import (
    clean_records,
    random_scene,
    read_records,
    select_test_subset,
    write_records,
)
from .dataset.raster import save_png
from .errors import MissingFields, ShadowHeightError
from .geometry import DEFAULT_GSD, GroundSampling, height_from_shadow, shadow_length_from_endpoints
from .solar import GeoLocation, solar_position
from .timefit import infer_capture_time


def _parse_utc(text: str) -> datetime:
    t = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def _parse_xy(text: str):
    x, y = text.split(",")
    return (float(x), float(y))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shadowheight",
        description="Building-height estimation from shadow geometry in overhead images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="height from a shadow and the sun elevation")
    p_est.add_argument("--shadow-m", type=float, help="shadow length in meters")
    p_est.add_argument("--start-px", type=_parse_xy, metavar="X,Y",
                       help="shadow start in pixels (with --end-px/--gsd-m-per-px)")
    p_est.add_argument("--end-px", type=_parse_xy, metavar="X,Y")
    p_est.add_argument("--gsd-m-per-px", type=float, default=DEFAULT_GSD.meters_per_pixel)
    p_est.add_argument("--elevation-deg", type=float, help="sun elevation in degrees")
    p_est.add_argument("--lat", type=float, help="latitude (with --lon and --time)")
    p_est.add_argument("--lon", type=float)
    p_est.add_argument("--time", type=_parse_utc, metavar="ISO_UTC")

    p_synth = sub.add_parser("synth", help="render a synthetic scene with exact ground truth")
    p_synth.add_argument("--out-dir", type=Path, required=True)
    p_synth.add_argument("--n-buildings", type=int, default=10)
    p_synth.add_argument("--lat", type=float, default=31.23)
    p_synth.add_argument("--lon", type=float, default=121.47)
    p_synth.add_argument("--time", type=_parse_utc, default="2015-06-01T02:30:00Z",
                         metavar="ISO_UTC")
    p_synth.add_argument("--gsd-m-per-px", type=float, default=DEFAULT_GSD.meters_per_pixel)
    p_synth.add_argument("--image-size", type=int, default=400)
    p_synth.add_argument("--image-id", default="synthetic")
    p_synth.add_argument("--seed", type=int, default=0)

    p_clean = sub.add_parser("clean", help="apply the height-cap and shadow-outlier rules")
    p_clean.add_argument("--in", dest="input", type=Path, required=True)
    p_clean.add_argument("--out", type=Path, required=True)
    p_clean.add_argument("--shadow-outlier-m", type=float, default=50.0)
    p_clean.add_argument("--gsd-m-per-px", type=float, default=DEFAULT_GSD.meters_per_pixel)
    p_clean.add_argument("--format", choices=("text", "csv"), default="text")

    p_sel = sub.add_parser("select", help="keep records the analytic formula reproduces")
    p_sel.add_argument("--in", dest="input", type=Path, required=True)
    p_sel.add_argument("--out", type=Path, required=True)
    p_sel.add_argument("--threshold-m", type=float, default=2.5)
    p_sel.add_argument("--gsd-m-per-px", type=float, default=DEFAULT_GSD.meters_per_pixel)

    p_time = sub.add_parser("infer-time", help="fit the capture time from annotated records")
    p_time.add_argument("--records", type=Path, required=True)
    p_time.add_argument("--gsd-m-per-px", type=float, default=DEFAULT_GSD.meters_per_pixel)
    p_time.add_argument("--step-s", type=float, default=60.0)

    p_train = sub.add_parser("train", help="train the shadow regressor on synthetic data")
    p_train.add_argument("--grid", choices=("table1",),
                         help="run the 4-way loss/optimizer comparison")
    p_train.add_argument("--n", type=int, default=500, help="synthetic buildings")
    p_train.add_argument("--seed", type=int, default=7)
    p_train.add_argument("--loss", choices=("l1", "mse"), default="l1")
    p_train.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p_train.add_argument("--lr", type=float, default=1e-4)
    p_train.add_argument("--weight-decay", type=float, default=1e-5)
    p_train.add_argument("--epochs", type=int, default=2000)
    p_train.add_argument("--batch-size", type=int, default=128)
    p_train.add_argument("--save-model", type=Path)

    p_eval = sub.add_parser("eval", help="analytic height RMSE and per-bin statistics")
    p_eval.add_argument("--records", type=Path, required=True)
    p_eval.add_argument("--gsd-m-per-px", type=float, default=DEFAULT_GSD.meters_per_pixel)
    p_eval.add_argument("--exclude-capped", action="store_true",
                        help="drop records at the 33 m cap label")
    p_eval.add_argument("--csv-out", type=Path, help="write per-bin plot data CSV")
    p_eval.add_argument("--format", choices=("text", "csv"), default="text")
    p_eval.add_argument("--show-reference", action="store_true",
                        help="append the published 42-cities benchmark table")

    p_serve = sub.add_parser("serve", help="run the annotation workbench backend")
    p_serve.add_argument("--data-dir", type=Path, required=True)
    p_serve.add_argument("--store", type=Path,
                         default=os.environ.get("SHADOWHEIGHT_STORE", "annotations.ndrec"))
    p_serve.add_argument("--port", type=int, default=8008)
    p_serve.add_argument("--gsd-m-per-px", type=float, default=DEFAULT_GSD.meters_per_pixel)
    p_serve.add_argument("--ui-dir", type=Path, help="serve a static UI from this directory")
    return parser


def _cmd_estimate(args) -> int:
    if args.shadow_m is not None:
        shadow_m = args.shadow_m
    elif args.start_px and args.end_px:
        shadow_m = shadow_length_from_endpoints(args.start_px, args.end_px,
                                                GroundSampling(args.gsd_m_per_px))
    else:
        print("estimate: provide --shadow-m or --start-px/--end-px", file=sys.stderr)
        return 2
    if args.elevation_deg is not None:
        elevation = args.elevation_deg
    elif args.lat is not None and args.lon is not None and args.time is not None:
        elevation = solar_position(GeoLocation(args.lat, args.lon), args.time).elevation_deg
    else:
        print("estimate: provide --elevation-deg or --lat/--lon/--time", file=sys.stderr)
        return 2
    height = height_from_shadow(shadow_m, elevation)
    print(f"height_m: {height:.3f}")
    return 0


def _cmd_synth(args) -> int:
    import numpy as np
    rng = np.random.default_rng(args.seed)
    loc = GeoLocation(args.lat, args.lon)
    img, records = random_scene(rng, args.n_buildings, loc, args.time,
                                gsd=GroundSampling(args.gsd_m_per_px),
                                image_size=(args.image_size, args.image_size),
                                image_id=args.image_id)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    png_path = args.out_dir / f"{args.image_id}.png"
    rec_path = args.out_dir / f"{args.image_id}.ndrec"
    save_png(img, png_path)
    write_records(records, rec_path)
    print(f"scene: {png_path}")
    print(f"records: {rec_path} ({len(records)} buildings)")
    return 0


def _cmd_clean(args) -> int:
    records = read_records(args.input)
    cleaned, stats = clean_records(records, gsd=GroundSampling(args.gsd_m_per_px),
                                   shadow_outlier_m=args.shadow_outlier_m)
    write_records(cleaned, args.out)
    if args.format == "csv":
        print(f"n_input,{stats.n_input}")
        print(f"n_kept,{stats.n_kept}")
        print(f"n_capped,{stats.n_capped}")
        print(f"n_dropped_shadow_outlier,{stats.n_dropped_shadow_outlier}")
        for label in sorted(stats.height_histogram):
            print(f"bin_{label:g},{stats.height_histogram[label]}")
    else:
        print(f"input records:   {stats.n_input}")
        print(f"kept:            {stats.n_kept}")
        print(f"capped to 33 m:  {stats.n_capped}")
        print(f"dropped (shadow >= {args.shadow_outlier_m:g} m on <= 9 m building): "
              f"{stats.n_dropped_shadow_outlier}")
        hist = "  ".join(f"{k:g}:{v}" for k, v in sorted(stats.height_histogram.items()))
        print(f"height histogram: {hist}")
    return 0


def _cmd_select(args) -> int:
    records = read_records(args.input)
    kept = select_test_subset(records, threshold_m=args.threshold_m,
                              gsd=GroundSampling(args.gsd_m_per_px))
    write_records(kept, args.out)
    print(f"kept {len(kept)} of {len(records)} records "
          f"(threshold {args.threshold_m:g} m)")
    return 0


def _cmd_infer_time(args) -> int:
    records = read_records(args.records)
    gsd = GroundSampling(args.gsd_m_per_px)
    pairs = []
    locs = set()
    dates = set()
    for record in records:
        if not (record.has_shadow and record.has_ground_truth):
            continue
        height = record.gt_height_m if record.gt_height_m is not None else 3.0 * record.gt_floors
        pairs.append((record.shadow_length_m(gsd), height))
        locs.add((record.loc.lat_deg, record.loc.lon_deg))
        dates.add(record.capture_date)
    if not pairs:
        raise MissingFields("no records with both shadow endpoints and ground truth")
    if len(locs) > 1 or len(dates) > 1:
        raise MissingFields("records span multiple locations or dates; fit them separately")
    loc = GeoLocation(*locs.pop())
    fit = infer_capture_time(dates.pop(), loc, pairs, search_step_s=args.step_s)
    print(f"best_time: {fit.best_time.strftime('%Y-%m-%dT%H:%M:%SZ')}")
    print(f"residual_rmse_m: {fit.residual_rmse_m:.6f}")
    print(f"n_buildings: {fit.n_buildings}")
    print(f"search_step_s: {fit.search_step_s:g}")
    for t, r in fit.local_minima[:2]:
        print(f"local_minimum: {t.strftime('%Y-%m-%dT%H:%M:%SZ')} rmse {r:.6f}")
    return 0


def _cmd_train(args) -> int:
    from .regressor import (
        TrainConfig,
        build_synthetic_training_set,
        format_grid_table,
        run_hyperparameter_grid,
        save_model,
        train,
    )
    train_s, eval_s, noise_floor = build_synthetic_training_set(args.n, seed=args.seed)
    print(f"synthetic set: {len(train_s)} train / {len(eval_s)} eval buildings, "
          f"label noise floor {noise_floor:.3f} m")
    if args.grid == "table1":
        results = run_hyperparameter_grid(
            train_s, eval_s, learning_rate=args.lr, weight_decay=args.weight_decay,
            epochs=args.epochs, batch_size=args.batch_size, seed=args.seed)
        print(format_grid_table(results))
        return 0
    config = TrainConfig(loss_kind=args.loss, optimizer=args.optimizer,
                         learning_rate=args.lr, weight_decay=args.weight_decay,
                         epochs=args.epochs, batch_size=args.batch_size, seed=args.seed)
    model, report = train(train_s, config, eval_samples=eval_s)
    print(f"final height RMSE: {report.final_height_rmse_m:.6f} m")
    print(f"final shadow RMSE: {report.final_shadow_rmse_m:.6f} m")
    if args.save_model:
        save_model(model, args.save_model)
        print(f"model: {args.save_model}")
    return 0


def _cmd_eval(args) -> int:
    records = read_records(args.records)
    gsd = GroundSampling(args.gsd_m_per_px)
    preds, gts = [], []
    for i, record in enumerate(records):
        if not (record.has_shadow and record.capture_time and record.has_ground_truth):
            raise MissingFields(f"record {i} lacks shadow, capture time, or ground truth")
        sigma = solar_position(record.loc, record.capture_time)
        preds.append(height_from_shadow(record.shadow_length_m(gsd), sigma))
        height = record.gt_height_m if record.gt_height_m is not None else 3.0 * record.gt_floors
        gts.append(height)
    report = evaluation.per_bin_stats(preds, gts, exclude_capped=args.exclude_capped)
    print(evaluation.format_report(report, fmt=args.format,
                                   include_reference=args.show_reference))
    if args.csv_out:
        evaluation.export_plot_data(report, args.csv_out)
        print(f"plot data: {args.csv_out}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve
    return serve(args.data_dir, args.store, args.port,
                 gsd=GroundSampling(args.gsd_m_per_px), ui_dir=args.ui_dir)


_COMMANDS = {
    "estimate": _cmd_estimate,
    "synth": _cmd_synth,
    "clean": _cmd_clean,
    "select": _cmd_select,
    "infer-time": _cmd_infer_time,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ShadowHeightError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
