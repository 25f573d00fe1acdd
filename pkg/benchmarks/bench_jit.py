"""Benchmark the numba-jitted kernels against the pure-NumPy fallback.

Each measurement runs in a subprocess with SHADOWHEIGHT_JIT set, because the
path is chosen at import time. Usage:

    python benchmarks/bench_jit.py            # both paths, comparison table
    python benchmarks/bench_jit.py --worker numpy   # internal
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def bench_solar(repeat: int = 50) -> float:
    import numpy as np
    from shadowheight.solar import GeoLocation, delta_t_seconds, julian_day, position_batch
    from datetime import datetime, timezone

    loc = GeoLocation(31.23, 121.47)
    t = datetime(2015, 6, 1, 2, 30, 0, tzinfo=timezone.utc)
    jds = julian_day(t) + np.arange(720) * 60.0 / 86400.0
    dts = delta_t_seconds(t)
    position_batch(loc, jds, dts)  # warmup / compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        position_batch(loc, jds, dts)
    return (time.perf_counter() - t0) / repeat


def bench_resample(repeat: int = 50) -> float:
    import numpy as np
    from shadowheight.dataset.raster import resample_rect

    img = np.random.default_rng(0).integers(0, 256, (400, 400, 3), dtype=np.uint8)
    rect = (37.5, 60.25, 361.0, 320.75)
    resample_rect(img, rect)  # warmup / compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        resample_rect(img, rect)
    return (time.perf_counter() - t0) / repeat


def bench_time_inference(repeat: int = 5) -> float:
    from datetime import date, datetime, timezone
    from shadowheight.geometry import shadow_from_height
    from shadowheight.solar import GeoLocation, solar_position
    from shadowheight.timefit import infer_capture_time

    loc = GeoLocation(31.23, 121.47)
    t = datetime(2015, 6, 1, 2, 30, 0, tzinfo=timezone.utc)
    sigma = solar_position(loc, t)
    buildings = [(shadow_from_height(h, sigma), h) for h in range(3, 34, 3)]
    infer_capture_time(date(2015, 6, 1), loc, buildings)  # warmup
    t0 = time.perf_counter()
    for _ in range(repeat):
        infer_capture_time(date(2015, 6, 1), loc, buildings)
    return (time.perf_counter() - t0) / repeat


BENCHES = {
    "solar batch (720 instants)": bench_solar,
    "bilinear resample (400px -> 50px)": bench_resample,
    "capture-time fit (11 buildings)": bench_time_inference,
}


def worker() -> None:
    from shadowheight._accel import JIT_ENABLED
    results = {name: fn() for name, fn in BENCHES.items()}
    print(json.dumps({"jit": JIT_ENABLED, "results": results}))


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--worker", choices=("numpy", "numba"))
    args = parser.parse_args()
    if args.worker:
        worker()
        return 0

    rows = {}
    for mode, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, SHADOWHEIGHT_JIT=flag)
        out = subprocess.run([sys.executable, __file__, "--worker", mode],
                             capture_output=True, text=True, env=env, check=True)
        payload = json.loads(out.stdout.strip().splitlines()[-1])
        if mode == "numba" and not payload["jit"]:
            print("note: numba unavailable; both columns run the NumPy path")
        rows[mode] = payload["results"]

    width = max(len(n) for n in BENCHES) + 2
    print(f"{'kernel':<{width}}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name in BENCHES:
        jit_s = rows["numba"][name]
        np_s = rows["numpy"][name]
        print(f"{name:<{width}}{jit_s * 1e3:>10.3f}ms{np_s * 1e3:>10.3f}ms"
              f"{np_s / jit_s:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
