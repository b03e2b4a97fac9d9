#!/usr/bin/env python3
"""Time every pixel kernel on each available backend and verify parity.

The compiled extension and the numpy fallback must agree bit for bit, so the
benchmark doubles as a parity smoke check on benchmark-sized inputs.

Usage:
    python3 benchmarks/bench_kernels.py [--size 512] [--repeats 5] [--json]
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from viewcraft.evalharness.report import render_table
from viewcraft.kernels import available_backends


def make_workloads(size: int, rng: np.random.Generator) -> dict:
    """kernel name -> (args builder result) for one benchmark-sized input."""
    half = size // 2
    gray = rng.integers(0, 256, (size, size), dtype=np.uint8)
    rgb = rng.integers(0, 256, (size, size, 3), dtype=np.uint8)
    rgba = np.dstack([rng.integers(0, 256, (half, half, 3), dtype=np.uint8),
                      rng.integers(0, 256, (half, half), dtype=np.uint8)])
    small = rng.random((half, half, 3))
    octagon = [(size * x, size * y) for x, y in
               ((0.3, 0.1), (0.7, 0.1), (0.9, 0.3), (0.9, 0.7),
                (0.7, 0.9), (0.3, 0.9), (0.1, 0.7), (0.1, 0.3))]
    return {
        "convex_mask": (size, size, octagon),
        "bilinear_resize": (small, size, size),
        "grad_mag_u8": (gray,),
        "hysteresis_u8": (gray, 40, 120),
        "block_mean_u8": (rgb, 16),
        "feather_composite": (rgb, rgba, size // 4, size // 4, 8),
    }


def time_call(fn, args, repeats: int) -> float:
    """Best-of-N wall time in milliseconds."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, (time.perf_counter() - t0) * 1000.0)
    return best


def run(size: int, repeats: int) -> list[dict]:
    backends = available_backends()
    workloads = make_workloads(size, np.random.default_rng(0))
    rows = []
    for name, args in workloads.items():
        timings = {}
        outputs = {}
        for backend, module in backends.items():
            fn = getattr(module, name)
            outputs[backend] = fn(*args)
            timings[backend] = time_call(fn, args, repeats)
        reference = outputs.pop("numpy")
        identical = all(np.array_equal(reference, out)
                        for out in outputs.values())
        row = {"kernel": name, "identical": identical, "n": repeats}
        for backend, ms in sorted(timings.items()):
            row[f"{backend}_ms"] = round(ms, 3)
        if "compiled" in timings:
            row["speedup"] = round(timings["numpy"] / timings["compiled"], 2)
        rows.append(row)
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=512,
                        help="square input edge in pixels (default 512)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best-of (default 5)")
    parser.add_argument("--json", action="store_true",
                        help="emit rows as JSON instead of a table")
    args = parser.parse_args(argv)

    backends = sorted(available_backends())
    rows = run(args.size, args.repeats)
    if args.json:
        print(json.dumps({"size": args.size, "backends": backends,
                          "rows": rows}, indent=2))
    else:
        print(f"kernel backends: {', '.join(backends)} "
              f"(input {args.size}x{args.size}, best of {args.repeats})")
        columns = ["kernel"] + [k for k in rows[0] if k.endswith("_ms")]
        if "speedup" in rows[0]:
            columns.append("speedup")
        columns += ["identical", "n"]
        print(render_table(tuple(columns), tuple(rows)))
    if not all(row["identical"] for row in rows):
        print("backend outputs disagree", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
