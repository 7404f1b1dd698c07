#!/usr/bin/env python3
"""Disturbance-amplitude and velocity-gain sweeps over the reduced loop.

Writes one CSV per sweep under --out and prints the per-point tail metrics
so the linear-in-amplitude and monotone-in-gain trends are visible without
opening the files.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from catsim import (
    DISTURBANCE_SWEEP_AMPLITUDES,
    GAIN_SWEEP_KVS,
    SimConfig,
    emit_csv,
    sweep_disturbance,
    sweep_gain,
)


def _print_points(result):
    print(f"# sweep={result.name} parameter={result.parameter}")
    for pt in result.points:
        print(
            f"{result.parameter}={pt.param:g} tail={pt.tail_metric:.6e} "
            f"lambda_hat={pt.lambda_hat:.6f} status={pt.status}"
        )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/sweeps")
    ap.add_argument("--duration", type=float, default=20.0)
    args = ap.parse_args()

    cfg = SimConfig(duration=args.duration, out=args.out)

    for name, result in sweep_disturbance(cfg, DISTURBANCE_SWEEP_AMPLITUDES).items():
        emit_csv(result, os.path.join(args.out, f"sweep_disturbance_{name}.csv"))
        _print_points(result)

    gain = sweep_gain(cfg, GAIN_SWEEP_KVS)
    emit_csv(gain, os.path.join(args.out, "sweep_gain.csv"))
    _print_points(gain)
    return 0


if __name__ == "__main__":
    sys.exit(main())
