"""Command-line front end.

Exit codes: 0 success, 1 bad usage or invalid input, 2 a run aborted
(inadmissible cable configuration or non-finite state mid-flight).
"""

import argparse
import math
import os
import sys

import numpy as np

from . import analysis
from .catenary import CableParams, catenary_of_positions, endpoint_forces_inertial
from .errors import CatsimError, ConfigInvalid
from .simkit import (
    DISTURBANCE_SWEEP_AMPLITUDES,
    GAIN_SWEEP_AMPLITUDE,
    GAIN_SWEEP_KVS,
    _write_lines,
    emit_csv,
    emit_lyapunov_csv,
    load_config,
    run_scenario,
    sweep_disturbance,
    sweep_gain,
    trace_report,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; we reserve 2 for aborted runs."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text, flag):
    try:
        values = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigInvalid(f"{flag}: expected comma-separated numbers") from None
    if not values:
        raise ConfigInvalid(f"{flag}: empty list")
    return values


def _cmd_run(args):
    overrides = {"mode": args.mode, "out": args.out}
    cfg = load_config(args.config, overrides)
    trace = run_scenario(cfg)
    emit_csv(trace, os.path.join(cfg.out, "trace.csv"))
    emit_lyapunov_csv(trace, os.path.join(cfg.out, "lyapunov.csv"))
    lines = analysis.report_lines(trace_report(trace, cfg))
    _write_lines(os.path.join(cfg.out, "report.txt"), lines)
    for line in lines:
        print(line)
    return 2 if trace.aborted else 0


def _cmd_sweep_disturbance(args):
    cfg = load_config(args.config, {"out": args.out})
    amps = (_float_list(args.amps, "--amps") if args.amps
            else DISTURBANCE_SWEEP_AMPLITUDES)
    results = sweep_disturbance(cfg, amps)
    for name, result in results.items():
        path = emit_csv(result, os.path.join(cfg.out, f"sweep_disturbance_{name}.csv"))
        print(f"wrote {path}")
        for pt in result.points:
            print(f"  amplitude={pt.param:g} tail={pt.tail_metric:.6e} "
                  f"lambda_hat={pt.lambda_hat:.6e} {pt.status}")
    return 0


def _cmd_sweep_gain(args):
    cfg = load_config(args.config, {"out": args.out})
    kvs = _float_list(args.kvs, "--kvs") if args.kvs else GAIN_SWEEP_KVS
    result = sweep_gain(cfg, kvs, args.amp)
    path = emit_csv(result, os.path.join(cfg.out, "sweep_gain.csv"))
    print(f"wrote {path}")
    for pt in result.points:
        print(f"  kv={pt.param:g} tail={pt.tail_metric:.6e} "
              f"lambda_hat={pt.lambda_hat:.6e} {pt.status}")
    return 0


def _cmd_catenary(args):
    for flag, value in (("--s", args.s), ("--l", args.l), ("--w", args.w)):
        if not (value > 0.0) or not math.isfinite(value):
            raise ConfigInvalid(f"{flag} must be a positive number")
    cable = CableParams(args.l, args.w)
    p1 = np.array([-args.s, 0.0, 0.0])
    p2 = np.array([args.s, 0.0, 0.0])
    shape, _ = catenary_of_positions(p1, p2, cable)
    f1, f2 = endpoint_forces_inertial(shape, cable)
    a = shape.shape_param
    max_tension = cable.unit_weight * a * math.cosh(shape.half_span / a)
    for name, value in (
            ("shape_parameter", a),
            ("t1_x", f1[0]), ("t1_y", f1[1]), ("t1_z", f1[2]),
            ("t2_x", f2[0]), ("t2_y", f2[1]), ("t2_z", f2[2]),
            ("max_tension", max_tension)):
        print(f"{name}={value:.11e}")
    return 0


def build_parser():
    parser = _Parser(prog="catsim",
                     description="catenary-coupled quadrotor pair simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one scenario from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--mode", choices=("reduced", "full"))
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.set_defaults(func=_cmd_run)

    p_sd = sub.add_parser("sweep-disturbance",
                          help="tail error vs disturbance amplitude, two damping variants")
    p_sd.add_argument("--config", required=True)
    p_sd.add_argument("--amps", help="comma-separated amplitudes")
    p_sd.add_argument("--out")
    p_sd.set_defaults(func=_cmd_sweep_disturbance)

    p_sg = sub.add_parser("sweep-gain",
                          help="tail error vs velocity gain at fixed amplitude")
    p_sg.add_argument("--config", required=True)
    p_sg.add_argument("--kvs", help="comma-separated velocity gains")
    p_sg.add_argument("--amp", type=float, default=GAIN_SWEEP_AMPLITUDE)
    p_sg.add_argument("--out")
    p_sg.set_defaults(func=_cmd_sweep_gain)

    p_cat = sub.add_parser("catenary",
                           help="solve one static cable and print endpoint pulls")
    p_cat.add_argument("--s", type=float, required=True,
                       help="half of the horizontal endpoint separation")
    p_cat.add_argument("--l", type=float, required=True, help="cable length")
    p_cat.add_argument("--w", type=float, required=True,
                       help="weight per unit length")
    p_cat.set_defaults(func=_cmd_catenary)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CatsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
