"""Command-line pipeline: simulate -> fuse -> eval.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import metrics, pgo, sim, trajio

USAGE_ERROR = 2
DATA_ERROR = 3
NUMERICAL_ERROR = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posefusion",
        description="Fuse noisy drift-free absolute poses with drifty VO.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate synthetic ground truth and sensor files")
    p_sim.add_argument("--shape", choices=["loop", "figure-eight", "random-walk"],
                       default="loop")
    p_sim.add_argument("--frames", type=int, default=1000)
    p_sim.add_argument("--step", type=float, default=0.1)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--abs-t-sigma", type=float, default=0.0)
    p_sim.add_argument("--abs-r-sigma", type=float, default=0.0)
    p_sim.add_argument("--vo-t-sigma", type=float, default=0.0)
    p_sim.add_argument("--vo-r-sigma", type=float, default=0.0)
    p_sim.add_argument("--vo-t-bias", type=float, default=0.0)
    p_sim.add_argument("--out-gt", required=True)
    p_sim.add_argument("--out-abs", required=True)
    p_sim.add_argument("--out-vo", required=True)
    p_sim.add_argument("--out-gps")
    p_sim.add_argument("--gps-every", type=int, default=10)

    p_fuse = sub.add_parser("fuse", help="refine an absolute trajectory with VO")
    p_fuse.add_argument("--abs", required=True, dest="abs_path")
    p_fuse.add_argument("--vo", required=True)
    p_fuse.add_argument("--out", required=True)
    p_fuse.add_argument("--window", type=int, default=7)
    p_fuse.add_argument("--spacing", type=int, default=150)
    p_fuse.add_argument("--sigma-rot", type=float, default=10.0)
    p_fuse.add_argument("--max-iters", type=int, default=50)
    p_fuse.add_argument("--tol", type=float, default=1e-8)
    p_fuse.add_argument("--median-window", type=int, nargs="?", const=51, default=None)

    p_eval = sub.add_parser("eval", help="compare an estimate against ground truth")
    p_eval.add_argument("--est", required=True)
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--out-report", required=True)
    p_eval.add_argument("--cdf-points", type=int, default=None)

    return parser


def _cmd_simulate(args) -> int:
    if args.frames < 2:
        print("simulate: --frames must be >= 2", file=sys.stderr)
        return USAGE_ERROR
    if args.step <= 0:
        print("simulate: --step must be > 0", file=sys.stderr)
        return USAGE_ERROR
    if args.out_gps is not None and args.gps_every < 1:
        print("simulate: --gps-every must be >= 1", file=sys.stderr)
        return USAGE_ERROR
    nm = sim.NoiseModel(abs_t_sigma=args.abs_t_sigma, abs_r_sigma=args.abs_r_sigma,
                        vo_t_sigma=args.vo_t_sigma, vo_r_sigma=args.vo_r_sigma,
                        vo_t_bias=args.vo_t_bias, seed=args.seed)
    gt = sim.generate_trajectory(args.shape, args.frames, args.step, seed=args.seed)
    trajio.write_trajectory(gt, args.out_gt)
    trajio.write_trajectory(sim.corrupt_absolute(gt, nm), args.out_abs)
    trajio.write_vo(sim.corrupt_vo(gt, nm), gt.timestamps[1:], args.out_vo)
    if args.out_gps is not None:
        idx = np.arange(0, len(gt), args.gps_every)
        track = sim.GpsTrack(gt.timestamps[idx],
                             np.array([gt.poses[i].t[:2] for i in idx]))
        trajio.write_gps(track, args.out_gps)
    return 0


def _cmd_fuse(args) -> int:
    if args.median_window is not None and (args.median_window < 1 or args.median_window % 2 == 0):
        print("fuse: --median-window must be odd and >= 1", file=sys.stderr)
        return USAGE_ERROR
    try:
        cfg = pgo.PgoConfig(window_T=args.window, spacing_k=args.spacing,
                            sigma_rot=args.sigma_rot, max_iters=args.max_iters,
                            step_tol=args.tol)
    except ValueError as exc:
        print(f"fuse: {exc}", file=sys.stderr)
        return USAGE_ERROR
    abs_traj = trajio.read_trajectory(args.abs_path)
    vo = trajio.read_vo(args.vo)
    fused = pgo.fuse_trajectory(abs_traj, vo, cfg)
    if args.median_window is not None:
        fused = pgo.temporal_median_filter(fused, args.median_window)
    trajio.write_trajectory(fused, args.out)
    return 0


def _cmd_eval(args) -> int:
    if args.cdf_points is not None and args.cdf_points < 2:
        print("eval: --cdf-points must be >= 2", file=sys.stderr)
        return USAGE_ERROR
    est = trajio.read_trajectory(args.est)
    gt = trajio.read_trajectory(args.gt)
    report = metrics.compare(est, gt, cdf_points=args.cdf_points)
    with open(args.out_report, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(metrics.render_report(report))
    print(f"median {report.median_t:.4f} m / {report.median_r:.4f} deg, "
          f"mean {report.mean_t:.4f} m / {report.mean_r:.4f} deg")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {"simulate": _cmd_simulate, "fuse": _cmd_fuse, "eval": _cmd_eval}[args.command]
    try:
        return handler(args)
    except (trajio.TrajectoryFormatError, FileNotFoundError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR
    except pgo.RankDeficientError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except ValueError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
