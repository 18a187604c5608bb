"""Command-line front end: estimate, eval, sweep, synth and occmask."""

from __future__ import annotations

import argparse
import os
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io as lfio
from .cascade import CascadeConfig, derive_refined_grid, estimate_coarse, run_pipeline
from .config import load_config
from .costvolume import SamplingGrid
from .metrics import DEFAULT_THRESHOLDS, EvaluationError, evaluate
from .occlusion import build_occlusion_set
from .synth import standard_suite
from .validation import ConfigError


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


@contextmanager
def stage(name: str):
    try:
        yield
    except (OSError, ValueError, IndexError, KeyError) as exc:
        raise StageError(name, exc) from exc


def _angular(text: str) -> tuple[int, int]:
    try:
        u, v = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected UxV, e.g. 9x9, got {text!r}") from None
    return u, v


def _number_list(text: str) -> list[float]:
    try:
        return [float(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _layout(args) -> lfio.SceneLayout:
    return lfio.SceneLayout(
        args.scene, pattern=args.pattern, gt_name=args.gt_name, angular=args.angular, grayscale=args.grayscale
    )


def _load_config(path) -> CascadeConfig:
    return CascadeConfig() if path is None else load_config(path)


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def cmd_estimate(args) -> int:
    with stage("config"):
        cfg = _load_config(args.config)
        refined_grid = derive_refined_grid(cfg)
    with stage("load"):
        t0 = time.perf_counter()
        lf, _ = lfio.load_scene(_layout(args), n_jobs=_threads(args))
        load_time = time.perf_counter() - t0
    timings = {}
    with stage("pipeline"):
        result = run_pipeline(lf, cfg, n_jobs=_threads(args), timings=timings)
    with stage("write"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lfio.write_disparity(out / "disp.pfm", result.refined)
        if args.coarse_out:
            lfio.write_disparity(out / "coarse.pfm", result.coarse)
        if args.occ_out:
            lfio.write_occlusion_pngs(result.occlusion, out / "occlusion", _layout(args))
        if args.png:
            grid = cfg.coarse_grid
            lfio.write_disparity_png(result.refined, (grid.d_min, grid.d_max), out / "disp.png")
    print(f"load: {load_time:.6f} s")
    for name, seconds in timings.items():
        print(f"{name}: {seconds:.6f} s")
    n_coarse, n_refined = cfg.coarse_grid.count, refined_grid.count
    print(f"slices: coarse={n_coarse} refined={n_refined} total={n_coarse + n_refined}")
    return 0


def cmd_eval(args) -> int:
    with stage("load"):
        pred = lfio.read_disparity(args.pred)
        gt = lfio.read_disparity(args.gt)
    with stage("evaluate"):
        result = evaluate(pred, gt, eps=args.eps, border=args.border, scene=args.scene or "")
    for eps in sorted(args.eps):
        print(f"badpix({eps:g}): {result.badpix[eps]:.6f}")
    print(f"mse100: {result.mse100:.6f}")
    print(f"q25: {result.q25:.6f}")
    print(f"pixels: {result.pixel_count}")
    with stage("write"):
        if args.out:
            with open(args.out, "a") as fh:
                fh.write(result.to_record() + "\n")
        else:
            print(result.to_record())
        if args.error_map:
            from .metrics import error_map_rgb
            from PIL import Image

            Image.fromarray(error_map_rgb(pred, gt, args.error_eps)).save(args.error_map)
    return 0


def cmd_sweep(args) -> int:
    with stage("config"):
        base = _load_config(args.config)
        lo, hi = args.range
        grids = [SamplingGrid(lo, hi, interval) for interval in args.intervals]
    with stage("load"):
        lf, gt = lfio.load_scene(_layout(args), n_jobs=_threads(args))
        if gt is None:
            raise StageError("load", FileNotFoundError(f"scene {args.scene} has no ground truth"))
    rows = []
    with stage("sweep"):
        for grid in grids:
            coarse = estimate_coarse(lf, base.with_options(coarse_grid=grid), n_jobs=_threads(args))
            res = evaluate(coarse, gt)
            err = np.abs(coarse.values - gt.values)[coarse.valid & gt.valid]
            rows.append((grid.interval, grid.count, res.badpix_007, res.mse100, float(np.median(err))))
    with stage("write"):
        lines = ["interval\tsamples\tbadpix_0.07\tmse100\tmedian_abs_error"]
        lines += [f"{i:.6f}\t{n}\t{b:.6f}\t{m:.6f}\t{e:.6f}" for i, n, b, m, e in rows]
        Path(args.out).write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_synth(args) -> int:
    if not args.suite:
        raise StageError("config", ValueError("only --suite export is supported"))
    out = Path(args.out)
    with stage("synth"):
        suite = standard_suite(args.seed, size=args.size)
        for family in suite:
            if args.family and family.name not in args.family:
                continue
            for scene in family.scenes:
                layout = lfio.SceneLayout(out / family.name / scene.name, angular=scene.lf.angular_shape)
                lfio.save_scene(scene.lf, layout, gt=scene.gt_disp)
                print(f"wrote {layout.directory}")
    return 0


def cmd_occmask(args) -> int:
    with stage("load"):
        layout = _layout(args)
        lf, _ = lfio.load_scene(layout)
        disp = lfio.read_disparity(args.disp)
    with stage("occlusion"):
        occ = build_occlusion_set(lf, disp)
    with stage("write"):
        paths = lfio.write_occlusion_pngs(occ, args.out, layout)
    print(f"wrote {len(paths)} occlusion maps to {args.out}")
    return 0


def _add_scene_args(p, with_gt_name=True):
    p.add_argument("--scene", required=True, help="scene directory (HCI layout)")
    p.add_argument("--angular", type=_angular, default=(9, 9), help="angular resolution UxV (default 9x9)")
    p.add_argument("--pattern", default="input_Cam{index:03}.png", help="view filename pattern")
    p.add_argument("--gt-name", default="gt_disp_lowres.pfm", help="ground-truth PFM filename")
    p.add_argument("--grayscale", action="store_true", help="convert RGB views to luma")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfcascade", description=__doc__)
    parser.add_argument("--threads", type=int, default=0, help="worker threads (default: all cores)")
    sub = parser.add_subparsers(dest="command", required=True)
    threads = argparse.ArgumentParser(add_help=False)
    threads.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")

    p = sub.add_parser("estimate", parents=[threads], help="estimate disparity for one scene")
    _add_scene_args(p)
    p.add_argument("--config", help="cascade config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--coarse-out", action="store_true", help="also write coarse.pfm")
    p.add_argument("--occ-out", action="store_true", help="also write occlusion map PNGs")
    p.add_argument("--png", action="store_true", help="also write a colormapped disp.png")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("eval", parents=[threads], help="score a disparity map against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--eps", type=_number_list, default=list(DEFAULT_THRESHOLDS))
    p.add_argument("--border", type=int, default=0, help="ignore this many border pixels")
    p.add_argument("--scene", help="scene name stored in the record")
    p.add_argument("--out", help="append the key=value record to this file")
    p.add_argument("--error-map", help="write a BadPix error-map PNG")
    p.add_argument("--error-eps", type=float, default=0.07)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[threads], help="coarse-stage accuracy versus sampling interval")
    _add_scene_args(p)
    p.add_argument("--intervals", type=_number_list, required=True, help="e.g. 1,1/2,1/4")
    p.add_argument("--range", type=_number_list, default=[-4.0, 4.0], help="lo,hi (default -4,4)")
    p.add_argument("--config", help="base cascade config file")
    p.add_argument("--out", required=True, help="output table (tab-separated)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", parents=[threads], help="export the synthetic oracle suite")
    p.add_argument("--suite", action="store_true", help="export the standard suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=128, help="spatial resolution")
    p.add_argument("--family", action="append", help="restrict to a family (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("occmask", parents=[threads], help="write per-view occlusion maps for a disparity map")
    _add_scene_args(p)
    p.add_argument("--disp", required=True, help="disparity PFM")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_occmask)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "range", None) is not None and len(args.range) != 2:
        parser.error("--range needs exactly two values")
    try:
        return args.func(args)
    except StageError as exc:
        kind = "config error" if isinstance(exc.__cause__, ConfigError) else "error"
        print(f"lfcascade {args.command}: {kind} in stage {exc}", file=sys.stderr)
        return 2 if isinstance(exc.__cause__, ConfigError) else 1
    except EvaluationError as exc:
        print(f"lfcascade {args.command}: error in stage evaluate: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
