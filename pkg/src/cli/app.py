"""
Command Line Application
Subcommand dispatch tying matching, obstacles, reconstruction, calibration, rendering, mapping and simulation together
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from src.calib.correspondences import check_bounds, read_correspondences, write_correspondences
from src.calib.epipolar import (
    check_alignment, epipolar_residual, essential_from_fundamental, inliers_of,
    ransac_fundamental
)
from src.config.calibration import load_calibration
from src.config.config_manager import ConfigManager, RunConfig, build_run_config, load_config
from src.core.navigator import simulate
from src.errors import (
    ConsensusTooSmall, ParseError, StereoNavError, TooFewCorrespondences, ValidationError
)
from src.geometry.camera import StereoRig
from src.geometry.pose import Pose2D
from src.geometry.reprojection import build_reprojection_matrix
from src.logging.logger import AppLogger
from src.mapping.occupancy import (
    OccupancyGrid, UltrasoundReading, export_map, integrate_all
)
from src.mapping.readings import read_readings_csv
from src.obstacle.detector import detect, write_blobs_csv
from src.obstacle.overlay import draw_detections
from src.reconstruction.ply import write_ply
from src.reconstruction.pointcloud import (
    camera_to_body, cloud_from_disparity, filter_cloud, transform_cloud
)
from src.render.renderer import RenderParams, Scene, correspondences_from_render, render_stereo
from src.resources.image_io import (
    read_color, read_disparity, read_gray, write_color, write_disparity, write_gray, write_mask
)
from src.sim.world import load_world
from src.stereo.matcher import compute_disparity, disparity_to_gray

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_IO = 2

PROG = "stereonav"


# Argument parsing

def _flag(key: str) -> str:
    return "--" + key.replace(".", "-").replace("_", "-")


def _common_parser() -> argparse.ArgumentParser:
    """Options shared by every subcommand, including one flag per numeric config key"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (key = value)")
    common.add_argument("--calib", help="stereo calibration file (overrides the config)")
    common.add_argument("--log-file", help="also log to this file")
    common.add_argument("-v", "--verbose", action="store_true", help="debug output on stderr")

    overrides = common.add_argument_group("config overrides")
    for key, default in ConfigManager.numeric_keys():
        overrides.add_argument(_flag(key), dest=key, type=type(default), default=None,
                               metavar=type(default).__name__.upper(),
                               help=f"override {key} (default {default})")
    overrides.add_argument(_flag("obstacle.turn90_direction"), dest="obstacle.turn90_direction",
                           choices=("left", "right"), default=None,
                           help="override obstacle.turn90_direction")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog=PROG, description="Stereo vision indoor navigation toolkit"
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("match", parents=[common], help="stereo pair -> disparity map")
    p.add_argument("left", help="left grayscale image (PGM)")
    p.add_argument("right", help="right grayscale image (PGM)")
    p.add_argument("-o", "--output", required=True, help="16-bit disparity PGM")
    p.add_argument("--visual", help="8-bit visualization PGM")

    p = sub.add_parser("obstacle", parents=[common], help="disparity -> mask, blobs, decision")
    p.add_argument("disparity", help="16-bit disparity PGM")
    p.add_argument("--mask", help="mask PGM (default <output_dir>/mask.pgm)")
    p.add_argument("--blobs", help="blob CSV (default <output_dir>/blobs.csv)")
    p.add_argument("--image", help="image to annotate with the detections")
    p.add_argument("--overlay", help="annotated PPM (needs --image)")

    p = sub.add_parser("reconstruct", parents=[common], help="disparity + color -> PLY")
    p.add_argument("disparity", help="16-bit disparity PGM")
    p.add_argument("color", help="left color image (PPM)")
    p.add_argument("-o", "--output", required=True, help="PLY file")
    p.add_argument("--pose", type=Pose2D.parse,
                   help="x,y,theta odometric pose; places the cloud in the world frame")
    p.add_argument("--raw", action="store_true", help="skip range and cluster filtering")

    p = sub.add_parser("calib-check", parents=[common], help="correspondences -> alignment report")
    p.add_argument("correspondences", help="CSV with xl,yl,xr,yr rows")

    p = sub.add_parser("render", parents=[common], help="world + pose -> stereo pair + truth")
    p.add_argument("world", help="world file")
    p.add_argument("--pose", type=Pose2D.parse, default=Pose2D(), help="x,y,theta camera pose")
    p.add_argument("--out-dir", help="output directory (default <output_dir>)")
    p.add_argument("--vertical-offset", type=float, default=0.0,
                   help="right camera misalignment in pixels")
    p.add_argument("--correspondences", type=int, default=0, metavar="N",
                   help="also write N ground-truth correspondences")

    p = sub.add_parser("simulate", parents=[common], help="closed-loop rover simulation")
    p.add_argument("world", help="world file")
    p.add_argument("--out-dir", help="output directory (default <output_dir>)")

    p = sub.add_parser("map", parents=[common], help="reading log -> occupancy PGM")
    p.add_argument("readings", help="CSV with t,sensor,range,x,y,theta rows")
    p.add_argument("-o", "--output", required=True, help="map PGM")

    p = sub.add_parser("bench", parents=[common], help="per-stage timings on a rendered frame")
    p.add_argument("world", help="world file")
    p.add_argument("--pose", type=Pose2D.parse, default=Pose2D(), help="x,y,theta camera pose")
    p.add_argument("--repeat", type=int, default=3, help="runs per stage (best is reported)")
    return parser


# Shared setup

def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {k: v for k, v in vars(args).items() if "." in k and v is not None}
    if args.config:
        return load_config(args.config, overrides)
    manager = ConfigManager()
    for key, value in overrides.items():
        manager.set(key, value)
    return build_run_config(manager)


def _rig(args: argparse.Namespace, cfg: RunConfig) -> StereoRig:
    path = Path(args.calib) if args.calib else cfg.calibration
    if path is None:
        raise ValidationError("calibration file required", "pass --calib or set calibration")
    return load_calibration(path)


def _out_dir(args: argparse.Namespace, cfg: RunConfig) -> Path:
    return Path(args.out_dir) if getattr(args, "out_dir", None) else cfg.output_dir


class _Stopwatch:
    def __init__(self, logger: AppLogger):
        self._logger = logger

    def __call__(self, stage: str, fn: Callable, *a, **kw):
        start = time.perf_counter()
        result = fn(*a, **kw)
        self._logger.log_timing(stage, (time.perf_counter() - start) * 1000.0)
        return result


# Subcommands

def cmd_match(args, cfg: RunConfig, logger: AppLogger) -> int:
    timed = _Stopwatch(logger)
    left, right = read_gray(args.left), read_gray(args.right)
    dm = timed("match", compute_disparity, left, right, cfg.matcher)
    write_disparity(args.output, dm)
    if args.visual:
        write_gray(args.visual, disparity_to_gray(dm))
    valid = int(dm.valid_mask().sum())
    print(f"valid pixels: {valid}/{dm.width * dm.height}")
    return EXIT_OK


def cmd_obstacle(args, cfg: RunConfig, logger: AppLogger) -> int:
    rig = _rig(args, cfg)
    dm = read_disparity(args.disparity, cfg.matcher.min_disp, cfg.matcher.max_disp)
    mask, blobs, decision = detect(dm, rig, cfg.obstacle)
    out = cfg.output_dir
    write_mask(args.mask or out / "mask.pgm", mask.bits)
    write_blobs_csv(args.blobs or out / "blobs.csv", blobs)
    if args.overlay:
        if not args.image:
            raise ValidationError("--overlay needs --image")
        write_color(args.overlay, draw_detections(read_gray(args.image), blobs, decision))
    logger.log_stage("obstacle", f"{len(blobs)} blobs")
    print(decision)
    return EXIT_OK


def cmd_reconstruct(args, cfg: RunConfig, logger: AppLogger) -> int:
    rig = _rig(args, cfg)
    dm = read_disparity(args.disparity, cfg.matcher.min_disp, cfg.matcher.max_disp)
    pose = args.pose or Pose2D()
    cloud = cloud_from_disparity(dm, read_color(args.color), build_reprojection_matrix(rig), pose)
    if not args.raw:
        cloud = filter_cloud(cloud, cfg.cloud)
    if args.pose is not None:
        cloud = transform_cloud(camera_to_body(cloud, cfg.sim.camera_height), pose)
    write_ply(args.output, cloud)
    print(f"points: {len(cloud)}")
    return EXIT_OK


def cmd_calib_check(args, cfg: RunConfig, logger: AppLogger) -> int:
    corrs = read_correspondences(args.correspondences)
    rig = _rig(args, cfg) if (args.calib or cfg.calibration) else None
    if rig is not None:
        check_bounds(corrs, rig.width, rig.height)

    report = check_alignment(corrs, cfg.alignment_threshold_px)
    print(f"alignment: {report}")

    try:
        f, mask = ransac_fundamental(corrs, cfg.ransac)
    except (TooFewCorrespondences, ConsensusTooSmall) as e:
        logger.warning(f"fundamental matrix not estimated: {e}")
    else:
        residuals = [epipolar_residual(f, c) for c in inliers_of(corrs, mask)]
        print(f"inliers: {int(mask.sum())}/{len(corrs)}")
        print(f"epipolar residual: mean {np.mean(residuals):.4f} px, "
              f"max {np.max(residuals):.4f} px")
        if rig is not None:
            e_matrix = essential_from_fundamental(f, rig.left, rig.right)
            s = e_matrix.singular_values
            print(f"essential singular values: {s[0]:.6g} {s[1]:.6g} {s[2]:.3g}")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_render(args, cfg: RunConfig, logger: AppLogger) -> int:
    rig = _rig(args, cfg)
    world = load_world(args.world)
    base = cfg.render
    params = RenderParams(base.floor_seed, base.texture_scale, base.noise_sigma, base.seed,
                          args.vertical_offset)
    out = render_stereo(Scene(world, args.pose, cfg.sim.camera_height), rig, params)

    out_dir = _out_dir(args, cfg)
    write_gray(out_dir / "left.pgm", out.left)
    write_gray(out_dir / "right.pgm", out.right)
    write_color(out_dir / "left.ppm", out.left_color)
    write_color(out_dir / "right.ppm", out.right_color)
    write_disparity(out_dir / "gt.pgm", out.gt_disparity)
    write_mask(out_dir / "occlusion.pgm", out.occluded)
    if args.correspondences > 0:
        corrs = correspondences_from_render(out, args.correspondences, base.seed)
        write_correspondences(out_dir / "correspondences.csv", corrs)
    logger.log_stage("render", f"{rig.width}x{rig.height} -> {out_dir}")
    return EXIT_OK


def cmd_simulate(args, cfg: RunConfig, logger: AppLogger) -> int:
    rig = _rig(args, cfg)
    world = load_world(args.world)
    result = simulate(world, rig, cfg, logger, _out_dir(args, cfg))
    counts = " ".join(f"{k}={v}" for k, v in sorted(result.decisions.items()))
    print(f"ticks={len(result.ticks)} collisions={result.collisions} {counts}")
    return EXIT_OK if result.collisions == 0 else EXIT_FAILED


def cmd_map(args, cfg: RunConfig, logger: AppLogger) -> int:
    readings = read_readings_csv(args.readings)
    grid = integrate_all(OccupancyGrid(cfg.map), readings, cfg.sensors)
    export_map(grid, args.output)
    print(f"readings: {len(readings)} occupied cells: {len(grid.occupied_cells())}")
    return EXIT_OK


def cmd_bench(args, cfg: RunConfig, logger: AppLogger) -> int:
    rig = _rig(args, cfg)
    world = load_world(args.world)
    scene = Scene(world, args.pose, cfg.sim.camera_height)
    q = build_reprojection_matrix(rig)
    timings: Dict[str, float] = {}

    def best(stage: str, fn: Callable, *a):
        result = None
        for _ in range(max(1, args.repeat)):
            start = time.perf_counter()
            result = fn(*a)
            elapsed = (time.perf_counter() - start) * 1000.0
            timings[stage] = min(timings.get(stage, elapsed), elapsed)
        return result

    out = best("render", render_stereo, scene, rig, cfg.render)
    dm = best("match", compute_disparity, out.left, out.right, cfg.matcher)
    best("obstacle", detect, dm, rig, cfg.obstacle)
    cloud = best("reconstruct", cloud_from_disparity, dm, out.left_color, q, args.pose)
    best("filter", filter_cloud, cloud, cfg.cloud)
    readings = [UltrasoundReading(i, 1.0, args.pose) for i in range(3)]
    best("mapping", lambda: integrate_all(OccupancyGrid(cfg.map), readings))

    for stage, ms in timings.items():
        logger.log_timing(stage, ms)
        print(f"{stage:12s} {ms:9.1f} ms")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig, AppLogger], int]] = {
    "match": cmd_match,
    "obstacle": cmd_obstacle,
    "reconstruct": cmd_reconstruct,
    "calib-check": cmd_calib_check,
    "render": cmd_render,
    "simulate": cmd_simulate,
    "map": cmd_map,
    "bench": cmd_bench,
}


def dispatch(argv: List[str]) -> int:
    """Run one subcommand; returns the process exit code"""
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_IO
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_IO
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_IO

    logger = AppLogger(Path(args.log_file) if args.log_file else None, args.verbose)
    try:
        cfg = _run_config(args)
        if cfg.log_file and not args.log_file:
            logger.close()
            logger = AppLogger(cfg.log_file, args.verbose)
        return COMMANDS[args.command](args, cfg, logger)
    except (ValidationError, ParseError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_FAILED
    except StereoNavError as e:
        logger.error(f"{args.command}: {type(e).__name__}: {e}")
        return EXIT_FAILED
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_IO
    finally:
        logger.close()


def main(argv: Optional[List[str]] = None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)
