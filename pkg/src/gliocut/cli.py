"""Command line entry point: segment, evaluate, phantom, solve-dimacs.

Exit codes: 0 success, 2 invalid flags or malformed textual input,
3 I/O failure, 4 seed outside the volume.
"""

from __future__ import annotations

import argparse
import json
import sys


from . import evaluate as ev
from .flow import DimacsError, max_flow, parse_dimacs
from .graph import SegmentationParams
from .segment import SeedOutsideVolumeError, segment
from .volume import (MetaImageError, load_volume, save_mask, save_volume, voxel_to_world)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SEED = 4


def _triple(text, kind=float):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z got {text!r}")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _params_from_args(args) -> SegmentationParams:
    return SegmentationParams(
        delta_r=args.delta_r,
        samples_per_ray=args.samples,
        max_radius_mm=args.max_radius,
        subdivisions=args.rays_subdiv,
        mean_region_d=args.mean_d,
    )


def cmd_segment(args) -> int:
    try:
        volume = load_volume(args.input)
    except MetaImageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.seed is None and args.seed_voxel is None:
        print("error: one of --seed or --seed-voxel is required", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None:
        seed_mm = args.seed
    else:
        try:
            seed_mm = voxel_to_world(volume, args.seed_voxel)
        except IndexError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SEED

    try:
        params = _params_from_args(args)
        params.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        result = segment(volume, seed_mm, params)
    except SeedOutsideVolumeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEED

    try:
        if args.output:
            save_mask(result.mask, args.output)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    record = {
        "volume_mm3": result.volume_mm3,
        "mean_gray": result.mean_gray,
        "runtime_ms": result.runtime_ms,
        "degenerate": result.degenerate,
        "cut_radii_mm": {
            "min": float(result.cut_radii.min()),
            "max": float(result.cut_radii.max()),
            "mean": float(result.cut_radii.mean()),
        },
        "seed_mm": list(seed_mm),
    }
    text = json.dumps(record, indent=2, sort_keys=True)
    if args.report:
        try:
            with open(args.report, "w", encoding="ascii") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    print(text)
    return EXIT_OK


def _read_manifest(path):
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two tab-separated paths")
            pairs.append((parts[0], parts[1]))
    return pairs


def cmd_evaluate(args) -> int:
    pairs = list(args.pair or [])
    if args.pairs:
        try:
            pairs += _read_manifest(args.pairs)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if not pairs:
        print("error: no mask pairs given (use --pairs or --pair)", file=sys.stderr)
        return EXIT_USAGE

    report = ev.compare_batch(pairs)
    print(report.format_table(), end="")
    if args.report:
        try:
            with open(args.report, "w", encoding="ascii") as fh:
                json.dump(report.to_records(), fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    if not report.dsc_values:
        print("error: no case succeeded", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_phantom(args) -> int:
    if args.ball is not None and args.ellipsoid is not None:
        print("error: give only one of --ball / --ellipsoid", file=sys.stderr)
        return EXIT_USAGE
    if args.ball is not None:
        cx, cy, cz, radius = args.ball
        spec = ev.PhantomSpec(dims=args.dims, spacing=args.spacing, shape="ball",
                              center_mm=(cx, cy, cz), radius_mm=radius,
                              inside_value=args.inside, outside_value=args.outside,
                              noise_sigma=args.noise_sigma)
    elif args.ellipsoid is not None:
        cx, cy, cz, ax, ay, az = args.ellipsoid
        spec = ev.PhantomSpec(dims=args.dims, spacing=args.spacing, shape="ellipsoid",
                              center_mm=(cx, cy, cz), semi_axes_mm=(ax, ay, az),
                              inside_value=args.inside, outside_value=args.outside,
                              noise_sigma=args.noise_sigma)
    else:
        spec = ev.PhantomSpec(dims=args.dims, spacing=args.spacing,
                              inside_value=args.inside, outside_value=args.outside,
                              noise_sigma=args.noise_sigma)
    try:
        spec.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    volume, mask = ev.generate_phantom(spec, rng_seed=args.rng_seed)
    try:
        save_volume(volume, args.out_volume)
        save_mask(mask, args.out_mask)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.out_volume} and {args.out_mask}")
    return EXIT_OK


def cmd_solve_dimacs(args) -> int:
    try:
        with open(args.input, "r", encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        network = parse_dimacs(text)
        result = max_flow(network)
    except DimacsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    flow = result.flow_value
    flow_text = str(int(flow)) if float(flow).is_integer() else f"{flow:.6f}"
    print(f"flow {flow_text}")
    print(f"source-set size {int(result.source_set.sum())}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gliocut",
                                     description="Seed-driven radial graph-cut segmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a volume from a seed point")
    p.add_argument("--input", required=True, help="volume (.mhd/.mha)")
    p.add_argument("--seed", type=_triple, help="seed in mm: x,y,z")
    p.add_argument("--seed-voxel", type=lambda s: _triple(s, int), help="seed as voxel index: i,j,k")
    p.add_argument("--delta-r", type=int, default=2, dest="delta_r")
    p.add_argument("--rays-subdiv", type=int, default=3, dest="rays_subdiv")
    p.add_argument("--samples", type=int, default=60)
    p.add_argument("--max-radius", type=float, default=50.0, dest="max_radius")
    p.add_argument("--mean-d", type=int, default=5, dest="mean_d")
    p.add_argument("--output", help="mask output path (.mhd/.mha)")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="Dice agreement of mask pairs")
    p.add_argument("--pairs", help="manifest file, one tab-separated path pair per line")
    p.add_argument("--pair", nargs=2, action="append", metavar=("A", "B"),
                   help="a single mask pair (repeatable)")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("phantom", help="generate a synthetic phantom volume + mask")
    p.add_argument("--dims", type=lambda s: _triple(s, int), default=(64, 64, 64))
    p.add_argument("--spacing", type=_triple, default=(1.0, 1.0, 1.0))
    p.add_argument("--ball", type=lambda s: tuple(float(x) for x in s.split(",")),
                   help="cx,cy,cz,r in mm")
    p.add_argument("--ellipsoid", type=lambda s: tuple(float(x) for x in s.split(",")),
                   help="cx,cy,cz,ax,ay,az in mm")
    p.add_argument("--inside", type=float, default=200.0)
    p.add_argument("--outside", type=float, default=50.0)
    p.add_argument("--noise-sigma", type=float, default=0.0, dest="noise_sigma")
    p.add_argument("--rng-seed", type=int, default=0, dest="rng_seed")
    p.add_argument("--out-volume", required=True, dest="out_volume")
    p.add_argument("--out-mask", required=True, dest="out_mask")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("solve-dimacs", help="run the max-flow solver on a DIMACS file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_solve_dimacs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if getattr(args, "ball", None) is not None and len(args.ball) != 4:
        print("error: --ball expects cx,cy,cz,r", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "ellipsoid", None) is not None and len(args.ellipsoid) != 6:
        print("error: --ellipsoid expects cx,cy,cz,ax,ay,az", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
