"""facefuse command line: stage subcommands plus the end-to-end run.

Exit codes: 0 success, 2 validation problem, 3 numerical failure, 4 IO.
"""

import argparse
import json
import sys

from . import pipeline
from .config import load_config
from .errors import (
    FacefuseError,
    ImageFormatError,
    MeshFormatError,
    NumericalError,
    ValidationError,
)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser():
    p = argparse.ArgumentParser(prog="facefuse",
                                description="photometric capture stitching pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("--scene", choices=["sphere", "bumpy", "head"], default="head")
    s.add_argument("--mode", choices=["continuous", "led41"], default="continuous")
    s.add_argument("--resolution", type=int, default=384)
    s.add_argument("--out", required=True)

    s = sub.add_parser("align", help="align gradient sequences against motion")
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--iterations", type=int, default=1)

    s = sub.add_parser("normals", help="estimate normal maps and albedos")
    s.add_argument("--data", required=True, help="aligned dataset directory")
    s.add_argument("--out", required=True)

    s = sub.add_parser("biascorrect", help="remove low-frequency normal bias")
    s.add_argument("--data", required=True, help="synth dataset directory")
    s.add_argument("--normals", required=True, help="normals stage output")
    s.add_argument("--out", required=True)
    s.add_argument("--sigma-low", type=float, default=None)

    s = sub.add_parser("segment", help="segment the base mesh into patches")
    s.add_argument("--data", required=True)
    s.add_argument("--patches", type=int, default=100)
    s.add_argument("--overlap", type=float, default=0.3)
    s.add_argument("--seed-vertex", type=int, default=0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("stitch", help="stitch albedos onto the base mesh")
    s.add_argument("--data", required=True)
    s.add_argument("--maps", required=True, help="biascorrect stage output")
    s.add_argument("--seg", required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=1e-6)
    s.add_argument("--normals", dest="normal_source",
                   choices=["diffuse", "specular"], default="specular",
                   help="normal source when --refined-out chains refinement")
    s.add_argument("--screen", type=float, default=None,
                   help="refinement screening weight (with --refined-out)")
    s.add_argument("--refined-out", default=None,
                   help="also refine geometry and write the result here")
    s.add_argument("--out", required=True)

    s = sub.add_parser("refine", help="normal-guided mesh refinement")
    s.add_argument("--data", required=True)
    s.add_argument("--maps", required=True)
    s.add_argument("--seg", required=True)
    s.add_argument("--normals", dest="normal_source",
                   choices=["diffuse", "specular"], default="specular")
    s.add_argument("--screen", type=float, default=None,
                   help="screening weight (default: auto)")
    s.add_argument("--attrs", default=None, help="PLY to copy attributes from")
    s.add_argument("--out", required=True)

    s = sub.add_parser("render", help="Cook-Torrance preview render")
    s.add_argument("--data", required=True)
    s.add_argument("--mesh", required=True)
    s.add_argument("--view", type=int, default=None)
    s.add_argument("--out", required=True)

    s = sub.add_parser("run", help="full pipeline from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--threads", type=int, default=None)

    return p


def dispatch(args):
    if args.command == "synth":
        return pipeline.run_synth(args.out, scene=args.scene, mode=args.mode,
                                  resolution=args.resolution)
    if args.command == "align":
        return pipeline.run_align(args.data, args.out, iterations=args.iterations)
    if args.command == "normals":
        return pipeline.run_normals(args.data, args.out)
    if args.command == "biascorrect":
        return pipeline.run_biascorrect(args.data, args.normals, args.out,
                                        sigma_low=args.sigma_low)
    if args.command == "segment":
        seg = pipeline.run_segment(args.data, args.out, patches=args.patches,
                                   overlap=args.overlap, seed_vertex=args.seed_vertex)
        return {"patches": seg.n_patches, "sigma": seg.sigma}
    if args.command == "stitch":
        result = pipeline.run_stitch(args.data, args.maps, args.seg, args.out,
                                     lam=args.lam)
        if args.refined_out:
            result["refine"] = pipeline.run_refine(
                args.data, args.maps, args.seg, args.refined_out,
                lambda_screen=args.screen, normal_source=args.normal_source,
                attrs_from=args.out)
        return result
    if args.command == "refine":
        return pipeline.run_refine(args.data, args.maps, args.seg, args.out,
                                   lambda_screen=args.screen,
                                   normal_source=args.normal_source,
                                   attrs_from=args.attrs)
    if args.command == "render":
        return pipeline.run_render(args.data, args.mesh, args.out, view=args.view)
    if args.command == "run":
        config = load_config(args.config)
        if args.threads is not None:
            config.threads = args.threads
        return pipeline.run_pipeline(config)
    raise ValidationError(f"unknown command {args.command!r}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        result = dispatch(args)
    except (MeshFormatError, ImageFormatError) as exc:
        print(f"facefuse: format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"facefuse: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"facefuse: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"facefuse: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FacefuseError as exc:
        print(f"facefuse: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if result is not None:
        json.dump(result, sys.stdout, indent=2, sort_keys=True, default=str)
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
