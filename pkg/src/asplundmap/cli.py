"""Command-line interface.

Exit codes: 0 success, 1 contract violation, 2 I/O or parse failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .asplund import distance_map_flat, distance_map_tolerance
from .errors import ContractError, OracleError, ParseError
from .lip import GreyScale, clamp_floor, lip_scalar_mul
from .matcher import (
    DEFAULT_DARKENING,
    DEFAULT_THRESHOLD,
    DEFAULT_TOLERANCE,
    add_uniform_noise,
    asplund_map,
    detect,
    extract_probe,
    tiles_scene,
)
from .morpho import FlatDomain, StructuringFunction

log = logging.getLogger("asplundmap")


def _pair(text):
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y, got {text!r}") from None
    return x, y


def _rect(text):
    try:
        x, y, w, h = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,w,h, got {text!r}") from None
    return x, y, w, h


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asplundmap",
        description="Maps of Asplund's distances with LIP multiplication.",
    )
    parser.add_argument("--M", type=float, default=256.0, help="grey-scale bound (default 256)")
    parser.add_argument(
        "--invert",
        action="store_true",
        help="convert 0=black files to the LIP 0=white convention on read and back on write",
    )
    parser.add_argument(
        "--clamp-floor",
        type=float,
        default=1.0,
        help="raise ingested tones below this value before computing distances (default 1)",
    )
    parser.add_argument(
        "--strict-positivity",
        action="store_true",
        help="no clamping; windows touching a zero tone become invalid",
    )
    parser.add_argument("--threads", type=int, default=1, help="row-parallel map evaluation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lipmul", help="LIP scalar multiplication of an image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--k", type=float, default=DEFAULT_DARKENING)
    p.add_argument("--plain", action="store_true", help="write ASCII P2")

    p = sub.add_parser("probe-extract", help="cut a probe out of an image")
    p.add_argument("input")
    p.add_argument("output", help="probe text file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--rect", type=_rect, metavar="X,Y,W,H")
    src.add_argument("--mask", help="PGM of the image size; non-zero pixels form the domain")
    p.add_argument(
        "--anchor",
        type=_pair,
        metavar="X,Y",
        help="image pixel used as offset origin (default: top-left of the rect/mask bbox)",
    )

    p = sub.add_parser("map", help="map of Asplund's distances")
    p.add_argument("input")
    p.add_argument("--probe", required=True)
    p.add_argument("-o", "--output", required=True, help="PFM output (mask written alongside)")
    p.add_argument("--flat", type=float, metavar="B0", help="use a flat probe of height B0 on the probe domain")
    p.add_argument("--tolerance", type=float, default=0.0, metavar="P")
    p.add_argument("--vis", help="8-bit visualization PGM")
    p.add_argument("--figure", help="PNG rendering of the map")

    p = sub.add_parser("detect", help="thresholded minima of a distance map")
    p.add_argument("map", help="PFM written by `map`")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    p.add_argument("-o", "--output", help="write 'x y score' lines here instead of stdout")

    p = sub.add_parser("synth", help="write the synthetic tiles scene and its ground truth")
    p.add_argument("output", help="scene PGM")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0, help="uniform noise amplitude in grey levels")
    p.add_argument("--truth", help="ground-truth anchors as 'x y score' lines")
    p.add_argument("--probe-out", help="probe cut at the first anchor")

    p = sub.add_parser("pipeline", help="darken, map and detect in one go")
    p.add_argument("input")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--probe")
    src.add_argument("--rect", type=_rect, metavar="X,Y,W,H")
    p.add_argument("--anchor", type=_pair, metavar="X,Y")
    p.add_argument("--k", type=float, default=DEFAULT_DARKENING)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figure", action="store_true")
    return parser


def _ingest(args, path):
    f = io.read_pgm(path, M=args.M, invert=args.invert)
    if not args.strict_positivity:
        f = clamp_floor(f, args.clamp_floor)
    return f


def _load_probe(args, path):
    B, anchor = io.read_probe(path)
    if B.scale != GreyScale(args.M):
        raise ContractError(f"probe file has M={B.M:g}, command line uses M={args.M:g}")
    return B, anchor


def _probe_from_rect(args, f, rect, anchor):
    x, y, w, h = rect
    anchor = anchor or (x, y)
    domain = FlatDomain.rect(w, h, (anchor[0] - x, anchor[1] - y))
    probe = extract_probe(f, domain, anchor, strict=args.strict_positivity, floor=args.clamp_floor)
    return probe, anchor


def cmd_lipmul(args):
    f = io.read_pgm(args.input, M=args.M, invert=args.invert)
    io.write_pgm(lip_scalar_mul(args.k, f), args.output, invert=args.invert, plain=args.plain)


def cmd_probe_extract(args):
    f = _ingest(args, args.input)
    if args.rect:
        probe, anchor = _probe_from_rect(args, f, args.rect, args.anchor)
    else:
        mask = io.parse_pgm(Path(args.mask).read_bytes()) > 0
        if mask.shape != f.shape:
            raise ContractError("mask and image sizes differ")
        if not mask.any():
            raise ContractError("mask is empty")
        if args.anchor:
            anchor = args.anchor
        else:
            ys, xs = np.nonzero(mask)
            anchor = (int(xs.min()), int(ys.min()))
        domain = FlatDomain.from_mask(mask, anchor)
        probe = extract_probe(f, domain, anchor, strict=args.strict_positivity, floor=args.clamp_floor)
    io.write_probe(probe, args.output, anchor)
    log.info("probe with %d offsets written to %s", len(probe), args.output)


def compute_map(f, B, tolerance, flat=None, strict=False, threads=1):
    """Library call used by ``map``: optional flat probe, optional tolerance."""
    if flat is not None:
        B = StructuringFunction.flat(B.domain, flat, B.scale)
        if tolerance == 0:
            return distance_map_flat(f, flat, B.domain, strict=strict)
        return distance_map_tolerance(f, B, tolerance, strict=strict, threads=threads)
    return asplund_map(f, B, tolerance, strict=strict, threads=threads)


def cmd_map(args):
    f = _ingest(args, args.input)
    B, _ = _load_probe(args, args.probe)
    dmap = compute_map(f, B, args.tolerance, args.flat, args.strict_positivity, args.threads)
    if not dmap.valid.any():
        log.warning("probe does not fit inside the image: the map has no valid pixel")
    io.write_map(dmap, args.output, args.vis)
    if args.figure:
        from .report import plot_map

        plot_map(dmap, args.figure)


def cmd_detect(args):
    dmap = io.read_map(args.map)
    dets = detect(dmap, args.threshold, args.connectivity)
    text = io.format_detections(dets)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_synth(args):
    if args.M != 256:
        raise ContractError("the synthetic scene is defined for M = 256 only")
    scene = tiles_scene(args.seed)
    image = scene.image
    if args.noise > 0:
        image = add_uniform_noise(image, args.noise, args.seed + 1)
    io.write_pgm(image, args.output, invert=args.invert)
    if args.truth:
        io.write_detections([(a, 0.0) for a in scene.anchors], args.truth)
    if args.probe_out:
        # re-cut from the quantized image so the probe matches the file exactly
        stored = _ingest(args, args.output)
        probe = extract_probe(stored, scene.probe.domain, scene.anchors[0], floor=args.clamp_floor)
        io.write_probe(probe, args.probe_out, scene.anchors[0])


def cmd_pipeline(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    f = _ingest(args, args.input)
    if args.probe:
        B, anchor = _load_probe(args, args.probe)
    else:
        B, anchor = _probe_from_rect(args, f, args.rect, args.anchor)
    darkened = lip_scalar_mul(args.k, f)
    dmap = asplund_map(darkened, B, args.tolerance, strict=args.strict_positivity, threads=args.threads)
    dets = detect(dmap, args.threshold, args.connectivity)

    io.write_probe(B, out / "probe.txt", anchor)
    io.write_pgm(darkened, out / "darkened.pgm", invert=args.invert)
    io.write_map(dmap, out / "map.pfm", out / "map_vis.pgm")
    io.write_detections(dets, out / "detections.txt")
    if not args.no_figure:
        from .report import plot_pipeline

        plot_pipeline(f, darkened, B, anchor, dmap, dets, args.threshold, out / "figure.png")
    sys.stdout.write(io.format_detections(dets))


COMMANDS = {
    "lipmul": cmd_lipmul,
    "probe-extract": cmd_probe_extract,
    "map": cmd_map,
    "detect": cmd_detect,
    "synth": cmd_synth,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        if args.threads < 1:
            raise ContractError("--threads must be at least 1")
        COMMANDS[args.command](args)
    except (ParseError, OSError) as exc:
        print(f"asplundmap: error: {exc}", file=sys.stderr)
        return 2
    except (ContractError, OracleError) as exc:
        print(f"asplundmap: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
