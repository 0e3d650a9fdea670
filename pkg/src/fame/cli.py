"""Command-line entry point: ``fame {mask,merge,probe,bench}``.

Exit codes: 0 ok, 2 usage, 3 format/shape, 4 precondition, 5 training divergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import run_bench
from .clip import DTYPE_FLOAT32, _atomic_write, load_clip, save_clip
from .errors import ClipFormatError, ClipRangeError, PreconditionError, ShapeError, TrainingError
from .foreground import METHODS, DEFAULT_BINS, save_mask, top_count, variant_mask
from .merge import merge

EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_PRECONDITION = 4
EXIT_DIVERGED = 5

log = logging.getLogger("fame")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_mask(args) -> int:
    clip = load_clip(args.input)
    mask = variant_mask(clip, args.method, args.beta, args.bins)
    save_mask(args.output, mask)
    print(f"ones_count={int(mask.sum())} target={top_count(args.beta, clip.H, clip.W)}")
    return 0


def cmd_merge(args) -> int:
    fg = load_clip(args.fg)
    bg = load_clip(args.bg)
    if fg.shape != bg.shape:
        raise ShapeError(f"foreground shape {fg.shape} does not match background shape {bg.shape}")
    mask = variant_mask(fg, "fame", args.beta, args.bins)
    out = merge(fg, bg, mask)
    save_clip(out, args.output, dtype=args.dtype)
    if args.mask_out:
        save_mask(args.mask_out, mask)
    print(f"ones_count={int(mask.sum())} target={top_count(args.beta, fg.H, fg.W)}")
    return 0


def cmd_probe(args) -> int:
    from .contrastive.probe import ProbeSuiteConfig, run_probe_suite

    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise PreconditionError(f"config is not valid JSON: {e}") from None
        if not isinstance(raw, dict):
            raise PreconditionError("config must be a JSON object")
        config = ProbeSuiteConfig.from_dict(raw)
    else:
        config = ProbeSuiteConfig()
    result = run_probe_suite(config)
    text = _dump_json(result)
    if args.output:
        _atomic_write(args.output, text.encode("utf-8"))
    print(_dump_json(result["summary"]), end="")
    return 0


def cmd_bench(args) -> int:
    report = run_bench(args.t, args.h, args.w, args.iters, args.threads, args.beta)
    print(_dump_json(report.to_dict()), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fame", description=__doc__.splitlines()[0])
    parser.add_argument("--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="write the foreground mask of a FAMECLIP as P5")
    p.add_argument("input", help="FAMECLIP file")
    p.add_argument("--method", choices=METHODS, default="fame")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("-o", "--output", required=True, help="P5 mask path")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("merge", help="paste the foreground of one clip onto another")
    p.add_argument("--fg", required=True)
    p.add_argument("--bg", required=True)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--dtype", type=int, choices=(0, 1), default=DTYPE_FLOAT32)
    p.add_argument("-o", "--output", required=True, help="merged FAMECLIP path")
    p.add_argument("--mask-out", help="also write the mask used (P5)")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("probe", help="train the toy encoder with and without merging")
    p.add_argument("--config", help="JSON config; defaults are used when omitted")
    p.add_argument("-o", "--output", help="metrics JSON path")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("bench", help="time mask+merge on random clips")
    p.add_argument("--t", type=int, default=16)
    p.add_argument("--h", type=int, default=112)
    p.add_argument("--w", type=int, default=112)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--beta", type=float, default=0.5)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ClipFormatError, ShapeError, ClipRangeError) as e:
        print(f"fame {args.command}: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except PreconditionError as e:
        print(f"fame {args.command}: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except TrainingError as e:
        print(f"fame {args.command}: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as e:
        print(f"fame {args.command}: {e}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
