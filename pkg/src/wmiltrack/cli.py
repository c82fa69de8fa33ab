"""Command-line entry point: ``track``, ``eval`` and ``synth``."""

import argparse
import json
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

from . import io
from .errors import ConfigError, ImageReadError, InvalidInputError, TrackingLostError
from .evaluation import (PRECISION_THRESHOLDS, RESULT_HEADER, SUCCESS_THRESHOLDS, FrameResult,
                         precision_curve, success_curve, summarize)
from .synthetic import SyntheticSpec, generate_synthetic
from .tracker import Tracker, TrackerConfig

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_LOST = 3
EXIT_INVALID = 4

GT_NAME = "groundtruth_rect.txt"


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def _resolve_config(args):
    config = io.load_config(args.config) if args.config else TrackerConfig()
    env_seed = os.environ.get("TRACKER_SEED")
    if env_seed is not None:
        try:
            config = config.replace(rng_seed=int(env_seed))
        except ValueError as exc:
            raise ConfigError(f"TRACKER_SEED must be an integer, got '{env_seed}'",
                              field="TRACKER_SEED") from exc
    if args.seed is not None:
        config = config.replace(rng_seed=args.seed)
    return config


def cmd_track(args):
    try:
        config = _resolve_config(args)
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_INVALID, exc)
    try:
        init_box = (io.parse_box(args.init_box) if args.init_box
                    else io.read_ground_truth(args.gt)[0])
        frames = io.load_sequence(args.seq)
    except ImageReadError as exc:
        return _fail(EXIT_IO, exc)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read '{exc.filename}': {exc.strerror}")
    except (InvalidInputError, IndexError) as exc:
        return _fail(EXIT_INVALID, f"bad initial box: {exc}")

    tracker = Tracker(config)
    diagnostics = []
    code = EXIT_OK
    start = time.perf_counter()
    try:
        boxes = [tracker.init(frames[0], init_box)]
        for frame in frames[1:]:
            boxes.append(tracker.update(frame))
            record = tracker.last_diagnostics.as_record()
            record["frame"] += 1
            diagnostics.append(record)
    except TrackingLostError as exc:
        code = EXIT_LOST
        print(f"tracking lost at frame {len(boxes) + 1}: {exc}; results truncated",
              file=sys.stderr)
    except (InvalidInputError, ConfigError) as exc:
        return _fail(EXIT_INVALID, exc)
    elapsed = max(time.perf_counter() - start, 1e-9)

    io.atomic_write(args.out, io.results_text(boxes))
    if args.diag:
        io.atomic_write(args.diag, _csv(diagnostics))
    print(f"tracked {len(boxes)} frames at {len(boxes) / elapsed:.1f} fps")
    return code


def _csv(records):
    if not records:
        return ""
    keys = list(records[0])
    rows = [",".join(keys)]
    rows += [",".join(str(r[k]) for k in keys) for r in records]
    return "\n".join(rows) + "\n"


def evaluation_tables(boxes, truth):
    """Summary, precision and success tables as CSV text."""
    results = [FrameResult.score(i + 1, b, g) for i, (b, g) in enumerate(zip(boxes, truth))]
    summary = summarize(results)
    prec = precision_curve(results)
    succ, _ = success_curve(results)
    summary_rows = ["metric,value",
                    f"frames,{summary['frames']}",
                    f"mean_cle,{summary['mean_cle']:.6f}",
                    f"success_rate,{summary['success_rate']:.6f}",
                    f"precision_20,{summary['precision_20']:.6f}",
                    f"auc,{summary['auc']:.6f}"]
    prec_rows = ["threshold,precision"] + [f"{t:g},{v:.6f}" for t, v in zip(PRECISION_THRESHOLDS, prec)]
    succ_rows = ["threshold,success"] + [f"{t:.2f},{v:.6f}" for t, v in zip(SUCCESS_THRESHOLDS, succ)]
    frame_rows = [RESULT_HEADER] + [r.as_row() for r in results]
    return {
        "summary": "\n".join(summary_rows) + "\n",
        "precision": "\n".join(prec_rows) + "\n",
        "success": "\n".join(succ_rows) + "\n",
        "frames": "\n".join(frame_rows) + "\n",
    }, summary


def cmd_eval(args):
    try:
        boxes = io.read_results(args.results)
        truth = io.read_ground_truth(args.gt)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read '{exc.filename}': {exc.strerror}")
    except InvalidInputError as exc:
        return _fail(EXIT_INVALID, exc)
    if len(boxes) != len(truth):
        return _fail(EXIT_INVALID,
                     f"frame count mismatch: {len(boxes)} results vs {len(truth)} ground-truth boxes")
    if not boxes:
        return _fail(EXIT_INVALID, "no frames to evaluate")

    tables, summary = evaluation_tables(boxes, truth)
    out = Path(args.out)
    stem = out.with_suffix("")
    io.atomic_write(out, tables["summary"])
    io.atomic_write(f"{stem}_precision.csv", tables["precision"])
    io.atomic_write(f"{stem}_success.csv", tables["success"])
    io.atomic_write(f"{stem}_frames.csv", tables["frames"])
    print(f"mean CLE {summary['mean_cle']:.2f} px, SR {100 * summary['success_rate']:.1f}%, "
          f"precision@20 {100 * summary['precision_20']:.1f}%, AUC {summary['auc']:.3f}")
    return EXIT_OK


def cmd_synth(args):
    try:
        with open(args.spec) as fh:
            data = json.load(fh)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read '{args.spec}': {exc.strerror}")
    except json.JSONDecodeError as exc:
        return _fail(EXIT_INVALID, f"spec is not valid JSON: {exc}")
    if not isinstance(data, dict):
        return _fail(EXIT_INVALID, "spec must be a JSON object")
    try:
        spec = SyntheticSpec.from_dict(data)
    except ConfigError as exc:
        return _fail(EXIT_INVALID, exc)
    frames, truth = generate_synthetic(spec)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(dir=out.parent, prefix=f".{out.name}."))
    try:
        width = max(4, len(str(len(frames))))
        for t, frame in enumerate(frames):
            io.write_pgm(staging / f"{t + 1:0{width}d}.pgm", frame.pixels)
        io.write_ground_truth(staging / GT_NAME, truth)
        out.mkdir(exist_ok=True)
        for p in sorted(staging.iterdir()):
            os.replace(p, out / p.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    print(f"wrote {len(frames)} frames and {GT_NAME} to {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="wmiltrack",
                                     description="Sub-region compressive tracker with weighted MIL.")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("track", help="track a target through an image sequence")
    t.add_argument("--seq", required=True, help="directory of numbered frames")
    t.add_argument("--gt", help="ground-truth file; its first box initializes the tracker")
    t.add_argument("--init-box", help="initial box x,y,w,h (1-indexed)")
    t.add_argument("--config", help="key = value config file")
    t.add_argument("--out", required=True, help="results file (frame,x,y,w,h)")
    t.add_argument("--seed", type=int, help="RNG seed; overrides TRACKER_SEED and the config")
    t.add_argument("--diag", help="optional per-frame diagnostics CSV")
    t.set_defaults(func=cmd_track)

    e = sub.add_parser("eval", help="score a results file against ground truth")
    e.add_argument("--results", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--out", required=True, help="summary CSV; curve tables are written alongside")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="render a synthetic sequence from a JSON spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "track" and not (args.gt or args.init_box):
        parser.error("track needs --gt or --init-box")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
