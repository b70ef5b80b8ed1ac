"""Command-line front end: ``track``, ``bench``, ``ablate``, ``synth``, ``evaluate``.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""
import argparse
import csv
import datetime
import json
import logging
import sys
import traceback
from pathlib import Path

from . import __version__
from .bench.dataset import DatasetError, format_boxes, list_sequences, load_sequence, parse_groundtruth
from .bench.imageio import ImageError
from .bench.metrics import evaluate
from .bench.ope import run_ope, track_sequence, write_curves, write_results
from .bench.synth import SynthSpec, synth_sequence
from .config import ConfigError, resolve_config
from .features import FeatureError

log = logging.getLogger("tsdtrack")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2
INPUT_ERRORS = (ConfigError, DatasetError, ImageError, FeatureError, FileNotFoundError)

ABLATION_ROWS = [
    ("baseline", {"mode": "baseline"}),
    ("+discard", {"mode": "tsd", "discard": True, "fusion": False, "response_reg": False}),
    ("+fusion", {"mode": "tsd", "discard": True, "fusion": True, "response_reg": False}),
    ("+response_reg", {"mode": "tsd", "discard": True, "fusion": True, "response_reg": True}),
]


class InputError(Exception):
    pass


def _pair(text, sep, kind=float):
    parts = text.split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}: {text!r}")
    try:
        return kind(parts[0]), kind(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number in {text!r}") from None


def _interval(text):
    a, b = _pair(text, ":", int)
    if not 1 <= a <= b:
        raise argparse.ArgumentTypeError(f"occlusion interval must satisfy 1 <= a <= b: {text!r}")
    return a, b


def _setting(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, _, val = text.partition("=")
    return key.strip(), val.strip()


def _config_flags(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--mode", choices=["tsd", "baseline"])
    p.add_argument("--no-discard", action="store_true", help="FIFO eviction instead of lowest score")
    p.add_argument("--no-fusion", action="store_true", help="never fuse a time slot into a key sample")
    p.add_argument("--no-response-reg", action="store_true", help="drop the DPMR term from scoring")
    p.add_argument("--set", dest="overrides", action="append", type=_setting, default=[],
                   metavar="KEY=VALUE", help="override one config value (repeatable)")


def _common_flags(p, out_default):
    p.add_argument("--out", default=out_default, help=f"output directory (default {out_default})")
    p.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    p.add_argument("--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="tsdtrack", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="track one sequence")
    p.add_argument("--seq", required=True, help="sequence directory")
    _config_flags(p)
    _common_flags(p, "results/track")

    p = sub.add_parser("bench", help="one-pass evaluation over a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _config_flags(p)
    _common_flags(p, "results/bench")

    p = sub.add_parser("ablate", help="cumulative component ablation over a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _config_flags(p)
    _common_flags(p, "results/ablate")

    p = sub.add_parser("synth", help="render a synthetic sequence")
    p.add_argument("--out", default="data", help="dataset directory to write into (default data)")
    p.add_argument("--name", help="sequence name (default synth-<seed>)")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--target", type=lambda s: _pair(s, "x", int), default=(40, 40),
                   metavar="WxH", help="target size (default 40x40)")
    p.add_argument("--frame-size", type=lambda s: _pair(s, "x", int), default=(320, 240),
                   metavar="WxH", help="frame size (default 320x240)")
    p.add_argument("--velocity", type=lambda s: _pair(s, ","), default=(0.0, 0.0),
                   metavar="VX,VY", help="pixels per frame")
    p.add_argument("--scale-rate", type=float, default=1.0, help="per-frame size factor")
    p.add_argument("--occlude", type=_interval, action="append", default=[], metavar="A:B",
                   help="frames A..B fully occluded (repeatable)")
    p.add_argument("--noise", type=float, default=2.0, help="pixel noise std")
    p.add_argument("--gray", action="store_true", help="single-channel frames")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("evaluate", help="score a boxes file against a sequence's groundtruth")
    p.add_argument("--seq", required=True)
    p.add_argument("--boxes", required=True)
    p.add_argument("--out", help="also write summary.json and curves.csv here")
    p.add_argument("--verbose", action="store_true")
    return parser


def config_from_args(args):
    overrides = dict(args.overrides)
    if args.mode:
        overrides["mode"] = args.mode
    if args.no_discard:
        overrides["discard"] = False
    if args.no_fusion:
        overrides["fusion"] = False
    if args.no_response_reg:
        overrides["response_reg"] = False
    return resolve_config(args.config, overrides)


def write_manifest(out, command, cfg=None, inputs=(), seed=None, argv=None):
    """Written before any result; the only file carrying a timestamp."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "argv": list(argv or []),
        "config": cfg.to_dict() if cfg is not None else None,
        "inputs": [str(p) for p in inputs],
        "output": str(out),
        "seed": seed,
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _dataset(path):
    seqs = list_sequences(path)
    if not seqs:
        raise InputError(f"{path}: no sequences (subdirectories with groundtruth.txt)")
    return seqs


def cmd_track(args, argv):
    cfg = config_from_args(args)
    seq = load_sequence(args.seq)
    out = Path(args.out)
    write_manifest(out, "track", cfg, [args.seq], args.seed, argv)
    stream = open(out / f"{seq.name}.jsonl", "w")

    def on_report(name, rep):
        line = json.dumps(rep, sort_keys=True)
        stream.write(line + "\n")
        if args.verbose:
            print(line, file=sys.stderr)

    with stream:
        boxes, _, elapsed = track_sequence(seq, cfg, on_report=on_report)
    (out / f"{seq.name}.txt").write_text(format_boxes(boxes))
    res = evaluate(boxes, seq.groundtruth)
    fps = len(seq) / elapsed if elapsed > 0 else 0.0
    print(f"{seq.name}: precision@20={res.precision_at_20:.3f} auc={res.auc:.3f} "
          f"fps={fps:.1f} -> {out}")
    return EXIT_OK


def _report(ope, label=""):
    for s in ope.sequences:
        if s.ok:
            log.info("%s%s: precision@20=%.3f auc=%.3f fps=%.1f", label, s.name,
                     s.result.precision_at_20, s.result.auc, s.fps)
        else:
            log.warning("%s%s failed: %s", label, s.name, s.error)


def cmd_bench(args, argv):
    cfg = config_from_args(args)
    seqs = _dataset(args.dataset)
    out = Path(args.out)
    write_manifest(out, "bench", cfg, [args.dataset], args.seed, argv)
    ope = run_ope(cfg, seqs, jobs=args.jobs)
    _report(ope)
    write_results(out, ope)
    for s in ope.errors:
        print(f"error: {s.name}: {s.error}", file=sys.stderr)
    if ope.aggregate is None:
        print("no sequence completed", file=sys.stderr)
        return EXIT_INPUT
    print(f"{len(ope.succeeded)} sequences: precision@20={ope.aggregate.precision_at_20:.3f} "
          f"auc={ope.aggregate.auc:.3f} -> {out}")
    return EXIT_OK


def ablation_rows(results):
    """Rows for the ablation table; relative improvement is against the previous row."""
    rows, prev = [], None
    for label, agg in results:
        p = agg.precision_at_20 if agg is not None else float("nan")
        a = agg.auc if agg is not None else float("nan")
        if prev is None:
            rp = ra = "-"
        else:
            rp = f"{(p - prev[0]) / prev[0]:.4f}" if prev[0] > 0 else "-"
            ra = f"{(a - prev[1]) / prev[1]:.4f}" if prev[1] > 0 else "-"
        rows.append({"step": label, "precision@20": f"{p:.4f}", "rel_imp_precision": rp,
                     "auc": f"{a:.4f}", "rel_imp_auc": ra})
        prev = (p, a)
    return rows


def cmd_ablate(args, argv):
    base = config_from_args(args)
    seqs = _dataset(args.dataset)
    out = Path(args.out)
    write_manifest(out, "ablate", base, [args.dataset], args.seed, argv)
    results = []
    for label, changes in ABLATION_ROWS:
        cfg = base.replace(**changes)
        ope = run_ope(cfg, seqs, jobs=args.jobs)
        _report(ope, f"[{label}] ")
        write_results(out / label.lstrip("+"), ope)
        results.append((label, ope.aggregate))
    rows = ablation_rows(results)
    with open(out / "ablation.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(",".join(r.values()))
    return EXIT_OK


def cmd_synth(args, argv):
    w, h = args.frame_size
    tw, th = args.target
    try:
        spec = SynthSpec(frames=args.frames, frame_size=(h, w), target_size=(th, tw),
                         velocity=args.velocity, scale_rate=args.scale_rate,
                         occlusions=tuple(args.occlude), noise=args.noise, seed=args.seed,
                         color=not args.gray)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    name = args.name or f"synth-{args.seed}"
    seq = synth_sequence(spec, args.out, name)
    print(f"{seq.name}: {len(seq)} frames -> {Path(args.out) / name}")
    return EXIT_OK


def cmd_evaluate(args, argv):
    seq = load_sequence(args.seq)
    path = Path(args.boxes)
    boxes = parse_groundtruth(path.read_text(), str(path))
    if len(boxes) != len(seq):
        raise InputError(f"{path}: {len(boxes)} boxes for {len(seq)} frames")
    res = evaluate(boxes, seq.groundtruth)
    summary = {"name": seq.name, **res.summary()}
    if args.out:
        out = Path(args.out)
        write_manifest(out, "evaluate", None, [args.seq, args.boxes], None, argv)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        write_curves(out / "curves.csv", res)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


COMMANDS = {"track": cmd_track, "bench": cmd_bench, "ablate": cmd_ablate,
            "synth": cmd_synth, "evaluate": cmd_evaluate}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args, argv)
    except INPUT_ERRORS + (InputError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return EXIT_INTERNAL

