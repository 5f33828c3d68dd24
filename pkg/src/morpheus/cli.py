"""Command line entry point: ``morpheus {tension,patterns,morph} INPUT``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import _validation as val
from .estimators import Morpheus, PatternDiscoverer, TensionProfiler
from .optimizer import InfeasibleError, ProblemError
from .patterns import encode_tec
from .score import ScoreError, write_midi
from .tension import TensionError, read_profile_csv, write_profile_csv

log = logging.getLogger("morpheus")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE = 0, 2, 3, 4

PLOT_SCRIPT = """\
# gnuplot script: tonal tension profiles
set datafile separator ','
set key outside
set xlabel 'beats'
set ylabel 'tension'
set multiplot layout 3,1 title '{title}'
plot '{csv}' using 2:3 with lines title 'cloud diameter'
plot '{csv}' using 2:4 with lines title 'cloud momentum'
plot '{csv}' using 2:5 with lines title 'tensile strain'
unset multiplot
"""


def _write(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)


def _load(args):
    try:
        return val.check_piece(Path(args.input), args.tatums_per_beat)
    except FileNotFoundError as exc:
        raise ScoreError(f"cannot read {args.input}: {exc.strerror}") from None


def cmd_tension(args) -> int:
    piece = _load(args)
    prof = TensionProfiler(args.segment_beats).fit_transform(piece)
    out = Path(args.out_dir)
    _write(out / "tension.csv", write_profile_csv(prof))
    _write(out / "tension.plot", PLOT_SCRIPT.format(title=piece.title or Path(args.input).stem,
                                                     csv="tension.csv"))
    print(f"key={prof.key.name} segments={len(prof)}")
    return EXIT_OK


def cmd_patterns(args) -> int:
    piece = _load(args)
    disc = PatternDiscoverer(args.pattern_algo, args.min_pattern_len, args.max_pattern_len)
    disc.fit(piece)
    lines = [encode_tec(t) for t in disc.tecs_]
    _write(Path(args.out_dir) / "patterns.tec", "".join(line + "\n" for line in lines))
    for line in lines:
        print(line)
    print(disc.summary())
    return EXIT_OK


def _read_fixed(path) -> dict[int, int]:
    fixed = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].split()
        if not body:
            continue
        if len(body) != 2:
            raise ScoreError(f"{path} line {lineno}: expected 'note_index midi_pitch'")
        try:
            fixed[int(body[0])] = int(body[1])
        except ValueError:
            raise ScoreError(f"{path} line {lineno}: non-integer field") from None
    return fixed


def _json_float(x: float):
    return None if math.isnan(x) else round(x, 6)


def cmd_morph(args) -> int:
    piece = _load(args)
    if not piece.notes:
        raise ScoreError("template has no notes")
    target = None
    if args.target_profile:
        target = read_profile_csv(Path(args.target_profile).read_text(encoding="utf-8"),
                                  val.check_segment_beats(args.segment_beats))
    fixed = _read_fixed(args.fixed_pitches) if args.fixed_pitches else None
    model = Morpheus(pattern_algorithm=args.pattern_algo, min_pattern_len=args.min_pattern_len,
                     max_pattern_len=args.max_pattern_len, segment_beats=args.segment_beats,
                     weights=args.weights, penalty=args.penalty, distance=args.distance,
                     max_iters=args.max_iters, random_state=args.seed)
    model.fit(piece, target, fixed_pitches=fixed)
    out = Path(args.out_dir)
    problem = model.problem_
    _write(out / "output.mid", write_midi(model.piece_))
    _write(out / "trace.csv", model.trace_.to_csv(clock=not args.no_clock))
    _write(out / "patterns.tec", "".join(encode_tec(t) + "\n" for t in model.cover_.tecs))
    _write(out / "tension_before.csv", write_profile_csv(problem.target))
    _write(out / "tension_after.csv", write_profile_csv(model.profile_))
    corr = model.correlations()
    report = {
        "problem": problem.summary(),
        "seed": args.seed,
        "max_iters": args.max_iters,
        "initial_objective": round(model.initial_objective_, 6),
        "final_objective": round(model.objective_, 6),
        "correlations": {when: {m: _json_float(v) for m, v in c.items()}
                         for when, c in corr.items()},
    }
    _write(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"UP={problem.n_free} objective {model.initial_objective_:.4f} -> {model.objective_:.4f}")
    return EXIT_OK


def _weights(text):
    try:
        return val.check_weights(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _segment(text):
    try:
        return val.check_segment_beats(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morpheus",
        description="Tension analysis, pattern discovery and pattern-constrained morphing "
                    "of polyphonic pieces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="MIDI file or point-set text file")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--tatums-per-beat", type=int, default=None,
                        help="override the inferred tatum grid of MIDI input")
    common.add_argument("--segment-beats", type=_segment, default=_segment("1/2"),
                        help="tension window length in beats (default 1/2)")
    pat = argparse.ArgumentParser(add_help=False)
    pat.add_argument("--pattern-algo", choices=val.PATTERN_ALGORITHMS, default="cosiatec")
    pat.add_argument("--min-pattern-len", type=int, default=1)
    pat.add_argument("--max-pattern-len", type=int, default=None)

    sub.add_parser("tension", parents=[common], help="write tension.csv and tension.plot")
    sub.add_parser("patterns", parents=[common, pat], help="write patterns.tec")
    morph = sub.add_parser("morph", parents=[common, pat], help="generate a new piece")
    morph.add_argument("--weights", type=_weights, default=(1.0, 1.0, 1.0),
                       help="comma-separated weights for diameter,momentum,strain")
    morph.add_argument("--penalty", type=float, default=1e6,
                       help="penalty per violated fixed pitch")
    morph.add_argument("--max-iters", type=int, default=10, help="perturbation cycles")
    morph.add_argument("--seed", type=int, default=0)
    morph.add_argument("--distance", choices=val.DISTANCES, default="l1")
    morph.add_argument("--target-profile", help="tension CSV to follow instead of the template's")
    morph.add_argument("--fixed-pitches", help="file of 'note_index midi_pitch' lines")
    morph.add_argument("--no-clock", action="store_true",
                       help="write 0 for elapsed_ms so trace.csv is byte-reproducible")
    return parser


COMMANDS = {"tension": cmd_tension, "patterns": cmd_patterns, "morph": cmd_morph}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.command in ("patterns", "morph"):
        if args.min_pattern_len < 1 or (args.max_pattern_len is not None
                                        and args.max_pattern_len < args.min_pattern_len):
            parser.error("pattern lengths need 1 <= min <= max")
    if args.command == "morph" and args.max_iters < 1:
        parser.error("--max-iters must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except InfeasibleError as exc:
        print(f"morpheus: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ScoreError, TensionError, ProblemError, UnicodeDecodeError, OSError) as exc:
        print(f"morpheus: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
