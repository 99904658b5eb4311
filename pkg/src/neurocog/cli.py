"""Command-line entry point: generate, run, score, report, validate.

Exit codes: 0 success, 1 validation or replay failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness.session import ReplayMismatch, TranscriptError, read_transcript, replay
from .orchestration import ConfigError, full_matrix_plan, load_plan, rescore, run_plan, write_report
from .orchestration.runner import write_scores
from .rapm import generate_items, read_items, validate_item, write_items

log = logging.getLogger("neurocog")

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2


def _pair(text: str) -> tuple[str, str]:
    a, sep, b = text.partition(",")
    if not sep or not a or not b:
        raise argparse.ArgumentTypeError(f"expected COL_A,COL_B, got {text!r}")
    return a, b


def _add_globals(parser: argparse.ArgumentParser, top: bool) -> None:
    # subcommands repeat the global flags; SUPPRESS keeps them from
    # overwriting values given before the subcommand name
    def default(value):
        return value if top else argparse.SUPPRESS

    parser.add_argument("--config", type=Path, default=default(None), help="plan file (YAML or JSON)")
    parser.add_argument("--seed", type=int, default=default(None), help="master seed (overrides the plan)")
    parser.add_argument("--jobs", type=int, default=default(None), help="parallel trials")
    parser.add_argument("--out", type=Path, default=default(Path("out")), help="output root (default: out)")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, top=False)

    p = argparse.ArgumentParser(prog="neurocog", description=__doc__)
    _add_globals(p, top=True)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write RAPM items as JSONL")
    g.add_argument("--task", choices=["rapm-text"], default="rapm-text")
    g.add_argument("--count", type=int, default=200)
    g.add_argument("--seed-base", type=int, help="first item seed (default: --seed or 0)")
    g.add_argument("--output", type=Path,
                   help="items file (default: --out when it names a .jsonl file, "
                        "else <out>/rapm_items.jsonl)")

    r = sub.add_parser("run", parents=[common], help="execute a run plan")
    r.add_argument("--run-id", help="override the plan's run id")
    r.add_argument("--fresh", action="store_true", help="rerun trials that already completed")
    r.add_argument("--full-matrix", action="store_true",
                   help="ignore --config and run every task with the oracle agents")

    s = sub.add_parser("score", parents=[common], help="recompute scores from transcripts")
    s.add_argument("run_id", nargs="?", help="run directory name under --out")

    rep = sub.add_parser("report", parents=[common], help="aggregate scores and run comparisons")
    rep.add_argument("run_id", nargs="?", help="run directory name under --out")
    rep.add_argument("--table", type=Path, help="CSV table to compare instead of the run's means")
    rep.add_argument("--paired", type=_pair, action="append", metavar="COL_A,COL_B",
                     help="paired t-test between two columns")
    rep.add_argument("--correlate", type=_pair, action="append", metavar="COL_A,COL_B",
                     help="Pearson correlation between two columns")

    v = sub.add_parser("validate", parents=[common], help="check a plan, item file or transcript")
    v.add_argument("paths", nargs="*", type=Path, help="items (.jsonl) or transcript files")
    return p


def _run_dir(args, run_id: str | None) -> Path:
    if run_id:
        return args.out / run_id
    if args.config:
        return args.out / load_plan(args.config).run_id
    raise ConfigError("give a run id or --config")


def cmd_generate(args) -> int:
    if args.count < 0:
        raise ConfigError("--count must be >= 0")
    base = args.seed_base if args.seed_base is not None else (args.seed or 0)
    items = list(generate_items(args.count, base))
    bad = 0
    for item in items:
        report = validate_item(item)
        if not report.ok:
            bad += 1
            log.error("item seed %d failed validation: %s", item.seed, "; ".join(report.problems))
    output = args.output
    if output is None:
        output = args.out if args.out.suffix == ".jsonl" else args.out / "rapm_items.jsonl"
    output.parent.mkdir(parents=True, exist_ok=True)
    write_items(items, output)
    print(f"wrote {len(items)} items to {output}")
    if len(items) < args.count:
        log.error("only %d of %d items generated", len(items), args.count)
        return EXIT_INVALID
    return EXIT_INVALID if bad else EXIT_OK


def cmd_run(args) -> int:
    if args.full_matrix:
        plan = full_matrix_plan()
    elif args.config:
        plan = load_plan(args.config)
    else:
        raise ConfigError("run needs --config or --full-matrix")
    if args.seed is not None:
        plan.master_seed = args.seed
    if args.run_id:
        plan.run_id = args.run_id
    summary = run_plan(plan, args.out, jobs=args.jobs, resume=not args.fresh)
    print(f"{summary.run_dir}: {summary.count('done')} done, {summary.count('skipped')} skipped, "
          f"{summary.count('failed')} failed")
    for r in summary.failed:
        print(f"  failed {r.trial_id}: {r.error}")
    return EXIT_INVALID if summary.failed else EXIT_OK


def cmd_score(args) -> int:
    run_dir = _run_dir(args, args.run_id)
    result = rescore(run_dir)
    for m in result.mismatches:
        log.error("replay mismatch: %s", m)
    if result.mismatches:
        return EXIT_INVALID
    run_dir.mkdir(parents=True, exist_ok=True)
    write_scores(run_dir, result.records)
    print(f"rescored {len(result.records)} transcripts ({len(result.incomplete)} incomplete skipped)")
    return EXIT_OK


def cmd_report(args) -> int:
    run_dir = _run_dir(args, args.run_id)
    stats = write_report(run_dir, args.table, args.paired, args.correlate)
    print(f"wrote {run_dir / 'report.csv'} and {run_dir / 'stats.json'}")
    for name, s in stats.items():
        if "error" in s:
            print(f"{name}: {s['error']}")
        else:
            print(f"{name}: statistic={s['statistic']:.4f} df={s['df']} p={s['p']:.4f} "
                  f"(n={s['n']}, excluded={len(s['excluded'])})")
    return EXIT_OK


def _validate_file(path: Path) -> list[str]:
    with path.open(encoding="utf-8") as fh:
        first = fh.readline()
    if not first.strip():
        return []
    head = json.loads(first)
    problems = []
    if head.get("type") == "header":
        try:
            replay(read_transcript(path))
        except (ReplayMismatch, TranscriptError) as exc:
            problems.append(str(exc))
        return problems
    for item in read_items(path):
        report = validate_item(item)
        if not report.ok:
            problems.append(f"item seed {item.seed}: " + "; ".join(report.problems))
    return problems


def cmd_validate(args) -> int:
    if args.config:
        plan = load_plan(args.config)
        print(f"plan {plan.run_id}: {len(plan.trials())} trials, digest {plan.digest()}")
    problems = []
    for path in args.paths:
        try:
            found = _validate_file(path)
        except (OSError, ValueError, KeyError) as exc:
            found = [f"cannot read: {exc}"]
        problems += [f"{path}: {p}" for p in found]
        print(f"{path}: {'ok' if not found else f'{len(found)} problem(s)'}")
    for p in problems:
        log.error(p)
    return EXIT_INVALID if problems else EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "run": cmd_run,
    "score": cmd_score,
    "report": cmd_report,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
