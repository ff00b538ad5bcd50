"""Command line front end: ``tinypy-gen {generate,validate-grammar,dump-grammar,run-snippet}``.

Exit codes: 0 success, 1 usage error, 2 grammar validation errors,
3 attempts exhausted, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path
from typing import List, Optional

from .corpus import AttemptsExhausted, PipelineConfig, generate_corpus
from .derivation import DerivationConfig, LevelId
from .grammar import GrammarError, builtin_grammar_text, builtin_tinypy, parse_grammar, validate
from .interpreter import Limits, run
from .rng import DEFAULT_SEED

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_EXHAUSTED, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed(text: str) -> int:
    if text == "random":
        return random.SystemRandom().getrandbits(63)
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random', got {text!r}")


def _level(text: str):
    if text == "all":
        return "all"
    try:
        return LevelId(text)
    except ValueError:
        choices = ", ".join(l.value for l in LevelId)
        raise argparse.ArgumentTypeError(f"level must be 'all' or one of {choices}")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tinypy-gen", description="Generate executable TinyPy programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a deduplicated code+output corpus")
    gen.add_argument("--num-programs", type=_positive, required=True,
                     help="number of unique programs to write")
    gen.add_argument("--output", type=Path, required=True, help="corpus file")
    gen.add_argument("--level", type=_level, default="all",
                     help="1.1, 1.2, 2.1, 2.2, 3.1, 3.2 or all (default)")
    gen.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                     help=f"integer seed or 'random' (default {DEFAULT_SEED})")
    gen.add_argument("--grammar", type=Path, help="grammar file (default: builtin TinyPy)")
    gen.add_argument("--deduplicate", action=argparse.BooleanOptionalAction, default=True)
    gen.add_argument("--stats", action="store_true", help="print counts and write <output>.stats.json")
    gen.add_argument("--timing", action="store_true", help="print time and memory")
    gen.add_argument("--max-attempts", type=_positive, default=100_000,
                     help="consecutive rejected attempts before giving up")
    gen.add_argument("--workers", type=_positive, default=1,
                     help="worker processes; output does not depend on this")

    val = sub.add_parser("validate-grammar", help="check a grammar file")
    val.add_argument("grammar", type=Path, nargs="?")

    dump = sub.add_parser("dump-grammar", help="print the builtin grammar file")
    dump.add_argument("--output", type=Path)

    snip = sub.add_parser("run-snippet", help="run one program through the interpreter")
    snip.add_argument("input", help="program file, or '-' for standard input")
    snip.add_argument("--max-steps", type=_positive, default=Limits().max_steps)
    return parser


def parse_args(argv: List[str]) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _load_grammar(path: Optional[Path]):
    if path is None:
        return builtin_tinypy()
    return parse_grammar(path.read_text(encoding="utf-8"))


def _generate(args) -> int:
    grammar = _load_grammar(args.grammar)
    report = validate(grammar)
    if not report.ok:
        print(report.format())
        return EXIT_INVALID
    if args.level == "all":
        derivation = DerivationConfig(seed=args.seed)
    else:
        derivation = DerivationConfig.only(args.level, seed=args.seed)
    config = PipelineConfig(
        target_count=args.num_programs,
        output_path=args.output,
        derivation=derivation,
        max_consecutive_rejections=args.max_attempts,
        deduplicate=args.deduplicate,
        emit_stats=args.stats,
        workers=args.workers,
    )
    try:
        result = generate_corpus(config, grammar)
    except AttemptsExhausted as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_EXHAUSTED
    print(f"seed: {args.seed}")
    if args.stats or args.timing:
        print(result.format(timing=args.timing))
    else:
        print(f"wrote {result.unique_written} programs to {args.output}")
    return EXIT_OK


def _validate(args) -> int:
    report = validate(_load_grammar(args.grammar))
    print(report.format())
    return EXIT_OK if report.ok else EXIT_INVALID


def _dump(args) -> int:
    text = builtin_grammar_text()
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text, encoding="utf-8")
    return EXIT_OK


def _run_snippet(args) -> int:
    if args.input == "-":
        source = sys.stdin.read()
    else:
        source = Path(args.input).read_text(encoding="utf-8")
    result = run(source, Limits(args.max_steps))
    sys.stdout.write(result.describe() if result.ok else result.describe() + "\n")
    return EXIT_OK


_COMMANDS = {
    "generate": _generate,
    "validate-grammar": _validate,
    "dump-grammar": _dump,
    "run-snippet": _run_snippet,
}


def run_cli(args: argparse.Namespace) -> int:
    try:
        return _COMMANDS[args.command](args)
    except GrammarError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    return run_cli(args)


if __name__ == "__main__":
    sys.exit(main())
