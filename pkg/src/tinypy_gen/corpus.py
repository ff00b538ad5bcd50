"""Corpus construction: derive, execute, deduplicate, write.

Each record in a corpus file is the program text, a ``# output`` line, the
printed lines each prefixed by ``# ``, and a blank separator line::

    a = 3
    b = a + 2
    print(b)
    # output
    # 5
    <blank>

Attempt ``i`` always uses the child stream ``split(seed, i)``, and results are
committed in attempt order, so a seed fixes the file byte for byte whether one
or many worker processes do the deriving.
"""
from __future__ import annotations

import collections
import enum
import hashlib
import json
import multiprocessing
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Optional, Tuple, Union

from .derivation import (
    DerivationConfig,
    DerivationError,
    DerivedProgram,
    LevelId,
    derive,
    select_level,
)
from .grammar import Grammar, builtin_tinypy
from .interpreter import Limits, RunResult, run
from .rng import stream

__all__ = [
    "Construct",
    "Record",
    "PipelineConfig",
    "CorpusReport",
    "Attempt",
    "PipelineError",
    "AttemptsExhausted",
    "EmptyCorpus",
    "fingerprint",
    "classify_construct",
    "write_record",
    "read_corpus",
    "compute_stats",
    "iter_attempts",
    "generate_corpus",
]

DIGEST_BYTES = 16


class Construct(enum.Enum):
    ASSIGNMENTS = "Assignments"
    CONDITIONALS = "Conditionals"
    LOOPS = "Loops"


class PipelineError(Exception):
    pass


class AttemptsExhausted(PipelineError):
    def __init__(self, written: int, rejections: int):
        self.written = written
        self.rejections = rejections
        super().__init__(
            f"{rejections} consecutive attempts produced nothing new after {written} unique records"
        )


class EmptyCorpus(PipelineError):
    pass


def fingerprint(code: str) -> bytes:
    """128-bit BLAKE2b digest of the UTF-8 bytes of ``code``."""
    return hashlib.blake2b(code.encode("utf-8"), digest_size=DIGEST_BYTES).digest()


def classify_construct(level: LevelId) -> Construct:
    major = level.value[0]
    if major == "1":
        return Construct.ASSIGNMENTS
    if major == "2":
        return Construct.CONDITIONALS
    return Construct.LOOPS


@dataclass(frozen=True)
class Record:
    code: str
    output: str
    level: Optional[LevelId] = None


def format_record(record: Record) -> str:
    lines = [record.code, "# output\n"]
    lines += [f"# {line}\n" for line in record.output.splitlines()]
    lines.append("\n")
    return "".join(lines)


def write_record(sink: IO[str], record: Record) -> None:
    sink.write(format_record(record))


def read_corpus(source: Union[str, Path, IO[str]]) -> Iterator[Record]:
    """Parse a corpus file back into records (levels are not stored)."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            yield from read_corpus(fh)
        return
    code: List[str] = []
    output: List[str] = []
    in_output = False
    for line in source:
        if not in_output:
            if line == "# output\n":
                in_output = True
            elif line == "\n":
                raise ValueError("blank line inside a code block")
            else:
                code.append(line)
        elif line == "\n":
            yield Record("".join(code), "".join(output))
            code, output, in_output = [], [], False
        elif line.startswith("# "):
            output.append(line[2:])
        else:
            raise ValueError(f"malformed output line {line!r}")
    if code or in_output:
        raise ValueError("truncated record at end of corpus")


def compute_stats(records: Iterable[Union[Record, LevelId]]) -> Dict[Construct, float]:
    """Fraction of records per construct, from their level tags."""
    counts = collections.Counter()
    for rec in records:
        level = rec if isinstance(rec, LevelId) else rec.level
        counts[classify_construct(level)] += 1
    total = sum(counts.values())
    if total == 0:
        raise EmptyCorpus("no records to summarize")
    return {c: counts[c] / total for c in Construct}


@dataclass(frozen=True)
class PipelineConfig:
    target_count: int
    output_path: Optional[Path] = None
    derivation: DerivationConfig = field(default_factory=DerivationConfig)
    limits: Limits = field(default_factory=Limits)
    max_consecutive_rejections: int = 100_000
    deduplicate: bool = True
    emit_stats: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.target_count < 1:
            raise ValueError("target_count must be >= 1")
        if self.max_consecutive_rejections < 1:
            raise ValueError("max_consecutive_rejections must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class CorpusReport:
    attempts: int = 0
    unique_written: int = 0
    duplicates_discarded: int = 0
    errors_discarded: Dict[str, int] = field(default_factory=dict)
    per_level: Dict[str, int] = field(default_factory=dict)
    construct_frequencies: Dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0
    dedup_state_bytes: int = 0
    peak_working_set: Optional[int] = None

    @property
    def total_errors(self) -> int:
        return sum(self.errors_discarded.values())

    def to_dict(self) -> dict:
        return {
            "attempts": self.attempts,
            "unique_written": self.unique_written,
            "duplicates_discarded": self.duplicates_discarded,
            "errors_discarded": dict(sorted(self.errors_discarded.items())),
            "per_level": dict(sorted(self.per_level.items())),
            "construct_frequencies": self.construct_frequencies,
            "wall_time_s": round(self.wall_time, 3),
            "dedup_state_bytes": self.dedup_state_bytes,
            "peak_working_set_bytes": self.peak_working_set,
        }

    def format(self, timing: bool = True) -> str:
        lines = [
            f"programs written:      {self.unique_written}",
            f"attempts:              {self.attempts}",
            f"duplicates discarded:  {self.duplicates_discarded}",
            "errors discarded:      "
            + (", ".join(f"{k}={v}" for k, v in sorted(self.errors_discarded.items())) or "0"),
            "per level:             "
            + ", ".join(f"{k}={v}" for k, v in sorted(self.per_level.items())),
            "construct frequencies: "
            + ", ".join(f"{k}={v:.3f}" for k, v in self.construct_frequencies.items()),
        ]
        if timing:
            mem = self.peak_working_set
            lines.append(f"generation time:       {self.wall_time:.2f}s")
            lines.append(f"dedup state:           {self.dedup_state_bytes / 1e6:.1f} MB")
            lines.append(
                "peak memory:           " + (f"{mem / 1e6:.1f} MB" if mem else "unavailable")
            )
        return "\n".join(lines)


@dataclass(frozen=True)
class Attempt:
    index: int
    program: Optional[DerivedProgram]
    result: RunResult


# -- attempt production ----------------------------------------------------------


def _attempt(grammar: Grammar, config: PipelineConfig, index: int) -> Attempt:
    rng = stream(config.derivation.seed, index)
    level = select_level(config.derivation, rng)
    try:
        program = derive(grammar, level, rng, config.derivation)
    except DerivationError as err:
        return Attempt(index, None, RunResult(error=type(err).__name__))
    return Attempt(index, program, run(program.code, config.limits))


_WORKER: Dict[str, object] = {}


def _worker_init(grammar: Grammar, config: PipelineConfig) -> None:
    _WORKER["grammar"] = grammar
    _WORKER["config"] = config


def _worker_chunk(bounds: Tuple[int, int]) -> List[Attempt]:
    grammar, config = _WORKER["grammar"], _WORKER["config"]
    return [_attempt(grammar, config, i) for i in range(*bounds)]


def iter_attempts(
    config: PipelineConfig,
    grammar: Optional[Grammar] = None,
    start: int = 0,
    chunk: int = 256,
) -> Iterator[Attempt]:
    """Endless stream of attempts in index order."""
    grammar = grammar if grammar is not None else builtin_tinypy()
    if config.workers == 1:
        i = start
        while True:
            yield _attempt(grammar, config, i)
            i += 1
    ctx = multiprocessing.get_context("fork" if sys.platform != "win32" else "spawn")
    with ctx.Pool(config.workers, _worker_init, (grammar, config)) as pool:
        pending = collections.deque()
        nxt = start
        while True:
            while len(pending) < 2 * config.workers:
                pending.append(pool.apply_async(_worker_chunk, ((nxt, nxt + chunk),)))
                nxt += chunk
            yield from pending.popleft().get()


# -- the pipeline ------------------------------------------------------------------


def _peak_rss() -> Optional[int]:
    try:
        import resource
        rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    except (ImportError, AttributeError, OSError):
        return None
    return rss if sys.platform == "darwin" else rss * 1024


def _dedup_bytes(seen: set) -> int:
    per_digest = sys.getsizeof(b"\0" * DIGEST_BYTES)
    return sys.getsizeof(seen) + per_digest * len(seen)


def _build(config: PipelineConfig, grammar: Optional[Grammar], sink: IO[str]) -> CorpusReport:
    report = CorpusReport()
    errors: Dict[str, int] = collections.Counter()
    per_level: Dict[str, int] = collections.Counter()
    seen: set = set()
    rejections = 0
    t0 = time.perf_counter()
    attempts = iter_attempts(config, grammar)
    try:
        for att in attempts:
            report.attempts += 1
            res = att.result
            if not res.ok:
                errors[res.error] += 1
                rejections += 1
            else:
                code = att.program.code
                digest = fingerprint(code) if config.deduplicate else None
                if digest is not None and digest in seen:
                    report.duplicates_discarded += 1
                    rejections += 1
                else:
                    if digest is not None:
                        seen.add(digest)
                    write_record(sink, Record(code, res.output, att.program.level))
                    per_level[att.program.level.value] += 1
                    report.unique_written += 1
                    rejections = 0
                    if report.unique_written >= config.target_count:
                        break
            if rejections >= config.max_consecutive_rejections:
                _finish(report, errors, per_level, seen, t0)
                raise AttemptsExhausted(report.unique_written, rejections)
    finally:
        attempts.close()
    _finish(report, errors, per_level, seen, t0)
    return report


def _finish(report, errors, per_level, seen, t0) -> None:
    report.errors_discarded = dict(errors)
    report.per_level = dict(per_level)
    if report.unique_written:
        fractions = compute_stats(
            LevelId(lvl) for lvl, n in per_level.items() for _ in range(n)
        )
        report.construct_frequencies = {c.value: f for c, f in fractions.items()}
    report.wall_time = time.perf_counter() - t0
    report.dedup_state_bytes = _dedup_bytes(seen)
    report.peak_working_set = _peak_rss()


def generate_corpus(
    config: PipelineConfig,
    grammar: Optional[Grammar] = None,
    sink: Optional[IO[str]] = None,
) -> CorpusReport:
    """Write ``config.target_count`` unique executed programs.

    Output goes to ``sink`` when given, else to ``config.output_path``.  With
    ``emit_stats`` a JSON summary is written next to the output file as
    ``<output>.stats.json``.  Raises :class:`AttemptsExhausted` when the
    grammar stops producing new programs.
    """
    if sink is not None:
        return _build(config, grammar, sink)
    if config.output_path is None:
        raise ValueError("either sink or config.output_path is required")
    path = Path(config.output_path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        report = _build(config, grammar, fh)
    if config.emit_stats:
        write_stats(report, path.with_name(path.name + ".stats.json"))
    return report


def write_stats(report: CorpusReport, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
