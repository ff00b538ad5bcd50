"""Grammar-driven generator of small executable Python programs."""
from .corpus import (
    AttemptsExhausted,
    Construct,
    CorpusReport,
    PipelineConfig,
    Record,
    classify_construct,
    compute_stats,
    fingerprint,
    generate_corpus,
    read_corpus,
    write_record,
)
from .derivation import DerivationConfig, DerivedProgram, LevelId, derive, select_level
from .grammar import Grammar, builtin_tinypy, parse_grammar, serialize, validate
from .interpreter import Limits, RunResult, format_value, run
from .rng import stream

__version__ = "0.1.0"

__all__ = [
    "AttemptsExhausted", "Construct", "CorpusReport", "PipelineConfig", "Record",
    "classify_construct", "compute_stats", "fingerprint", "generate_corpus", "read_corpus",
    "write_record", "DerivationConfig", "DerivedProgram", "LevelId", "derive", "select_level",
    "Grammar", "builtin_tinypy", "parse_grammar", "serialize", "validate",
    "Limits", "RunResult", "format_value", "run", "stream",
]
