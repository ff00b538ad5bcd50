"""Generate a small deduplicated corpus and read it back.

Run with:  python3 gallery/04_corpus.py [output-path]
"""
import sys
import tempfile
from pathlib import Path

from tinypy_gen import DerivationConfig, LevelId, PipelineConfig, compute_stats, generate_corpus, read_corpus

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp()) / "corpus.txt"
config = PipelineConfig(target_count=2000, output_path=out, derivation=DerivationConfig(seed=11))
report = generate_corpus(config)
print(report.format(timing=True))

records = list(read_corpus(out))
print(f"\nread back {len(records)} records from {out}")
print("first record:")
print(records[0].code + "# output\n" + "".join(f"# {line}\n" for line in records[0].output.splitlines()))

# The stats helper recomputes construct fractions from the per-record levels.
levels = [LevelId(level) for level, n in report.per_level.items() for _ in range(n)]
print("construct fractions:", {c.value: round(f, 3) for c, f in compute_stats(levels).items()})
