"""Load the builtin grammar, inspect it, and check a hand-written one.

Run with:  python3 gallery/01_grammar.py
"""
from tinypy_gen import builtin_tinypy, parse_grammar, serialize, validate

grammar = builtin_tinypy()
print(f"start symbol: <{grammar.start}>")
print(f"{len(grammar.productions)} rules, hooks: {sorted(grammar.hooks)}")
print("the start rule, as written in the grammar file:")
print("   ", next(line for line in serialize(grammar).splitlines() if line.startswith("<all>")))

# The builtin grammar validates cleanly; <while> is defined but never used.
print(validate(grammar).format())

# Serialization round-trips.
assert parse_grammar(serialize(grammar)) == grammar

# A broken grammar: <b> is referenced but never defined.
print(validate(parse_grammar("<a> ::= x <b>\n")).format())
