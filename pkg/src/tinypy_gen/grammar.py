"""BNF grammars: data model, file format, validation and the builtin TinyPy grammar.

A grammar file is a list of rules ``<name> ::= alt1 | alt2 | ...``.  A rule may
continue over following lines until the next ``<name> ::=`` line.  Tokens are
whitespace separated; ``<name>`` refers to another symbol, ``""`` is the empty
alternative and anything else is a terminal.  Lines starting with ``#`` are
comments.  Three directives assign roles the notation cannot express::

    @start all
    @hook expression_identifier
    @computed final step execution_count initial

A computed directive may list the productions its value is drawn from; those
count as referenced for validation and coverage.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, FrozenSet, Iterator, List, Mapping, Tuple, Union

__all__ = [
    "Terminal",
    "NonTerminal",
    "Hook",
    "Computed",
    "Symbol",
    "Production",
    "Grammar",
    "ValidationReport",
    "GrammarError",
    "GrammarSyntaxError",
    "DuplicateRule",
    "parse_grammar",
    "serialize",
    "validate",
    "builtin_tinypy",
    "builtin_grammar_text",
]


@dataclass(frozen=True)
class Terminal:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("terminal text must be non-empty")


@dataclass(frozen=True)
class NonTerminal:
    name: str


@dataclass(frozen=True)
class Hook:
    """Placeholder resolved by the derivation engine from the variables in scope."""

    name: str


@dataclass(frozen=True)
class Computed:
    """Placeholder whose text is calculated from values drawn elsewhere."""

    name: str


Symbol = Union[Terminal, NonTerminal, Hook, Computed]
Alternative = Tuple[Symbol, ...]


@dataclass(frozen=True)
class Production:
    lhs: str
    alternatives: Tuple[Alternative, ...]

    def __post_init__(self):
        if not self.alternatives:
            raise ValueError(f"production <{self.lhs}> has no alternatives")

    def is_recursive(self, index: int) -> bool:
        """True when alternative ``index`` mentions its own left-hand side."""
        return any(
            isinstance(s, NonTerminal) and s.name == self.lhs
            for s in self.alternatives[index]
        )


@dataclass(frozen=True)
class Grammar:
    """A context-free grammar plus the declared hook and computed symbols.

    ``productions`` is keyed by nonterminal name and keeps rule order.  Treat
    instances as immutable; they are shared freely between derivations.
    """

    productions: Mapping[str, Production]
    start: str
    hooks: FrozenSet[str] = frozenset()
    computed: FrozenSet[str] = frozenset()
    computed_inputs: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Production:
        return self.productions[name]

    def __contains__(self, name: str) -> bool:
        return name in self.productions

    def references(self, name: str) -> Iterator[str]:
        """Names referenced by the production ``name`` (any alternative)."""
        for alt in self.productions[name].alternatives:
            for sym in alt:
                if isinstance(sym, Computed):
                    yield sym.name
                    yield from self.computed_inputs.get(sym.name, ())
                elif not isinstance(sym, Terminal):
                    yield sym.name


class GrammarError(Exception):
    pass


class GrammarSyntaxError(GrammarError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class DuplicateRule(GrammarError):
    def __init__(self, name: str, line: int | None = None):
        self.name = name
        self.line = line
        super().__init__(f"rule <{name}> defined twice (line {line})")


# -- parsing -------------------------------------------------------------------

_RULE_RE = re.compile(r"^\s*<([^<>\s]+)>\s*::=(.*)$")
_REF_RE = re.compile(r"^<([^<>\s]+)>$")
_ESCAPES = {"s": " ", "n": "\n", "t": "\t", "\\": "\\", "|": "|", '"': '"', "<": "<"}
_UNESCAPES = {v: "\\" + k for k, v in _ESCAPES.items()}


def _unescape(token: str, line: int) -> str:
    out = []
    chars = iter(token)
    for ch in chars:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(chars, None)
        if nxt not in _ESCAPES:
            raise GrammarSyntaxError(f"bad escape '\\{nxt or ''}' in {token!r}", line)
        out.append(_ESCAPES[nxt])
    return "".join(out)


def _parse_alternatives(body: str, line: int) -> List[List[Tuple[str, str]]]:
    """Split a rule body into alternatives of (kind, text) raw tokens."""
    alts: List[List[Tuple[str, str]]] = [[]]
    for tok in body.split():
        if tok == "|":
            alts.append([])
            continue
        m = _REF_RE.match(tok)
        if m:
            alts[-1].append(("ref", m.group(1)))
        elif tok == '""':
            alts[-1].append(("empty", ""))
        else:
            alts[-1].append(("term", _unescape(tok, line)))
    for alt in alts:
        if not alt:
            raise GrammarSyntaxError("empty alternative (write \"\" for epsilon)", line)
        if any(kind == "empty" for kind, _ in alt) and len(alt) > 1:
            raise GrammarSyntaxError('"" must stand alone in its alternative', line)
    return alts


def parse_grammar(text: str) -> Grammar:
    """Parse grammar-file text into a :class:`Grammar`.

    Raises :class:`GrammarSyntaxError` on malformed input and
    :class:`DuplicateRule` when a left-hand side is defined twice.
    """
    rules: Dict[str, Tuple[int, List[str]]] = {}
    order: List[str] = []
    start = None
    hooks: List[str] = []
    computed: Dict[str, Tuple[str, ...]] = {}
    current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("@"):
            parts = stripped.split()
            directive, args = parts[0], parts[1:]
            if directive == "@start" and len(args) == 1:
                start = args[0]
            elif directive == "@hook" and len(args) == 1:
                hooks.append(args[0])
            elif directive == "@computed" and args:
                computed[args[0]] = tuple(args[1:])
            else:
                raise GrammarSyntaxError(f"bad directive {stripped!r}", lineno)
            current = None
            continue
        m = _RULE_RE.match(raw)
        if m:
            name = m.group(1)
            if name in rules:
                raise DuplicateRule(name, lineno)
            rules[name] = (lineno, [m.group(2)])
            order.append(name)
            current = name
        elif current is not None:
            rules[current][1].append(raw)
        else:
            raise GrammarSyntaxError(f"expected '<name> ::= ...', got {stripped!r}", lineno)

    if not order:
        raise GrammarSyntaxError("no rules")

    hook_set = frozenset(hooks)
    computed_set = frozenset(computed)
    productions: Dict[str, Production] = {}
    for name in order:
        lineno, chunks = rules[name]
        alternatives = []
        for raw_alt in _parse_alternatives(" ".join(chunks), lineno):
            syms: List[Symbol] = []
            for kind, value in raw_alt:
                if kind == "term":
                    syms.append(Terminal(value))
                elif kind == "ref":
                    if value in hook_set:
                        syms.append(Hook(value))
                    elif value in computed_set:
                        syms.append(Computed(value))
                    else:
                        syms.append(NonTerminal(value))
            alternatives.append(tuple(syms))
        productions[name] = Production(name, tuple(alternatives))

    return Grammar(
        productions=productions,
        start=start if start is not None else order[0],
        hooks=hook_set,
        computed=computed_set,
        computed_inputs=computed,
    )


def _format_symbol(sym: Symbol) -> str:
    if isinstance(sym, Terminal):
        return "".join(_UNESCAPES.get(ch, ch) for ch in sym.text)
    return f"<{sym.name}>"


def serialize(grammar: Grammar) -> str:
    """Render ``grammar`` in the file format accepted by :func:`parse_grammar`."""
    lines = [f"@start {grammar.start}"]
    lines += [f"@hook {h}" for h in sorted(grammar.hooks)]
    for name in sorted(grammar.computed):
        inputs = grammar.computed_inputs.get(name, ())
        lines.append(" ".join(["@computed", name, *inputs]))
    for prod in grammar.productions.values():
        alts = [
            " ".join(_format_symbol(s) for s in alt) if alt else '""'
            for alt in prod.alternatives
        ]
        lines.append(f"<{prod.lhs}> ::= " + " | ".join(alts))
    return "\n".join(lines) + "\n"


# -- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    errors: Tuple[Tuple[str, str], ...] = ()
    warnings: Tuple[Tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def format(self) -> str:
        lines = [f"error: {kind}({name})" for kind, name in self.errors]
        lines += [f"warning: {kind}({name})" for kind, name in self.warnings]
        lines.append(f"{len(self.errors)} error(s), {len(self.warnings)} warning(s)")
        return "\n".join(lines)


def validate(grammar: Grammar) -> ValidationReport:
    """Check the structural invariants of ``grammar``.

    Errors make the grammar unusable for derivation; warnings flag dead rules.
    """
    errors: List[Tuple[str, str]] = []
    warnings: List[Tuple[str, str]] = []
    prods = grammar.productions
    roles = grammar.hooks | grammar.computed

    if grammar.start not in prods:
        errors.append(("UndefinedStart", grammar.start))
    for name in prods:
        if name in roles:
            errors.append(("RoleCollision", name))

    seen_undefined = set()
    referenced = set()
    for name, prod in prods.items():
        for alt in prod.alternatives:
            for sym in alt:
                if isinstance(sym, Terminal):
                    continue
                referenced.add(sym.name)
                if isinstance(sym, Hook):
                    bad = sym.name not in grammar.hooks
                elif isinstance(sym, Computed):
                    bad = sym.name not in grammar.computed
                    referenced.update(grammar.computed_inputs.get(sym.name, ()))
                else:
                    bad = sym.name not in prods and sym.name not in roles
                if bad and sym.name not in seen_undefined:
                    seen_undefined.add(sym.name)
                    errors.append(("UndefinedNonterminal", sym.name))
    for name, inputs in grammar.computed_inputs.items():
        for dep in inputs:
            if dep not in prods and dep not in seen_undefined:
                seen_undefined.add(dep)
                errors.append(("UndefinedNonterminal", dep))

    reachable = set()
    if grammar.start in prods:
        stack = [grammar.start]
        while stack:
            name = stack.pop()
            if name in reachable or name not in prods:
                continue
            reachable.add(name)
            stack.extend(grammar.references(name))

    for name in prods:
        if name not in reachable:
            warnings.append(("UnreachableRule", name))
    for name in prods:
        if name != grammar.start and name not in referenced:
            warnings.append(("UnusedToken", name))

    return ValidationReport(tuple(errors), tuple(warnings))


# -- builtin grammar -----------------------------------------------------------


def builtin_grammar_text() -> str:
    """Source text of the bundled TinyPy grammar (suitable for editing)."""
    return resources.files(__package__).joinpath("tinypy.bnf").read_text("utf-8")


_BUILTIN: Grammar | None = None


def builtin_tinypy() -> Grammar:
    """The six-level TinyPy grammar, parsed once and cached."""
    global _BUILTIN
    if _BUILTIN is None:
        _BUILTIN = parse_grammar(builtin_grammar_text())
    return _BUILTIN
