"""Seeded leftmost derivation of TinyPy programs.

The engine rewrites the leftmost grammar symbol of a sentential form until only
terminals remain.  Plain context-free choice cannot keep programs well scoped,
so a few productions of the builtin grammar carry extra policy:

* ``<variable>`` under ``<initialization>`` draws a fresh letter; under an
  assignment rule it rebinds an existing variable or introduces a fresh one
  with equal probability.  The target enters scope once its rule is finished.
* ``<identifier_initialization>`` repeats a number of times drawn from
  ``init_count_range``.
* the hook inside ``<for_header>`` binds a fresh loop variable.
* ``<final>`` is ``step * execution_count + initial - 1``; the step is drawn
  ahead of time when the header has an explicit ``<step>`` and is 1 otherwise.
  With step 1 that bound yields ``execution_count - 1`` iterations;
  ``DerivationConfig(exact_loop_count=True)`` switches to a bound that always
  yields ``execution_count``.

Other self-recursive alternatives have their weight halved per level of
re-entry and are forbidden past ``max_chain_depth``.
"""
from __future__ import annotations

import enum
import random
import string
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .grammar import Computed, Grammar, Hook, NonTerminal, Symbol, Terminal
from .rng import DEFAULT_SEED

__all__ = [
    "LevelId",
    "DerivationConfig",
    "ScopeContext",
    "DerivationState",
    "DerivedProgram",
    "Node",
    "DerivationError",
    "AllWeightsZero",
    "DepthExhausted",
    "EmptyScope",
    "select_level",
    "derive",
    "expand_once",
    "resolve_hook",
    "compute_final",
]

LETTERS = tuple(string.ascii_lowercase)

EXPRESSION_HOOK = "expression_identifier"
DISPLAY_HOOK = "display_identifier"
LOOP_HEADER = "for_header"
FINAL = "final"
INIT_CHAIN = "identifier_initialization"
# production -> policy for the <variable> it contains
BINDERS = {
    "initialization": "fresh",
    "simple_assignments": "rebind",
    "advanced_assignments": "rebind",
}


class LevelId(enum.Enum):
    L1_1 = "1.1"
    L1_2 = "1.2"
    L2_1 = "2.1"
    L2_2 = "2.2"
    L3_1 = "3.1"
    L3_2 = "3.2"

    @property
    def index(self) -> int:
        """Position of this level among the start symbol's alternatives."""
        return _LEVEL_ORDER.index(self)

    @classmethod
    def parse(cls, text: str) -> "LevelId":
        return cls(str(text))

    def __str__(self):
        return self.value


_LEVEL_ORDER = list(LevelId)


class DerivationError(Exception):
    pass


class AllWeightsZero(DerivationError):
    pass


class DepthExhausted(DerivationError):
    pass


class EmptyScope(DerivationError):
    pass


@dataclass(frozen=True)
class DerivationConfig:
    level_weights: Mapping[LevelId, float] = field(
        default_factory=lambda: {lvl: 1.0 for lvl in LevelId}
    )
    seed: int = DEFAULT_SEED
    max_chain_depth: int = 3
    init_count_range: Tuple[int, int] = (1, 3)
    # bound = step * (count - 1) + initial + 1, so every loop runs exactly count times
    exact_loop_count: bool = False

    def __post_init__(self):
        weights = dict(self.level_weights)
        if any(w < 0 for w in weights.values()):
            raise ValueError("level weights must be non-negative")
        if not any(w > 0 for w in weights.values()):
            raise AllWeightsZero("at least one level weight must be positive")
        if self.max_chain_depth < 1:
            raise ValueError("max_chain_depth must be >= 1")
        lo, hi = self.init_count_range
        if not 1 <= lo <= hi <= 26:
            raise ValueError("init_count_range must lie within [1, 26]")

    @classmethod
    def only(cls, level: LevelId, **kwargs) -> "DerivationConfig":
        """Config that always selects ``level``."""
        weights = {lvl: (1.0 if lvl is level else 0.0) for lvl in LevelId}
        return cls(level_weights=weights, **kwargs)


@dataclass
class ScopeContext:
    initialized: List[str] = field(default_factory=list)
    loop_variable: Optional[str] = None


@dataclass(frozen=True)
class DerivedProgram:
    code: str
    level: LevelId
    rule_coverage: FrozenSet[Tuple[str, int]]
    variables: Tuple[str, ...] = ()
    loop_variable: Optional[str] = None
    loop_initial: Optional[int] = None
    loop_step: Optional[int] = None
    loop_final: Optional[int] = None
    execution_count: Optional[int] = None


class Node(NamedTuple):
    """One slot of a sentential form.

    ``symbol`` is ``None`` for the zero-width marker that closes a binder or
    loop-header production; ``parent`` names the production that introduced
    the slot and ``depth`` counts self-recursive re-entries.
    """

    symbol: Optional[Symbol]
    parent: Optional[str] = None
    depth: int = 0


@dataclass
class DerivationState:
    """Mutable bookkeeping shared by the expansion steps of one derivation."""

    context: ScopeContext = field(default_factory=ScopeContext)
    coverage: set = field(default_factory=set)
    pending: Dict[str, str] = field(default_factory=dict)
    pins: Dict[str, int] = field(default_factory=dict)
    init_count: int = 0
    loop_initial: Optional[int] = None
    loop_step: Optional[int] = None
    loop_final: Optional[int] = None
    execution_count: Optional[int] = None


def compute_final(initial: int, step: int, execution_count: int) -> int:
    """Upper range bound drawn for a loop header."""
    return step * execution_count + initial - 1


def select_level(config: DerivationConfig, rng: random.Random) -> LevelId:
    """Draw a level with probability proportional to its weight (one draw)."""
    weights = [max(0.0, float(config.level_weights.get(lvl, 0.0))) for lvl in LevelId]
    total = sum(weights)
    if total <= 0:
        raise AllWeightsZero("no level has positive weight")
    r = rng.random() * total
    last = None
    for lvl, w in zip(LevelId, weights):
        if w <= 0:
            continue
        last = lvl
        if r < w:
            return lvl
        r -= w
    return last


def resolve_hook(name: str, context: ScopeContext, rng: random.Random) -> str:
    """Pick an in-scope variable for a hook occurrence."""
    pool = context.initialized
    loop_var = context.loop_variable
    if not pool and loop_var is None:
        raise EmptyScope(f"no variable in scope for <{name}>")
    if name == DISPLAY_HOOK and loop_var is not None:
        if not pool or rng.random() < 0.5:
            return loop_var
        return pool[rng.randrange(len(pool))]
    if name in (DISPLAY_HOOK, EXPRESSION_HOOK):
        n = len(pool) + (loop_var is not None)
        i = rng.randrange(n)
        return pool[i] if i < len(pool) else loop_var
    raise DerivationError(f"no resolution policy for hook <{name}>")


# -- expansion -----------------------------------------------------------------


class _Compiled:
    """Per-grammar lookup tables, cached on first use."""

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.recursive: Dict[str, Tuple[bool, ...]] = {}
        self.letter_index: Dict[str, Dict[str, int]] = {}
        self.nodes: Dict[str, Tuple[Tuple[Node, ...], ...]] = {}
        for name, prod in grammar.productions.items():
            self.recursive[name] = tuple(
                prod.is_recursive(i) for i in range(len(prod.alternatives))
            )
            idx = {}
            for i, alt in enumerate(prod.alternatives):
                if len(alt) == 1 and isinstance(alt[0], Terminal):
                    idx.setdefault(alt[0].text, i)
            self.letter_index[name] = idx
            closes = name in BINDERS or name == LOOP_HEADER
            self.nodes[name] = tuple(
                tuple(Node(sym, name, 0) for sym in alt)
                + ((Node(None, name, 0),) if closes else ())
                for alt in prod.alternatives
            )
        # fresh names come from <variable> when the grammar defines it
        self.names = tuple(self.letter_index.get("variable", {})) or LETTERS


_COMPILED: Dict[int, _Compiled] = {}


def _compiled(grammar: Grammar) -> _Compiled:
    c = _COMPILED.get(id(grammar))
    if c is None or c.grammar is not grammar:
        c = _COMPILED[id(grammar)] = _Compiled(grammar)
    return c


def _draw_fresh(comp: _Compiled, state: DerivationState, rng: random.Random) -> Optional[str]:
    ctx = state.context
    taken = set(ctx.initialized)
    taken.update(state.pending.values())
    if ctx.loop_variable is not None:
        taken.add(ctx.loop_variable)
    free = [c for c in comp.names if c not in taken]
    if not free:
        return None
    return free[rng.randrange(len(free))]


def _choose(
    comp: _Compiled,
    name: str,
    node: Node,
    rng: random.Random,
    state: DerivationState,
    config: DerivationConfig,
) -> int:
    prod = comp.grammar.productions[name]
    n_alts = len(prod.alternatives)

    pinned = state.pins.pop(name, None)
    if pinned is not None:
        return pinned

    if name == "variable" and node.parent in BINDERS:
        policy = BINDERS[node.parent]
        ctx = state.context
        letter = None
        if policy == "rebind" and ctx.initialized and rng.random() < 0.5:
            letter = ctx.initialized[rng.randrange(len(ctx.initialized))]
        if letter is None:
            letter = _draw_fresh(comp, state, rng)
        if letter is None:  # alphabet exhausted
            letter = ctx.initialized[rng.randrange(len(ctx.initialized))]
        state.pending[node.parent] = letter
        return comp.letter_index[name][letter]

    rec = comp.recursive[name]
    if name == INIT_CHAIN and any(rec):
        if node.depth == 0:
            lo, hi = config.init_count_range
            state.init_count = lo + rng.randrange(hi - lo + 1)
        want_more = node.depth < state.init_count - 1
        options = [i for i in range(n_alts) if rec[i] == want_more]
        if not options:
            raise DepthExhausted(f"<{name}> cannot produce the drawn count")
        return options[rng.randrange(len(options))] if len(options) > 1 else options[0]

    if not any(rec):
        return rng.randrange(n_alts) if n_alts > 1 else 0

    if node.depth >= config.max_chain_depth:
        options = [i for i in range(n_alts) if not rec[i]]
        if not options:
            raise DepthExhausted(f"<{name}> exceeded depth {config.max_chain_depth}")
        return options[rng.randrange(len(options))] if len(options) > 1 else options[0]
    damp = 0.5 ** node.depth
    weights = [damp if r else 1.0 for r in rec]
    x = rng.random() * sum(weights)
    for i, w in enumerate(weights):
        if x < w:
            return i
        x -= w
    return n_alts - 1


def _close(node: Node, state: DerivationState) -> None:
    target = state.pending.pop(node.parent, None)
    if target is not None and target not in state.context.initialized:
        state.context.initialized.append(target)


def _resolve_final(
    comp: _Compiled,
    form: List[Node],
    pos: int,
    rng: random.Random,
    state: DerivationState,
    config: DerivationConfig,
) -> str:
    grammar = comp.grammar
    node = form[pos]
    step = 1
    for later in form[pos + 1 :]:
        if later.symbol is None and later.parent == node.parent:
            break
        if later.symbol == NonTerminal("step") and later.parent == node.parent:
            idx = rng.randrange(len(grammar["step"].alternatives))
            state.pins["step"] = idx
            step = int(grammar["step"].alternatives[idx][0].text)
            break
    alts = grammar["execution_count"].alternatives
    idx = rng.randrange(len(alts))
    state.coverage.add(("execution_count", idx))
    count = int(alts[idx][0].text)
    initial = state.loop_initial if state.loop_initial is not None else 0
    if config.exact_loop_count:
        final = step * (count - 1) + initial + 1
    else:
        final = compute_final(initial, step, count)
    state.loop_step, state.execution_count, state.loop_final = step, count, final
    return str(final)


def _expand_at(
    comp: _Compiled,
    form: List[Node],
    pos: int,
    rng: random.Random,
    state: DerivationState,
    config: DerivationConfig,
) -> None:
    """Rewrite the symbol at ``pos`` in place."""
    node = form[pos]
    sym = node.symbol
    if isinstance(sym, NonTerminal):
        name = sym.name
        idx = _choose(comp, name, node, rng, state, config)
        state.coverage.add((name, idx))
        repl = comp.nodes[name][idx]
        if comp.recursive[name][idx]:
            repl = tuple(
                Node(s.symbol, name, node.depth + 1)
                if isinstance(s.symbol, NonTerminal) and s.symbol.name == name
                else s
                for s in repl
            )
        if node.parent == "initial" and name == "digit":
            state.loop_initial = int(comp.grammar[name].alternatives[idx][0].text)
        form[pos : pos + 1] = repl
    elif isinstance(sym, Hook):
        ctx = state.context
        if node.parent == LOOP_HEADER and ctx.loop_variable is None:
            var = _draw_fresh(comp, state, rng)
            if var is None:
                raise EmptyScope("no fresh letter left for the loop variable")
            ctx.loop_variable = var
        else:
            var = resolve_hook(sym.name, ctx, rng)
        form[pos] = Node(Terminal(var), node.parent, 0)
    elif isinstance(sym, Computed):
        if sym.name != FINAL:
            raise DerivationError(f"no formula for computed symbol <{sym.name}>")
        form[pos] = Node(Terminal(_resolve_final(comp, form, pos, rng, state, config)), node.parent, 0)
    else:
        raise ValueError(f"cannot expand {sym!r}")


def _leftmost(form: Sequence[Node], start: int, state: DerivationState) -> int:
    """Index of the leftmost grammar symbol, consuming closing markers on the way."""
    i = start
    n = len(form)
    while i < n:
        sym = form[i].symbol
        if sym is None:
            _close(form[i], state)
            del form[i]
            n -= 1
            continue
        if type(sym) is not Terminal:
            return i
        i += 1
    return -1


def _as_node(item) -> Node:
    return item if isinstance(item, Node) else Node(item)


def expand_once(
    grammar: Grammar,
    form: Sequence,
    rng: random.Random,
    state: Optional[DerivationState] = None,
    config: Optional[DerivationConfig] = None,
) -> List[Node]:
    """Replace the leftmost nonterminal, hook or computed symbol of ``form``.

    ``form`` may mix bare symbols and :class:`Node` slots; a new list of nodes
    is returned and the input is left untouched.
    """
    state = state if state is not None else DerivationState()
    config = config if config is not None else DerivationConfig()
    out = [_as_node(x) for x in form]
    pos = _leftmost(out, 0, state)
    if pos < 0:
        raise ValueError("form has no symbol left to expand")
    _expand_at(_compiled(grammar), out, pos, rng, state, config)
    return out


def derive(
    grammar: Grammar,
    level: LevelId,
    rng: random.Random,
    config: Optional[DerivationConfig] = None,
) -> DerivedProgram:
    """Derive one program of ``level`` from the start symbol."""
    config = config if config is not None else DerivationConfig()
    comp = _compiled(grammar)
    state = DerivationState()
    start = grammar.start
    n_start = len(grammar[start].alternatives)
    if level.index >= n_start:
        raise DerivationError(f"start symbol <{start}> has no alternative for level {level}")
    state.pins[start] = level.index

    form = [Node(NonTerminal(start))]
    pos = 0
    while True:
        pos = _leftmost(form, pos, state)
        if pos < 0:
            break
        _expand_at(comp, form, pos, rng, state, config)

    code = "".join([n.symbol.text for n in form])
    if not code.endswith("\n"):
        code += "\n"
    ctx = state.context
    return DerivedProgram(
        code=code,
        level=level,
        rule_coverage=frozenset(state.coverage),
        variables=tuple(ctx.initialized),
        loop_variable=ctx.loop_variable,
        loop_initial=state.loop_initial if ctx.loop_variable else None,
        loop_step=state.loop_step,
        loop_final=state.loop_final,
        execution_count=state.execution_count,
    )
