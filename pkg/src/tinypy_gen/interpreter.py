"""Lexer, parser and evaluator for the Python subset the generator emits.

Supported: integer literals, single-letter or longer identifiers, ``+ - * /``,
the six comparisons, ``and``/``or``/``not``, parentheses, assignment,
``print(expr)``, ``if``/``elif``/``else`` and ``for v in range(a, b[, s])``
with a single tab-indented statement as the body of every block.

Runtime values are plain Python ``int``, ``float`` and ``bool`` so arithmetic,
comparison and true division follow the host interpreter exactly.  Integers
are confined to the signed 64-bit range; leaving it is reported as
``OverflowGuard`` instead of growing without bound.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple, Union

__all__ = [
    "Token",
    "tokenize",
    "parse_program",
    "evaluate",
    "format_value",
    "run",
    "Limits",
    "RunResult",
    "TinyPyError",
    "IntLit",
    "Var",
    "Binary",
    "Unary",
    "Paren",
    "Assign",
    "Print",
    "If",
    "For",
]

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1

ERROR_KINDS = ("DivisionByZero", "OverflowGuard", "StepLimit", "UnboundVariable", "ParseError")


class TinyPyError(Exception):
    def __init__(self, kind: str, line: Optional[int], message: str = ""):
        assert kind in ERROR_KINDS, kind
        self.kind = kind
        self.line = line
        super().__init__(f"{kind} at line {line}" + (f": {message}" if message else ""))


# -- tokens --------------------------------------------------------------------


class Token(NamedTuple):
    kind: str
    text: str
    line: int


KEYWORDS = {
    "and": "AND",
    "or": "OR",
    "not": "NOT",
    "if": "IF",
    "elif": "ELIF",
    "else": "ELSE",
    "for": "FOR",
    "in": "IN",
    "range": "RANGE",
    "print": "PRINT",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<NEWLINE>\n)
  | (?P<INT>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|!=|==|[-+*/<>=(),:])
    """,
    re.VERBOSE,
)

_OPS = {
    "+": "PLUS",
    "-": "MINUS",
    "*": "STAR",
    "/": "SLASH",
    "<": "LT",
    ">": "GT",
    "<=": "LE",
    ">=": "GE",
    "!=": "NE",
    "==": "EQEQ",
    "=": "ASSIGN",
    "(": "LPAREN",
    ")": "RPAREN",
    ":": "COLON",
    ",": "COMMA",
}


def tokenize(source: str) -> List[Token]:
    """Split ``source`` into tokens; a tab at the start of a line is ``INDENT``."""
    tokens: List[Token] = []
    line = 1
    pos = 0
    at_line_start = True
    n = len(source)
    while pos < n:
        if at_line_start:
            while pos < n and source[pos] == "\t":
                tokens.append(Token("INDENT", "\t", line))
                pos += 1
            at_line_start = False
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise TinyPyError("ParseError", line, f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        pos = m.end()
        if kind == "ws":
            continue
        if kind == "NEWLINE":
            tokens.append(Token("NEWLINE", text, line))
            line += 1
            at_line_start = True
        elif kind == "name":
            tokens.append(Token(KEYWORDS.get(text, "IDENT"), text, line))
        elif kind == "op":
            tokens.append(Token(_OPS[text], text, line))
        else:
            tokens.append(Token(kind, text, line))
    return tokens


# -- program tree --------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str
    line: int = 0


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Paren:
    inner: "Expr"


Expr = Union[IntLit, Var, Binary, Unary, Paren]


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    line: int = 0


@dataclass(frozen=True)
class Print:
    value: Expr
    line: int = 0


@dataclass(frozen=True)
class If:
    arms: Tuple[Tuple[Expr, "Stmt"], ...]
    else_body: Optional["Stmt"] = None
    line: int = 0


@dataclass(frozen=True)
class For:
    var: str
    initial: IntLit
    final: IntLit
    step: Optional[IntLit]
    body: "Stmt"
    line: int = 0


Stmt = Union[Assign, Print, If, For]

_REL = {"LT": "<", "GT": ">", "LE": "<=", "GE": ">=", "NE": "!=", "EQEQ": "=="}


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> Optional[Token]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def kind(self) -> str:
        tok = self.peek()
        return tok.kind if tok else "EOF"

    def line(self) -> int:
        tok = self.peek()
        if tok is not None:
            return tok.line
        return self.toks[-1].line if self.toks else 1

    def fail(self, what: str):
        tok = self.peek()
        got = repr(tok.text) if tok else "end of input"
        raise TinyPyError("ParseError", self.line(), f"expected {what}, got {got}")

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.fail(kind)
        self.i += 1
        return tok

    def end_of_line(self):
        if self.kind() == "EOF":
            return
        self.expect("NEWLINE")

    # statements

    def program(self) -> List[Stmt]:
        stmts = []
        while self.kind() != "EOF":
            if self.kind() == "NEWLINE":
                self.i += 1
                continue
            if self.kind() == "INDENT":
                self.fail("statement (unexpected indent)")
            stmts.append(self.statement())
        return stmts

    def statement(self) -> Stmt:
        k = self.kind()
        if k == "IF":
            return self.if_stmt()
        if k == "FOR":
            return self.for_stmt()
        if k in ("ELIF", "ELSE"):
            self.fail("statement (no matching 'if')")
        stmt = self.simple()
        self.end_of_line()
        return stmt

    def simple(self) -> Stmt:
        line = self.line()
        if self.kind() == "PRINT":
            self.i += 1
            self.expect("LPAREN")
            value = self.expr()
            self.expect("RPAREN")
            return Print(value, line)
        if self.kind() == "IDENT":
            target = self.expect("IDENT").text
            self.expect("ASSIGN")
            return Assign(target, self.expr(), line)
        self.fail("assignment or print")

    def block(self) -> Stmt:
        self.expect("COLON")
        self.expect("NEWLINE")
        self.expect("INDENT")
        if self.kind() == "INDENT":
            self.fail("statement (nested indentation)")
        body = self.simple()
        self.end_of_line()
        if self.kind() == "INDENT":
            self.fail("dedent (blocks hold a single statement)")
        return body

    def if_stmt(self) -> If:
        line = self.expect("IF").line
        arms = [(self.expr(), self.block())]
        while self.kind() == "ELIF":
            self.i += 1
            arms.append((self.expr(), self.block()))
        else_body = None
        if self.kind() == "ELSE":
            self.i += 1
            else_body = self.block()
        return If(tuple(arms), else_body, line)

    def int_lit(self) -> IntLit:
        return IntLit(int(self.expect("INT").text))

    def for_stmt(self) -> For:
        line = self.expect("FOR").line
        var = self.expect("IDENT").text
        self.expect("IN")
        self.expect("RANGE")
        self.expect("LPAREN")
        initial = self.int_lit()
        self.expect("COMMA")
        final = self.int_lit()
        step = None
        if self.kind() == "COMMA":
            self.i += 1
            step = self.int_lit()
            if step.value <= 0:
                raise TinyPyError("ParseError", line, "range step must be positive")
        self.expect("RPAREN")
        return For(var, initial, final, step, self.block(), line)

    # expressions, loosest first: or, and, not, comparison, + -, * /

    def expr(self) -> Expr:
        node = self.and_expr()
        while self.kind() == "OR":
            self.i += 1
            node = Binary("or", node, self.and_expr())
        return node

    def and_expr(self) -> Expr:
        node = self.not_expr()
        while self.kind() == "AND":
            self.i += 1
            node = Binary("and", node, self.not_expr())
        return node

    def not_expr(self) -> Expr:
        if self.kind() == "NOT":
            self.i += 1
            return Unary("not", self.not_expr())
        return self.comparison()

    def comparison(self) -> Expr:
        node = self.arith()
        if self.kind() in _REL:
            op = _REL[self.expect(self.kind()).kind]
            node = Binary(op, node, self.arith())
            if self.kind() in _REL:
                self.fail("end of comparison (chained comparisons unsupported)")
        return node

    def arith(self) -> Expr:
        node = self.term()
        while self.kind() in ("PLUS", "MINUS"):
            op = self.expect(self.kind()).text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.atom()
        while self.kind() in ("STAR", "SLASH"):
            op = self.expect(self.kind()).text
            node = Binary(op, node, self.atom())
        return node

    def atom(self) -> Expr:
        k = self.kind()
        if k == "INT":
            return IntLit(int(self.expect("INT").text))
        if k == "IDENT":
            tok = self.expect("IDENT")
            return Var(tok.text, tok.line)
        if k == "LPAREN":
            self.i += 1
            inner = self.expr()
            self.expect("RPAREN")
            return Paren(inner)
        self.fail("operand")


def parse_program(tokens: List[Token]) -> List[Stmt]:
    """Build the statement list for a token stream from :func:`tokenize`."""
    return _Parser(tokens).program()


# -- evaluation ----------------------------------------------------------------


@dataclass(frozen=True)
class Limits:
    max_steps: int = 100_000

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class RunResult:
    output: Optional[str] = None
    error: Optional[str] = None
    line: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def describe(self) -> str:
        if self.ok:
            return self.output
        return f"error: {self.error} at line {self.line}"


Value = Union[int, float, bool]


def format_value(v: Value) -> str:
    """Render a value the way ``print`` does (floats in shortest round-trip form)."""
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _checked(v, line):
    if type(v) is int and not INT_MIN <= v <= INT_MAX:
        raise TinyPyError("OverflowGuard", line, "integer outside the 64-bit envelope")
    return v


class _Machine:
    def __init__(self, limits: Limits):
        self.env = {}
        self.out: List[str] = []
        self.budget = limits.max_steps

    def tick(self, line):
        if self.budget <= 0:
            raise TinyPyError("StepLimit", line, "statement budget exhausted")
        self.budget -= 1

    def eval(self, e: Expr, line: int) -> Value:
        t = type(e)
        if t is IntLit:
            return _checked(e.value, line)
        if t is Var:
            try:
                return self.env[e.name]
            except KeyError:
                raise TinyPyError("UnboundVariable", line, f"name {e.name!r} is not defined") from None
        if t is Paren:
            return self.eval(e.inner, line)
        if t is Unary:
            return not self.eval(e.operand, line)
        op = e.op
        if op == "and":
            return bool(self.eval(e.lhs, line)) and bool(self.eval(e.rhs, line))
        if op == "or":
            return bool(self.eval(e.lhs, line)) or bool(self.eval(e.rhs, line))
        a = self.eval(e.lhs, line)
        b = self.eval(e.rhs, line)
        if op == "+":
            return _checked(a + b, line)
        if op == "-":
            return _checked(a - b, line)
        if op == "*":
            return _checked(a * b, line)
        if op == "/":
            if b == 0:
                raise TinyPyError("DivisionByZero", line, "division by zero")
            try:
                return a / b
            except OverflowError:
                raise TinyPyError("OverflowGuard", line, "quotient out of float range") from None
        if op == "<":
            return a < b
        if op == ">":
            return a > b
        if op == "<=":
            return a <= b
        if op == ">=":
            return a >= b
        if op == "!=":
            return a != b
        if op == "==":
            return a == b
        raise AssertionError(op)

    def exec(self, s: Stmt):
        self.tick(s.line)
        t = type(s)
        if t is Assign:
            self.env[s.target] = self.eval(s.value, s.line)
        elif t is Print:
            self.out.append(format_value(self.eval(s.value, s.line)) + "\n")
        elif t is If:
            for cond, body in s.arms:
                if self.eval(cond, s.line):
                    self.exec(body)
                    return
            if s.else_body is not None:
                self.exec(s.else_body)
        elif t is For:
            step = s.step.value if s.step is not None else 1
            for v in range(s.initial.value, s.final.value, step):
                self.env[s.var] = v
                self.exec(s.body)
        else:
            raise AssertionError(s)


def evaluate(program: List[Stmt], limits: Limits = Limits()) -> RunResult:
    """Execute ``program`` and capture everything it prints."""
    m = _Machine(limits)
    try:
        for stmt in program:
            m.exec(stmt)
    except TinyPyError as err:
        return RunResult(error=err.kind, line=err.line)
    return RunResult(output="".join(m.out))


def run(source: str, limits: Limits = Limits()) -> RunResult:
    """Tokenize, parse and evaluate ``source``; parse failures become results too."""
    try:
        program = parse_program(tokenize(source))
    except TinyPyError as err:
        return RunResult(error=err.kind, line=err.line)
    return evaluate(program, limits)
