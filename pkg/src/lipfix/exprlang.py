"""Single-variable arithmetic expressions: the input language for maps and
inhomogeneities.

Grammar (whitespace-insensitive, no implicit multiplication):

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" factor)?            # right-associative power
    base   := NUMBER | "x" | "(" expr ")" | "-" base
            | IDENT "(" expr ("," expr)? ")"

Known functions: sqrt, log (natural), exp, abs take one argument; min and max
take two.  Unary minus sits at the `base` level, so it binds tighter than "^":
"-x^2" parses as "(-x)^2".  Values are IEEE doubles; out-of-domain evaluations
raise explicit errors instead of propagating NaN.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import DivideByZero, DomainError, ExprSyntaxError, UnknownIdentifier

__all__ = [
    "Expr",
    "NumberLiteral",
    "Variable",
    "UnaryNeg",
    "BinaryOp",
    "FunctionCall",
    "parse",
    "evaluate",
    "serialize",
    "FUNCTIONS",
]

FUNCTIONS = {"sqrt": 1, "log": 1, "exp": 1, "abs": 1, "min": 2, "max": 2}

_BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class NumberLiteral:
    value: float


@dataclass(frozen=True)
class Variable:
    pass


@dataclass(frozen=True)
class UnaryNeg:
    child: "Expr"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in _BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: tuple["Expr", ...]

    def __post_init__(self):
        arity = FUNCTIONS.get(self.name)
        if arity is None:
            raise ValueError(f"unknown function {self.name!r}")
        if len(self.args) != arity:
            raise ValueError(
                f"{self.name} takes {arity} argument(s), got {len(self.args)}"
            )


Expr = Union[NumberLiteral, Variable, UnaryNeg, BinaryOp, FunctionCall]


# --- tokenizer -------------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_PUNCT = "+-*/^(),"


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | one of _PUNCT | "eof"
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "−":  # unicode minus, accepted as an alias
            tokens.append(_Token("-", "-", i))
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        m = _NUMBER_RE.match(source, i)
        if m:
            tokens.append(_Token("number", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            tokens.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("eof", "", n))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            raise ExprSyntaxError(
                f"expected {kind!r}, found {self.tok.text or 'end of input'!r}",
                self.tok.pos,
            )
        return self.advance()

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        node = self.parse_base()
        if self.tok.kind == "^":
            self.advance()
            node = BinaryOp("^", node, self.parse_factor())
        return node

    def parse_base(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return NumberLiteral(float(t.text))
        if t.kind == "-":
            self.advance()
            return UnaryNeg(self.parse_base())
        if t.kind == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        if t.kind == "ident":
            self.advance()
            if t.text == "x":
                return Variable()
            if t.text not in FUNCTIONS:
                raise UnknownIdentifier(t.text, t.pos)
            self.expect("(")
            args = [self.parse_expr()]
            if self.tok.kind == ",":
                self.advance()
                args.append(self.parse_expr())
            close = self.expect(")")
            arity = FUNCTIONS[t.text]
            if len(args) != arity:
                raise ExprSyntaxError(
                    f"{t.text} takes {arity} argument(s), got {len(args)}", close.pos
                )
            return FunctionCall(t.text, tuple(args))
        raise ExprSyntaxError(
            f"expected a value, found {t.text or 'end of input'!r}", t.pos
        )


def parse(source: str) -> Expr:
    """Parse source text into an immutable expression tree."""
    parser = _Parser(_tokenize(source))
    node = parser.parse_expr()
    if parser.tok.kind != "eof":
        raise ExprSyntaxError(
            f"expected end of input, found {parser.tok.text!r}", parser.tok.pos
        )
    return node


# --- evaluation ------------------------------------------------------------


def _power(base: float, exponent: float, x: float) -> float:
    if base < 0.0 and exponent != math.floor(exponent):
        raise DomainError(
            f"fractional power {exponent!r} of negative base {base!r}", x
        )
    if base == 0.0 and exponent < 0.0:
        raise DivideByZero(f"zero base raised to power {exponent!r}", x)
    try:
        return base**exponent
    except OverflowError:
        sign = -1.0 if (base < 0.0 and math.floor(exponent) % 2 == 1) else 1.0
        return sign * math.inf


def evaluate(e: Expr, x: float) -> float:
    """Evaluate the expression at the given point in IEEE double precision."""
    if isinstance(e, NumberLiteral):
        return e.value
    if isinstance(e, Variable):
        return x
    if isinstance(e, UnaryNeg):
        return -evaluate(e.child, x)
    if isinstance(e, BinaryOp):
        left = evaluate(e.left, x)
        right = evaluate(e.right, x)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            if right == 0.0:
                raise DivideByZero("zero denominator", x)
            return left / right
        return _power(left, right, x)
    # FunctionCall
    args = [evaluate(a, x) for a in e.args]
    if e.name == "sqrt":
        if args[0] < 0.0:
            raise DomainError(f"sqrt of negative value {args[0]!r}", x)
        return math.sqrt(args[0])
    if e.name == "log":
        if args[0] <= 0.0:
            raise DomainError(f"log of non-positive value {args[0]!r}", x)
        return math.log(args[0])
    if e.name == "exp":
        try:
            return math.exp(args[0])
        except OverflowError:
            return math.inf
    if e.name == "abs":
        return abs(args[0])
    if e.name == "min":
        return min(args)
    return max(args)


def serialize(e: Expr) -> str:
    """Render a fully parenthesized source string that reparses to an
    evaluation-equivalent tree."""
    if isinstance(e, NumberLiteral):
        return repr(e.value)
    if isinstance(e, Variable):
        return "x"
    if isinstance(e, UnaryNeg):
        return f"(-{serialize(e.child)})"
    if isinstance(e, BinaryOp):
        return f"({serialize(e.left)}{e.op}{serialize(e.right)})"
    return f"{e.name}({', '.join(serialize(a) for a in e.args)})"
