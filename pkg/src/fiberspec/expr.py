"""Tiny arithmetic expression language used by configuration files.

Grammar:

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := unary ('^' factor)?
    unary   := '-'? primary
    primary := number | ident | ident '(' args ')' | '(' expr ')'
    args    := expr (',' expr)*

'^' is right associative and shares its semantics with pow().  Unary minus
binds tighter than the base of '^', so -2^2 evaluates to 4.  Numbers are
decimal literals with an optional exponent part.  The only identifiers are
the variables omega, t, s, lambda, the constant pi, and the builtin
functions sin, cos, tan, exp, log, sqrt, abs, min, max, pow.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import (
    DomainError,
    ExpressionSyntaxError,
    MissingBinding,
    UnknownIdentifier,
)

VARIABLES = ("omega", "t", "s", "lambda")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expression = Union[Num, Var, Pi, Neg, BinOp, Call]


def _safe_div(a, b):
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _safe_pow(base, exponent):
    if base == 0.0 and exponent < 0.0:
        raise DomainError("zero raised to a negative power")
    if base < 0.0 and exponent != math.floor(exponent):
        raise DomainError("negative base with non-integer exponent")
    try:
        return math.pow(base, exponent)
    except OverflowError as exc:
        raise DomainError("overflow in pow") from exc


def _safe_log(x):
    if x <= 0.0:
        raise DomainError(f"log of non-positive value {x!r}")
    return math.log(x)


def _safe_sqrt(x):
    if x < 0.0:
        raise DomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


def _safe_exp(x):
    try:
        return math.exp(x)
    except OverflowError as exc:
        raise DomainError("overflow in exp") from exc


# name -> (arity, implementation)
FUNCTIONS = {
    "sin": (1, math.sin),
    "cos": (1, math.cos),
    "tan": (1, math.tan),
    "exp": (1, _safe_exp),
    "log": (1, _safe_log),
    "sqrt": (1, _safe_sqrt),
    "abs": (1, abs),
    "min": (2, min),
    "max": (2, max),
    "pow": (2, _safe_pow),
}

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = set("+-*/^(),")


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | "op" | "end"
    text: str
    pos: int


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            tokens.append(_Token("number", m.group(), pos))
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            tokens.append(_Token("ident", m.group(), pos))
            pos = m.end()
            continue
        if ch in _OPS:
            tokens.append(_Token("op", ch, pos))
            pos += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def match_op(self, *ops):
        tok = self.peek()
        if tok.kind == "op" and tok.text in ops:
            return self.advance()
        return None

    def expect_op(self, op, what):
        tok = self.match_op(op)
        if tok is None:
            raise ExpressionSyntaxError(f"expected {what}", self.peek().pos)
        return tok

    def expr(self):
        node = self.term()
        while True:
            tok = self.match_op("+", "-")
            if tok is None:
                return node
            node = BinOp(tok.text, node, self.term())

    def term(self):
        node = self.factor()
        while True:
            tok = self.match_op("*", "/")
            if tok is None:
                return node
            node = BinOp(tok.text, node, self.factor())

    def factor(self):
        node = self.unary()
        if self.match_op("^"):
            return BinOp("^", node, self.factor())
        return node

    def unary(self):
        if self.match_op("-"):
            return Neg(self.primary())
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if self.match_op("("):
                if name not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function {name!r}", tok.pos)
                args = [self.expr()]
                while self.match_op(","):
                    args.append(self.expr())
                self.expect_op(")", "')' to close the argument list")
                arity = FUNCTIONS[name][0]
                if len(args) != arity:
                    raise ExpressionSyntaxError(
                        f"{name} expects {arity} argument(s), got {len(args)}",
                        tok.pos,
                    )
                return Call(name, tuple(args))
            if name == "pi":
                return Pi()
            if name in VARIABLES:
                return Var(name)
            if name in FUNCTIONS:
                raise ExpressionSyntaxError(
                    f"builtin {name!r} must be called with arguments", tok.pos
                )
            raise UnknownIdentifier(f"unknown identifier {name!r}", tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")", "')' to close the group")
            return node
        raise ExpressionSyntaxError(
            "expected a number, identifier, or '('", tok.pos
        )


def parse(text: str) -> Expression:
    """Parse expression text into an AST.

    Raises ExpressionSyntaxError (with the byte offset of the problem) on
    malformed input and UnknownIdentifier on identifiers outside the
    allowed set.
    """
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ExpressionSyntaxError(
            f"unexpected trailing input {trailing.text!r}", trailing.pos
        )
    return node


def evaluate(e: Expression, bindings: dict) -> float:
    """Evaluate an AST against variable bindings, returning a float.

    Raises MissingBinding when a free variable has no bound value and
    DomainError when evaluation leaves the real domain.
    """
    match e:
        case Num(value):
            return value
        case Pi():
            return math.pi
        case Var(name):
            try:
                return float(bindings[name])
            except KeyError:
                raise MissingBinding(f"no binding for variable {name!r}") from None
        case Neg(operand):
            return -evaluate(operand, bindings)
        case BinOp("+", left, right):
            return evaluate(left, bindings) + evaluate(right, bindings)
        case BinOp("-", left, right):
            return evaluate(left, bindings) - evaluate(right, bindings)
        case BinOp("*", left, right):
            return evaluate(left, bindings) * evaluate(right, bindings)
        case BinOp("/", left, right):
            return _safe_div(evaluate(left, bindings), evaluate(right, bindings))
        case BinOp("^", left, right):
            return _safe_pow(evaluate(left, bindings), evaluate(right, bindings))
        case Call(func, args):
            fn = FUNCTIONS[func][1]
            return float(fn(*(evaluate(a, bindings) for a in args)))
    raise TypeError(f"not an expression node: {e!r}")


def free_variables(e: Expression) -> frozenset:
    match e:
        case Num() | Pi():
            return frozenset()
        case Var(name):
            return frozenset((name,))
        case Neg(operand):
            return free_variables(operand)
        case BinOp(_, left, right):
            return free_variables(left) | free_variables(right)
        case Call(_, args):
            out = frozenset()
            for a in args:
                out |= free_variables(a)
            return out
    raise TypeError(f"not an expression node: {e!r}")


def to_source(e: Expression) -> str:
    """Print an AST back to parseable text (fully parenthesized)."""
    match e:
        case Num(value):
            if value < 0 or (value == 0 and math.copysign(1.0, value) < 0):
                return f"(-{abs(value)!r})"
            return repr(value)
        case Pi():
            return "pi"
        case Var(name):
            return name
        case Neg(operand):
            return f"(-{to_source(operand)})"
        case BinOp(op, left, right):
            return f"({to_source(left)}{op}{to_source(right)})"
        case Call(func, args):
            return f"{func}({','.join(to_source(a) for a in args)})"
    raise TypeError(f"not an expression node: {e!r}")
