"""A closed arithmetic expression language for problem files.

Grammar (loosest to tightest binding)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?            # right associative
    atom   := number | name | func "(" expr ")" | "(" expr ")"

Functions: sin cos exp ln abs sqrt. The constant ``pi`` is always available.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import EvalDomainError, ParseError, UnknownVariable

FUNCTIONS = ("sin", "cos", "exp", "ln", "abs", "sqrt")
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Num | Var | Neg | Bin | Call

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """(kind, text, column) triples; columns are 1-based."""
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", 1, pos + 1)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text: str, variables: frozenset[str]):
        self.toks = tokenize(text)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, text, col = self.take()
        if kind != "op" or text != op:
            raise ParseError(f"expected {op!r}, found {text or 'end of input'!r}", 1, col)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, col = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", 1, col)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text, col = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in self.variables:
                return Var(text)
            if text in CONSTANTS:
                return Var(text)
            raise UnknownVariable(f"unknown name {text!r}; allowed: {sorted(self.variables)}", 1, col)
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {text or 'end of input'!r}", 1, col)


def parse_expr(text: str, variables: Iterable[str]) -> Node:
    return _Parser(text, frozenset(variables)).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def pretty(node: Node) -> str:
    """Minimal-parenthesis rendering that parses back to the same tree."""

    def wrap(child: Node, need: bool) -> str:
        s = pretty(child)
        return f"({s})" if need else s

    if isinstance(node, Num):
        if node.value < 0 or not math.isfinite(node.value):
            raise ValueError(f"literal {node.value!r} has no source form")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({pretty(node.arg)})"
    if isinstance(node, Neg):
        return "-" + wrap(node.operand, _prec(node.operand) < 3)
    p = _PREC[node.op]
    if node.op == "^":
        return f"{wrap(node.left, _prec(node.left) <= p)}^{wrap(node.right, _prec(node.right) < 3)}"
    return f"{wrap(node.left, _prec(node.left) < p)} {node.op} {wrap(node.right, _prec(node.right) <= p)}"


def _guard(ok, what: str):
    if not np.all(ok):
        raise EvalDomainError(what)


def _ln(x):
    _guard(x > 0, "ln of a non-positive value")
    return np.log(x)


def _sqrt(x):
    _guard(x >= 0, "sqrt of a negative value")
    return np.sqrt(x)


_FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "ln": _ln,
    "abs": np.abs,
    "sqrt": _sqrt,
}


def _div(a, b):
    _guard(b != 0, "division by zero")
    return a / b


def _pow(a, b):
    out = np.power(np.asarray(a, dtype=float), b)
    _guard(~np.isnan(out) | np.isnan(a) | np.isnan(b), "power of a negative base to a fractional exponent")
    return out


_BINOPS: dict[str, Callable] = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": _div,
    "^": _pow,
}


def compile_node(node: Node, variables: tuple[str, ...]) -> Callable:
    """Closure evaluating node with positional arguments in ``variables`` order."""
    if isinstance(node, Num):
        v = node.value
        return lambda *args: v
    if isinstance(node, Var):
        if node.name in variables:
            k = variables.index(node.name)
            return lambda *args: args[k]
        c = CONSTANTS[node.name]
        return lambda *args: c
    if isinstance(node, Neg):
        inner = compile_node(node.operand, variables)
        return lambda *args: np.negative(inner(*args))
    if isinstance(node, Call):
        fn, inner = _FUNCS[node.fn], compile_node(node.arg, variables)
        return lambda *args: fn(inner(*args))
    op, left, right = _BINOPS[node.op], compile_node(node.left, variables), compile_node(node.right, variables)
    return lambda *args: op(left(*args), right(*args))


@dataclass(frozen=True)
class Expr:
    source: str
    variables: tuple[str, ...]
    ast: Node

    @classmethod
    def parse(cls, text: str, variables: Iterable[str]) -> "Expr":
        variables = tuple(variables)
        return cls(text, variables, parse_expr(text, variables))

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise TypeError(f"expected {len(self.variables)} arguments {self.variables}, got {len(args)}")
        args = tuple(np.asarray(a, dtype=float) for a in args)
        with np.errstate(all="ignore"):
            out = self._fn(*args)
        out = np.asarray(out, dtype=float)
        shape = np.broadcast_shapes(out.shape, *(a.shape for a in args))
        if shape == ():
            return float(out)
        return np.broadcast_to(out, shape).copy()

    @property
    def _fn(self) -> Callable:
        fn = self.__dict__.get("_compiled")
        if fn is None:
            fn = compile_node(self.ast, self.variables)
            object.__setattr__(self, "_compiled", fn)
        return fn

    def __str__(self):
        return pretty(self.ast)
