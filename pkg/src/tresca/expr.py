"""Recursive-descent parser for the scalar data expressions f0(x, y), f2(x, y).

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-')? atom
    atom   := number | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | exp | abs

Expressions compile to a small tree that evaluates elementwise on numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = ["Expression", "ExpressionError", "parse_expression"]


class ExpressionError(ValueError):
    """Raised for malformed expressions or non-finite evaluation results."""


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/()])"
    r")"
)

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
_BINOPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
}


@dataclass(frozen=True)
class _Num:
    value: float


@dataclass(frozen=True)
class _Var:
    name: str


@dataclass(frozen=True)
class _Neg:
    arg: object


@dataclass(frozen=True)
class _Call:
    func: str
    arg: object


@dataclass(frozen=True)
class _BinOp:
    op: str
    left: object
    right: object


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip())
            raise ExpressionError(f"unexpected character {text[bad]!r} at column {bad + 1}")
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg):
        _, value, pos = self.peek()
        found = repr(value) if value else "end of input"
        raise ExpressionError(f"{msg} at column {pos + 1} (found {found}) in {self.text!r}")

    def expect_op(self, op):
        kind, value, _ = self.peek()
        if kind != "op" or value != op:
            self.error(f"expected {op!r}")
        self.advance()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected trailing input")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = _BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = _BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return _Neg(self.atom())
        return self.atom()

    def atom(self):
        kind, value, _ = self.peek()
        if kind == "number":
            self.advance()
            return _Num(float(value))
        if kind == "name":
            if value in ("x", "y"):
                self.advance()
                return _Var(value)
            if value in _FUNCS:
                self.advance()
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return _Call(value, arg)
            self.error(f"unknown identifier {value!r}")
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        self.error("expected number, variable, function or '('")


def _eval(node, x, y):
    if isinstance(node, _Num):
        return np.full(np.shape(x), node.value, dtype=float)
    if isinstance(node, _Var):
        return np.asarray(x if node.name == "x" else y, dtype=float)
    if isinstance(node, _Neg):
        return np.negative(_eval(node.arg, x, y))
    if isinstance(node, _Call):
        return _FUNCS[node.func](_eval(node.arg, x, y))
    return _BINOPS[node.op](_eval(node.left, x, y), _eval(node.right, x, y))


def _uses_coords(node):
    if isinstance(node, _Var):
        return True
    if isinstance(node, _Num):
        return False
    if isinstance(node, (_Neg, _Call)):
        return _uses_coords(node.arg)
    return _uses_coords(node.left) or _uses_coords(node.right)


@dataclass(frozen=True)
class Expression:
    """A parsed scalar expression in the coordinates ``x`` and ``y``."""

    source: str
    tree: object

    def __call__(self, x, y):
        """Evaluate elementwise; raise ExpressionError on any non-finite value."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        with np.errstate(all="ignore"):
            out = _eval(self.tree, x, y)
        bad = ~np.isfinite(out)
        if np.any(bad):
            k = np.flatnonzero(bad.ravel())[0]
            xb, yb = x.ravel()[k], y.ravel()[k]
            raise ExpressionError(
                f"expression {self.source!r} is not finite at x={float(xb)!r}, y={float(yb)!r}"
            )
        return out

    @property
    def is_constant(self):
        return not _uses_coords(self.tree)

    def constant_value(self):
        if not self.is_constant:
            raise ExpressionError(f"expression {self.source!r} depends on x or y")
        return float(self(0.0, 0.0))


def parse_expression(text):
    """Parse ``text`` into an :class:`Expression`."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression")
    return Expression(text.strip(), _Parser(text).parse())
