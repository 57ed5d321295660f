"""Minimal arithmetic expression grammar for user-supplied right-hand sides.

Accepted: the variables t and y, decimal numbers, + - * / ^ (right
associative), unary minus, parentheses, and the functions exp, sin, cos.
The grammar is deliberately total: expressions that hit a domain error at
evaluation time (division by zero, overflow, fractional power of a negative
base) return nan instead of raising, so a bad rhs fails the nonnegativity
certificate rather than crashing a run.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | 't' | 'y' | FUNC '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from typing import Callable, List, Tuple

from .errors import ExpressionError

_TOKEN_RE = re.compile(r"""
    (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_]+)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)

_FUNCTIONS = {"exp": math.exp, "sin": math.sin, "cos": math.cos}

Evaluator = Callable[[float, float], float]


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionError(
                f"unexpected character {text[pos]!r} at position {pos} in rhs "
                f"expression {text!r}"
            )
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ExpressionError(
                f"expected {op!r} at position {pos} in rhs expression {self.text!r}, "
                f"found {value!r}" if value else
                f"expected {op!r} at end of rhs expression {self.text!r}"
            )
        self.advance()

    def parse(self) -> Evaluator:
        fn = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExpressionError(
                f"unexpected {value!r} at position {pos} in rhs expression {self.text!r}"
            )
        return fn

    def expr(self) -> Evaluator:
        fn = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                fn = self._binary(value, fn, rhs)
            else:
                return fn

    def term(self) -> Evaluator:
        fn = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.factor()
                fn = self._binary(value, fn, rhs)
            else:
                return fn

    def factor(self) -> Evaluator:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            inner = self.factor()
            return lambda t, y: -inner(t, y)
        return self.power()

    def power(self) -> Evaluator:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            expo = self.factor()
            return self._binary("^", base, expo)
        return base

    def atom(self) -> Evaluator:
        kind, value, pos = self.advance()
        if kind == "number":
            const = float(value)
            return lambda t, y: const
        if kind == "name":
            if value == "t":
                return lambda t, y: t
            if value == "y":
                return lambda t, y: y
            if value in _FUNCTIONS:
                func = _FUNCTIONS[value]
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")

                def call(t, y, _func=func, _inner=inner):
                    try:
                        return _func(_inner(t, y))
                    except (ValueError, OverflowError):
                        return math.nan

                return call
            raise ExpressionError(
                f"unknown name {value!r} at position {pos} in rhs expression "
                f"{self.text!r}; allowed names: t, y, exp, sin, cos"
            )
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExpressionError(
            f"unexpected {value!r} at position {pos} in rhs expression {self.text!r}"
        )

    @staticmethod
    def _binary(op: str, lhs: Evaluator, rhs: Evaluator) -> Evaluator:
        if op == "+":
            return lambda t, y: lhs(t, y) + rhs(t, y)
        if op == "-":
            return lambda t, y: lhs(t, y) - rhs(t, y)
        if op == "*":
            return lambda t, y: lhs(t, y) * rhs(t, y)
        if op == "/":
            def div(t, y):
                try:
                    return lhs(t, y) / rhs(t, y)
                except ZeroDivisionError:
                    return math.nan
            return div

        def power(t, y):
            try:
                result = lhs(t, y) ** rhs(t, y)
            except (ValueError, OverflowError, ZeroDivisionError):
                return math.nan
            return result if isinstance(result, float) or isinstance(result, int) else math.nan

        return power


def parse_expression(text: str) -> Evaluator:
    """Compile an rhs expression into a callable (t, y) -> float."""
    if not text or text.isspace():
        raise ExpressionError("empty rhs expression")
    return _Parser(text).parse()
