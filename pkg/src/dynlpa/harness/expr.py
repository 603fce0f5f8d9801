"""Probability expressions such as ``5/n``, ``n^-1.5`` or ``uniform(0, log n / n)``.

Grammar (``log`` is the natural logarithm)::

    top    := "uniform" "(" sum "," sum ")" | sum
    sum    := term (("+" | "-") term)*
    term   := factor (("*" | "/")? factor)*      # juxtaposition multiplies
    factor := ("-" | "+") factor | power
    power  := atom ("^" factor)?
    atom   := number | "n" | "log" atom | "log" "(" sum ")" | "(" sum ")"
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..errors import ExpressionError, ParameterError

__all__ = ["UniformRange", "parse_prob_expr", "evaluate"]

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(uniform|log|ln|n)\b|(.))")


@dataclass(frozen=True)
class UniformRange:
    """Per-pair probabilities drawn uniformly from ``[low, high]``."""

    low: float
    high: float


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                break
            start = m.start(m.lastindex) if m.lastindex else pos
            if m.group(1) is not None:
                self.tokens.append(("num", m.group(1), start))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), start))
            elif m.group(3) is not None:
                if not m.group(3).strip():
                    pos = m.end()
                    continue
                self.tokens.append(("op", m.group(3), start))
            pos = m.end()
        self.i = 0

    def error(self, message):
        pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        raise ExpressionError(message, self.text, pos)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def accept(self, kind, value=None):
        tok = self.peek()
        if tok[0] == kind and (value is None or tok[1] == value):
            self.i += 1
            return tok
        return None

    def expect(self, kind, value):
        if self.accept(kind, value) is None:
            self.error(f"expected {value!r}")

    def top(self):
        if self.accept("name", "uniform"):
            self.expect("op", "(")
            low = self.sum()
            self.expect("op", ",")
            high = self.sum()
            self.expect("op", ")")
            result = UniformRange(low, high)
        else:
            result = self.sum()
        if self.i != len(self.tokens):
            self.error("unexpected trailing input")
        return result

    def sum(self):
        value = self.term()
        while True:
            if self.accept("op", "+"):
                value += self.term()
            elif self.accept("op", "-"):
                value -= self.term()
            else:
                return value

    def _starts_factor(self):
        kind, val, _ = self.peek()
        return kind in ("num", "name") and val != "uniform" or (kind == "op" and val == "(")

    def term(self):
        value = self.factor()
        while True:
            if self.accept("op", "*"):
                value *= self.factor()
            elif self.accept("op", "/"):
                denom = self.factor()
                if denom == 0:
                    self.error("division by zero")
                value /= denom
            elif self._starts_factor():
                value *= self.factor()
            else:
                return value

    def factor(self):
        if self.accept("op", "-"):
            return -self.factor()
        if self.accept("op", "+"):
            return self.factor()
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("op", "^"):
            return base ** self.factor()
        return base

    def atom(self):
        tok = self.accept("num")
        if tok:
            return float(tok[1])
        if self.accept("name", "n"):
            return float(self.n)
        if self.accept("name", "log") or self.accept("name", "ln"):
            arg = self.atom()
            if arg <= 0:
                self.error("log of a non-positive value")
            return math.log(arg)
        if self.accept("op", "("):
            value = self.sum()
            self.expect("op", ")")
            return value
        self.error("expected a number, 'n', 'log' or '('")


def evaluate(text: str, n: int):
    """Evaluate without range checks; returns a float or :class:`UniformRange`."""
    if not text or not text.strip():
        raise ExpressionError("empty expression", text or "", 0)
    return _Parser(text, n).top()


def parse_prob_expr(text: str, n: int):
    """Evaluate ``text`` at ``n`` and check the result lies in ``[0, 1]``.

    >>> parse_prob_expr("5/n", 20000)
    0.00025
    """
    value = evaluate(text, n)
    bounds = (value.low, value.high) if isinstance(value, UniformRange) else (value,)
    for b in bounds:
        if not (0.0 <= b <= 1.0):
            raise ParameterError(f"{text!r} evaluates to {b} at n={n}, outside [0, 1]")
    if isinstance(value, UniformRange) and value.low > value.high:
        raise ParameterError(f"{text!r} has an empty range at n={n}")
    return value
