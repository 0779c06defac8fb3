"""A closed arithmetic expression language in one variable ``x``.

Grammar (precedence low to high)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?          # right associative
    atom   := NUMBER | "x" | "pi" | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Functions: sin cos exp log abs sqrt (one argument), min max pow (two).
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DomainError, ExprSyntaxError

__all__ = [
    "Expr",
    "parse",
    "evaluate",
    "evaluate_array",
    "to_string",
    "diff",
    "depends_on_x",
    "FUNCTIONS",
]

FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "log": 1,
    "abs": 1,
    "sqrt": 1,
    "min": 2,
    "max": 2,
    "pow": 2,
}
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Expr:
    """Immutable expression node.

    ``kind`` is one of ``num``, ``var``, ``const``, ``neg``, ``bin`` or ``call``.
    ``value`` holds the literal, the operator character or the function name.
    """

    kind: str
    value: object = None
    args: tuple = ()

    def __post_init__(self):
        arity = {"num": 0, "var": 0, "const": 0, "neg": 1, "bin": 2}
        if self.kind == "call":
            if self.value not in FUNCTIONS:
                raise ValueError(f"unknown function {self.value!r}")
            expected = FUNCTIONS[self.value]
        elif self.kind in arity:
            expected = arity[self.kind]
        else:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.args) != expected:
            raise ValueError(f"{self.kind} {self.value!r} expects {expected} children")
        if self.kind == "bin" and self.value not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.value!r}")
        if self.kind == "num":
            v = float(self.value)
            if not math.isfinite(v):
                raise ValueError("number literals must be finite")
            object.__setattr__(self, "value", v)

    def __str__(self):
        return to_string(self)

    def __call__(self, x):
        return evaluate_array(self, x)


def num(v):
    return Expr("num", float(v))


X = Expr("var", "x")
PI = Expr("const", "pi")


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", byte_pos)
        lexeme = m.group()
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, lexeme, byte_pos))
        byte_pos += len(lexeme.encode("utf-8"))
        pos = m.end()
    tokens.append(("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, lexeme):
        kind, lex, off = self.peek()
        if lex != lexeme or kind == "end":
            what = "end of input" if kind == "end" else repr(lex)
            raise ExprSyntaxError(f"expected {lexeme!r}, found {what}", off)
        self.i += 1

    def parse(self):
        e = self.expr()
        kind, lex, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {lex!r}", off)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Expr("bin", op, (e, self.term()))
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Expr("bin", op, (e, self.unary()))
        return e

    def unary(self):
        kind, lex, _ = self.peek()
        if kind == "op" and lex == "-":
            self.take()
            # "-2" is a literal; "-2^2" stays -(2^2)
            nxt, after = self.peek(), self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
            if nxt[0] == "num" and not (after and after[0] == "op" and after[1] == "^"):
                self.take()
                return num(-float(nxt[1]))
            return Expr("neg", None, (self.unary(),))
        if kind == "op" and lex == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Expr("bin", "^", (base, self.unary()))
        return base

    def atom(self):
        kind, lex, off = self.take()
        if kind == "num":
            return num(float(lex))
        if kind == "name":
            if lex == "x":
                return X
            if lex == "pi":
                return PI
            if lex not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown identifier {lex!r}", off)
            self.expect("(")
            args = [self.expr()]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.expr())
            self.expect(")")
            if len(args) != FUNCTIONS[lex]:
                raise ExprSyntaxError(
                    f"{lex} takes {FUNCTIONS[lex]} argument(s), got {len(args)}", off
                )
            return Expr("call", lex, tuple(args))
        if kind == "op" and lex == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(lex)
        raise ExprSyntaxError(f"expected an operand, found {what}", off)


@functools.lru_cache(maxsize=512)
def parse(text: str) -> Expr:
    """Parse ``text`` into an :class:`Expr`; raises :class:`ExprSyntaxError`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse()


# ---------------------------------------------------------------- printing


def to_string(e: Expr) -> str:
    """Render with full parenthesization so the text reparses to the same tree."""
    k = e.kind
    if k == "num":
        return f"({e.value!r})" if math.copysign(1.0, e.value) < 0 else repr(e.value)
    if k in ("var", "const"):
        return e.value
    if k == "neg":
        inner = to_string(e.args[0])
        return f"(-({inner}))" if e.args[0].kind == "num" else f"(-{inner})"
    if k == "bin":
        a, b = e.args
        return f"({to_string(a)} {e.value} {to_string(b)})"
    return f"{e.value}(" + ", ".join(to_string(a) for a in e.args) + ")"


# ---------------------------------------------------------------- evaluation


def _fail(msg, sub, x, mask):
    xs = np.broadcast_to(x, mask.shape)[mask]
    where = float(xs.flat[0]) if xs.size else None
    raise DomainError(f"{msg} in {to_string(sub)} at x={where!r}", sub, where)


def _compile(e: Expr):
    k = e.kind
    if k == "num":
        v = e.value
        return lambda x: np.full(np.shape(x), v)
    if k == "var":
        return lambda x: np.asarray(x, dtype=float)
    if k == "const":
        return lambda x: np.full(np.shape(x), math.pi)
    if k == "neg":
        f = _compile(e.args[0])
        return lambda x: -f(x)
    if k == "bin":
        fa, fb = (_compile(a) for a in e.args)
        op = e.value
        if op == "+":
            return lambda x: fa(x) + fb(x)
        if op == "-":
            return lambda x: fa(x) - fb(x)
        if op == "*":
            return lambda x: fa(x) * fb(x)
        if op == "/":

            def div(x):
                a, b = fa(x), fb(x)
                bad = b == 0
                if np.any(bad):
                    _fail("division by zero", e, x, np.broadcast_to(bad, np.shape(a + b)))
                return a / b

            return div
        return _power(e, fa, fb)
    name = e.value
    fs = [_compile(a) for a in e.args]
    if name == "pow":
        return _power(e, fs[0], fs[1])
    if name in ("min", "max"):
        g = np.minimum if name == "min" else np.maximum
        return lambda x: g(fs[0](x), fs[1](x))
    f = fs[0]
    if name == "log":

        def log(x):
            a = f(x)
            bad = a <= 0
            if np.any(bad):
                _fail("log of non-positive value", e, x, bad)
            return np.log(a)

        return log
    if name == "sqrt":

        def sqrt(x):
            a = f(x)
            bad = a < 0
            if np.any(bad):
                _fail("sqrt of negative value", e, x, bad)
            return np.sqrt(a)

        return sqrt
    ufunc = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}[name]
    return lambda x: ufunc(f(x))


def _power(e, fa, fb):
    def power(x):
        a, b = np.broadcast_arrays(fa(x), fb(x))
        bad = (a == 0) & (b < 0)
        if np.any(bad):
            _fail("zero to a negative power", e, x, bad)
        bad = (a < 0) & (b != np.round(b))
        if np.any(bad):
            _fail("negative base with non-integer exponent", e, x, bad)
        return np.power(a, b)

    return power


@functools.lru_cache(maxsize=512)
def _compiled(e: Expr):
    return _compile(e)


def evaluate_array(e: Expr, x) -> np.ndarray:
    """Vectorized IEEE evaluation; raises :class:`DomainError` on domain violations."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        return _compiled(e)(x)


def evaluate(e: Expr, x: float) -> float:
    """Scalar evaluation at ``x``."""
    return float(evaluate_array(e, float(x)))


def depends_on_x(e: Expr) -> bool:
    if e.kind == "var":
        return True
    return any(depends_on_x(a) for a in e.args)


# ---------------------------------------------------------------- derivative
# Constructors fold literal zeros and ones so repeated differentiation stays small.

ZERO, ONE = num(0.0), num(1.0)


def _is(e, v):
    return e.kind == "num" and e.value == v


def _add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Expr("bin", "+", (a, b))


def _sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    return Expr("bin", "-", (a, b))


def _neg(a):
    if _is(a, 0):
        return a
    if a.kind == "neg":
        return a.args[0]
    return Expr("neg", None, (a,))


def _mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if a.kind == "num" and b.kind == "num":
        return num(a.value * b.value)
    return Expr("bin", "*", (a, b))


def _div(a, b):
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return Expr("bin", "/", (a, b))


def _pow(a, b):
    if _is(b, 1):
        return a
    if _is(b, 0):
        return ONE
    return Expr("bin", "^", (a, b))


def _call(name, *args):
    return Expr("call", name, tuple(args))


def diff(e: Expr) -> Expr:
    """Symbolic derivative with respect to ``x``."""
    k = e.kind
    if k in ("num", "const"):
        return ZERO
    if k == "var":
        return ONE
    if k == "neg":
        return _neg(diff(e.args[0]))
    if k == "bin" or (k == "call" and e.value == "pow"):
        a, b = e.args
        op = "^" if k == "call" else e.value
        da, db = diff(a), diff(b)
        if op == "+":
            return _add(da, db)
        if op == "-":
            return _sub(da, db)
        if op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, num(2)))
        if not depends_on_x(b):
            exponent = num(b.value - 1) if b.kind == "num" else _sub(b, ONE)
            return _mul(_mul(b, _pow(a, exponent)), da)
        term = _add(_mul(db, _call("log", a)), _div(_mul(b, da), a))
        return _mul(e, term)
    name = e.value
    if name in ("min", "max"):
        raise CapabilityError(f"{name} is not differentiable symbolically")
    a = e.args[0]
    da = diff(a)
    if _is(da, 0):
        return ZERO
    if name == "sin":
        inner = _call("cos", a)
    elif name == "cos":
        inner = _neg(_call("sin", a))
    elif name == "exp":
        inner = e
    elif name == "log":
        return _div(da, a)
    elif name == "sqrt":
        return _div(da, _mul(num(2), e))
    else:  # abs: sign(a) = a/|a|, undefined at zeros of a
        inner = _div(a, e)
    return _mul(inner, da)
