"""Expression DSL over a single variable ``u``.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-')? power
    power  := atom ('^' factor)?
    atom   := number | 'u' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'

Exponentiation binds tightest and associates right, then unary minus, then
``*``/``/``, then ``+``/``-``.  ASTs are immutable; differentiation is exact
and closed (the derivative of any expression is again an expression), with
constant folding as the only simplification.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainEvalError, ParseError

UNARY_FUNCTIONS = (
    "sin", "cos", "tan", "asin", "acos", "atan",
    "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs",
)
NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    """The free variable ``u``."""


@dataclass(frozen=True)
class Unary(Expr):
    fn: str  # one of UNARY_FUNCTIONS or "neg"
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


U = Var()


# ---------------------------------------------------------------------------
# Smart constructors: constant folding only, so derivative trees stay small.
# ---------------------------------------------------------------------------

def const(v: float) -> Const:
    return Const(float(v))


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return const(a.value + b.value)
    if isinstance(a, Const) and a.value == 0.0:
        return b
    if isinstance(b, Const) and b.value == 0.0:
        return a
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return const(a.value - b.value)
    if isinstance(b, Const) and b.value == 0.0:
        return a
    if isinstance(a, Const) and a.value == 0.0:
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return const(a.value * b.value)
    if isinstance(a, Const):
        if a.value == 0.0:
            return const(0.0)
        if a.value == 1.0:
            return b
    if isinstance(b, Const):
        if b.value == 0.0:
            return const(0.0)
        if b.value == 1.0:
            return a
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return const(a.value / b.value)
    if isinstance(a, Const) and a.value == 0.0:
        return const(0.0)
    if isinstance(b, Const) and b.value == 1.0:
        return a
    return Binary("/", a, b)


def pow_(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 1.0:
            return a
        if b.value == 0.0:
            return const(1.0)
        if isinstance(a, Const):
            try:
                return const(a.value ** b.value)
            except (ValueError, OverflowError, ZeroDivisionError):
                pass  # leave the fault for evaluation time
    return Binary("^", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return const(-a.value)
    if isinstance(a, Unary) and a.fn == "neg":
        return a.arg
    return Unary("neg", a)


def call(fn: str, arg: Expr) -> Expr:
    return Unary(fn, arg)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, offset=self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.accept(ch):
            got = self.peek() or "end of input"
            raise self.error(f"expected '{ch}', found {got!r}" if got != "end of input"
                             else f"expected '{ch}', found end of input")

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                node = Binary("+", node, self.parse_term())
            elif c == "-":
                self.pos += 1
                node = Binary("-", node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                node = Binary("*", node, self.parse_factor())
            elif c == "/":
                self.pos += 1
                node = Binary("/", node, self.parse_factor())
            else:
                return node

    def parse_factor(self) -> Expr:
        if self.accept("-"):
            return neg(self.parse_power())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.peek() == "^":
            self.pos += 1
            return Binary("^", base, self.parse_factor())
        return base

    def parse_atom(self) -> Expr:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        ch = self.text[self.pos]
        if ch == "(":
            self.pos += 1
            node = self.parse_expr()
            self.expect(")")
            return node
        m = _NUMBER_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Const(float(m.group()))
        m = _IDENT_RE.match(self.text, self.pos)
        if m:
            name = m.group()
            start = self.pos
            self.pos = m.end()
            if name == "u":
                return U
            if name in NAMED_CONSTANTS:
                return Const(NAMED_CONSTANTS[name])
            if name in UNARY_FUNCTIONS:
                self.expect("(")
                node = self.parse_expr()
                self.expect(")")
                return Unary(name, node)
            self.pos = start
            raise self.error(f"unknown identifier {name!r}")
        raise self.error(f"unexpected character {ch!r}")


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an expression AST.

    Raises ParseError (with byte offset) on malformed input or unknown
    identifiers.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", offset=0)
    p = _Parser(text)
    node = p.parse_expr()
    p.skip_ws()
    if p.pos != len(text):
        raise p.error(f"unexpected trailing input {text[p.pos]!r}")
    return node


# ---------------------------------------------------------------------------
# Printing (precedence-aware; print . parse is idempotent on printed forms)
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.fn == "neg":
        return _PREC["neg"]
    if isinstance(e, Const) and (e.value < 0.0
                                 or (e.value == 0.0 and math.copysign(1.0, e.value) < 0)):
        return _PREC["neg"]   # prints with a leading '-'
    return 5


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        if e.value < 0.0 or (e.value == 0.0 and math.copysign(1.0, e.value) < 0):
            return f"-{-e.value!r}"
        return repr(e.value)
    if isinstance(e, Var):
        return "u"
    if isinstance(e, Unary):
        if e.fn == "neg":
            inner = to_string(e.arg)
            if _prec(e.arg) <= _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.fn}({to_string(e.arg)})"
    assert isinstance(e, Binary)
    op = e.op
    lp, rp = _prec(e.left), _prec(e.right)
    left = to_string(e.left)
    right = to_string(e.right)
    if op == "^":
        # right-associative; a negated or lower-prec base must parenthesize
        if lp <= _PREC["^"]:
            left = f"({left})"
        if rp < _PREC["^"] and not (isinstance(e.right, Unary) and e.right.fn == "neg"):
            right = f"({right})"
        return f"{left}^{right}"
    if lp < _PREC[op]:
        left = f"({left})"
    # subtraction and division do not associate on the right
    if rp < _PREC[op] or (rp == _PREC[op] and op in ("-", "/")):
        right = f"({right})"
    return f"{left} {op} {right}" if op in ("+", "-") else f"{left}{op}{right}"


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

def _d_unary(fn: str, x: Expr, dx: Expr) -> Expr:
    if fn == "neg":
        return neg(dx)
    if fn == "sin":
        return mul(call("cos", x), dx)
    if fn == "cos":
        return neg(mul(call("sin", x), dx))
    if fn == "tan":
        return div(dx, pow_(call("cos", x), const(2.0)))
    if fn == "asin":
        return div(dx, call("sqrt", sub(const(1.0), pow_(x, const(2.0)))))
    if fn == "acos":
        return neg(div(dx, call("sqrt", sub(const(1.0), pow_(x, const(2.0))))))
    if fn == "atan":
        return div(dx, add(const(1.0), pow_(x, const(2.0))))
    if fn == "sinh":
        return mul(call("cosh", x), dx)
    if fn == "cosh":
        return mul(call("sinh", x), dx)
    if fn == "tanh":
        return div(dx, pow_(call("cosh", x), const(2.0)))
    if fn == "exp":
        return mul(call("exp", x), dx)
    if fn == "log":
        return div(dx, x)
    if fn == "sqrt":
        return div(dx, mul(const(2.0), call("sqrt", x)))
    if fn == "abs":
        # derivative sign(x); expressed as x/abs(x) so x=0 faults at evaluation
        return mul(div(x, call("abs", x)), dx)
    raise ValueError(f"no derivative rule for {fn!r}")


def _differentiate_once(e: Expr) -> Expr:
    if isinstance(e, Const):
        return const(0.0)
    if isinstance(e, Var):
        return const(1.0)
    if isinstance(e, Unary):
        return _d_unary(e.fn, e.arg, _differentiate_once(e.arg))
    assert isinstance(e, Binary)
    a, b = e.left, e.right
    da, db = _differentiate_once(a), _differentiate_once(b)
    if e.op == "+":
        return add(da, db)
    if e.op == "-":
        return sub(da, db)
    if e.op == "*":
        return add(mul(da, b), mul(a, db))
    if e.op == "/":
        return div(sub(mul(da, b), mul(a, db)), pow_(b, const(2.0)))
    assert e.op == "^"
    if isinstance(b, Const):
        return mul(mul(b, pow_(a, const(b.value - 1.0))), da)
    # general case a^b * (db*log(a) + b*da/a); only valid for a > 0
    return mul(pow_(a, b), add(mul(db, call("log", a)), div(mul(b, da), a)))


def differentiate(e: Expr, order: int = 1) -> Expr:
    """Exact symbolic derivative of the given order (order >= 1)."""
    if order < 1:
        raise ValueError("differentiation order must be >= 1")
    for _ in range(order):
        e = _differentiate_once(e)
    return e


def contains_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Unary):
        return contains_var(e.arg)
    if isinstance(e, Binary):
        return contains_var(e.left) or contains_var(e.right)
    return False


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

_NUMPY_FN = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "asin": np.arcsin, "acos": np.arccos, "atan": np.arctan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
    "neg": np.negative,
}


def compile_expr(e: Expr):
    """Build a fast callable evaluating ``e`` on scalars or ndarrays.

    The callable performs no domain checking; callers that need precise
    fault reports go through :func:`evaluate`.
    """
    if isinstance(e, Const):
        v = e.value
        return lambda u, _v=v: _v
    if isinstance(e, Var):
        return lambda u: u
    if isinstance(e, Unary):
        f = _NUMPY_FN[e.fn]
        g = compile_expr(e.arg)
        return lambda u, _f=f, _g=g: _f(_g(u))
    assert isinstance(e, Binary)
    lf = compile_expr(e.left)
    rf = compile_expr(e.right)
    op = e.op
    if op == "+":
        return lambda u: lf(u) + rf(u)
    if op == "-":
        return lambda u: lf(u) - rf(u)
    if op == "*":
        return lambda u: lf(u) * rf(u)
    if op == "/":
        return lambda u: np.divide(lf(u), rf(u))
    return lambda u: np.power(lf(u), rf(u))


def _eval_checked(e: Expr, u: float) -> float:
    """Scalar evaluation with precise domain-fault messages."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(u)
    if isinstance(e, Unary):
        x = _eval_checked(e.arg, u)
        if e.fn == "neg":
            return -x
        if e.fn == "log" and x <= 0.0:
            raise DomainEvalError("log of nonpositive argument", u=u)
        if e.fn == "sqrt" and x < 0.0:
            raise DomainEvalError("sqrt of negative argument", u=u)
        if e.fn in ("asin", "acos") and not -1.0 <= x <= 1.0:
            raise DomainEvalError(f"{e.fn} argument outside [-1, 1]", u=u)
        try:
            with np.errstate(all="ignore"):
                out = float(_NUMPY_FN[e.fn](x))
        except (ValueError, OverflowError) as exc:
            raise DomainEvalError(f"{e.fn} evaluation failed: {exc}", u=u) from None
        if not math.isfinite(out):
            raise DomainEvalError(f"non-finite result from {e.fn}", u=u)
        return out
    assert isinstance(e, Binary)
    a = _eval_checked(e.left, u)
    b = _eval_checked(e.right, u)
    if e.op == "/":
        if b == 0.0:
            raise DomainEvalError("division by zero", u=u)
        out = a / b
    elif e.op == "^":
        try:
            with np.errstate(all="ignore"):
                out = float(np.power(a, b))
        except (ValueError, OverflowError):
            raise DomainEvalError("invalid power", u=u) from None
        if not math.isfinite(out):
            raise DomainEvalError(
                "invalid power (negative base with fractional exponent, "
                "zero base with negative exponent, or overflow)", u=u)
        return out
    elif e.op == "+":
        out = a + b
    elif e.op == "-":
        out = a - b
    else:
        out = a * b
    if not math.isfinite(out):
        raise DomainEvalError(f"non-finite result from {e.op!r}", u=u)
    return out


def evaluate(e: Expr, u):
    """Evaluate ``e`` at scalar or ndarray ``u`` with domain checking.

    Returns a float (scalar input) or ndarray. Non-finite results raise
    DomainEvalError naming the fault and the offending u.
    """
    fn = compile_expr(e)
    if np.ndim(u) == 0:
        return _eval_checked(e, float(u))
    u = np.asarray(u, dtype=float)
    with np.errstate(all="ignore"):
        out = np.broadcast_to(np.asarray(fn(u), dtype=float), u.shape)
    bad = ~np.isfinite(out)
    if bad.any():
        # re-run the scalar evaluator at the first bad point for the message
        _eval_checked(e, float(u[np.argmax(bad)]))
        raise DomainEvalError("non-finite evaluation", u=float(u[np.argmax(bad)]))
    return np.array(out, dtype=float)
