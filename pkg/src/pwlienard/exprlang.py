"""Small closed expression language for the scalar functions of a system.

The grammar covers real literals, the variable ``x``, named parameters,
``+ - * /``, integer powers (``^`` or ``**``) and the unary functions
``exp``, ``sin``, ``cos``, ``sqrt`` and ``abs``.  Expressions are immutable
ASTs; evaluation is a pure function, and :func:`differentiate` returns an
exact symbolic derivative that is again an AST of the same grammar.

Piecewise systems are never written with sign functions inside one
expression; each branch (f+, f-, g+, g-) is its own expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifier",
    "UnboundParameter",
    "DivisionByZero",
    "parse",
    "evaluate",
    "differentiate",
    "to_source",
    "fold",
    "depends_on_x",
    "as_affine",
    "Antiderivative",
]


class ExprError(Exception):
    """Base class for expression-language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, offset: int, expected: str):
        self.offset = offset
        self.expected = expected
        super().__init__(f"syntax error at offset {offset}: expected {expected}")


class UnknownIdentifier(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown function {name!r}")


class UnboundParameter(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"parameter {name!r} is not bound")


class DivisionByZero(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or a parameter name


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str  # exp sin cos sqrt abs
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]

_FUNCTIONS = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "abs": abs,
}


# ---------------------------------------------------------------------------
# Parser: recursive descent, standard precedence, left-associative + - * /,
# right-associative integer powers.


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def parse(self) -> Expr:
        if not self.src.strip():
            raise ExprSyntaxError(0, "an expression")
        e = self._sum()
        self._skip_ws()
        if self.pos != len(self.src):
            raise ExprSyntaxError(self.pos, "end of input or an operator")
        return e

    def _sum(self) -> Expr:
        e = self._term()
        while self._peek() in ("+", "-"):
            op = self.src[self.pos]
            self.pos += 1
            e = BinOp(op, e, self._term())
        return e

    def _term(self) -> Expr:
        e = self._unary()
        while True:
            c = self._peek()
            if c == "*" and self.src[self.pos : self.pos + 2] != "**":
                self.pos += 1
                e = BinOp("*", e, self._unary())
            elif c == "/":
                self.pos += 1
                e = BinOp("/", e, self._unary())
            else:
                return e

    def _unary(self) -> Expr:
        if self._peek() == "-":
            self.pos += 1
            return Neg(self._unary())
        if self._peek() == "+":
            self.pos += 1
            return self._unary()
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        self._skip_ws()
        if self._peek() == "^" or self.src[self.pos : self.pos + 2] == "**":
            self.pos += 1 if self.src[self.pos] == "^" else 2
            return Pow(base, self._int_exponent())
        return base

    def _int_exponent(self) -> int:
        """Integer exponent; chained ^ associates to the right."""
        self._skip_ws()
        sign = 1
        if self._peek() == "-":
            sign = -1
            self.pos += 1
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ExprSyntaxError(start, "an integer exponent")
        value = sign * int(self.src[start : self.pos])
        self._skip_ws()
        if self._peek() == "^" or self.src[self.pos : self.pos + 2] == "**":
            self.pos += 1 if self.src[self.pos] == "^" else 2
            return value ** self._int_exponent()
        return value

    def _atom(self) -> Expr:
        c = self._peek()
        if c == "(":
            self.pos += 1
            e = self._sum()
            if self._peek() != ")":
                raise ExprSyntaxError(self.pos, "')'")
            self.pos += 1
            return e
        if c.isdigit() or c == ".":
            return self._number()
        if c.isalpha() or c == "_":
            return self._identifier()
        raise ExprSyntaxError(self.pos, "a number, identifier or '('")

    def _number(self) -> Expr:
        start = self.pos
        seen_dot = seen_exp = False
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch.isdigit():
                self.pos += 1
            elif ch == "." and not seen_dot and not seen_exp:
                seen_dot = True
                self.pos += 1
            elif ch in "eE" and not seen_exp and self.pos > start:
                nxt = self.src[self.pos + 1 : self.pos + 2]
                if nxt.isdigit() or nxt in "+-":
                    seen_exp = True
                    self.pos += 2 if nxt in "+-" else 1
                else:
                    break
            else:
                break
        try:
            return Num(float(self.src[start : self.pos]))
        except ValueError:
            raise ExprSyntaxError(start, "a number") from None

    def _identifier(self) -> Expr:
        start = self.pos
        while self.pos < len(self.src) and (
            self.src[self.pos].isalnum() or self.src[self.pos] == "_"
        ):
            self.pos += 1
        name = self.src[start : self.pos]
        self._skip_ws()
        if self.pos < len(self.src) and self.src[self.pos] == "(":
            if name not in _FUNCTIONS:
                raise UnknownIdentifier(name)
            self.pos += 1
            arg = self._sum()
            if self._peek() != ")":
                raise ExprSyntaxError(self.pos, "')'")
            self.pos += 1
            return Call(name, arg)
        return Var(name)


def parse(source: str) -> Expr:
    """Parse ``source`` into an AST.

    Raises :class:`ExprSyntaxError` (with byte offset) on malformed input and
    :class:`UnknownIdentifier` when a call names a function outside the
    grammar (e.g. ``sgn``).
    """
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(e: Expr, x: float, params: Mapping[str, float] | None = None) -> float:
    """IEEE-double evaluation of ``e`` at ``x`` with all parameters bound."""
    params = params or {}
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name == "x":
            return float(x)
        try:
            return float(params[e.name])
        except KeyError:
            raise UnboundParameter(e.name) from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, x, params)
    if isinstance(e, BinOp):
        a = evaluate(e.left, x, params)
        b = evaluate(e.right, x, params)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise DivisionByZero(f"division by zero at x={x}")
        return a / b
    if isinstance(e, Pow):
        base = evaluate(e.base, x, params)
        if e.exponent < 0 and base == 0.0:
            raise DivisionByZero(f"zero base with negative exponent at x={x}")
        return base**e.exponent
    if isinstance(e, Call):
        return _FUNCTIONS[e.func](evaluate(e.arg, x, params))
    raise TypeError(f"not an Expr node: {e!r}")


# ---------------------------------------------------------------------------
# Symbolic differentiation (d/dx; parameters are constants)


def differentiate(e: Expr) -> Expr:
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0) if e.name == "x" else Num(0.0)
    if isinstance(e, Neg):
        return fold(Neg(differentiate(e.arg)))
    if isinstance(e, BinOp):
        da, db = differentiate(e.left), differentiate(e.right)
        if e.op in "+-":
            return fold(BinOp(e.op, da, db))
        if e.op == "*":
            return fold(
                BinOp("+", BinOp("*", da, e.right), BinOp("*", e.left, db))
            )
        # quotient rule
        num = BinOp("-", BinOp("*", da, e.right), BinOp("*", e.left, db))
        return fold(BinOp("/", num, Pow(e.right, 2)))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return Num(0.0)
        inner = differentiate(e.base)
        return fold(
            BinOp(
                "*",
                BinOp("*", Num(float(e.exponent)), Pow(e.base, e.exponent - 1)),
                inner,
            )
        )
    if isinstance(e, Call):
        du = differentiate(e.arg)
        u = e.arg
        if e.func == "exp":
            outer: Expr = Call("exp", u)
        elif e.func == "sin":
            outer = Call("cos", u)
        elif e.func == "cos":
            outer = Neg(Call("sin", u))
        elif e.func == "sqrt":
            outer = BinOp("/", Num(1.0), BinOp("*", Num(2.0), Call("sqrt", u)))
        else:  # abs: u/|u|, undefined at u=0
            outer = BinOp("/", u, Call("abs", u))
        return fold(BinOp("*", outer, du))
    raise TypeError(f"not an Expr node: {e!r}")


def fold(e: Expr) -> Expr:
    """Constant folding and trivial algebraic simplification."""
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, Neg):
        a = fold(e.arg)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return Neg(a)
    if isinstance(e, BinOp):
        a, b = fold(e.left), fold(e.right)
        if isinstance(a, Num) and isinstance(b, Num):
            if e.op == "+":
                return Num(a.value + b.value)
            if e.op == "-":
                return Num(a.value - b.value)
            if e.op == "*":
                return Num(a.value * b.value)
            if b.value != 0.0:
                return Num(a.value / b.value)
            return BinOp("/", a, b)
        if e.op == "+":
            if isinstance(a, Num) and a.value == 0.0:
                return b
            if isinstance(b, Num) and b.value == 0.0:
                return a
        elif e.op == "-":
            if isinstance(b, Num) and b.value == 0.0:
                return a
            if isinstance(a, Num) and a.value == 0.0:
                return fold(Neg(b))
        elif e.op == "*":
            if (isinstance(a, Num) and a.value == 0.0) or (
                isinstance(b, Num) and b.value == 0.0
            ):
                return Num(0.0)
            if isinstance(a, Num) and a.value == 1.0:
                return b
            if isinstance(b, Num) and b.value == 1.0:
                return a
        elif e.op == "/":
            if isinstance(a, Num) and a.value == 0.0:
                return Num(0.0)
            if isinstance(b, Num) and b.value == 1.0:
                return a
        return BinOp(e.op, a, b)
    if isinstance(e, Pow):
        base = fold(e.base)
        if e.exponent == 1:
            return base
        if e.exponent == 0:
            return Num(1.0)
        if isinstance(base, Num):
            return Num(base.value**e.exponent)
        return Pow(base, e.exponent)
    if isinstance(e, Call):
        arg = fold(e.arg)
        if isinstance(arg, Num):
            return Num(float(_FUNCTIONS[e.func](arg.value)))
        return Call(e.func, arg)
    raise TypeError(f"not an Expr node: {e!r}")


def depends_on_x(e: Expr) -> bool:
    if isinstance(e, Num):
        return False
    if isinstance(e, Var):
        return e.name == "x"
    if isinstance(e, Neg):
        return depends_on_x(e.arg)
    if isinstance(e, BinOp):
        return depends_on_x(e.left) or depends_on_x(e.right)
    if isinstance(e, Pow):
        return depends_on_x(e.base)
    if isinstance(e, Call):
        return depends_on_x(e.arg)
    raise TypeError(f"not an Expr node: {e!r}")


def as_affine(e: Expr, params: Mapping[str, float] | None = None):
    """Return ``(slope, intercept)`` when ``e`` is affine in x, else None.

    Affinity is decided symbolically: the folded derivative must not depend
    on x.  Values are evaluated with ``params`` bound.
    """
    d = fold(differentiate(e))
    if depends_on_x(d):
        return None
    slope = evaluate(d, 0.0, params)
    intercept = evaluate(e, 0.0, params)
    return slope, intercept


# ---------------------------------------------------------------------------
# Printer


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4}


def to_source(e: Expr) -> str:
    """Render ``e`` back into grammar source; parse(to_source(e)) == e-folded."""

    def render(node: Expr, parent_prec: int) -> str:
        if isinstance(node, Num):
            v = node.value
            if v < 0:
                s = repr(v)
                return f"({s})" if parent_prec > _PREC["+"] else s
            return repr(v)
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Neg):
            s = "-" + render(node.arg, _PREC["neg"])
            return f"({s})" if parent_prec > _PREC["neg"] else s
        if isinstance(node, BinOp):
            prec = _PREC[node.op]
            left = render(node.left, prec)
            # right operand of - and / needs the tighter context
            right = render(node.right, prec + (1 if node.op in "-/" else 0))
            s = f"{left} {node.op} {right}"
            return f"({s})" if parent_prec > prec else s
        if isinstance(node, Pow):
            base = render(node.base, _PREC["pow"] + 1)
            s = f"{base}^{node.exponent}"
            return f"({s})" if parent_prec > _PREC["pow"] else s
        if isinstance(node, Call):
            return f"{node.func}({render(node.arg, 0)})"
        raise TypeError(f"not an Expr node: {node!r}")

    return render(e, 0)


# ---------------------------------------------------------------------------
# Quadrature-backed antiderivative F(x) = int_0^x f(s) ds


class Antiderivative:
    """Adaptive-Simpson antiderivative with memoized anchor points.

    F(x) is computed as the integral from the nearest previously visited
    anchor, so repeated evaluations along a root search stay cheap.
    Absolute tolerance defaults to 1e-10.
    """

    def __init__(self, f, tol: float = 1e-10):
        self.f = f
        self.tol = tol
        self._anchors: dict[float, float] = {0.0: 0.0}

    def __call__(self, x: float) -> float:
        x = float(x)
        if x in self._anchors:
            return self._anchors[x]
        a = min(self._anchors, key=lambda t: abs(t - x))
        val = self._anchors[a] + _adaptive_simpson(self.f, a, x, self.tol)
        if len(self._anchors) < 4096:
            self._anchors[x] = val
        return val


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    return _adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 50)


def _adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    # relative floor keeps rounding noise of large integrals from forcing
    # refinement past the precision of the accumulated sums
    floor = 1e-14 * (abs(left) + abs(right))
    if depth <= 0 or abs(left + right - whole) <= 15.0 * max(tol, floor):
        return left + right + (left + right - whole) / 15.0
    return _adaptive_step(
        f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1
    ) + _adaptive_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
