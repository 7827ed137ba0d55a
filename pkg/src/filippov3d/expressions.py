"""Closed-form expressions over (x, y, z) with exact symbolic differentiation.

The grammar is fixed and small: identifiers ``x, y, z``; decimal literals;
operators ``+ - * / ^`` (integer exponents); functions ``sin, cos, exp,
sqrt``; parentheses; vectors written ``(e1,e2,e3)``.  Differentiation is
symbolic rewriting on the AST, exact up to floating-point rounding at
evaluation time; finite differences never appear outside test oracles.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArityError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)

VARIABLES = ("x", "y", "z")
FUNCTIONS = ("sin", "cos", "exp", "sqrt")


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 0 -> x, 1 -> y, 2 -> z


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Div:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(node, value=None):
    if not isinstance(node, Const):
        return False
    return value is None or node.value == value


# Smart constructors fold constants and kill identities so that derivative
# trees stay small; no further algebraic simplification is attempted.

def add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def sub(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a, b):
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def power(base, exponent):
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if _is_const(base):
        return Const(base.value ** exponent)
    return Pow(base, int(exponent))


def call(func, arg):
    if _is_const(arg):
        return Const(getattr(math, func)(arg.value))
    return Call(func, arg)


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

def diff(node, var: int):
    """Exact partial derivative of ``node`` with respect to variable ``var``."""
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == var else ZERO
    if isinstance(node, Neg):
        return neg(diff(node.arg, var))
    if isinstance(node, Add):
        return add(diff(node.left, var), diff(node.right, var))
    if isinstance(node, Sub):
        return sub(diff(node.left, var), diff(node.right, var))
    if isinstance(node, Mul):
        return add(mul(diff(node.left, var), node.right),
                   mul(node.left, diff(node.right, var)))
    if isinstance(node, Div):
        u, v = node.left, node.right
        return div(sub(mul(diff(u, var), v), mul(u, diff(v, var))),
                   power(v, 2))
    if isinstance(node, Pow):
        return mul(mul(Const(float(node.exponent)), power(node.base, node.exponent - 1)),
                   diff(node.base, var))
    if isinstance(node, Call):
        inner = diff(node.arg, var)
        if node.func == "sin":
            outer = call("cos", node.arg)
        elif node.func == "cos":
            outer = neg(call("sin", node.arg))
        elif node.func == "exp":
            outer = call("exp", node.arg)
        elif node.func == "sqrt":
            # d sqrt(u) = u' / (2 sqrt(u)); blows up at u = 0, which the
            # evaluation guard reports with the offending point.
            return div(inner, mul(Const(2.0), call("sqrt", node.arg)))
        else:  # pragma: no cover - parser only admits known functions
            raise ValueError(f"no derivative rule for {node.func}")
        return mul(outer, inner)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Evaluation (vectorized over numpy arrays)
# ---------------------------------------------------------------------------

_NUMPY_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}


def evaluate(node, x, y, z):
    """Evaluate without finiteness checks; callers use FieldExpression."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return (x, y, z)[node.index]
    if isinstance(node, Neg):
        return -evaluate(node.arg, x, y, z)
    if isinstance(node, Add):
        return evaluate(node.left, x, y, z) + evaluate(node.right, x, y, z)
    if isinstance(node, Sub):
        return evaluate(node.left, x, y, z) - evaluate(node.right, x, y, z)
    if isinstance(node, Mul):
        return evaluate(node.left, x, y, z) * evaluate(node.right, x, y, z)
    if isinstance(node, Div):
        return evaluate(node.left, x, y, z) / evaluate(node.right, x, y, z)
    if isinstance(node, Pow):
        base = evaluate(node.base, x, y, z)
        if node.exponent < 0:
            return np.asarray(base, dtype=float) ** node.exponent
        return base ** node.exponent
    if isinstance(node, Call):
        return _NUMPY_FUNCS[node.func](evaluate(node.arg, x, y, z))
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Printing (canonical, round-trips through the parser)
# ---------------------------------------------------------------------------

_PREC = {"add": 1, "mul": 2, "unary": 3, "pow": 4, "atom": 5}


def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def _print(node):
    """Return (text, precedence)."""
    if isinstance(node, Const):
        if node.value < 0:
            return f"-{_fmt_const(-node.value)}", _PREC["unary"]
        return _fmt_const(node.value), _PREC["atom"]
    if isinstance(node, Var):
        return VARIABLES[node.index], _PREC["atom"]
    if isinstance(node, Neg):
        t, p = _print(node.arg)
        if p < _PREC["unary"]:
            t = f"({t})"
        return f"-{t}", _PREC["unary"]
    if isinstance(node, (Add, Sub)):
        lt, lp = _print(node.left)
        rt, rp = _print(node.right)
        if lp < _PREC["add"]:
            lt = f"({lt})"
        # right side must bind strictly tighter to preserve left association
        if rp <= _PREC["add"]:
            rt = f"({rt})"
        op = "+" if isinstance(node, Add) else "-"
        return f"{lt}{op}{rt}", _PREC["add"]
    if isinstance(node, (Mul, Div)):
        lt, lp = _print(node.left)
        rt, rp = _print(node.right)
        if lp < _PREC["mul"]:
            lt = f"({lt})"
        if rp <= _PREC["mul"]:
            rt = f"({rt})"
        op = "*" if isinstance(node, Mul) else "/"
        return f"{lt}{op}{rt}", _PREC["mul"]
    if isinstance(node, Pow):
        bt, bp = _print(node.base)
        if bp < _PREC["atom"]:
            bt = f"({bt})"
        return f"{bt}^{node.exponent}", _PREC["pow"]
    if isinstance(node, Call):
        at, _ = _print(node.arg)
        return f"{node.func}({at})", _PREC["atom"]
    raise TypeError(f"not an expression node: {node!r}")


def to_string(node) -> str:
    return _print(node)[0]


# ---------------------------------------------------------------------------
# Parser (recursive descent with character positions in errors)
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []  # (kind, value, pos)
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                break
            if m.group(1) is not None:
                self.tokens.append(("num", m.group(1), m.start(1)))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), m.start(2)))
            elif m.group(3).strip():
                self.tokens.append(("op", m.group(3), m.start(3)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _Tokenizer(text)

    def fail(self, message, pos=None):
        if pos is None:
            pos = self.toks.peek()[2]
        raise ExpressionSyntaxError(message, self.text, pos)

    def expect_op(self, op):
        kind, value, pos = self.toks.next()
        if kind != "op" or value != op:
            self.fail(f"expected '{op}'", pos)

    def parse_scalar(self):
        node = self.expr()
        kind, value, pos = self.toks.peek()
        if kind != "end":
            self.fail(f"unexpected '{value}'", pos)
        return node

    def parse_vector(self):
        kind, value, pos = self.toks.peek()
        if not (kind == "op" and value == "("):
            self.fail("vector expression must start with '('", pos)
        self.toks.next()
        e1 = self.expr()
        self.expect_op(",")
        e2 = self.expr()
        self.expect_op(",")
        e3 = self.expr()
        self.expect_op(")")
        kind, value, pos = self.toks.peek()
        if kind != "end":
            self.fail(f"unexpected '{value}'", pos)
        return (e1, e2, e3)

    # expr := term (('+'|'-') term)*
    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.toks.peek()
            if kind == "op" and value in "+-":
                self.toks.next()
                rhs = self.term()
                node = add(node, rhs) if value == "+" else sub(node, rhs)
            else:
                return node

    # term := unary (('*'|'/') unary)*
    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.toks.peek()
            if kind == "op" and value in "*/":
                self.toks.next()
                rhs = self.unary()
                node = mul(node, rhs) if value == "*" else div(node, rhs)
            else:
                return node

    # unary := '-' unary | postfix
    def unary(self):
        kind, value, _ = self.toks.peek()
        if kind == "op" and value == "-":
            self.toks.next()
            return neg(self.unary())
        return self.postfix()

    # postfix := atom ('^' int)*
    def postfix(self):
        node = self.atom()
        while True:
            kind, value, _ = self.toks.peek()
            if kind == "op" and value == "^":
                self.toks.next()
                node = power(node, self.int_exponent())
            else:
                return node

    def int_exponent(self):
        sign = 1
        kind, value, pos = self.toks.peek()
        if kind == "op" and value == "-":
            self.toks.next()
            sign = -1
            kind, value, pos = self.toks.peek()
        if kind != "num":
            self.fail("exponent must be an integer literal", pos)
        self.toks.next()
        if "." in value:
            self.fail("exponent must be an integer literal", pos)
        return sign * int(value)

    def atom(self):
        kind, value, pos = self.toks.next()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if value in VARIABLES:
                return Var(VARIABLES.index(value))
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return call(value, arg)
            raise UnknownIdentifierError(
                f"unknown identifier '{value}'", self.text, pos)
        if kind == "op" and value == "(":
            node = self.expr()
            kind2, value2, pos2 = self.toks.peek()
            if kind2 == "op" and value2 == ",":
                self.fail("vector syntax '(e1,e2,e3)' not allowed in a scalar "
                          "expression", pos2)
            self.expect_op(")")
            return node
        self.fail(f"unexpected '{value}'" if value else "unexpected end of input", pos)


# ---------------------------------------------------------------------------
# FieldExpression: the public wrapper
# ---------------------------------------------------------------------------

class FieldExpression:
    """An evaluable, exactly differentiable scalar or 3-vector field.

    Immutable after construction; evaluation is pure and thread-safe.
    Evaluation raising on any non-finite value is part of the contract.
    """

    def __init__(self, nodes, arity: str, text: str | None = None):
        if arity not in ("scalar", "vector"):
            raise ArityError(f"arity must be 'scalar' or 'vector', got {arity!r}")
        self.arity = arity
        if arity == "scalar":
            self.nodes = (nodes,) if not isinstance(nodes, tuple) else nodes
            if len(self.nodes) != 1:
                raise ArityError("scalar expression needs exactly one component")
        else:
            self.nodes = tuple(nodes)
            if len(self.nodes) != 3:
                raise ArityError("vector expression needs exactly three components")
        self._text = text

    # -- construction ------------------------------------------------------

    @staticmethod
    def parse(text: str, arity: str) -> "FieldExpression":
        parser = _Parser(text)
        if arity == "scalar":
            return FieldExpression(parser.parse_scalar(), "scalar", text)
        if arity == "vector":
            return FieldExpression(parser.parse_vector(), "vector", text)
        raise ArityError(f"arity must be 'scalar' or 'vector', got {arity!r}")

    @staticmethod
    def constant(value: float) -> "FieldExpression":
        return FieldExpression(Const(float(value)), "scalar")

    # -- structure ---------------------------------------------------------

    @property
    def node(self):
        if self.arity != "scalar":
            raise ArityError("vector expression has no single node")
        return self.nodes[0]

    def component(self, i: int) -> "FieldExpression":
        if self.arity != "vector":
            raise ArityError("component() requires a vector expression")
        return FieldExpression(self.nodes[i], "scalar")

    def __str__(self):
        parts = [to_string(n) for n in self.nodes]
        if self.arity == "scalar":
            return parts[0]
        return "(" + ",".join(parts) + ")"

    def __repr__(self):
        return f"FieldExpression({str(self)!r}, {self.arity!r})"

    def __eq__(self, other):
        return (isinstance(other, FieldExpression)
                and self.arity == other.arity and self.nodes == other.nodes)

    def __hash__(self):
        return hash((self.arity, self.nodes))

    # -- calculus ----------------------------------------------------------

    def derivative(self, var: int) -> "FieldExpression":
        nodes = tuple(diff(n, var) for n in self.nodes)
        if self.arity == "scalar":
            return FieldExpression(nodes[0], "scalar")
        return FieldExpression(nodes, "vector")

    def gradient(self) -> "FieldExpression":
        """Gradient of a scalar field as a vector expression."""
        if self.arity != "scalar":
            raise ArityError("gradient() requires a scalar expression")
        return FieldExpression(tuple(diff(self.node, v) for v in range(3)), "vector")

    def hessian(self):
        """3x3 nested tuple of second-partial scalar FieldExpressions."""
        g = [diff(self.node, v) for v in range(3)]
        return tuple(tuple(FieldExpression(diff(g[i], j), "scalar")
                           for j in range(3)) for i in range(3))

    # -- evaluation --------------------------------------------------------

    def __call__(self, points):
        """Evaluate at one point (3,) or a batch (N, 3).

        Scalar fields return a float / (N,) array; vector fields a (3,) /
        (N, 3) array.  Any NaN/Inf raises EvaluationDomainError with the
        first offending point.
        """
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ArityError(f"points must have shape (3,) or (N, 3), got {pts.shape}")
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        n = pts.shape[0]
        with np.errstate(all="ignore"):
            cols = [np.broadcast_to(np.asarray(evaluate(node, x, y, z), dtype=float), (n,))
                    for node in self.nodes]
        out = cols[0] if self.arity == "scalar" else np.stack(cols, axis=-1)
        bad = ~np.isfinite(out)
        if bad.any():
            idx = int(np.argwhere(bad.reshape(n, -1).any(axis=1))[0][0])
            raise EvaluationDomainError(
                f"non-finite value while evaluating {self}", pts[idx])
        if single:
            return float(out[0]) if self.arity == "scalar" else out[0].copy()
        return out


def parse_field(text: str, arity: str) -> FieldExpression:
    """Parse ``text`` per the fixed grammar; round-trips through str()."""
    return FieldExpression.parse(text, arity)
