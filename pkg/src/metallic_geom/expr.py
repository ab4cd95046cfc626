"""Scalar expression trees over chart coordinates.

Nodes are hash-consed: structurally equal trees are the same Python object,
so equality is identity and common subexpressions are shared for free.
Operators on :class:`Expr` fold constants and drop additive/multiplicative
identities as they build; :func:`parse` keeps the raw tree so that
:func:`simplify` has something to do.
"""

from __future__ import annotations

import math
import threading
import weakref
from typing import Iterable, Sequence

__all__ = [
    "Expr",
    "ExprError",
    "ParseError",
    "UnknownIdentifierError",
    "CoordinateRangeError",
    "DomainError",
    "const",
    "coord",
    "as_expr",
    "func",
    "parse",
    "render",
    "diff",
    "simplify",
    "evaluate",
    "esum",
    "FUNCTIONS",
]

CONST, COORD, NEG, ADD, SUB, MUL, DIV, POW, FUNC = range(9)

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt")

_PREC = {ADD: 1, SUB: 1, MUL: 2, DIV: 2, NEG: 3, POW: 4}


class ExprError(ValueError):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text
        self.reason = message


class UnknownIdentifierError(ParseError):
    pass


class CoordinateRangeError(ParseError):
    pass


class DomainError(ExprError):
    def __init__(self, message: str, subtree: "Expr"):
        super().__init__(f"{message} in '{render(subtree)}'")
        self.subtree = subtree


_table: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Expr:
    """Immutable expression node. Build with :func:`const`, :func:`coord`,
    :func:`func`, arithmetic operators, or :func:`parse`."""

    __slots__ = ("kind", "args", "value", "name", "_dcache", "__weakref__")

    kind: int
    args: tuple
    value: float | int | str | None
    name: str | None

    def __new__(cls, kind: int, args: tuple = (), value=None, name=None):
        key = (kind, args, value, name)
        with _lock:
            node = _table.get(key)
            if node is None:
                node = object.__new__(cls)
                object.__setattr__(node, "kind", kind)
                object.__setattr__(node, "args", args)
                object.__setattr__(node, "value", value)
                object.__setattr__(node, "name", name)
                object.__setattr__(node, "_dcache", {})
                _table[key] = node
        return node

    def __setattr__(self, key, value):
        raise AttributeError("Expr is immutable")

    def __reduce__(self):
        return (parse_raw_render, (render(self),))

    # arithmetic builds folded trees
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        if isinstance(exponent, Expr):
            if exponent.kind != CONST:
                raise ExprError("exponent must be a constant")
            exponent = exponent.value
        return power(self, float(exponent))

    def __repr__(self):
        return f"Expr({render(self)!r})"

    def __str__(self):
        return render(self)

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    def is_value(self, v: float) -> bool:
        return self.kind == CONST and self.value == v

    def __call__(self, pt: Sequence[float]) -> float:
        return evaluate(self, pt)


def const(value: float, name: str | None = None) -> Expr:
    value = float(value)
    if value == 0.0:
        value = 0.0  # drop the sign of -0.0
    if not math.isfinite(value):
        raise ExprError(f"non-finite constant {value}")
    return Expr(CONST, (), value, name)


ZERO = const(0.0)
ONE = const(1.0)


def coord(index: int) -> Expr:
    """Coordinate x_{index+1} (indices are 0-based internally)."""
    if index < 0:
        raise ExprError("coordinate index must be non-negative")
    return Expr(COORD, (), int(index))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float)) or hasattr(x, "__float__"):
        return const(float(x))
    if isinstance(x, str):
        raise ExprError("use parse() for strings")
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


# --- raw and folding constructors -------------------------------------------

def _raw(kind, *args, value=None):
    return Expr(kind, tuple(args), value)


def neg(a: Expr) -> Expr:
    if a.kind == CONST:
        return const(-a.value)
    if a.kind == NEG:
        return a.args[0]
    return _raw(NEG, a)


def add(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value + b.value)
    if a.is_value(0.0):
        return b
    if b.is_value(0.0):
        return a
    if b.kind == NEG:
        return sub(a, b.args[0])
    return _raw(ADD, a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value - b.value)
    if b.is_value(0.0):
        return a
    if a.is_value(0.0):
        return neg(b)
    if a is b:
        return ZERO
    if b.kind == NEG:
        return add(a, b.args[0])
    return _raw(SUB, a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value * b.value)
    if a.is_value(0.0) or b.is_value(0.0):
        return ZERO
    if a.is_value(1.0):
        return b
    if b.is_value(1.0):
        return a
    if a.is_value(-1.0):
        return neg(b)
    if b.is_value(-1.0):
        return neg(a)
    if b.kind == CONST and a.kind != CONST:
        a, b = b, a
    return _raw(MUL, a, b)


def div(a: Expr, b: Expr) -> Expr:
    if b.kind == CONST:
        if b.value == 0.0:
            return _raw(DIV, a, b)  # left for evaluation to report
        if a.kind == CONST:
            return const(a.value / b.value)
        if b.value == 1.0:
            return a
        return mul(const(1.0 / b.value), a)
    if a.is_value(0.0):
        return ZERO
    return _raw(DIV, a, b)


def power(base: Expr, exponent: float) -> Expr:
    exponent = float(exponent)
    if exponent == 1.0:
        return base
    if exponent == 0.0:
        return ONE
    if base.kind == CONST:
        try:
            return const(_pow(base.value, exponent))
        except (ValueError, OverflowError, ZeroDivisionError):
            pass
    return Expr(POW, (base,), exponent)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    arg = as_expr(arg)
    if arg.kind == CONST:
        try:
            return const(_MATH[name](arg.value))
        except (ValueError, OverflowError):
            pass
    return Expr(FUNC, (arg,), name)


def esum(terms: Iterable) -> Expr:
    out = ZERO
    for t in terms:
        out = add(out, as_expr(t))
    return out


def sin(a):
    return func("sin", a)


def cos(a):
    return func("cos", a)


def sqrt(a):
    return func("sqrt", a)


def _pow(x: float, c: float) -> float:
    if c.is_integer():
        return x ** int(c)
    if x < 0:
        raise ValueError("negative base with non-integer exponent")
    return math.pow(x, c)


_MATH = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}


# --- rendering ---------------------------------------------------------------

def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def render(e: Expr, names: Sequence[str] | None = None) -> str:
    """Infix text that parses back to an expression with identical values."""
    memo: dict[int, tuple[str, int]] = {}

    def go(node: Expr) -> tuple[str, int]:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        k = node.kind
        if k == CONST:
            if node.name:
                out = (node.name, 5)
            else:
                s = _fmt_number(node.value)
                out = (s, 3 if s.startswith("-") else 5)
        elif k == COORD:
            i = node.value
            out = (names[i] if names else f"x{i + 1}", 5)
        elif k == NEG:
            s, p = go(node.args[0])
            out = ("-" + (s if p >= 3 else f"({s})"), 3)
        elif k == FUNC:
            out = (f"{node.value}({go(node.args[0])[0]})", 5)
        elif k == POW:
            s, p = go(node.args[0])
            base = s if p >= 5 else f"({s})"
            ex = _fmt_number(node.value)
            if ex.startswith("-"):
                ex = f"({ex})"
            out = (f"{base}^{ex}", 4)
        else:
            prec = _PREC[k]
            op = {ADD: "+", SUB: "-", MUL: "*", DIV: "/"}[k]
            ls, lp = go(node.args[0])
            rs, rp = go(node.args[1])
            if lp < prec:
                ls = f"({ls})"
            # right operand of - and / needs strict precedence
            if rp < prec or (rp == prec and k in (SUB, DIV)):
                rs = f"({rs})"
            out = (f"{ls} {op} {rs}", prec)
        memo[id(node)] = out
        return out

    return go(e)[0]


# --- parsing -----------------------------------------------------------------

_NAMED = {"pi": math.pi, "e": math.e}


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            lit = text[i:j]
            try:
                val = float(lit)
            except ValueError:
                raise ParseError(f"malformed number {lit!r}", i, text) from None
            toks.append(("num", val, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("id", text[i:j], i))
            i = j
        elif c in "+-*/^()":
            toks.append((c, c, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {c!r}", i, text)
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, text: str, n: int, names: Sequence[str] | None):
        self.text = text
        self.n = n
        self.names = {nm: k for k, nm in enumerate(names)} if names else {}
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expr(self):
        node = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "end":
            op = self.take()[0]
            rhs = self.term()
            node = _raw(ADD if op == "+" else SUB, node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.factor()
            node = _raw(MUL if op == "*" else DIV, node, rhs)
        return node

    def factor(self):
        base = self.unary()
        if self.peek()[0] == "^":
            tok = self.take()
            ex = self.factor()  # right-associative
            folded = simplify(ex)
            if folded.kind != CONST:
                raise ParseError("exponent must be a constant", tok[2] + 1, self.text)
            return Expr(POW, (base,), float(folded.value))
        return base

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return _raw(NEG, self.unary())
        return self.atom()

    def atom(self):
        tok = self.peek()
        kind = tok[0]
        if kind == "num":
            self.take()
            return const(tok[1])
        if kind == "(":
            self.take()
            node = self.expr()
            if self.peek()[0] != ")":
                self.fail("expected ')'")
            self.take()
            return node
        if kind == "id":
            self.take()
            name = tok[1]
            if name in FUNCTIONS:
                if self.peek()[0] != "(":
                    self.fail(f"expected '(' after {name}")
                self.take()
                arg = self.expr()
                if self.peek()[0] != ")":
                    self.fail("expected ')'")
                self.take()
                return Expr(FUNC, (arg,), name)
            if name in self.names:
                return coord(self.names[name])
            if name[0] == "x" and name[1:].isdigit():
                idx = int(name[1:])
                if idx < 1 or idx > self.n:
                    raise CoordinateRangeError(
                        f"coordinate {name} out of range for dimension {self.n}", tok[2], self.text
                    )
                return coord(idx - 1)
            if name in _NAMED:
                return const(_NAMED[name], name)
            raise UnknownIdentifierError(f"unknown identifier {name!r}", tok[2], self.text)
        if kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {tok[1]!r}")


def parse(text: str, n: int, names: Sequence[str] | None = None) -> Expr:
    """Parse ``text`` into an unsimplified tree over coordinates ``x1..xn``.

    ``names`` optionally gives alternative coordinate identifiers.
    """
    p = _Parser(text, n, names)
    node = p.expr()
    if p.peek()[0] != "end":
        p.fail(f"unexpected token {p.peek()[1]!r}")
    return node


def parse_raw_render(text: str) -> Expr:
    # used by pickling; dimension bound is irrelevant for rendered trees
    return parse(text, 10**6)


# --- evaluation --------------------------------------------------------------

def _node_value(node: Expr, vals: list[float], pt) -> float:
    k = node.kind
    if k == CONST:
        return node.value
    if k == COORD:
        if node.value >= len(pt):
            raise DomainError("coordinate outside point dimension", node)
        return float(pt[node.value])
    if k == NEG:
        return -vals[0]
    if k == ADD:
        return vals[0] + vals[1]
    if k == SUB:
        return vals[0] - vals[1]
    if k == MUL:
        return vals[0] * vals[1]
    if k == DIV:
        if vals[1] == 0.0:
            raise DomainError("division by zero", node)
        return vals[0] / vals[1]
    if k == POW:
        x, c = vals[0], node.value
        if x == 0.0 and c < 0:
            raise DomainError("zero to a negative power", node)
        if x < 0 and not c.is_integer():
            raise DomainError("negative base with non-integer exponent", node)
        try:
            return _pow(x, c)
        except OverflowError:
            raise DomainError("overflow", node) from None
    name = node.value
    x = vals[0]
    if name == "log" and x <= 0:
        raise DomainError("log of non-positive value", node)
    if name == "sqrt" and x < 0:
        raise DomainError("sqrt of negative value", node)
    try:
        return _MATH[name](x)
    except (ValueError, OverflowError):
        raise DomainError(f"{name} outside its domain", node) from None


def evaluate_checked(e: Expr, pt: Sequence[float]) -> float:
    """Tree-walking evaluation that names the offending subtree on failure."""
    memo: dict[int, float] = {}

    def go(node):
        v = memo.get(id(node))
        if v is None:
            v = _node_value(node, [go(a) for a in node.args], pt)
            memo[id(node)] = v
        return v

    return go(e)


def evaluate(e: Expr, pt: Sequence[float]) -> float:
    from ._compile import scalar_function

    try:
        return scalar_function((e,))(pt)[0]
    except (ValueError, ZeroDivisionError, OverflowError, IndexError):
        return evaluate_checked(e, pt)


# --- differentiation ---------------------------------------------------------

def diff(e: Expr, i: int) -> Expr:
    """Exact partial derivative with respect to coordinate ``i`` (0-based)."""
    cached = e._dcache.get(i)
    if cached is not None:
        return cached
    k = e.kind
    if k == CONST:
        d = ZERO
    elif k == COORD:
        d = ONE if e.value == i else ZERO
    elif k == NEG:
        d = neg(diff(e.args[0], i))
    elif k == ADD:
        d = add(diff(e.args[0], i), diff(e.args[1], i))
    elif k == SUB:
        d = sub(diff(e.args[0], i), diff(e.args[1], i))
    elif k == MUL:
        a, b = e.args
        d = add(mul(diff(a, i), b), mul(a, diff(b, i)))
    elif k == DIV:
        a, b = e.args
        da, db = diff(a, i), diff(b, i)
        if db.is_value(0.0):
            d = div(da, b)
        else:
            d = div(sub(mul(da, b), mul(a, db)), power(b, 2.0))
    elif k == POW:
        base = e.args[0]
        c = e.value
        d = mul(mul(const(c), power(base, c - 1.0)), diff(base, i))
    else:
        u = e.args[0]
        du = diff(u, i)
        if du.is_value(0.0):
            d = ZERO
        else:
            name = e.value
            if name == "sin":
                outer = func("cos", u)
            elif name == "cos":
                outer = neg(func("sin", u))
            elif name == "tan":
                outer = div(ONE, power(func("cos", u), 2.0))
            elif name == "sinh":
                outer = func("cosh", u)
            elif name == "cosh":
                outer = func("sinh", u)
            elif name == "tanh":
                outer = sub(ONE, power(func("tanh", u), 2.0))
            elif name == "exp":
                outer = e
            elif name == "log":
                outer = div(ONE, u)
            else:  # sqrt
                outer = div(const(0.5), e)
            d = mul(outer, du)
    e._dcache[i] = d
    return d


# --- simplification ----------------------------------------------------------

def simplify(e: Expr) -> Expr:
    """Constant folding plus identity/annihilator removal; no canonicalization."""
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        k = node.kind
        if k in (CONST, COORD):
            out = node
        elif k == NEG:
            out = neg(go(node.args[0]))
        elif k == ADD:
            out = add(go(node.args[0]), go(node.args[1]))
        elif k == SUB:
            out = sub(go(node.args[0]), go(node.args[1]))
        elif k == MUL:
            out = mul(go(node.args[0]), go(node.args[1]))
        elif k == DIV:
            out = div(go(node.args[0]), go(node.args[1]))
        elif k == POW:
            out = power(go(node.args[0]), node.value)
        else:
            out = func(node.value, go(node.args[0]))
        memo[id(node)] = out
        return out

    return go(e)


def size(e: Expr) -> int:
    """Number of distinct nodes in the DAG."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.extend(node.args)
    return len(seen)


def topo_order(roots: Sequence[Expr]) -> list[Expr]:
    """Distinct nodes reachable from ``roots``, children before parents."""
    order: list[Expr] = []
    seen: set[int] = set()
    for root in roots:
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in reversed(node.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return order
