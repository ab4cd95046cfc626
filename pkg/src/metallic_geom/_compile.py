"""Code generation for expression DAGs.

Scalar evaluation compiles a tuple of roots into a straight-line Python
function (one temporary per distinct node). Batch evaluation lowers the same
DAG into a register program run by :mod:`metallic_geom.kernels`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import expr as E

# opcodes shared with kernels.py
OP_CONST, OP_COORD, OP_NEG, OP_ADD, OP_SUB, OP_MUL, OP_DIV = 0, 1, 2, 3, 4, 5, 6
OP_IPOW, OP_FPOW = 7, 8
OP_SIN, OP_COS, OP_TAN, OP_SINH, OP_COSH, OP_TANH, OP_EXP, OP_LOG, OP_SQRT = range(9, 18)

_FUNC_OP = {name: OP_SIN + k for k, name in enumerate(E.FUNCTIONS)}


def _fpow(x, c):
    if x < 0.0:
        raise ValueError("negative base")
    return math.pow(x, c)


def _codegen(roots):
    order = E.topo_order(roots)
    names: dict[int, str] = {}
    consts: dict[str, float] = {}
    lines = ["def _f(pt):"]
    for k, node in enumerate(order):
        kind = node.kind
        if kind == E.CONST:
            nm = f"c{k}"
            consts[nm] = node.value
            names[id(node)] = nm
            continue
        a = [names[id(x)] for x in node.args]
        t = f"t{k}"
        if kind == E.COORD:
            rhs = f"pt[{node.value}]"
        elif kind == E.NEG:
            rhs = f"-{a[0]}"
        elif kind == E.ADD:
            rhs = f"{a[0]} + {a[1]}"
        elif kind == E.SUB:
            rhs = f"{a[0]} - {a[1]}"
        elif kind == E.MUL:
            rhs = f"{a[0]} * {a[1]}"
        elif kind == E.DIV:
            rhs = f"{a[0]} / {a[1]}"
        elif kind == E.POW:
            c = node.value
            if c.is_integer():
                rhs = f"{a[0]} ** {int(c)}"
            else:
                rhs = f"_fpow({a[0]}, {c!r})"
        else:
            rhs = f"_m.{node.value}({a[0]})"
        lines.append(f"    {t} = {rhs}")
        names[id(node)] = t
    lines.append("    return (" + "".join(names[id(r)] + ", " for r in roots) + ")")
    src = "\n".join(lines)
    ns = {"_m": math, "_fpow": _fpow, **consts}
    exec(compile(src, "<metallic_geom.codegen>", "exec"), ns)
    return ns["_f"]


@lru_cache(maxsize=8192)
def scalar_function(roots: tuple):
    """Compiled ``pt -> tuple`` of root values; raises on domain faults."""
    f = _codegen(roots)

    def call(pt):
        return f([float(v) for v in pt])

    return call


def evaluate_many(roots: tuple, pt) -> np.ndarray:
    """Values of ``roots`` at ``pt``; DomainError names the failing subtree."""
    try:
        return np.array(scalar_function(roots)(pt), dtype=float)
    except (ValueError, ZeroDivisionError, OverflowError, IndexError):
        for r in roots:
            E.evaluate_checked(r, pt)
        raise


class Program:
    """Register program for batch evaluation of several roots."""

    __slots__ = ("ops", "a", "b", "consts", "outputs", "nregs", "roots")

    def __init__(self, roots):
        order = E.topo_order(roots)
        reg = {}
        ops, a, b, consts = [], [], [], []
        for k, node in enumerate(order):
            reg[id(node)] = k
            kind = node.kind
            x = reg[id(node.args[0])] if node.args else 0
            y = reg[id(node.args[1])] if len(node.args) > 1 else 0
            c = 0.0
            if kind == E.CONST:
                op, c = OP_CONST, node.value
            elif kind == E.COORD:
                op, x = OP_COORD, node.value
            elif kind == E.POW:
                c = node.value
                op = OP_IPOW if c.is_integer() else OP_FPOW
            elif kind == E.FUNC:
                op = _FUNC_OP[node.value]
            else:
                op = {E.NEG: OP_NEG, E.ADD: OP_ADD, E.SUB: OP_SUB, E.MUL: OP_MUL, E.DIV: OP_DIV}[kind]
            ops.append(op)
            a.append(x)
            b.append(y)
            consts.append(c)
        self.ops = np.array(ops, dtype=np.int64)
        self.a = np.array(a, dtype=np.int64)
        self.b = np.array(b, dtype=np.int64)
        self.consts = np.array(consts, dtype=np.float64)
        self.outputs = np.array([reg[id(r)] for r in roots], dtype=np.int64)
        self.nregs = len(order)
        self.roots = tuple(roots)


@lru_cache(maxsize=1024)
def program(roots: tuple) -> Program:
    return Program(roots)


def evaluate_batch(roots: tuple, points) -> np.ndarray:
    """Values of ``roots`` at each row of ``points``: shape (N, len(roots))."""
    from . import kernels

    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    prog = program(tuple(roots))
    out = kernels.run_program(prog, pts)
    bad = ~np.isfinite(out)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        E.evaluate_checked(roots[col], pts[row])
        raise E.DomainError("non-finite value", roots[col])
    return out
