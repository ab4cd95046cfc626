"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``METALLIC_GEOM_JIT=0`` to force the numpy path (numba is also skipped
automatically when it is not importable).
"""

from __future__ import annotations

import os

import numpy as np

from ._compile import (
    OP_ADD, OP_CONST, OP_COORD, OP_COS, OP_COSH, OP_DIV, OP_EXP, OP_FPOW, OP_IPOW,
    OP_LOG, OP_MUL, OP_NEG, OP_SIN, OP_SINH, OP_SQRT, OP_SUB, OP_TAN, OP_TANH,
)

_WANT_JIT = os.environ.get("METALLIC_GEOM_JIT", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _WANT_JIT:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


# --- register programs -------------------------------------------------------

def _program_numpy(ops, a, b, consts, outputs, nregs, pts):
    npts = pts.shape[0]
    regs = [None] * nregs
    with np.errstate(all="ignore"):
        for k in range(nregs):
            op = ops[k]
            if op == OP_CONST:
                r = np.full(npts, consts[k])
            elif op == OP_COORD:
                r = pts[:, a[k]]
            elif op == OP_NEG:
                r = -regs[a[k]]
            elif op == OP_ADD:
                r = regs[a[k]] + regs[b[k]]
            elif op == OP_SUB:
                r = regs[a[k]] - regs[b[k]]
            elif op == OP_MUL:
                r = regs[a[k]] * regs[b[k]]
            elif op == OP_DIV:
                r = regs[a[k]] / regs[b[k]]
            elif op == OP_IPOW or op == OP_FPOW:
                r = np.power(regs[a[k]], consts[k])
            elif op == OP_SIN:
                r = np.sin(regs[a[k]])
            elif op == OP_COS:
                r = np.cos(regs[a[k]])
            elif op == OP_TAN:
                r = np.tan(regs[a[k]])
            elif op == OP_SINH:
                r = np.sinh(regs[a[k]])
            elif op == OP_COSH:
                r = np.cosh(regs[a[k]])
            elif op == OP_TANH:
                r = np.tanh(regs[a[k]])
            elif op == OP_EXP:
                r = np.exp(regs[a[k]])
            elif op == OP_LOG:
                r = np.log(regs[a[k]])
            else:
                r = np.sqrt(regs[a[k]])
            regs[k] = r
    out = np.empty((npts, len(outputs)))
    for j, o in enumerate(outputs):
        out[:, j] = regs[o]
    return out


@njit(cache=True)
def _program_jit(ops, a, b, consts, outputs, nregs, pts):  # pragma: no cover - compiled
    npts = pts.shape[0]
    out = np.empty((npts, outputs.shape[0]))
    regs = np.empty(nregs)
    for p in range(npts):
        for k in range(nregs):
            op = ops[k]
            if op == 0:
                regs[k] = consts[k]
            elif op == 1:
                regs[k] = pts[p, a[k]]
            elif op == 2:
                regs[k] = -regs[a[k]]
            elif op == 3:
                regs[k] = regs[a[k]] + regs[b[k]]
            elif op == 4:
                regs[k] = regs[a[k]] - regs[b[k]]
            elif op == 5:
                regs[k] = regs[a[k]] * regs[b[k]]
            elif op == 6:
                d = regs[b[k]]
                regs[k] = regs[a[k]] / d if d != 0.0 else np.nan
            elif op == 7:
                x = regs[a[k]]
                c = consts[k]
                if x == 0.0 and c < 0:
                    regs[k] = np.nan
                else:
                    regs[k] = x ** c
            elif op == 8:
                x = regs[a[k]]
                regs[k] = x ** consts[k] if x >= 0.0 else np.nan
            elif op == 9:
                regs[k] = np.sin(regs[a[k]])
            elif op == 10:
                regs[k] = np.cos(regs[a[k]])
            elif op == 11:
                regs[k] = np.tan(regs[a[k]])
            elif op == 12:
                regs[k] = np.sinh(regs[a[k]])
            elif op == 13:
                regs[k] = np.cosh(regs[a[k]])
            elif op == 14:
                regs[k] = np.tanh(regs[a[k]])
            elif op == 15:
                regs[k] = np.exp(regs[a[k]])
            elif op == 16:
                x = regs[a[k]]
                regs[k] = np.log(x) if x > 0.0 else np.nan
            else:
                x = regs[a[k]]
                regs[k] = np.sqrt(x) if x >= 0.0 else np.nan
        for j in range(outputs.shape[0]):
            out[p, j] = regs[outputs[j]]
    return out


def run_program(prog, pts, use_jit: bool | None = None) -> np.ndarray:
    jit = HAVE_NUMBA if use_jit is None else (use_jit and HAVE_NUMBA)
    fn = _program_jit if jit else _program_numpy
    return fn(prog.ops, prog.a, prog.b, prog.consts, prog.outputs, prog.nregs, pts)


# --- sectional curvature over many planes ------------------------------------

def _sectional_numpy(rm, g, u, v):
    num = np.einsum("abcd,na,nb,nc,nd->n", rm, u, v, v, u, optimize=True)
    guu = np.einsum("ab,na,nb->n", g, u, u)
    gvv = np.einsum("ab,na,nb->n", g, v, v)
    guv = np.einsum("ab,na,nb->n", g, u, v)
    return num / (guu * gvv - guv * guv)


@njit(cache=True)
def _sectional_jit(rm, g, u, v):  # pragma: no cover - compiled
    m = u.shape[0]
    n = u.shape[1]
    out = np.empty(m)
    for s in range(m):
        num = 0.0
        for a in range(n):
            for b in range(n):
                uv = u[s, a] * v[s, b]
                if uv == 0.0:
                    continue
                for c in range(n):
                    for d in range(n):
                        num += rm[a, b, c, d] * uv * v[s, c] * u[s, d]
        guu = 0.0
        gvv = 0.0
        guv = 0.0
        for a in range(n):
            for b in range(n):
                guu += g[a, b] * u[s, a] * u[s, b]
                gvv += g[a, b] * v[s, a] * v[s, b]
                guv += g[a, b] * u[s, a] * v[s, b]
        out[s] = num / (guu * gvv - guv * guv)
    return out


def sectional_batch(rm, g, u, v, use_jit: bool | None = None) -> np.ndarray:
    """K(u_s, v_s) = R(u,v,v,u) / (g(u,u)g(v,v) - g(u,v)^2) for each row s."""
    jit = HAVE_NUMBA if use_jit is None else (use_jit and HAVE_NUMBA)
    args = [np.ascontiguousarray(x, dtype=float) for x in (rm, g, u, v)]
    return (_sectional_jit if jit else _sectional_numpy)(*args)


# --- periodic quadrature -----------------------------------------------------

@njit(cache=True)
def _pairwise_sum_jit(x):  # pragma: no cover - compiled
    n = x.shape[0]
    if n <= 8:
        s = 0.0
        for i in range(n):
            s += x[i]
        return s
    h = n // 2
    return _pairwise_sum_jit(x[:h]) + _pairwise_sum_jit(x[h:])


def _pairwise_sum_numpy(x):
    # np.sum already reduces pairwise for contiguous float arrays
    return float(np.sum(x))


def trapezoid_mean(values, use_jit: bool | None = None) -> float:
    """Mean of samples on a uniform periodic grid (the periodic trapezoid rule)."""
    jit = HAVE_NUMBA if use_jit is None else (use_jit and HAVE_NUMBA)
    flat = np.ascontiguousarray(np.ravel(values), dtype=float)
    total = _pairwise_sum_jit(flat) if jit else _pairwise_sum_numpy(flat)
    return total / flat.size
