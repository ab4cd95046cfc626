"""Charts, tensor fields with expression components, connections and curvature.

Fields carry exact expression components; numeric work happens at a point
through compiled value/jacobian functions. Complex fields keep a second tuple
of expressions for the imaginary part, and every numeric routine here is
written so that complex arrays flow through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from . import expr as E
from ._compile import evaluate_batch, evaluate_many
from .expr import Expr, as_expr

DEGENERACY_THRESHOLD = 1e-12


class DegenerateMetricError(ArithmeticError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    n: int
    names: tuple = ()
    periodic: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("chart dimension must be positive")
        names = tuple(self.names) or tuple(f"x{i + 1}" for i in range(self.n))
        if len(names) != self.n or len(set(names)) != self.n:
            raise DimensionError("coordinate names must be n distinct strings")
        per = tuple(self.periodic) or (False,) * self.n
        if len(per) != self.n:
            raise DimensionError("one periodicity flag per coordinate")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "periodic", tuple(bool(p) for p in per))

    def parse(self, text: str) -> Expr:
        return E.parse(text, self.n, self.names)


def _key(pt) -> tuple:
    return tuple(float(v) for v in pt)


def _split(c) -> tuple[float, float]:
    c = complex(c)
    return c.real, c.imag


# --- vector fields -------------------------------------------------------------

class VectorField:
    """Vector field with (possibly complex) expression components."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re: Sequence, im: Sequence | None = None):
        re = tuple(as_expr(c) for c in re)
        im = tuple(as_expr(c) for c in im) if im is not None else (E.ZERO,) * len(re)
        if len(im) != len(re):
            raise DimensionError("real and imaginary parts differ in length")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "_hash", hash((re, im)))

    def __setattr__(self, k, v):
        raise AttributeError("VectorField is immutable")

    @classmethod
    def parse(cls, chart: Chart, comps: Sequence[str]) -> "VectorField":
        return cls([chart.parse(c) for c in comps])

    @classmethod
    def coordinate(cls, n: int, i: int) -> "VectorField":
        return cls([E.ONE if k == i else E.ZERO for k in range(n)])

    @classmethod
    def constant(cls, vec) -> "VectorField":
        vec = np.asarray(vec)
        if np.iscomplexobj(vec):
            return cls([E.const(v.real) for v in vec], [E.const(v.imag) for v in vec])
        return cls([E.const(v) for v in vec])

    @property
    def n(self) -> int:
        return len(self.re)

    @property
    def is_complex(self) -> bool:
        return any(not c.is_value(0.0) for c in self.im)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.re == other.re and self.im == other.im

    def __repr__(self):
        parts = [E.render(c) for c in self.re]
        if self.is_complex:
            parts = [f"{a} + i*({E.render(b)})" for a, b in zip(parts, self.im)]
        return f"VectorField({parts})"

    # numerics
    def at(self, pt) -> np.ndarray:
        val, _ = _field_jet(self, _key(pt), False)
        return val

    def jac(self, pt) -> np.ndarray:
        """[k, i] = d_i Y^k at pt."""
        return _field_jet(self, _key(pt), True)[1]

    def batch(self, points) -> np.ndarray:
        out = evaluate_batch(self.re + self.im, points)
        n = self.n
        if self.is_complex:
            return out[:, :n] + 1j * out[:, n:]
        return out[:, :n]

    # algebra
    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField([a + b for a, b in zip(self.re, other.re)],
                           [a + b for a, b in zip(self.im, other.im)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField([a - b for a, b in zip(self.re, other.re)],
                           [a - b for a, b in zip(self.im, other.im)])

    def __neg__(self) -> "VectorField":
        return VectorField([-a for a in self.re], [-a for a in self.im])

    def scale(self, c) -> "VectorField":
        """Multiply by a number (possibly complex) or a real scalar expression."""
        if isinstance(c, Expr):
            return VectorField([c * a for a in self.re], [c * a for a in self.im])
        cr, ci = _split(c)
        return VectorField([cr * a - ci * b for a, b in zip(self.re, self.im)],
                           [cr * b + ci * a for a, b in zip(self.re, self.im)])

    def conj(self) -> "VectorField":
        return VectorField(self.re, [-b for b in self.im])

    def real(self) -> "VectorField":
        return VectorField(self.re)

    def imag(self) -> "VectorField":
        return VectorField(self.im)

    def derivative(self, f: Expr) -> Expr:
        """X(f) for real X."""
        return E.esum(c * E.diff(f, i) for i, c in enumerate(self.re))


@lru_cache(maxsize=65536)
def _field_jet(X: VectorField, pt: tuple, want_jac: bool):
    n, dim = X.n, len(pt)
    cplx = X.is_complex
    parts = X.re + X.im if cplx else X.re
    roots = parts
    if want_jac:
        roots = parts + tuple(E.diff(c, i) for c in parts for i in range(dim))
    vals = evaluate_many(roots, pt)
    m = len(parts)
    val = vals[:m]
    jac = vals[m:].reshape(m, dim) if want_jac else None
    if cplx:
        val = val[:n] + 1j * val[n:]
        if jac is not None:
            jac = jac[:n] + 1j * jac[n:]
    return val, jac


# --- endomorphism fields -------------------------------------------------------

class EndoField:
    """(1,1)-tensor field; ``re[a][b]`` is J^a_b (row = output index)."""

    __slots__ = ("re", "im", "_hash", "_apply")

    def __init__(self, re: Sequence[Sequence], im: Sequence[Sequence] | None = None):
        re = tuple(tuple(as_expr(c) for c in row) for row in re)
        n = len(re)
        if any(len(r) != n for r in re):
            raise DimensionError("endomorphism must be square")
        if im is None:
            im = tuple((E.ZERO,) * n for _ in range(n))
        else:
            im = tuple(tuple(as_expr(c) for c in row) for row in im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "_hash", hash((re, im)))
        object.__setattr__(self, "_apply", {})

    def __setattr__(self, k, v):
        raise AttributeError("EndoField is immutable")

    @classmethod
    def parse(cls, chart: Chart, rows: Sequence[Sequence[str]]) -> "EndoField":
        return cls([[chart.parse(c) for c in row] for row in rows])

    @classmethod
    def identity(cls, n: int) -> "EndoField":
        return cls([[E.ONE if a == b else E.ZERO for b in range(n)] for a in range(n)])

    @classmethod
    def constant(cls, mat) -> "EndoField":
        mat = np.asarray(mat)
        if np.iscomplexobj(mat):
            return cls(mat.real.tolist(), mat.imag.tolist())
        return cls(mat.tolist())

    @property
    def n(self) -> int:
        return len(self.re)

    @property
    def is_complex(self) -> bool:
        return any(not c.is_value(0.0) for row in self.im for c in row)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, EndoField) and self.re == other.re and self.im == other.im

    def __repr__(self):
        return f"EndoField({[[E.render(c) for c in row] for row in self.re]})"

    def _flat(self):
        return tuple(c for row in self.re for c in row) + tuple(c for row in self.im for c in row)

    def at(self, pt) -> np.ndarray:
        return _endo_jet(self, _key(pt), False)[0]

    def d(self, pt) -> np.ndarray:
        """[i, a, b] = d_i J^a_b at pt."""
        return _endo_jet(self, _key(pt), True)[1]

    def batch(self, points) -> np.ndarray:
        n = self.n
        out = evaluate_batch(self._flat(), points)
        re = out[:, : n * n].reshape(-1, n, n)
        if self.is_complex:
            return re + 1j * out[:, n * n:].reshape(-1, n, n)
        return re

    def apply(self, X: VectorField) -> VectorField:
        """Symbolic J(X)."""
        hit = self._apply.get(X)
        if hit is not None:
            return hit
        n = self.n
        re, im = [], []
        for a in range(n):
            re.append(E.esum(self.re[a][b] * X.re[b] - self.im[a][b] * X.im[b] for b in range(n)))
            im.append(E.esum(self.re[a][b] * X.im[b] + self.im[a][b] * X.re[b] for b in range(n)))
        out = VectorField(re, im)
        self._apply[X] = out
        return out

    def __matmul__(self, other: "EndoField") -> "EndoField":
        n = self.n
        re = [[E.esum(self.re[a][c] * other.re[c][b] - self.im[a][c] * other.im[c][b] for c in range(n))
               for b in range(n)] for a in range(n)]
        im = [[E.esum(self.re[a][c] * other.im[c][b] + self.im[a][c] * other.re[c][b] for c in range(n))
               for b in range(n)] for a in range(n)]
        return EndoField(re, im)

    def __add__(self, other: "EndoField") -> "EndoField":
        return EndoField([[x + y for x, y in zip(r, s)] for r, s in zip(self.re, other.re)],
                         [[x + y for x, y in zip(r, s)] for r, s in zip(self.im, other.im)])

    def __sub__(self, other: "EndoField") -> "EndoField":
        return self + other.scale(-1.0)

    def scale(self, c) -> "EndoField":
        if isinstance(c, Expr):
            return EndoField([[c * x for x in r] for r in self.re], [[c * x for x in r] for r in self.im])
        cr, ci = _split(c)
        re = [[cr * x - ci * y for x, y in zip(r, s)] for r, s in zip(self.re, self.im)]
        im = [[cr * y + ci * x for x, y in zip(r, s)] for r, s in zip(self.re, self.im)]
        return EndoField(re, im)

    def shift(self, c) -> "EndoField":
        """J + c*I."""
        return self + EndoField.identity(self.n).scale(c)

    def conj(self) -> "EndoField":
        return EndoField(self.re, [[-x for x in r] for r in self.im])


@lru_cache(maxsize=65536)
def _endo_jet(J: EndoField, pt: tuple, want_d: bool):
    n, dim = J.n, len(pt)
    cplx = J.is_complex
    flat = J._flat() if cplx else tuple(c for row in J.re for c in row)
    roots = flat
    if want_d:
        roots = flat + tuple(E.diff(c, i) for i in range(dim) for c in flat)
    vals = evaluate_many(roots, pt)
    m = len(flat)
    val = vals[:m]
    d = vals[m:].reshape(dim, m) if want_d else None
    if cplx:
        val = val[: n * n] + 1j * val[n * n:]
        if d is not None:
            d = d[:, : n * n] + 1j * d[:, n * n:]
    val = val.reshape(n, n)
    if d is not None:
        d = d.reshape(dim, n, n)
    return val, d


# --- metric ------------------------------------------------------------------------

class MetricField:
    """Symmetric (0,2)-tensor field g_ij with exact components."""

    __slots__ = ("g", "_hash")

    def __init__(self, comps: Sequence[Sequence]):
        g = tuple(tuple(as_expr(c) for c in row) for row in comps)
        n = len(g)
        if any(len(r) != n for r in g):
            raise DimensionError("metric must be square")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "_hash", hash(g))

    def __setattr__(self, k, v):
        raise AttributeError("MetricField is immutable")

    @classmethod
    def parse(cls, chart: Chart, rows) -> "MetricField":
        return cls([[chart.parse(c) for c in row] for row in rows])

    @classmethod
    def constant(cls, mat) -> "MetricField":
        return cls(np.asarray(mat, dtype=float).tolist())

    @property
    def n(self) -> int:
        return len(self.g)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, MetricField) and self.g == other.g

    def _flat(self):
        return tuple(c for row in self.g for c in row)

    def at(self, pt) -> np.ndarray:
        return _metric_jet(self, _key(pt))[0]

    def d(self, pt) -> np.ndarray:
        """[i, a, b] = d_i g_ab."""
        return _metric_jet(self, _key(pt))[1]

    def dd(self, pt) -> np.ndarray:
        """[i, j, a, b] = d_i d_j g_ab."""
        return _metric_jet(self, _key(pt))[2]

    def batch(self, points) -> np.ndarray:
        n = self.n
        return evaluate_batch(self._flat(), points).reshape(-1, n, n)

    def inner(self, u, v, pt) -> complex | float:
        """Bilinear (not Hermitian) g(u, v)."""
        return u @ self.at(pt) @ v

    def det_expr(self) -> Expr:
        return _det(self.g)

    def inverse_expr(self) -> tuple:
        return _inverse(self.g)

    def symmetric_residual(self, points) -> float:
        m = self.batch(points)
        return float(np.max(np.abs(m - np.swapaxes(m, 1, 2)))) if len(m) else 0.0


@lru_cache(maxsize=65536)
def _metric_jet(g: MetricField, pt: tuple):
    n, dim = g.n, len(pt)
    flat = g._flat()
    d1 = tuple(E.diff(c, i) for i in range(dim) for c in flat)
    d2 = tuple(E.diff(c, i) for i in range(dim) for c in d1)
    vals = evaluate_many(flat + d1 + d2, pt)
    m = n * n
    val = vals[:m].reshape(n, n)
    d = vals[m: m + dim * m].reshape(dim, n, n)
    # d2 is ordered [i][j][a][b] with the outer diff over i applied to d_j
    dd = vals[m + dim * m:].reshape(dim, dim, n, n)
    return val, d, dd


def _det(m) -> Expr:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    terms = []
    for j in range(n):
        if m[0][j].is_value(0.0):
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = m[0][j] * _det(minor)
        terms.append(t if j % 2 == 0 else -t)
    return E.esum(terms)


def _inverse(m) -> tuple:
    n = len(m)
    det = _det(m)
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            minor = [r[:a] + r[a + 1:] for k, r in enumerate(m) if k != b]
            cof = _det(minor) if n > 1 else E.ONE
            if (a + b) % 2:
                cof = -cof
            row.append(cof / det)
        rows.append(tuple(row))
    return tuple(rows)


def _checked_inverse(gm: np.ndarray) -> np.ndarray:
    if abs(np.linalg.det(gm)) < DEGENERACY_THRESHOLD:
        raise DegenerateMetricError("metric is degenerate at the evaluation point")
    return np.linalg.inv(gm)


# --- Christoffel symbols and curvature -------------------------------------------

@lru_cache(maxsize=65536)
def _christoffel(g: MetricField, pt: tuple) -> np.ndarray:
    gm, dg, _ = _metric_jet(g, pt)
    ginv = _checked_inverse(gm)
    # lower[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lower = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, lower)


def christoffel(g: MetricField, pt) -> np.ndarray:
    """Gamma[k, i, j] of the Levi-Civita connection at pt."""
    return _christoffel(g, _key(pt))


def christoffel_exprs(g: MetricField) -> tuple:
    """Symbolic Christoffel symbols Gamma[k][i][j]."""
    n = g.n
    ginv = g.inverse_expr()
    G = g.g
    out = []
    for k in range(n):
        plane = []
        for i in range(n):
            row = []
            for j in range(n):
                row.append(E.esum(
                    0.5 * ginv[k][l] * (E.diff(G[j][l], i) + E.diff(G[i][l], j) - E.diff(G[i][j], l))
                    for l in range(n)))
            plane.append(tuple(row))
        out.append(tuple(plane))
    return tuple(out)


@lru_cache(maxsize=4096)
def _riemann(g: MetricField, pt: tuple) -> np.ndarray:
    gm, dg, ddg = _metric_jet(g, pt)
    ginv = _checked_inverse(gm)
    gam = _christoffel(g, pt)
    lower = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    # d_m lower[l, i, j]
    dlower = (np.einsum("mijl->mlij", ddg) + np.einsum("mjil->mlij", ddg) - ddg)
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    dgam = 0.5 * (np.einsum("mkl,lij->mkij", dginv, lower) + np.einsum("kl,mlij->mkij", ginv, dlower))
    # Rup[l, i, j, k] : R(d_i, d_j) d_k = Rup[l,i,j,k] d_l
    rup = (np.einsum("iljk->lijk", dgam) - np.einsum("jlik->lijk", dgam)
           + np.einsum("lim,mjk->lijk", gam, gam) - np.einsum("ljm,mik->lijk", gam, gam))
    return np.einsum("la,aijk->ijkl", gm, rup)


def riemann_tensor(g: MetricField, pt) -> np.ndarray:
    """Rm[i,j,k,l] with R(X,Y,Z,W) = g(R(X,Y)Z, W) = Rm[i,j,k,l] X^i Y^j Z^k W^l."""
    return _riemann(g, _key(pt))


def _vec(V, pt):
    return V.at(pt) if isinstance(V, VectorField) else np.asarray(V)


def riemann(g: MetricField, X, Y, Z, W, pt):
    x, y, z, w = (_vec(V, pt) for V in (X, Y, Z, W))
    return np.einsum("ijkl,i,j,k,l->", riemann_tensor(g, pt), x, y, z, w)


def sectional(g: MetricField, X, Y, pt) -> float:
    x, y = _vec(X, pt), _vec(Y, pt)
    gm = g.at(pt)
    den = (x @ gm @ x) * (y @ gm @ y) - (x @ gm @ y) ** 2
    return float(riemann(g, x, y, y, x, pt) / den)


# --- brackets ------------------------------------------------------------------

def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Symbolic [X, Y]; complex fields are handled bilinearly."""
    if X.n != Y.n:
        raise DimensionError("fields live on charts of different dimension")
    n = X.n
    re, im = [], []
    for k in range(n):
        r, s = [], []
        for i in range(n):
            # X^i d_i Y^k - Y^i d_i X^k with complex components
            for (xa, xb), (ya, yb), sign in (((X.re[i], X.im[i]), (E.diff(Y.re[k], i), E.diff(Y.im[k], i)), 1),
                                               ((Y.re[i], Y.im[i]), (E.diff(X.re[k], i), E.diff(X.im[k], i)), -1)):
                pr = xa * ya - xb * yb
                pi = xa * yb + xb * ya
                r.append(pr if sign > 0 else -pr)
                s.append(pi if sign > 0 else -pi)
        re.append(E.esum(r))
        im.append(E.esum(s))
    return VectorField(re, im)


def bracket_at(X: VectorField, Y: VectorField, pt) -> np.ndarray:
    """[X, Y] at pt from the jacobians."""
    return Y.jac(pt) @ X.at(pt) - X.jac(pt) @ Y.at(pt)


# --- connections ---------------------------------------------------------------

Rule = Callable[[VectorField, VectorField, tuple], np.ndarray]


@dataclass(frozen=True, eq=False)
class Connection:
    """Covariant derivative operator: ``conn(X, Y, pt)`` is (nabla_X Y)(pt)."""

    rule: Rule
    name: str
    n: int
    meta: dict = field(default_factory=dict)

    def __call__(self, X: VectorField, Y: VectorField, pt) -> np.ndarray:
        return np.asarray(self.rule(X, Y, _key(pt)))

    def __repr__(self):
        return f"Connection({self.name})"


def levi_civita(g: MetricField) -> Connection:
    def rule(X, Y, pt):
        x, y = X.at(pt), Y.at(pt)
        return Y.jac(pt) @ x + np.einsum("kij,i,j->k", _christoffel(g, pt), x, y)

    return Connection(rule, "levi-civita", g.n, {"metric": g})


def coefficient_connection(gamma) -> Connection:
    """Connection with (nabla_X Y)^k = X^i d_i Y^k + Gamma[k][i][j] X^i Y^j."""
    arr = np.asarray(gamma, dtype=object)
    if arr.ndim != 3 or len(set(arr.shape)) != 1:
        raise DimensionError("Gamma must have shape n x n x n")
    n = arr.shape[0]
    flat = tuple(as_expr(c) for c in arr.ravel())

    def rule(X, Y, pt):
        gam = evaluate_many(flat, pt).reshape(n, n, n)
        x, y = X.at(pt), Y.at(pt)
        return Y.jac(pt) @ x + np.einsum("kij,i,j->k", gam, x, y)

    return Connection(rule, "coefficients", n, {"gamma": flat})


def torsion(conn: Connection, X: VectorField, Y: VectorField, pt) -> np.ndarray:
    return conn(X, Y, pt) - conn(Y, X, pt) - bracket_at(X, Y, pt)


def nabla_endo(conn: Connection, J: EndoField, X: VectorField, Y: VectorField, pt) -> np.ndarray:
    """(nabla_X J) Y = nabla_X (J Y) - J (nabla_X Y)."""
    return conn(X, J.apply(Y), pt) - J.at(pt) @ conn(X, Y, pt)


def nabla_metric(conn: Connection, g: MetricField, X, Y, Z, pt) -> complex | float:
    """(nabla_X g)(Y, Z) = X(g(Y,Z)) - g(nabla_X Y, Z) - g(Y, nabla_X Z)."""
    x, y, z = X.at(pt), Y.at(pt), Z.at(pt)
    gm, dg = g.at(pt), g.d(pt)
    dy, dz = Y.jac(pt) @ x, Z.jac(pt) @ x
    xg = np.einsum("i,iab,a,b->", x, dg, y, z) + dy @ gm @ z + y @ gm @ dz
    return xg - conn(X, Y, pt) @ gm @ z - y @ gm @ conn(X, Z, pt)


# --- sampling ------------------------------------------------------------------

def sample_box(lo, hi, count: int, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in the box [lo, hi]."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if count <= 0:
        return np.empty((0, lo.size))
    sampler = qmc.Halton(d=lo.size, scramble=True, seed=seed)
    return qmc.scale(sampler.random(count), lo, hi) if lo.size > 0 else np.empty((count, 0))


def coordinate_fields(n: int) -> list[VectorField]:
    return [VectorField.coordinate(n, i) for i in range(n)]


def polynomial_fields(n: int, count: int, seed: int = 0) -> list[VectorField]:
    """Deterministic pseudo-random vector fields with low-degree polynomial components."""
    rng = np.random.default_rng(seed)
    xs = [E.coord(i) for i in range(n)]
    out = []
    for _ in range(count):
        comps = []
        for _k in range(n):
            c = rng.normal(size=(n + 2,))
            comp = E.const(round(c[0], 3))
            for i in range(n):
                comp = comp + round(c[i + 1], 3) * xs[i]
            j = int(rng.integers(n))
            comp = comp + round(c[-1], 3) * xs[j] * xs[(j + 1) % n]
            comps.append(comp)
        out.append(VectorField(comps))
    return out
