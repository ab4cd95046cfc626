"""Differential forms with expression coefficients.

Coefficients are (real, imaginary) expression pairs indexed by strictly
increasing multi-indices. :class:`FormOps` bundles a metric and a Norden
structure and provides d, the Hodge star, the conjugated operators and the
identity-conformance table.

Conventions (see README):

* ``J*_c`` on r-forms is the pull-back by ``J_c`` on every argument, times
  ``(-1)^(r(r-1)/2)`` under the default ``"graded"`` convention; ``"argumentwise"``
  drops the sign.
* the metallic ``J*`` on r-forms is ``(p - t J*_c)/2`` with ``t = sqrt(-disc)``
  (``"affine"``), which is the dual of J on 1-forms; ``"argumentwise"`` pulls
  back by J instead.
* ``delta = star d star`` with no degree-dependent sign.
* ``(star a)_{I^c} = eps(I, I^c) sqrt|g| a^I``; periodic coordinates have period 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, permutations

import numpy as np

from . import expr as E
from . import kernels
from ._compile import evaluate_batch
from .chart import Chart, DegenerateMetricError, EndoField, MetricField
from .expr import Expr, as_expr
from .metallic import MetallicParams


class DegreeError(ValueError):
    pass


class PeriodicityError(ValueError):
    pass


def basis(n: int, r: int) -> list:
    return list(combinations(range(n), r)) if 0 <= r <= n else []


def perm_sign(seq) -> int:
    """Sign of the sorting permutation; 0 on repeated entries."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    s = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def _coef(c) -> tuple:
    if isinstance(c, tuple):
        return as_expr(c[0]), as_expr(c[1])
    if isinstance(c, complex):
        return E.const(c.real), E.const(c.imag)
    return as_expr(c), E.ZERO


def _cadd(a, b):
    return a[0] + b[0], a[1] + b[1]


def _cmul(a, b):
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _is_zero(c) -> bool:
    return c[0].is_value(0.0) and c[1].is_value(0.0)


class FormField:
    """r-form on an n-chart. Degrees outside 0..n are allowed only for the zero form."""

    __slots__ = ("n", "degree", "terms")

    def __init__(self, n: int, degree: int, terms=None):
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise DegreeError(f"multi-index {idx} is not strictly increasing of length {degree}")
            if idx and (idx[0] < 0 or idx[-1] >= n):
                raise DegreeError(f"multi-index {idx} out of range for n={n}")
            c = _coef(c)
            if not _is_zero(c):
                clean[idx] = c
        if not 0 <= degree <= n and clean:
            raise DegreeError(f"degree {degree} outside 0..{n}")
        self.n, self.degree, self.terms = n, degree, clean

    @classmethod
    def zero(cls, n: int, degree: int) -> "FormField":
        return cls(n, degree)

    @classmethod
    def function(cls, n: int, f) -> "FormField":
        return cls(n, 0, {(): f})

    @classmethod
    def dx(cls, n: int, *idx: int) -> "FormField":
        """dx^{i1} ^ ... ^ dx^{ir} for any index order (0-based)."""
        s = perm_sign(idx)
        return cls(n, len(idx), {tuple(sorted(idx)): float(s)} if s else {})

    @classmethod
    def parse(cls, chart: Chart, degree: int, entries) -> "FormField":
        """``entries``: iterable of (multi-index, re_text[, im_text]) with 0-based indices."""
        acc = cls(chart.n, degree)
        for ent in entries:
            idx, re = ent[0], chart.parse(ent[1])
            im = chart.parse(ent[2]) if len(ent) > 2 and ent[2] is not None else E.ZERO
            acc = acc + cls.dx(chart.n, *idx).scale((re, im))
        return acc

    # -- algebra --------------------------------------------------------------

    def _check(self, other):
        if (self.n, self.degree) != (other.n, other.degree):
            raise DegreeError(f"cannot combine a {self.degree}-form with a {other.degree}-form")

    def __add__(self, other: "FormField") -> "FormField":
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = _cadd(terms[k], c) if k in terms else c
        return FormField(self.n, self.degree, terms)

    def __sub__(self, other: "FormField") -> "FormField":
        return self + (-other)

    def __neg__(self) -> "FormField":
        return FormField(self.n, self.degree, {k: (-a, -b) for k, (a, b) in self.terms.items()})

    def scale(self, c) -> "FormField":
        c = _coef(c)
        return FormField(self.n, self.degree, {k: _cmul(c, v) for k, v in self.terms.items()})

    def conj(self) -> "FormField":
        return FormField(self.n, self.degree, {k: (a, -b) for k, (a, b) in self.terms.items()})

    @property
    def is_complex(self) -> bool:
        return any(not b.is_value(0.0) for _, b in self.terms.values())

    def coefficient(self, idx) -> tuple:
        return self.terms.get(tuple(idx), (E.ZERO, E.ZERO))

    def __repr__(self):
        parts = []
        for k, (a, b) in sorted(self.terms.items()):
            c = E.render(a) if b.is_value(0.0) else f"({E.render(a)}) + i({E.render(b)})"
            parts.append(f"{c} d{'^'.join(f'x{i + 1}' for i in k)}" if k else c)
        return " + ".join(parts) or f"0 ({self.degree}-form)"

    # -- evaluation -----------------------------------------------------------

    def components(self, points) -> np.ndarray:
        """Complex values, shape (N, C(n, r)), columns in :func:`basis` order."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = basis(self.n, self.degree)
        out = np.zeros((len(pts), len(idx)), dtype=complex)
        keys = [k for k in idx if k in self.terms]
        if not keys:
            return out
        roots = tuple(self.terms[k][0] for k in keys) + tuple(self.terms[k][1] for k in keys)
        vals = evaluate_batch(roots, pts)
        m = len(keys)
        for j, k in enumerate(keys):
            out[:, idx.index(k)] = vals[:, j] + 1j * vals[:, m + j]
        return out

    def max_abs(self, points) -> float:
        c = self.components(points)
        return float(np.abs(c).max()) if c.size else 0.0


def wedge(a: FormField, b: FormField) -> FormField:
    if a.n != b.n:
        raise DegreeError("forms live on different charts")
    r = a.degree + b.degree
    if r > a.n:
        raise DegreeError(f"degree {r} exceeds dimension {a.n}")
    out = FormField(a.n, r)
    for I, x in a.terms.items():
        for K, y in b.terms.items():
            s = perm_sign(I + K)
            if s:
                c = _cmul(x, y)
                out = out + FormField(a.n, r, {tuple(sorted(I + K)): (s * c[0], s * c[1])})
    return out


def _d(a: FormField) -> FormField:
    n, r = a.n, a.degree
    if r >= n or r < 0:
        return FormField(n, r + 1)
    acc = {}
    for I, (re, im) in a.terms.items():
        for k in range(n):
            if k in I:
                continue
            s = -1 if sum(1 for i in I if i < k) % 2 else 1
            key = tuple(sorted(I + (k,)))
            c = (s * E.diff(re, k), s * E.diff(im, k))
            acc[key] = _cadd(acc[key], c) if key in acc else c
    return FormField(n, r + 1, acc)


def exterior_d(a: FormField) -> FormField:
    if a.degree >= a.n:
        raise DegreeError("d of a top-degree form")
    return _d(a)


def _minor_det(rows) -> Expr:
    m = len(rows)
    if m == 0:
        return E.ONE
    terms = []
    for p in permutations(range(m)):
        t = E.ONE
        for i, j in enumerate(p):
            t = t * rows[i][j]
            if t.is_value(0.0):
                break
        if not t.is_value(0.0):
            terms.append(t if perm_sign(p) > 0 else -t)
    return E.esum(terms)


def pullback(a: FormField, A) -> FormField:
    """(A* a)(X1..Xr) = a(A X1, ..., A Xr) for a real matrix of expressions A[row][col]."""
    n, r = a.n, a.degree
    if not 0 <= r <= n:
        return a
    acc = {}
    for K, c in a.terms.items():
        for I in basis(n, r):
            det = _minor_det([[A[k][i] for i in I] for k in K])
            if det.is_value(0.0):
                continue
            t = (c[0] * det, c[1] * det)
            acc[I] = _cadd(acc[I], t) if I in acc else t
    return FormField(n, r, acc)


def graded_sign(r: int) -> int:
    return -1 if (r * (r - 1) // 2) % 2 else 1


def jstar_c(a: FormField, Jc: EndoField, convention="graded") -> FormField:
    """``convention`` may also be a tuple of per-degree signs."""
    out = pullback(a, Jc.re)
    if isinstance(convention, tuple):
        return out if not 0 <= a.degree < len(convention) or convention[a.degree] > 0 else -out
    if convention == "graded":
        return out if graded_sign(a.degree) > 0 else -out
    if convention == "argumentwise":
        return out
    raise ValueError(f"unknown convention {convention!r}")


def hodge_star(g: MetricField, a: FormField, ref_pt=None) -> FormField:
    return Hodge(g, ref_pt)(a)


class Hodge:
    """Hodge star of a metric with fixed signature; ``ref_pt`` fixes sign(det g)."""

    def __init__(self, g: MetricField, ref_pt=None):
        n = g.n
        ref = tuple(float(v) for v in (ref_pt if ref_pt is not None else (0.0,) * n))
        det = g.det_expr()
        dv = det(ref)
        if abs(dv) < 1e-12:
            raise DegenerateMetricError(f"metric degenerate at {ref} (|det g| = {abs(dv):.3g})")
        self.g, self.n = g, n
        self.sign = 1 if dv > 0 else -1
        self.sqrt_abs_det = E.sqrt(det) if self.sign > 0 else E.sqrt(-det)
        self.ginv = g.inverse_expr()
        self._raise = {}

    def raise_(self, a: FormField) -> dict:
        """Contravariant components a^I = sum_K det(ginv[I, K]) a_K."""
        n, r = self.n, a.degree
        out = {}
        for I in basis(n, r):
            acc = (E.ZERO, E.ZERO)
            for K, c in a.terms.items():
                key = (I, K)
                if key not in self._raise:
                    self._raise[key] = _minor_det([[self.ginv[i][k] for k in K] for i in I])
                m = self._raise[key]
                if not m.is_value(0.0):
                    acc = _cadd(acc, (c[0] * m, c[1] * m))
            if not _is_zero(acc):
                out[I] = acc
        return out

    def inner(self, a: FormField, b: FormField) -> tuple:
        """Pointwise complex-bilinear <a, b> as an expression pair."""
        if a.degree != b.degree:
            raise DegreeError("inner product of forms of different degrees")
        up = self.raise_(b)
        acc = (E.ZERO, E.ZERO)
        for I, c in a.terms.items():
            if I in up:
                acc = _cadd(acc, _cmul(c, up[I]))
        return acc

    def volume(self) -> FormField:
        return FormField(self.n, self.n, {tuple(range(self.n)): self.sqrt_abs_det})

    def __call__(self, a: FormField) -> FormField:
        n, r = self.n, a.degree
        if not 0 <= r <= n:
            return FormField(n, n - r)
        out = {}
        full = tuple(range(n))
        for I, c in self.raise_(a).items():
            Ic = tuple(i for i in full if i not in I)
            s = perm_sign(I + Ic)
            out[Ic] = (s * c[0] * self.sqrt_abs_det, s * c[1] * self.sqrt_abs_det)
        return FormField(n, n - r, out)


class OperatorKind(str, Enum):
    D = "D"
    DC = "DC"
    DELTA = "DELTA"
    DELTA_C = "DELTA_C"
    STAR = "STAR"
    JSTAR_C = "JSTAR_C"
    LAPLACE = "LAPLACE"
    LAPLACE_C = "LAPLACE_C"
    DBAR = "DBAR"
    DBARBAR = "DBARBAR"
    DBAR_EXPLICIT = "DBAR_EXPLICIT"


_I = (E.ZERO, E.ONE)
_HALF = 0.5


class FormOps:
    """Operators of a Norden metallic structure (g, J) acting on forms."""

    def __init__(self, g: MetricField, J: EndoField, params: MetallicParams, chart: Chart | None = None,
                 convention: str = "graded", metallic_convention: str = "affine", ref_pt=None):
        from .norden import norden_jc

        params.require_norden()
        if not isinstance(convention, tuple) and convention not in ("graded", "argumentwise"):
            raise ValueError(f"unknown convention {convention!r}")
        if metallic_convention not in ("affine", "argumentwise"):
            raise ValueError(f"unknown metallic convention {metallic_convention!r}")
        self.g, self.J, self.params = g, J, params
        self.n = J.n
        self.chart = chart or Chart(self.n)
        self.convention, self.metallic_convention = convention, metallic_convention
        self.t = math.sqrt(-params.disc)
        self.Jc = norden_jc(J, params)
        self.hodge = Hodge(g, ref_pt)

    # primitive pieces
    def d(self, a):
        return _d(a)

    def star(self, a):
        return self.hodge(a)

    def jc(self, a):
        return jstar_c(a, self.Jc, self.convention)

    def jm(self, a):
        """Metallic J* on forms."""
        if self.metallic_convention == "argumentwise":
            return pullback(a, self.J.re)
        return a.scale(self.params.p / 2) - self.jc(a).scale(self.t / 2)

    # composite operators
    def dc(self, a):
        return self.jc(self.d(self.jc(a)))

    def delta(self, a):
        return self.star(self.d(self.star(a)))

    def delta_c(self, a):
        return self.star(self.dc(self.star(a)))

    def laplace(self, a):
        return _sum(self.d(self.delta(a)), self.delta(self.d(a)))

    def laplace_c(self, a):
        return _sum(self.dc(self.delta_c(a)), self.delta_c(self.dc(a)))

    def dbar(self, a):
        return (self.d(a) - self.dc(a).scale(_I)).scale(_HALF)

    def dbarbar(self, a):
        return (self.delta(a) - self.delta_c(a).scale(_I)).scale(_HALF)

    def dbar_explicit(self, a):
        p, disc = self.params.p, self.params.disc
        jm, d = self.jm, self.d
        inner = _sum(
            jm(d(jm(a))).scale(4.0), d(jm(a)).scale(-2.0 * p), jm(d(a)).scale(-2.0 * p), d(a).scale(p * p),
        )
        return (d(a).scale(disc) + inner.scale(_I)).scale(1.0 / (2.0 * disc))

    def apply(self, kind, a: FormField) -> FormField:
        kind = OperatorKind(kind)
        return {
            OperatorKind.D: self.d, OperatorKind.DC: self.dc, OperatorKind.DELTA: self.delta,
            OperatorKind.DELTA_C: self.delta_c, OperatorKind.STAR: self.star, OperatorKind.JSTAR_C: self.jc,
            OperatorKind.LAPLACE: self.laplace, OperatorKind.LAPLACE_C: self.laplace_c,
            OperatorKind.DBAR: self.dbar, OperatorKind.DBARBAR: self.dbarbar,
            OperatorKind.DBAR_EXPLICIT: self.dbar_explicit,
        }[kind](a)

    # torus pairing
    def pairing(self, a: FormField, b: FormField, grid: int = 64, use_jit=None) -> complex:
        """Integral of <a, b> vol over the period box [0, 2 pi]^n."""
        if not all(self.chart.periodic):
            raise PeriodicityError("integrated pairing needs every coordinate periodic")
        re, im = self.hodge.inner(a, b)
        re, im = re * self.hodge.sqrt_abs_det, im * self.hodge.sqrt_abs_det
        pts = torus_grid(self.n, grid)
        vals = evaluate_batch((re, im), pts)
        area = (2 * math.pi) ** self.n
        return complex(kernels.trapezoid_mean(vals[:, 0], use_jit) * area,
                       kernels.trapezoid_mean(vals[:, 1], use_jit) * area)


def _sum(*forms):
    acc = forms[0]
    for f in forms[1:]:
        acc = acc + f
    return acc


def torus_grid(n: int, m: int = 64) -> np.ndarray:
    axis = 2 * math.pi * np.arange(m) / m
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([x.ravel() for x in mesh], axis=1)


# --- conformance ---------------------------------------------------------------

@dataclass(frozen=True)
class ConformanceRow:
    check: str
    residual: float
    threshold: float
    scale: float          # largest magnitude among the compared terms
    cases: int

    @property
    def verdict(self) -> str:
        return "pass" if self.residual < self.threshold else "FAIL"


POINTWISE_ROWS = (
    ("d.d = 0", lambda o, a: o.d(o.d(a)), None),
    ("dc.dc = 0", lambda o, a: o.dc(o.dc(a)), None),
    ("d.dc + dc.d = 0", lambda o, a: o.d(o.dc(a)) + o.dc(o.d(a)), None),
    ("deltac.deltac = 0", lambda o, a: o.delta_c(o.delta_c(a)), None),
    ("delta.deltac + deltac.delta = 0", lambda o, a: o.delta(o.delta_c(a)) + o.delta_c(o.delta(a)), None),
    ("J*.star = star.J*", lambda o, a: o.jm(o.star(a)), lambda o, a: o.star(o.jm(a))),
    ("J*c.star = star.J*c", lambda o, a: o.jc(o.star(a)), lambda o, a: o.star(o.jc(a))),
    ("deltac = J*c.delta.J*c", lambda o, a: o.delta_c(a), lambda o, a: o.jc(o.delta(o.jc(a)))),
    ("dc.J*c = -J*c.d", lambda o, a: o.dc(o.jc(a)), lambda o, a: -o.jc(o.d(a))),
    ("J*c.dc = -d.J*c", lambda o, a: o.jc(o.dc(a)), lambda o, a: -o.d(o.jc(a))),
    ("deltac.J*c = -J*c.delta", lambda o, a: o.delta_c(o.jc(a)), lambda o, a: -o.jc(o.delta(a))),
    ("J*c.deltac = -delta.J*c", lambda o, a: o.jc(o.delta_c(a)), lambda o, a: -o.delta(o.jc(a))),
    ("Deltac = -J*c.Delta.J*c", lambda o, a: o.laplace_c(a), lambda o, a: -o.jc(o.laplace(o.jc(a)))),
    ("Deltac.J*c = J*c.Delta", lambda o, a: o.laplace_c(o.jc(a)), lambda o, a: o.jc(o.laplace(a))),
    ("J*c.Deltac = Delta.J*c", lambda o, a: o.jc(o.laplace_c(a)), lambda o, a: o.laplace(o.jc(a))),
    ("dbar.dbar = 0", lambda o, a: o.dbar(o.dbar(a)), None),
    ("dbarbar.dbarbar = 0", lambda o, a: o.dbarbar(o.dbarbar(a)), None),
    ("dbar = explicit", lambda o, a: o.dbar(a), lambda o, a: o.dbar_explicit(a)),
)

ADJOINT_ROW = "<dc a, b> = <a, deltac b>"


def _pointwise(ops, lhs, rhs, forms, samples):
    res, scale, cases = 0.0, 0.0, 0
    for a in forms:
        L = lhs(ops, a)
        if rhs is None:
            diff, s = L, L.max_abs(samples)
        else:
            R = rhs(ops, a)
            if L.degree != R.degree:
                continue
            diff = L - R
            s = max(L.max_abs(samples), R.max_abs(samples))
        res = max(res, diff.max_abs(samples))
        scale = max(scale, s)
        cases += 1
    return res, scale, cases


def identity_conformance(ops: FormOps, forms, samples, tol: float = 1e-9, pairing=None,
                         grid: int = 64, pair_tol: float = 1e-8) -> list:
    """One row per printed identity: max absolute residual over ``forms`` x ``samples``.

    ``pairing``: None includes the adjointness row when the chart is periodic;
    True demands it (PeriodicityError otherwise); False skips it.
    """
    rows = []
    for name, lhs, rhs in POINTWISE_ROWS:
        res, scale, cases = _pointwise(ops, lhs, rhs, forms, samples)
        rows.append(ConformanceRow(name, res, tol, scale, cases))
    periodic = all(ops.chart.periodic)
    if pairing is True and not periodic:
        raise PeriodicityError("adjointness row needs a periodic chart")
    if pairing is None:
        pairing = periodic
    if pairing:
        res, scale, cases = 0.0, 0.0, 0
        for a in forms:
            for b in forms:
                if b.degree != a.degree + 1:
                    continue
                lhs = ops.pairing(ops.dc(a), b, grid)
                rhs = ops.pairing(a, ops.delta_c(b), grid)
                res = max(res, abs(lhs - rhs))
                scale = max(scale, abs(lhs), abs(rhs))
                cases += 1
        rows.append(ConformanceRow(ADJOINT_ROW, res, pair_tol, scale, cases))
    return rows


def trig_forms(n: int, max_degree: int = 3) -> list:
    """Basis of test forms: sin/cos(k x_i) coefficients, k <= max_degree, on each basis r-form."""
    out = []
    xs = [E.coord(i) for i in range(n)]
    coefs = [E.ONE]
    for k in range(1, max_degree + 1):
        for i, x in enumerate(xs):
            coefs.append(E.sin(k * x))
            coefs.append(E.cos(k * x))
    mixed = E.sin(xs[0]) * E.cos(xs[-1]) if n > 1 else E.sin(2 * xs[0])
    coefs.append(mixed)
    for r in range(n + 1):
        for I in basis(n, r):
            for c in coefs:
                out.append(FormField(n, r, {I: c}))
    return out


@dataclass(frozen=True)
class HarmonicReport:
    laplace_c: float        # |Delta^c a|
    laplace_of_jc: float    # |Delta(J*_c a)|
    invariance: float       # |J*_c a - a|
    dc: float
    deltac: float
    transport: float        # |Delta^c a + J*_c Delta J*_c a|
    implication_i: bool     # Delta^c a = 0 => Delta J*_c a = 0
    equivalence_iv: bool    # Delta^c a = 0 <=> dc a = 0 and deltac a = 0


def harmonic_check(ops: FormOps, a: FormField, samples, tol: float = 1e-10) -> HarmonicReport:
    lc = ops.laplace_c(a).max_abs(samples)
    ljc = ops.laplace(ops.jc(a)).max_abs(samples)
    inv = (ops.jc(a) - a).max_abs(samples)
    dc = ops.dc(a).max_abs(samples)
    dlc = ops.delta_c(a).max_abs(samples)
    tr = (ops.laplace_c(a) + ops.jc(ops.laplace(ops.jc(a)))).max_abs(samples)
    zero = lc < tol
    return HarmonicReport(lc, ljc, inv, dc, dlc, tr, (not zero) or ljc < tol, zero == (dc < tol and dlc < tol))
