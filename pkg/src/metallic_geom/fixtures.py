"""Desk fixtures: small charts with closed-form metrics and metallic structures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .chart import Chart, EndoField, MetricField
from .metallic import MetallicParams

GOLDEN = MetallicParams(1.0, 1.0)
NORDEN = MetallicParams(1.0, -1.0)


@dataclass(frozen=True)
class Fixture:
    name: str
    chart: Chart
    g: MetricField
    J: EndoField
    params: MetallicParams
    box: tuple  # (lo, hi)
    description: str = ""

    @property
    def n(self) -> int:
        return self.chart.n

    def samples(self, count: int = 50, seed: int = 0) -> np.ndarray:
        from .chart import sample_box

        return sample_box(self.box[0], self.box[1], count, seed)


def _rot(t: E.Expr):
    c, s = E.cos(t), E.sin(t)
    return [[c, -s], [s, c]]


def _boost(t: E.Expr):
    c, s = E.func("cosh", t), E.func("sinh", t)
    return [[c, s], [s, c]], [[c, -s], [-s, c]]


def _mm(a, b):
    n, m, k = len(a), len(b[0]), len(b)
    return [[E.esum(E.as_expr(a[i][l]) * E.as_expr(b[l][j]) for l in range(k)) for j in range(m)] for i in range(n)]


def _tr(a):
    return [list(r) for r in zip(*a)]


def _blockdiag(*blocks):
    n = sum(len(b) for b in blocks)
    out = [[E.ZERO] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, v in enumerate(row):
                out[off + i][off + j] = E.as_expr(v)
        off += len(b)
    return out


J_F1 = [[1.0, 1.0], [1.0, 0.0]]
J_F4 = [[0.5, math.sqrt(3) / 2], [-math.sqrt(3) / 2, 0.5]]


def _radial_structure(n: int, params: MetallicParams, radial_dims: int | None = None):
    """sigma+ on the radial line of the first ``radial_dims`` coordinates, sigma- elsewhere."""
    k = radial_dims or n
    xs = [E.coord(i) for i in range(k)]
    r2 = E.esum(x ** 2 for x in xs)
    sp, sm = params.sigma_plus, params.sigma_minus
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            v = E.const(sm if a == b else 0.0)
            if a < k and b < k:
                v = v + (sp - sm) * xs[a] * xs[b] / r2
            row.append(v)
        rows.append(row)
    return rows


def f1() -> Fixture:
    c = Chart(2)
    return Fixture("F1", c, MetricField.constant(np.eye(2)), EndoField(J_F1), GOLDEN,
                   ((-1.0, -1.0), (1.0, 1.0)), "flat golden plane")


def f2() -> Fixture:
    c = Chart(2)
    R = _rot(E.coord(0))
    J = _mm(_mm(R, J_F1), _tr(R))
    return Fixture("F2", c, MetricField.constant(np.eye(2)), EndoField(J), GOLDEN,
                   ((-1.0, -1.0), (1.0, 1.0)), "rotating golden plane")


def f3() -> Fixture:
    c = Chart(3)
    R = _rot(E.coord(2))
    block = _mm(_mm(R, J_F1), _tr(R))
    J = _blockdiag(block, [[GOLDEN.sigma_minus]])
    return Fixture("F3", c, MetricField.constant(np.eye(3)), EndoField(J), GOLDEN,
                   ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0)), "rotating golden 3-fold")


def f4() -> Fixture:
    c = Chart(2)
    return Fixture("F4", c, MetricField.constant(np.diag([1.0, -1.0])), EndoField(J_F4), NORDEN,
                   ((-1.0, -1.0), (1.0, 1.0)), "flat Norden plane")


def f5() -> Fixture:
    c = Chart(2, periodic=(True, True))
    return Fixture("F5", c, MetricField.constant(np.diag([1.0, -1.0])), EndoField(J_F4), NORDEN,
                   ((0.0, 0.0), (2 * math.pi, 2 * math.pi)), "flat Norden torus")


def f6() -> Fixture:
    c = Chart(4)
    return Fixture("F6", c, MetricField.constant(np.eye(4)), EndoField(_radial_structure(4, GOLDEN)), GOLDEN,
                   ((0.4,) * 4, (1.4,) * 4), "concentric 3-sphere foliation")


def f7() -> Fixture:
    c = Chart(4)
    B, Binv = _boost(E.coord(0))
    J = _blockdiag(J_F4, _mm(_mm(B, J_F4), Binv))
    return Fixture("F7", c, MetricField.constant(np.diag([1.0, -1.0, 1.0, -1.0])), EndoField(J), NORDEN,
                   ((-1.0,) * 4, (1.0,) * 4), "boosted Norden 4-fold")


def f7f() -> Fixture:
    """F7 with the boost frozen at t = 0: constant structure."""
    c = Chart(4)
    J = _blockdiag(J_F4, J_F4)
    return Fixture("F7F", c, MetricField.constant(np.diag([1.0, -1.0, 1.0, -1.0])), EndoField(J), NORDEN,
                   ((-1.0,) * 4, (1.0,) * 4), "frozen Norden 4-fold")


def f4b() -> Fixture:
    """2D Norden family J = B(x1) J_F4 B(x1)^-1."""
    c = Chart(2)
    B, Binv = _boost(E.coord(0))
    J = _mm(_mm(B, J_F4), Binv)
    return Fixture("F4B", c, MetricField.constant(np.diag([1.0, -1.0])), EndoField(J), NORDEN,
                   ((-1.0, -1.0), (1.0, 1.0)), "boosted Norden plane")


def f6s() -> Fixture:
    """Concentric 2-sphere foliation of R^3."""
    c = Chart(3)
    return Fixture("F6S", c, MetricField.constant(np.eye(3)), EndoField(_radial_structure(3, GOLDEN)), GOLDEN,
                   ((0.4,) * 3, (1.4,) * 3), "concentric 2-sphere foliation")


def f6c() -> Fixture:
    """Leaves S^2 x R in R^4: sectional curvature 1/r^2 on sphere planes, 0 on mixed planes."""
    c = Chart(4)
    return Fixture("F6C", c, MetricField.constant(np.eye(4)), EndoField(_radial_structure(4, GOLDEN, 3)), GOLDEN,
                   ((0.4, 0.4, 0.4, -1.0), (1.4, 1.4, 1.4, 1.0)), "cylinder foliation")


FIXTURES = {
    "F1": f1, "F2": f2, "F3": f3, "F4": f4, "F5": f5, "F6": f6, "F7": f7,
    "F7F": f7f, "F4B": f4b, "F6S": f6s, "F6C": f6c,
}


def get(name: str) -> Fixture:
    try:
        return FIXTURES[name.upper()]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
