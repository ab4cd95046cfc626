"""Connections adapted to the pair of metallic distributions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chart import (
    Connection, EndoField, MetricField, VectorField, bracket_at, levi_civita, nabla_endo,
    nabla_metric, torsion,
)
from .metallic import MetallicParams, jordan_tensor, nijenhuis, projector_fields


@dataclass(frozen=True)
class STensor:
    """(1,2)-tensor given by ``rule(X, Y, pt) -> vector``."""

    rule: Callable
    name: str = "S"

    def __call__(self, X, Y, pt):
        return np.asarray(self.rule(X, Y, pt))


ZERO_S = STensor(lambda X, Y, pt: np.zeros(X.n), "0")


def _pts(pt):
    return tuple(float(v) for v in pt)


def _proj(J, params, allow_complex):
    return projector_fields(J, params, allow_complex)


def adapted_general(conn: Connection, S: STensor, J: EndoField, params: MetallicParams,
                    allow_complex: bool = False) -> Connection:
    """P(nabla_X PY) + P'(nabla_X P'Y) + P(S(X, PY)) + P'(S(X, P'Y))."""
    P, Pp = _proj(J, params, allow_complex)

    def rule(X, Y, pt):
        PY, PpY = P.apply(Y), Pp.apply(Y)
        Pm, Ppm = P.at(pt), Pp.at(pt)
        return Pm @ (conn(X, PY, pt) + S(X, PY, pt)) + Ppm @ (conn(X, PpY, pt) + S(X, PpY, pt))

    return Connection(rule, f"adapted[{conn.name},{S.name}]", J.n)


def schouten_van_kampen(g: MetricField | None, J: EndoField, params: MetallicParams,
                        conn: Connection | None = None, allow_complex: bool = False) -> Connection:
    """Projector form P(nabla_X PY) + P'(nabla_X P'Y) over ``conn`` (Levi-Civita by default)."""
    base = conn or levi_civita(g)
    c = adapted_general(base, ZERO_S, J, params, allow_complex)
    return Connection(c.rule, f"schouten-van-kampen[{base.name}]", J.n)


def svk_closed(g: MetricField | None, J: EndoField, params: MetallicParams,
               conn: Connection | None = None) -> Connection:
    """Closed form for a torsion-free base:
    (1/disc)[(2J - pI)(nabla_X JY) - (pJ - (p^2 + 2q)I)(nabla_X Y)]."""
    base = conn or levi_civita(g)
    p, q, d = params.p, params.q, params.disc
    n = J.n

    def rule(X, Y, pt):
        Jm = J.at(pt)
        I = np.eye(n)
        return ((2 * Jm - p * I) @ base(X, J.apply(Y), pt) - (p * Jm - (p * p + 2 * q) * I) @ base(X, Y, pt)) / d

    return Connection(rule, f"svk-closed[{base.name}]", n)


def svk_torsion_formula(conn: Connection, J: EndoField, params: MetallicParams, X, Y, pt) -> np.ndarray:
    """(1/disc)[(2J - pI)(nabla_X JY - nabla_Y JX) - (pJ + 2qI)(nabla_X Y - nabla_Y X)]."""
    p, q, d = params.p, params.q, params.disc
    Jm = J.at(pt)
    I = np.eye(J.n)
    a = conn(X, J.apply(Y), pt) - conn(Y, J.apply(X), pt)
    b = conn(X, Y, pt) - conn(Y, X, pt)
    return ((2 * Jm - p * I) @ a - (p * Jm + 2 * q * I) @ b) / d


def vranceanu(conn: Connection, J: EndoField, params: MetallicParams, allow_complex: bool = False) -> Connection:
    """P(nabla_{PX} PY) + P'(nabla_{P'X} P'Y) + P[P'X, PY] + P'[PX, P'Y]."""
    P, Pp = _proj(J, params, allow_complex)

    def rule(X, Y, pt):
        PX, PpX, PY, PpY = P.apply(X), Pp.apply(X), P.apply(Y), Pp.apply(Y)
        Pm, Ppm = P.at(pt), Pp.at(pt)
        return (Pm @ (conn(PX, PY, pt) + bracket_at(PpX, PY, pt))
                + Ppm @ (conn(PpX, PpY, pt) + bracket_at(PX, PpY, pt)))

    return Connection(rule, f"vranceanu[{conn.name}]", J.n)


def vranceanu_first_line(conn: Connection, J: EndoField, params: MetallicParams) -> Connection:
    """Literal operator SvK_{PX} Y + P[P'X, PY] + P'[PX, P'Y]; kept for measurement only."""
    P, Pp = _proj(J, params, False)
    svk = schouten_van_kampen(None, J, params, conn)

    def rule(X, Y, pt):
        PX, PpX, PY, PpY = P.apply(X), Pp.apply(X), P.apply(Y), Pp.apply(Y)
        return svk(PX, Y, pt) + P.at(pt) @ bracket_at(PpX, PY, pt) + Pp.at(pt) @ bracket_at(PX, PpY, pt)

    return Connection(rule, f"vranceanu-first-line[{conn.name}]", J.n)


def vranceanu_expanded(conn: Connection, J: EndoField, params: MetallicParams) -> Connection:
    """Expanded form in J, nabla J and the torsion of ``conn``."""
    p, q, d = params.p, params.q, params.disc

    def rule(X, Y, pt):
        Jm = J.at(pt)
        JX, JY = J.apply(X), J.apply(Y)
        dXY = nabla_endo(conn, J, X, Y, pt)
        dYX = nabla_endo(conn, J, Y, X, pt)
        dJYX = nabla_endo(conn, J, JY, X, pt)
        main = 2 * Jm @ dXY - p * dXY + Jm @ dYX + dJYX - p * dYX
        tors = (torsion(conn, JX, JY, pt) + Jm @ torsion(conn, JX, Y, pt) - p * torsion(conn, JX, Y, pt)
                - Jm @ torsion(conn, X, JY, pt) - q * torsion(conn, X, Y, pt))
        return conn(X, Y, pt) + (main + tors) / d

    return Connection(rule, f"vranceanu-expanded[{conn.name}]", J.n)


def vranceanu_torsion_formula(conn: Connection, J: EndoField, params: MetallicParams, X, Y, pt,
                              variant: str = "derived") -> np.ndarray:
    """N_J/disc plus projected base-torsion terms.

    ``variant="printed"`` uses P'T(P'X,P'Y) - P T(PX,PY); ``"derived"`` uses
    P'T(P'X,P'Y) + P T(PX,PY), the form that matches the operator above.
    """
    P, Pp = _proj(J, params, False)
    tP = P.at(pt) @ torsion(conn, P.apply(X), P.apply(Y), pt)
    tPp = Pp.at(pt) @ torsion(conn, Pp.apply(X), Pp.apply(Y), pt)
    sign = -1.0 if variant == "printed" else 1.0
    return nijenhuis(J, X, Y, pt) / params.disc + tPp + sign * tP


def vidal(g: MetricField, J: EndoField, params: MetallicParams, conn: Connection | None = None,
          allow_complex: bool = False) -> Connection:
    """nabla_X Y + (1/disc)[2J(nabla_X J)Y - p(nabla_X J)Y + J(nabla_Y J)X + (nabla_{JY} J)X - p(nabla_Y J)X]."""
    base = conn or levi_civita(g)
    p, d = params.p, params.disc
    if not allow_complex:
        params.require_real()

    def rule(X, Y, pt):
        Jm = J.at(pt)
        dXY = nabla_endo(base, J, X, Y, pt)
        dYX = nabla_endo(base, J, Y, X, pt)
        dJYX = nabla_endo(base, J, J.apply(Y), X, pt)
        return base(X, Y, pt) + (2 * Jm @ dXY - p * dXY + Jm @ dYX + dJYX - p * dYX) / d

    return Connection(rule, f"vidal[{base.name}]", J.n)


def vidal_projector(g: MetricField, J: EndoField, params: MetallicParams, conn: Connection | None = None,
                    allow_complex: bool = False) -> Connection:
    """SvK_X Y - P((nabla_{PY} P')X) - P'((nabla_{P'Y} P)X)."""
    base = conn or levi_civita(g)
    P, Pp = _proj(J, params, allow_complex)
    svk = schouten_van_kampen(g, J, params, base, allow_complex)

    def rule(X, Y, pt):
        PY, PpY = P.apply(Y), Pp.apply(Y)
        return (svk(X, Y, pt) - P.at(pt) @ nabla_endo(base, Pp, PY, X, pt)
                - Pp.at(pt) @ nabla_endo(base, P, PpY, X, pt))

    return Connection(rule, f"vidal-projector[{base.name}]", J.n)


@dataclass
class MetricityDefect:
    direct: complex | float
    closed_nabla: complex | float
    closed_mj: complex | float
    closed_mj_corrected: complex | float


def vidal_metricity_defect(g: MetricField, J: EndoField, params: MetallicParams, X, Y, Z, pt,
                           allow_complex: bool = False) -> MetricityDefect:
    """(V_X g)(Y, Z) for the Vidal connection V, directly and by the two closed forms."""
    lc = levi_civita(g)
    v = vidal(g, J, params, lc, allow_complex)
    direct = nabla_metric(v, g, X, Y, Z, pt)
    gm = g.at(pt)
    Jm = J.at(pt)
    d = params.disc
    JX, JY, JZ = J.apply(X), J.apply(Y), J.apply(Z)

    def gv(a, b):
        return a @ gm @ b

    y, z = Y.at(pt), Z.at(pt)
    # (nabla_Y J)JX is the endomorphism derivative applied to JX
    t1 = nabla_endo(lc, J, JY, X, pt) - nabla_endo(lc, J, Y, JX, pt)
    t2 = nabla_endo(lc, J, JZ, X, pt) - nabla_endo(lc, J, Z, JX, pt)
    closed_nabla = -(gv(t1, z) + gv(t2, y)) / d
    m1 = jordan_tensor(lc, J, Y, X, pt)
    m2 = jordan_tensor(lc, J, Z, X, pt)
    u1 = nabla_endo(lc, J, JX, Y, pt) + nabla_endo(lc, J, Y, JX, pt)
    u2 = nabla_endo(lc, J, JX, Z, pt) + nabla_endo(lc, J, Z, JX, pt)
    closed_mj = (gv(m1, z) + gv(m2, y) + gv(u1, z) + gv(u2, y)) / d
    # terms missing from the M_J form: J(nabla_X J)Y + J(nabla_Y J)X, and Y <-> Z
    w1 = Jm @ (nabla_endo(lc, J, X, Y, pt) + nabla_endo(lc, J, Y, X, pt))
    w2 = Jm @ (nabla_endo(lc, J, X, Z, pt) + nabla_endo(lc, J, Z, X, pt))
    corrected = closed_mj - (gv(w1, z) + gv(w2, y)) / d
    return MetricityDefect(direct, closed_nabla, closed_mj, corrected)


def product_conjugate(conn: Connection, J: EndoField, params: MetallicParams) -> Connection:
    """P(nabla_X PY) - P(nabla_X P'Y) - P'(nabla_X PY) + P'(nabla_X P'Y)."""
    P, Pp = _proj(J, params, False)

    def rule(X, Y, pt):
        a = conn(X, P.apply(Y), pt)
        b = conn(X, Pp.apply(Y), pt)
        return P.at(pt) @ (a - b) + Pp.at(pt) @ (b - a)

    return Connection(rule, f"product-conjugate[{conn.name}]", J.n)


def restricts_to(conn: Connection, frame, which: str, samples, J: EndoField, params: MetallicParams,
                 directions=None, tol: float = 1e-7, allow_complex: bool = False):
    """Max of |P'(nabla_X PY)| (which='D') or |P(nabla_X P'Y)| (which="D'") over samples.

    The frame's fields supply Y; ``directions`` (default coordinate fields) supply X.
    """
    from .chart import coordinate_fields

    P, Pp = _proj(J, params, allow_complex)
    Ys = frame.fields("D" if which == "D" else "D'")
    Xs = directions or coordinate_fields(J.n)
    worst = 0.0
    for pt in samples:
        pt = _pts(pt)
        out = Pp if which == "D" else P
        for Y in Ys:
            for X in Xs:
                worst = max(worst, float(np.linalg.norm(out.at(pt) @ conn(X, Y, pt))))
    return worst < tol, worst


@dataclass
class Kirichenko:
    T: np.ndarray
    A: np.ndarray
    C: np.ndarray
    B: np.ndarray
    C_relation: float
    B_relation: float


def oneill_gray_kirichenko(g: MetricField, J: EndoField, params: MetallicParams, X, Y, pt) -> Kirichenko:
    """O'Neill-Gray T, A and structural/virtual C, B with their T/A relations."""
    lc = levi_civita(g)
    P, Pp = _proj(J, params, False)
    Pm, Ppm = P.at(pt), Pp.at(pt)

    def T(U, V):
        return Pm @ lc(Pp.apply(U), Pp.apply(V), pt) + Ppm @ lc(Pp.apply(U), P.apply(V), pt)

    def A(U, V):
        return Ppm @ lc(P.apply(U), P.apply(V), pt) + Pm @ lc(P.apply(U), Pp.apply(V), pt)

    PX, PpX, PY, PpY = P.apply(X), Pp.apply(X), P.apply(Y), Pp.apply(Y)
    C = 2 * (Pm @ lc(PpX, PpY, pt) + Ppm @ lc(PX, PY, pt))
    B = -2 * (Pm @ lc(PX, PpY, pt) + Ppm @ lc(PpX, PY, pt))
    from .metallic import rel_residual

    c_rel = rel_residual(C, 2 * (T(X, PpY) + A(X, PY)))
    b_rel = rel_residual(B, -2 * (T(X, PY) + A(X, PpY)))
    return Kirichenko(T(X, Y), A(X, Y), C, B, c_rel, b_rel)


def connection_law_residuals(conn: Connection, X: VectorField, Y: VectorField, f, pt) -> dict:
    """Function-linearity in X and the Leibniz rule in Y for a scalar expression f."""
    from ._compile import evaluate_many

    fv = evaluate_many((f,), pt)[0]
    Xf = X.derivative(f)
    xf = evaluate_many((Xf,), pt)[0]
    lin = conn(X.scale(f), Y, pt) - fv * conn(X, Y, pt)
    leib = conn(X, Y.scale(f), pt) - (xf * Y.at(pt) + fv * conn(X, Y, pt))
    return {"f-linear": float(np.abs(lin).max()), "leibniz": float(np.abs(leib).max())}
