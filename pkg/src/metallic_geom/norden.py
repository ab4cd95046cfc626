"""Norden branch (p^2 + 4q < 0): complexified structure, complex projectors,
the induced almost complex structure J_c and complex adapted connections."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement

import numpy as np

from .chart import EndoField, MetricField, VectorField, bracket_at, coordinate_fields, levi_civita, torsion
from .connections import schouten_van_kampen, vidal, vranceanu
from .metallic import (
    MetallicParams, jordan, jordan_tensor, nijenhuis, pivot_columns, projector_fields, rel_residual,
)


def _pt(pt):
    return tuple(float(v) for v in pt)


def complex_field(X: VectorField, Y: VectorField) -> VectorField:
    """X + iY."""
    return VectorField(X.re, Y.re)


@dataclass
class Complexified:
    JC: np.ndarray
    gC: complex


def complexify(g: MetricField, J: EndoField, X1, Y1, X2, Y2, pt) -> Complexified:
    """J^C(X1 + iY1) and g^C(X1 + iY1, X2 + iY2) at pt."""
    pt = _pt(pt)
    Jm, gm = J.at(pt), g.at(pt)
    x1, y1, x2, y2 = (V.at(pt) for V in (X1, Y1, X2, Y2))
    jc = Jm @ x1 + 1j * (Jm @ y1)
    gc = (x1 @ gm @ x2 - y1 @ gm @ y2) + 1j * (x1 @ gm @ y2 + y1 @ gm @ x2)
    return Complexified(jc, complex(gc))


def g_complex(g: MetricField, u: np.ndarray, v: np.ndarray, pt) -> complex:
    """Complex-bilinear extension of g on numeric vectors."""
    return complex(u @ g.at(_pt(pt)) @ v)


@dataclass
class ComplexProjectorPair:
    P: np.ndarray
    Pp: np.ndarray
    sigma_plus: complex
    sigma_minus: complex

    def residuals(self) -> dict:
        I = np.eye(self.P.shape[0])
        return {
            "idempotent_P": float(np.abs(self.P @ self.P - self.P).max()),
            "idempotent_P'": float(np.abs(self.Pp @ self.Pp - self.Pp).max()),
            "complementary": float(np.abs(self.P + self.Pp - I).max()),
            "annihilating": float(max(np.abs(self.P @ self.Pp).max(), np.abs(self.Pp @ self.P).max())),
            "conjugate": float(np.abs(self.Pp - np.conj(self.P)).max()),
            "sigma_conjugate": abs(self.sigma_plus - np.conj(self.sigma_minus)),
        }


def complex_projector_fields(J: EndoField, params: MetallicParams):
    params.require_norden()
    return projector_fields(J, params, allow_complex=True)


def complex_projectors(J: EndoField, params: MetallicParams, pt) -> ComplexProjectorPair:
    P, Pp = complex_projector_fields(J, params)
    pt = _pt(pt)
    return ComplexProjectorPair(P.at(pt), Pp.at(pt), params.sigma_plus, params.sigma_minus)


@dataclass
class ComplexFrames:
    D: np.ndarray     # columns spanning D^C = ker P^C'
    Dp: np.ndarray    # columns spanning D^C' = ker P^C
    conjugacy: float  # |conj(D) - Dp| for matching pivots


def complex_frames(J: EndoField, params: MetallicParams, pt) -> ComplexFrames:
    pair = complex_projectors(J, params, pt)
    cols = pivot_columns(pair.P)
    D = pair.P[:, cols]
    Dp = pair.Pp[:, cols]
    return ComplexFrames(D, Dp, float(np.abs(np.conj(D) - Dp).max()) if cols else 0.0)


def norden_jc(J: EndoField, params: MetallicParams) -> EndoField:
    """J_c = -(2J - pI)/sqrt(-disc), a real almost complex structure."""
    params.require_norden()
    r = np.sqrt(-params.disc)
    return J.scale(-2.0 / r).shift(params.p / r)


@dataclass
class NordenCheck:
    square: float            # |J_c^2 + I|
    g_symmetry: float        # |g J_c - (g J_c)^T|
    nijenhuis: float         # relative |N_Jc - 4/(-disc) N_J|
    eig_on_Dp: complex       # eigenvalue of J_c on D^C'
    eig_on_D: complex        # eigenvalue of J_c on D^C


def norden_check(g: MetricField, J: EndoField, params: MetallicParams, pt, fields=None) -> NordenCheck:
    pt = _pt(pt)
    Jc = norden_jc(J, params)
    C = Jc.at(pt)
    n = J.n
    gm = g.at(pt)
    fields = fields or coordinate_fields(n)
    nij = 0.0
    for X, Y in combinations(fields, 2):
        nij = max(nij, rel_residual(nijenhuis(Jc, X, Y, pt), 4.0 / (-params.disc) * nijenhuis(J, X, Y, pt)))
    fr = complex_frames(J, params, pt)

    def eig(cols):
        if cols.shape[1] == 0:
            return complex("nan")
        v = cols[:, 0]
        return complex((np.conj(v) @ (C @ v)) / (np.conj(v) @ v))

    return NordenCheck(
        square=float(np.abs(C @ C + np.eye(n)).max()),
        g_symmetry=float(np.abs(gm @ C - (gm @ C).T).max()),
        nijenhuis=nij,
        eig_on_Dp=eig(fr.Dp),
        eig_on_D=eig(fr.D),
    )


KINDS = ("SVK", "VRANCEANU", "VIDAL")


def complex_connection(kind: str, g: MetricField, J: EndoField, params: MetallicParams):
    """Complex adapted connection over the complexified Levi-Civita connection."""
    params.require_norden()
    lc = levi_civita(g)
    kind = kind.upper()
    if kind == "SVK":
        return schouten_van_kampen(g, J, params, lc, allow_complex=True)
    if kind == "VRANCEANU":
        return vranceanu(lc, J, params, allow_complex=True)
    if kind == "VIDAL":
        return vidal(g, J, params, lc, allow_complex=True)
    raise ValueError(f"unknown connection kind {kind!r}")


def complexified_coordinate_fields(n: int) -> list:
    """d_k and i*d_k plus the mixed combinations d_k + i*d_l."""
    coords = coordinate_fields(n)
    out = list(coords) + [c.scale(1j) for c in coords]
    out += [a + b.scale(1j) for a, b in combinations(coords, 2)]
    return out


@dataclass
class ComplexInvarianceReport:
    frobenius_D: float
    frobenius_Dp: float
    geodesic_D: float
    geodesic_Dp: float
    nijenhuis: float
    jordan: float
    vidal_torsion: float
    integrable_agree: bool
    geodesic_agree: bool
    samples: int


def complex_invariance_report(g: MetricField, J: EndoField, params: MetallicParams, samples,
                              zero_tol: float = 1e-7) -> ComplexInvarianceReport:
    params.require_norden()
    P, Pp = complex_projector_fields(J, params)
    lc = levi_civita(g)
    vd = vidal(g, J, params, lc, allow_complex=True)
    n = J.n
    fields = complexified_coordinate_fields(n)
    PF = [P.apply(F) for F in fields]
    PpF = [Pp.apply(F) for F in fields]
    coords = coordinate_fields(n)
    acc = dict.fromkeys(("fD", "fDp", "gD", "gDp", "N", "M", "T"), 0.0)
    for pt in samples:
        pt = _pt(pt)
        Pm, Ppm = P.at(pt), Pp.at(pt)
        for i, j in combinations_with_replacement(range(len(fields)), 2):
            if i != j:
                acc["fD"] = max(acc["fD"], float(np.linalg.norm(Ppm @ bracket_at(PF[i], PF[j], pt))))
                acc["fDp"] = max(acc["fDp"], float(np.linalg.norm(Pm @ bracket_at(PpF[i], PpF[j], pt))))
            acc["gD"] = max(acc["gD"], float(np.linalg.norm(Ppm @ jordan(lc, PF[i], PF[j], pt))))
            acc["gDp"] = max(acc["gDp"], float(np.linalg.norm(Pm @ jordan(lc, PpF[i], PpF[j], pt))))
        for X, Y in combinations_with_replacement(coords, 2):
            acc["N"] = max(acc["N"], float(np.linalg.norm(nijenhuis(J, X, Y, pt))))
            acc["M"] = max(acc["M"], float(np.linalg.norm(jordan_tensor(lc, J, X, Y, pt))))
            acc["T"] = max(acc["T"], float(np.linalg.norm(torsion(vd, X, Y, pt))))

    def same(*vals):
        return len({v < zero_tol for v in vals}) == 1

    return ComplexInvarianceReport(
        acc["fD"], acc["fDp"], acc["gD"], acc["gDp"], acc["N"], acc["M"], acc["T"],
        same(acc["fD"], acc["fDp"], acc["N"], acc["T"]), same(acc["gD"], acc["gDp"], acc["M"]),
        len(np.atleast_2d(samples)),
    )
