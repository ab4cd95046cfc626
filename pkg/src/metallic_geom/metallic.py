"""Metallic structures: parameters, validation, projectors, distributions and
the associated bracket/tensor family.

The tensor routines take the endomorphism and the connection as arguments, so
the same code evaluates N, M and H for J, for the projectors, for the almost
product structure, and (with complex fields) for the complexified structure.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

from .chart import (
    Connection, EndoField, MetricField, VectorField, bracket_at, coordinate_fields,
    levi_civita, nabla_endo,
)

RANK_RTOL = 1e-8


class BranchError(ValueError):
    """Raised when an operation needs the other sign of the discriminant."""


def rel_residual(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


@dataclass(frozen=True)
class MetallicParams:
    p: float
    q: float

    @property
    def disc(self) -> float:
        return self.p * self.p + 4.0 * self.q

    @property
    def sqrt_disc(self):
        d = self.disc
        return math.sqrt(d) if d >= 0 else complex(0.0, math.sqrt(-d))

    @property
    def sigma_plus(self):
        return (self.p + self.sqrt_disc) / 2

    @property
    def sigma_minus(self):
        return (self.p - self.sqrt_disc) / 2

    def require_real(self):
        if self.disc <= 0:
            raise BranchError(f"requires p^2+4q > 0 (real branch); got {self.disc:g}")

    def require_norden(self):
        if self.disc >= 0:
            raise BranchError(f"requires p^2+4q < 0 (Norden branch); got {self.disc:g}")


# --- validation ------------------------------------------------------------------

@dataclass
class ValidationReport:
    metallic_residual: float
    symmetry_residual: float
    disc: float
    signature: tuple
    indefinite: bool
    signature_ok: bool
    skew_residual: float
    skew_diagnostic: str
    samples: int
    tol: float
    worst_point: tuple = ()

    @property
    def ok(self) -> bool:
        return (self.metallic_residual < self.tol and self.symmetry_residual < self.tol
                and self.signature_ok)


def validate(g: MetricField, J: EndoField, params: MetallicParams, samples, tol: float = 1e-8) -> ValidationReport:
    """Metallic law, g-symmetry, signature and skew diagnostic over sample points."""
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if g.n != J.n:
        raise ValueError("metric and endomorphism dimensions differ")
    if pts.shape[0] == 0:
        raise ValueError("empty sample set")
    if pts.shape[1] != g.n:
        raise ValueError("sample points have the wrong dimension")
    Js = J.batch(pts)
    gs = g.batch(pts)
    I = np.eye(g.n)
    law = np.einsum("sab,sbc->sac", Js, Js) - params.p * Js - params.q * I
    law_norm = np.linalg.norm(law, axis=(1, 2))
    gJ = np.einsum("sab,sbc->sac", gs, Js)
    sym_norm = np.linalg.norm(gJ - np.swapaxes(gJ, 1, 2), axis=(1, 2))
    skew_norm = np.linalg.norm(gJ + np.swapaxes(gJ, 1, 2), axis=(1, 2))
    eig = np.linalg.eigvalsh(0.5 * (gs + np.swapaxes(gs, 1, 2)))
    npos = int(np.sum(eig[0] > 0))
    sig = (npos, g.n - npos)
    indefinite = bool(np.any(eig.min(axis=1) < 0) and np.any(eig.max(axis=1) > 0))
    # a g-symmetric J on a definite metric has real eigenvalues
    sig_ok = not (params.disc < 0 and not indefinite)
    skew = float(skew_norm.max())
    jnorm = float(np.linalg.norm(Js, axis=(1, 2)).max())
    if skew < tol and jnorm > tol:
        diag = "g-skew J: p must vanish" + ("" if abs(params.p) < tol else " (violated)")
    else:
        diag = "not g-skew"
    worst = int(np.argmax(law_norm + sym_norm))
    return ValidationReport(
        metallic_residual=float(law_norm.max()),
        symmetry_residual=float(sym_norm.max()),
        disc=params.disc,
        signature=sig,
        indefinite=indefinite,
        signature_ok=sig_ok,
        skew_residual=skew,
        skew_diagnostic=diag,
        samples=pts.shape[0],
        tol=tol,
        worst_point=tuple(pts[worst]),
    )


# --- projectors and distributions -------------------------------------------------

@functools.lru_cache(maxsize=64)
def projector_fields(J: EndoField, params: MetallicParams, allow_complex: bool = False):
    """Expression fields P = (-J + s+ I)/sqrt(disc), P' = (J - s- I)/sqrt(disc)."""
    if allow_complex:
        if params.disc == 0:
            raise BranchError("projectors need p^2+4q != 0")
    else:
        params.require_real()
    r = params.sqrt_disc
    P = J.scale(-1.0 / r).shift(params.sigma_plus / r)
    Pp = J.scale(1.0 / r).shift(-params.sigma_minus / r)
    return P, Pp


@dataclass
class ProjectorPair:
    P: np.ndarray
    Pp: np.ndarray

    def residuals(self) -> dict:
        I = np.eye(self.P.shape[0])
        return {
            "idempotent_P": float(np.abs(self.P @ self.P - self.P).max()),
            "idempotent_P'": float(np.abs(self.Pp @ self.Pp - self.Pp).max()),
            "complementary": float(np.abs(self.P + self.Pp - I).max()),
            "annihilating": float(max(np.abs(self.P @ self.Pp).max(), np.abs(self.Pp @ self.P).max())),
        }


def projectors(J: EndoField, params: MetallicParams, pt) -> ProjectorPair:
    P, Pp = projector_fields(J, params)
    return ProjectorPair(P.at(pt), Pp.at(pt))


def numerical_rank(m: np.ndarray) -> int:
    s = np.linalg.svd(np.atleast_2d(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def pivot_columns(m: np.ndarray) -> list[int]:
    """Column indices of a maximal independent set, chosen by pivoted QR."""
    r = numerical_rank(m)
    if r == 0:
        return []
    _, _, piv = qr(m, pivoting=True)
    return sorted(int(i) for i in piv[:r])


@dataclass
class DistributionFrame:
    basept: tuple
    D: list = field(default_factory=list)
    Dp: list = field(default_factory=list)
    P: EndoField | None = None
    Pp: EndoField | None = None

    @property
    def rank_D(self) -> int:
        return len(self.D)

    @property
    def rank_Dp(self) -> int:
        return len(self.Dp)

    def fields(self, which: str) -> list:
        return self.D if which == "D" else self.Dp


def distribution_frame(J: EndoField, params: MetallicParams, basept, allow_complex: bool = False) -> DistributionFrame:
    """Spanning fields P(d_i) for D and P'(d_i) for D' with pivot-chosen indices."""
    P, Pp = projector_fields(J, params, allow_complex)
    pt = tuple(float(v) for v in basept)
    coords = coordinate_fields(J.n)
    D = [P.apply(coords[i]) for i in pivot_columns(P.at(pt))]
    Dp = [Pp.apply(coords[i]) for i in pivot_columns(Pp.at(pt))]
    return DistributionFrame(pt, D, Dp, P, Pp)


# --- brackets and associated tensors ----------------------------------------------

def jordan(conn: Connection, X, Y, pt) -> np.ndarray:
    """{X, Y} = nabla_X Y + nabla_Y X."""
    return conn(X, Y, pt) + conn(Y, X, pt)


def k_bracket(K: EndoField, X, Y, pt) -> np.ndarray:
    """[X, Y]_K = [KX, Y] + [X, KY] - K[X, Y]."""
    return bracket_at(K.apply(X), Y, pt) + bracket_at(X, K.apply(Y), pt) - K.at(pt) @ bracket_at(X, Y, pt)


def nijenhuis(K: EndoField, X, Y, pt) -> np.ndarray:
    return K.at(pt) @ k_bracket(K, X, Y, pt) - bracket_at(K.apply(X), K.apply(Y), pt)


def k_jordan(conn: Connection, K: EndoField, X, Y, pt) -> np.ndarray:
    """{X, Y}_K = {KX, Y} + {X, KY} - K{X, Y}."""
    return jordan(conn, K.apply(X), Y, pt) + jordan(conn, X, K.apply(Y), pt) - K.at(pt) @ jordan(conn, X, Y, pt)


def jordan_tensor(conn: Connection, K: EndoField, X, Y, pt) -> np.ndarray:
    return K.at(pt) @ k_jordan(conn, K, X, Y, pt) - jordan(conn, K.apply(X), K.apply(Y), pt)


def deformation(conn: Connection, K: EndoField, X, Y, pt) -> np.ndarray:
    """H_K(X, Y) = K (nabla_X K) Y - (nabla_{KX} K) Y."""
    return K.at(pt) @ nabla_endo(conn, K, X, Y, pt) - nabla_endo(conn, K, K.apply(X), Y, pt)


TENSOR_KINDS = ("J_BRACKET", "NIJENHUIS", "JORDAN_BRACKET", "JORDAN_TENSOR", "DEFORMATION_HJ")


def assoc_tensor(kind: str, g: MetricField | None, J: EndoField, X, Y, pt, conn: Connection | None = None):
    kind = kind.upper()
    if kind == "J_BRACKET":
        return k_bracket(J, X, Y, pt)
    if kind == "NIJENHUIS":
        return nijenhuis(J, X, Y, pt)
    if conn is None:
        if g is None:
            raise ValueError(f"{kind} needs a metric (Levi-Civita connection)")
        conn = levi_civita(g)
    if kind == "JORDAN_BRACKET":
        return k_jordan(conn, J, X, Y, pt)
    if kind == "JORDAN_TENSOR":
        return jordan_tensor(conn, J, X, Y, pt)
    if kind == "DEFORMATION_HJ":
        return deformation(conn, J, X, Y, pt)
    raise ValueError(f"unknown tensor kind {kind!r}")


# --- deformation suite ---------------------------------------------------------------

@dataclass
class DeformationSuite:
    H: np.ndarray
    Hp: np.ndarray
    L: np.ndarray
    Lp: np.ndarray
    K: np.ndarray
    Kp: np.ndarray
    closed: dict
    HJ_over_disc: np.ndarray

    def closed_form_residuals(self) -> dict:
        return {
            "L": rel_residual(self.L, self.closed["L"]),
            "L'": rel_residual(self.Lp, self.closed["L'"]),
            "K": rel_residual(self.K, self.closed["K"]),
            "K'": rel_residual(self.Kp, self.closed["K'"]),
            "H+H'=H_J/disc": rel_residual(self.H + self.Hp, self.HJ_over_disc),
            "H+H'=-H_J/disc": rel_residual(self.H + self.Hp, -self.HJ_over_disc),
        }


def _h_pair(conn, P, Pp, X, Y, pt):
    H = Pp.at(pt) @ conn(P.apply(X), P.apply(Y), pt)
    Hp = P.at(pt) @ conn(Pp.apply(X), Pp.apply(Y), pt)
    return H, Hp


def deformation_suite(g: MetricField, J: EndoField, params: MetallicParams, X, Y, pt,
                      conn: Connection | None = None, allow_complex: bool = False) -> DeformationSuite:
    """H, H' by projector definition, their (anti)symmetric parts and the closed forms."""
    conn = conn or levi_civita(g)
    P, Pp = projector_fields(J, params, allow_complex)
    H, Hp = _h_pair(conn, P, Pp, X, Y, pt)
    Hr, Hpr = _h_pair(conn, P, Pp, Y, X, pt)
    L, Lp = 0.5 * (H - Hr), 0.5 * (Hp - Hpr)
    K, Kp = 0.5 * (H + Hr), 0.5 * (Hp + Hpr)
    Jm = J.at(pt)
    d, r = params.disc, params.sqrt_disc
    sp, sm = params.sigma_plus, params.sigma_minus
    N = nijenhuis(J, X, Y, pt)
    M = jordan_tensor(conn, J, X, Y, pt)
    c = 2.0 * d * r
    closed = {
        "L": (sm * N - Jm @ N) / c,
        "L'": -(sp * N - Jm @ N) / c,
        "K": (sm * M - Jm @ M) / c,
        "K'": -(sp * M - Jm @ M) / c,
    }
    HJ = deformation(conn, J, X, Y, pt)
    return DeformationSuite(H, Hp, L, Lp, K, Kp, closed, HJ / d)


# --- almost product and subtangent structures ---------------------------------------

@functools.lru_cache(maxsize=64)
def almost_product(J: EndoField, params: MetallicParams) -> EndoField:
    """J_p = -(2J - pI)/sqrt(disc)."""
    params.require_real()
    r = params.sqrt_disc
    return J.scale(-2.0 / r).shift(params.p / r)


def subtangent(J: EndoField, p: float, q: float | None = None, tol: float = 1e-10) -> EndoField:
    """J_t = J - (p/2) I, defined when p^2 + 4q vanishes."""
    if q is not None and abs(p * p + 4.0 * q) >= tol:
        raise BranchError(f"subtangent structure needs p^2+4q = 0; got {p * p + 4.0 * q:g}")
    return J.shift(-p / 2.0)


def jp_relations(g: MetricField, J: EndoField, params: MetallicParams, X, Y, pt) -> dict:
    """Residuals of the bracket/tensor relations between J and J_p."""
    conn = levi_civita(g)
    Jp = almost_product(J, params)
    d, r, p = params.disc, params.sqrt_disc, params.p
    XY = bracket_at(X, Y, pt)
    sym = jordan(conn, X, Y, pt)
    return {
        "[X,Y]_J": rel_residual(k_bracket(J, X, Y, pt), -(r / 2) * k_bracket(Jp, X, Y, pt) + (p / 2) * XY),
        "N_J": rel_residual(nijenhuis(J, X, Y, pt), (d / 4) * nijenhuis(Jp, X, Y, pt)),
        "{X,Y}_J": rel_residual(k_jordan(conn, J, X, Y, pt), -(r / 2) * k_jordan(conn, Jp, X, Y, pt) + (p / 2) * sym),
        "M_J": rel_residual(jordan_tensor(conn, J, X, Y, pt), (d / 4) * jordan_tensor(conn, Jp, X, Y, pt)),
        "H_J": rel_residual(deformation(conn, J, X, Y, pt), (d / 4) * deformation(conn, Jp, X, Y, pt)),
    }


def projector_scalings(g: MetricField, J: EndoField, params: MetallicParams, X, Y, pt) -> dict:
    """Residuals of N_P = N_P' = N_J/disc and the M, H analogues."""
    conn = levi_civita(g)
    P, Pp = projector_fields(J, params)
    d = params.disc
    out = {}
    for label, fn in (("N", lambda K: nijenhuis(K, X, Y, pt)),
                      ("M", lambda K: jordan_tensor(conn, K, X, Y, pt)),
                      ("H", lambda K: deformation(conn, K, X, Y, pt))):
        ref = fn(J) / d
        out[f"{label}_P"] = rel_residual(fn(P), ref)
        out[f"{label}_P'"] = rel_residual(fn(Pp), ref)
    return out
