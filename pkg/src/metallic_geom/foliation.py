"""Integrability, geodesic invariance and leaf geometry of the metallic distributions.

Also: the Chen first invariant with its inequality, and metallic maps with the
pull-back of the target distribution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement

import numpy as np
from scipy.linalg import subspace_angles
from scipy.optimize import minimize
from scipy.stats import qmc

from . import expr as E
from . import kernels
from ._compile import evaluate_many
from .chart import (
    Chart, EndoField, MetricField, VectorField, bracket_at, christoffel, coordinate_fields, levi_civita,
    lie_bracket, nabla_endo, riemann_tensor,
)
from .metallic import MetallicParams, jordan, jordan_tensor, nijenhuis, numerical_rank, pivot_columns, projector_fields

ZERO_TOL = 1e-7
MARGIN = 1e-3


class NotInDistributionError(ValueError):
    pass


class IndefiniteError(ValueError):
    pass


def _pt(pt):
    return tuple(float(v) for v in pt)


def classify(value: float, zero_tol: float = ZERO_TOL, margin: float = MARGIN) -> str:
    if value < zero_tol:
        return "zero"
    if value > margin:
        return "nonzero"
    return "ambiguous"


# --- integrability and geodesic invariance ----------------------------------------

@dataclass
class DistributionVerdict:
    name: str
    rank: int
    direct: float        # Frobenius or Jordan projection defect
    eigen: float         # |J o T - sigma T| for T = N_J or M_J
    nabla_j: float       # (nabla_X J)Y -/+ (nabla_Y J)X on frame fields
    holds: bool
    agree: bool


@dataclass
class FoliationReport:
    kind: str                       # "integrability" or "geodesic"
    D: DistributionVerdict
    Dp: DistributionVerdict
    samples: int
    worst_point: tuple = ()

    @property
    def agree(self) -> bool:
        return self.D.agree and self.Dp.agree


def _invariance(kind: str, g, J, params, samples, zero_tol=ZERO_TOL) -> FoliationReport:
    conn = levi_civita(g)
    P, Pp = projector_fields(J, params)
    n = J.n
    coords = coordinate_fields(n)
    sm, sp = params.sigma_minus, params.sigma_plus
    Dfields = [P.apply(c) for c in coords]
    Dpfields = [Pp.apply(c) for c in coords]
    sign = -1.0 if kind == "integrability" else 1.0
    pairs = list(combinations(range(n), 2) if kind == "integrability" else combinations_with_replacement(range(n), 2))
    acc = {k: 0.0 for k in ("dD", "dDp", "eD", "eDp", "rD", "rDp")}
    worst, wpt = -1.0, ()
    for pt in samples:
        pt = _pt(pt)
        Jm = J.at(pt)
        Pm, Ppm = P.at(pt), Pp.at(pt)
        ranks = (numerical_rank(Pm), numerical_rank(Ppm))
        for i, j in pairs:
            for label, F, out, sig, r in (("D", Dfields, Ppm, sm, ranks[0]), ("Dp", Dpfields, Pm, sp, ranks[1])):
                if r == 0:
                    continue
                X, Y = F[i], F[j]
                if kind == "integrability":
                    v = bracket_at(X, Y, pt)
                else:
                    v = jordan(conn, X, Y, pt)
                d = float(np.linalg.norm(out @ v))
                rem = float(np.linalg.norm(nabla_endo(conn, J, X, Y, pt) + sign * nabla_endo(conn, J, Y, X, pt)))
                acc["d" + label] = max(acc["d" + label], d)
                acc["r" + label] = max(acc["r" + label], rem)
                if d > worst:
                    worst, wpt = d, pt
        for i, j in pairs:
            X, Y = coords[i], coords[j]
            T = nijenhuis(J, X, Y, pt) if kind == "integrability" else jordan_tensor(conn, J, X, Y, pt)
            acc["eD"] = max(acc["eD"], float(np.linalg.norm(Jm @ T - sm * T)))
            acc["eDp"] = max(acc["eDp"], float(np.linalg.norm(Jm @ T - sp * T)))
    pts = np.atleast_2d(samples)
    r0 = numerical_rank(P.at(_pt(pts[0]))) if len(pts) else 0

    def verdict(name, d, e, r, rank):
        sides = {classify(d, zero_tol), classify(e, zero_tol), classify(r, zero_tol)}
        return DistributionVerdict(name, rank, d, e, r, d < zero_tol, len(sides) == 1 and "ambiguous" not in sides)

    return FoliationReport(
        kind,
        verdict("D", acc["dD"], acc["eD"], acc["rD"], r0),
        verdict("D'", acc["dDp"], acc["eDp"], acc["rDp"], n - r0),
        len(pts),
        wpt,
    )


def integrability_report(g, J, params: MetallicParams, samples, zero_tol: float = ZERO_TOL) -> FoliationReport:
    """Frobenius defect, the N_J eigencondition and the (nabla J) antisymmetry, per distribution."""
    params.require_real()
    return _invariance("integrability", g, J, params, samples, zero_tol)


def geodesic_invariance_report(g, J, params: MetallicParams, samples, zero_tol: float = ZERO_TOL) -> FoliationReport:
    """Jordan-bracket defect, the M_J eigencondition and the (nabla J) symmetrization, per distribution."""
    params.require_real()
    return _invariance("geodesic", g, J, params, samples, zero_tol)


# --- induced connection and brackets on D -------------------------------------------

class InducedConnection:
    """nabla^D_X Y = P(nabla_X Y) on fields valued in D (or P'(...) on D')."""

    def __init__(self, g: MetricField, J: EndoField, params: MetallicParams, which: str = "D"):
        params.require_real()
        self.g, self.J, self.params, self.which = g, J, params, which
        P, Pp = projector_fields(J, params)
        self.proj, self.comp = (P, Pp) if which == "D" else (Pp, P)
        self.base = levi_civita(g)

    def check(self, *fields, pt):
        for F in fields:
            if float(np.linalg.norm(self.comp.at(pt) @ F.at(pt))) > ZERO_TOL:
                raise NotInDistributionError(f"field not in {self.which} at {pt}")

    def __call__(self, X, Y, pt):
        pt = _pt(pt)
        self.check(X, Y, pt=pt)
        return self.proj.at(pt) @ self.base(X, Y, pt)

    def bracket(self, X, Y) -> VectorField:
        """[X, Y]_D = P[X, Y] as a field."""
        return self.proj.apply(lie_bracket(X, Y))

    def bracket_at(self, X, Y, pt):
        return self.proj.at(pt) @ bracket_at(X, Y, pt)

    def torsion_projected(self, X, Y, pt):
        """Torsion against [X,Y]_D; identically zero for a torsion-free base."""
        return self(X, Y, pt) - self(Y, X, pt) - self.bracket_at(X, Y, pt)

    def torsion_full(self, X, Y, pt):
        """Torsion against the ambient bracket; equals -P'[X,Y], so it vanishes iff D is involutive."""
        return self(X, Y, pt) - self(Y, X, pt) - bracket_at(X, Y, pt)

    def metricity(self, X, Y, Z, pt) -> float:
        pt = _pt(pt)
        self.check(Y, Z, pt=pt)
        gm, dg = self.g.at(pt), self.g.d(pt)
        x, y, z = X.at(pt), Y.at(pt), Z.at(pt)
        xg = np.einsum("i,iab,a,b->", x, dg, y, z) + (Y.jac(pt) @ x) @ gm @ z + y @ gm @ (Z.jac(pt) @ x)
        self.check(X, pt=pt)
        return float(xg - self(X, Y, pt) @ gm @ z - y @ gm @ self(X, Z, pt))


def induced_connection(g, J, params, which: str = "D") -> InducedConnection:
    return InducedConnection(g, J, params, which)


def jacobiator_D(g, J, params, X, Y, Z, pt) -> np.ndarray:
    """Cyclic sum of [X, [Y, Z]_D]_D."""
    ind = InducedConnection(g, J, params, "D")
    pt = _pt(pt)
    ind.check(X, Y, Z, pt=pt)
    out = np.zeros(J.n)
    for A, B, C in ((X, Y, Z), (Y, Z, X), (Z, X, Y)):
        out = out + ind.bracket_at(A, ind.bracket(B, C), pt)
    return out


def jacobiator_triples(frame_fields: list, n: int) -> list:
    """Three distinct span combinations with coordinate-function coefficients."""
    xs = [E.coord(i) for i in range(n)]
    if len(frame_fields) == 1:
        A = frame_fields[0]
        return [(A, A.scale(xs[0]), A.scale(xs[-1] * xs[-1]))]
    A, B = frame_fields[0], frame_fields[1]
    return [
        (A, B, A.scale(xs[-1]) + B),
        (A, B.scale(xs[0]), A + B.scale(xs[-1])),
        (A.scale(xs[-1]), B, A.scale(xs[0]) + B.scale(xs[0] * xs[-1])),
    ]


# --- second fundamental form and leaf curvature --------------------------------------

def second_fundamental_form(g, J, params, X, Y, pt) -> np.ndarray:
    """h(X, Y) = P'(nabla_X Y) for D-valued fields."""
    ind = InducedConnection(g, J, params, "D")
    pt = _pt(pt)
    ind.check(X, Y, pt=pt)
    return ind.comp.at(pt) @ ind.base(X, Y, pt)


def h_tensor(g, J, params, pt) -> np.ndarray:
    """B[a, i, b] with h(u, v)^a = B[a, i, b] u^i v^b for u, v in D at pt."""
    P, Pp = projector_fields(J, params)
    pt = _pt(pt)
    dP = P.d(pt)            # [i, a, b]
    Pm = P.at(pt)
    gam = christoffel(g, pt)  # [a, i, j]
    B = np.einsum("iab->aib", dP) + np.einsum("aij,jb->aib", gam, Pm)
    return np.einsum("ca,aib->cib", Pp.at(pt), B)


def orthonormal_frame(g, J, params, pt) -> np.ndarray:
    """Columns: a g-orthonormal basis of D at pt (Gram-Schmidt on pivoted P columns)."""
    P, _ = projector_fields(J, params)
    pt = _pt(pt)
    Pm = P.at(pt)
    gm = g.at(pt)
    basis = []
    for j in pivot_columns(Pm):
        v = Pm[:, j].copy()
        for e in basis:
            v = v - (e @ gm @ v) * e
        nn = v @ gm @ v
        if nn <= 1e-14:
            raise IndefiniteError("metric restricted to D is not positive definite")
        basis.append(v / np.sqrt(nn))
    return np.array(basis).T if basis else np.zeros((J.n, 0))


def _leaf_data(g, J, params, pt, frame=None):
    pt = _pt(pt)
    Ef = orthonormal_frame(g, J, params, pt) if frame is None else frame
    B = h_tensor(g, J, params, pt)
    hmat = np.einsum("aib,ik,bl->kla", B, Ef, Ef)  # h(e_k, e_l)
    rm = riemann_tensor(g, pt)
    rmD = np.einsum("ijkl,ia,jb,kc,ld->abcd", rm, Ef, Ef, Ef, Ef)
    gm = g.at(pt)
    hh = np.einsum("ika,ab,jlb->ijkl", hmat, gm, hmat)  # g(h(e_i,e_k), h(e_j,e_l))
    # R^D(X,Y,Z,W) = R^M - g(h(X,Z), h(Y,W)) + g(h(X,W), h(Y,Z))
    rD = rmD - hh + hh.transpose(0, 1, 3, 2)
    return Ef, hmat, rD, gm


def mean_curvature(g, J, params, pt, frame=None):
    """(H_mean vector, g(H_mean, H_mean)) over a g-orthonormal D-frame."""
    Ef, hmat, _, gm = _leaf_data(g, J, params, pt, frame)
    n = Ef.shape[1]
    H = np.einsum("kka->a", hmat) / n if n else np.zeros(J.n)
    return H, float(H @ gm @ H)


def gauss_rd(g, J, params, X, Y, Z, W, pt) -> float:
    """R^D(X,Y,Z,W) = R^M(X,Y,Z,W) - g(h(X,Z), h(Y,W)) + g(h(X,W), h(Y,Z))."""
    pt = _pt(pt)
    vec = [V.at(pt) if isinstance(V, VectorField) else np.asarray(V, dtype=float) for V in (X, Y, Z, W)]
    _, Pp = projector_fields(J, params)
    for v in vec:
        if np.linalg.norm(Pp.at(pt) @ v) > ZERO_TOL:
            raise NotInDistributionError("argument not in D")
    B = h_tensor(g, J, params, pt)
    if _h_asymmetry(g, J, params, pt) > ZERO_TOL:
        warnings.warn("D is not integrable at this point; the Gauss equation is only stated for integrable D",
                      stacklevel=2)
    gm = g.at(pt)

    def h(u, v):
        return np.einsum("aib,i,b->a", B, u, v)

    x, y, z, w = vec
    rm = np.einsum("ijkl,i,j,k,l->", riemann_tensor(g, pt), x, y, z, w)
    return float(rm - h(x, z) @ gm @ h(y, w) + h(x, w) @ gm @ h(y, z))


def _h_asymmetry(g, J, params, pt) -> float:
    Ef = _d_basis(J, params, pt)
    B = h_tensor(g, J, params, pt)
    hm = np.einsum("aib,ik,bl->kla", B, Ef, Ef)
    return float(np.abs(hm - np.swapaxes(hm, 0, 1)).max()) if hm.size else 0.0


def _d_basis(J, params, pt):
    P, _ = projector_fields(J, params)
    Pm = P.at(_pt(pt))
    return Pm[:, pivot_columns(Pm)]


def h_asymmetry(g, J, params, pt) -> float:
    """max |h(u,v) - h(v,u)| over D basis vectors; zero iff D is involutive at pt."""
    return _h_asymmetry(g, J, params, pt)


# --- sectional curvature of D ---------------------------------------------------------

def _plane_k(rD, u, v):
    num = np.einsum("abcd,a,b,c,d->", rD, u, v, v, u)
    den = (u @ u) * (v @ v) - (u @ v) ** 2
    return num / den


def _plane_k_grad(rD, z, n):
    u, v = z[:n], z[n:]
    uu, vv, uv = u @ u, v @ v, u @ v
    num = np.einsum("abcd,a,b,c,d->", rD, u, v, v, u)
    den = uu * vv - uv * uv
    gnu = np.einsum("abcd,b,c,d->a", rD, v, v, u) + np.einsum("abcd,a,b,c->d", rD, u, v, v)
    gnv = np.einsum("abcd,a,c,d->b", rD, u, v, u) + np.einsum("abcd,a,b,d->c", rD, u, v, u)
    gdu = 2 * vv * u - 2 * uv * v
    gdv = 2 * uu * v - 2 * uv * u
    f = num / den
    return f, np.concatenate([(gnu - f * gdu) / den, (gnv - f * gdv) / den])


@dataclass
class InfSectional:
    value: float
    plane: np.ndarray          # 2 x n orthonormal rows in D-frame coordinates
    certified_min: float = float("nan")
    certified: bool = True
    starts: int = 0


def inf_sectional_from_tensor(rD: np.ndarray, starts: int = 32, seed: int = 0, certify: int = 100_000,
                              tol: float = 1e-10) -> InfSectional:
    """Minimum of K over 2-planes for an algebraic curvature tensor in orthonormal coordinates."""
    n = rD.shape[0]
    if n < 2:
        raise ValueError("need a distribution of rank at least 2")
    if n == 2:
        e = np.eye(2)
        k = float(_plane_k(rD, e[0], e[1]))
        return InfSectional(k, e, k, True, 1)
    sampler = qmc.Halton(d=2 * n, scramble=True, seed=seed)
    z0s = 2.0 * sampler.random(starts) - 1.0
    best, best_z = np.inf, None
    for z0 in z0s:
        res = minimize(lambda z: _plane_k_grad(rD, z, n), z0, jac=True, method="BFGS",
                       options={"gtol": tol, "maxiter": 500})
        if res.fun < best:
            best, best_z = float(res.fun), res.x
    u, v = best_z[:n], best_z[n:]
    q, _ = np.linalg.qr(np.stack([u, v], axis=1))
    out = InfSectional(best, q.T.copy(), starts=starts)
    if certify:
        rng = np.random.default_rng(seed)
        U = rng.normal(size=(certify, n))
        V = rng.normal(size=(certify, n))
        ks = kernels.sectional_batch(rD, np.eye(n), U, V)
        out.certified_min = float(ks.min())
        out.certified = out.value <= out.certified_min + 1e-4
    return out


def inf_sectional(g, J, params, pt, **kw) -> InfSectional:
    """inf of the leaf sectional curvature over 2-planes in D at pt (Gauss-equation curvature)."""
    _, _, rD, _ = _leaf_data(g, J, params, pt)
    return inf_sectional_from_tensor(rD, **kw)


def scalar_curvature_D(rD: np.ndarray) -> float:
    """tau = sum_{i<j} K(e_i, e_j)."""
    n = rD.shape[0]
    return float(sum(rD[i, j, j, i] for i in range(n) for j in range(i + 1, n)))


# --- Chen report --------------------------------------------------------------------

@dataclass
class ChenReport:
    point: tuple
    n: int
    frame: np.ndarray
    tau: float
    inf_K: float
    inf_plane: np.ndarray
    delta: float
    H2: float
    h2: float
    a: float
    b: float
    c: float
    constraint_residual: float
    e3_residual: float
    lhs: float
    rhs: float
    holds: bool
    two_tau_residual: float
    h_asymmetry: float
    flags: list = field(default_factory=list)


def _e3_residual(g, J, params, a, b, c, pt, count=64, seed=0) -> float:
    gm, Jm = g.at(pt), J.at(pt)
    F = a * Jm + b * np.eye(J.n)
    rm = riemann_tensor(g, pt)
    gF = gm @ F
    model = c * (np.einsum("il,jk->ijkl", gF, gF) - np.einsum("ik,jl->ijkl", gF, gF))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        x, y, z, w = rng.normal(size=(4, J.n))
        diff = np.einsum("ijkl,i,j,k,l->", rm - model, x, y, z, w)
        worst = max(worst, abs(float(diff)))
    return worst


def chen_report(g, J, params: MetallicParams, a: float, b: float, c: float, pt, tol: float = 1e-8,
                starts: int = 32, seed: int = 0, certify: int = 100_000) -> ChenReport:
    params.require_real()
    pt = _pt(pt)
    flags = []
    Ef, hmat, rD, gm = _leaf_data(g, J, params, pt)
    n = Ef.shape[1]
    if J.n <= 2:
        flags.append("ambient dimension must exceed 2")
    if n < 2:
        raise ValueError("rank D must be at least 2")
    asym = _h_asymmetry(g, J, params, pt)
    if asym > ZERO_TOL:
        flags.append("D not integrable at point")
    constraint = params.q * a * a - params.p * a * b - b * b - 1.0
    if abs(constraint) > tol:
        flags.append("constraint qa^2-pab-b^2=1 violated")
    e3 = _e3_residual(g, J, params, a, b, c, pt)
    if e3 > tol:
        flags.append("curvature ansatz not satisfied")
    tau = scalar_curvature_D(rD)
    inf = inf_sectional_from_tensor(rD, starts=starts, seed=seed, certify=certify)
    if not inf.certified:
        flags.append("infimum not certified by random planes")
    H = np.einsum("kka->a", hmat) / n
    H2 = float(H @ gm @ H)
    h2 = float(np.einsum("kla,ab,klb->", hmat, gm, hmat))
    delta = tau - inf.value
    coef = c * (a * params.sigma_minus + b) ** 2
    rhs = coef * (n * n - n + 2) / 2 + n * n * (n - 2) / (2 * (n - 1)) * H2
    two_tau = coef * n * (n - 1) - h2 + n * n * H2
    return ChenReport(
        point=pt, n=n, frame=Ef, tau=tau, inf_K=inf.value, inf_plane=inf.plane, delta=delta, H2=H2, h2=h2,
        a=a, b=b, c=c, constraint_residual=constraint, e3_residual=e3, lhs=delta, rhs=rhs,
        holds=bool(delta <= rhs + tol), two_tau_residual=abs(2 * tau - two_tau), h_asymmetry=asym, flags=flags,
    )


# --- metallic maps --------------------------------------------------------------------

@dataclass(frozen=True)
class MapSpec:
    source: Chart
    target: Chart
    comps: tuple

    def __post_init__(self):
        if len(self.comps) != self.target.n:
            raise ValueError("map needs one component per target coordinate")

    @classmethod
    def parse(cls, source: Chart, target: Chart, comps) -> "MapSpec":
        return cls(source, target, tuple(source.parse(c) for c in comps))

    def at(self, pt) -> np.ndarray:
        return evaluate_many(tuple(self.comps), _pt(pt))

    def jacobian(self, pt) -> np.ndarray:
        n = self.source.n
        roots = tuple(E.diff(c, i) for c in self.comps for i in range(n))
        return evaluate_many(roots, _pt(pt)).reshape(self.target.n, n)

    def jacobian_fd_residual(self, pt, h: float = 1e-6) -> float:
        pt = np.asarray(pt, dtype=float)
        n = self.source.n
        fd = np.empty((self.target.n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd[:, i] = (self.at(pt + e) - self.at(pt - e)) / (2 * h)
        return float(np.abs(fd - self.jacobian(pt)).max())


@dataclass
class MapReport:
    metallic: float
    odd_powers: dict
    containment: float
    jacobian_fd: float
    samples: int


def metallic_map_report(phi: MapSpec, J1: EndoField, J2: EndoField, params1: MetallicParams,
                        params2: MetallicParams, samples) -> MapReport:
    if J1.n != phi.source.n or J2.n != phi.target.n:
        raise ValueError("endomorphism dimensions do not match the map")
    p1, q1, p2, q2 = params1.p, params1.q, params2.p, params2.q
    met, odd, cont, fd = 0.0, {1: 0.0, 2: 0.0}, 0.0, 0.0
    for pt in samples:
        pt = _pt(pt)
        dphi = phi.jacobian(pt)
        A = J1.at(pt)
        Bm = J2.at(phi.at(pt))
        scale = max(1.0, float(np.abs(dphi).max()))
        met = max(met, float(np.abs(dphi @ A - Bm @ dphi).max()) / scale)
        for k in (1, 2):
            e = 2 * k + 1
            lhs = dphi @ np.linalg.matrix_power(A, e)
            rhs = np.linalg.matrix_power(Bm, e) @ dphi
            odd[k] = max(odd[k], float(np.abs(lhs - rhs).max()) / max(1.0, float(np.abs(lhs).max())))
        Mc = ((p2 * p2 + q2) - (p1 * p1 + q1)) * A + (p2 * q2 - p1 * q1) * np.eye(A.shape[0])
        cont = max(cont, float(np.abs(dphi @ Mc).max()) / scale)
        fd = max(fd, phi.jacobian_fd_residual(pt))
    return MapReport(met, odd, cont, fd, len(np.atleast_2d(samples)))


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal angle between column spans; pi/2 when dimensions differ."""
    da = A.shape[1] if A.size else 0
    db = B.shape[1] if B.size else 0
    if da != db:
        return float(np.pi / 2)
    if da == 0:
        return 0.0
    return float(np.max(subspace_angles(A, B)))


RANK_ATOL = 1e-10


def _cutoff(M: np.ndarray) -> float:
    # absolute: a round-off-zero matrix has rank 0, not the rank of its noise
    return RANK_ATOL * max(1.0, float(np.abs(M).max(initial=0.0)))


def _span(M: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return M.reshape(M.shape[0], 0)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    return u[:, s > _cutoff(M)]


def _kernel(M: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > _cutoff(M)))
    return vh[rank:].conj().T


@dataclass
class LeafCorrespondence:
    condition_distance: float      # ker dPhi vs (J1 - s2+)(ker(J1 - s1+))
    condition_holds: bool
    pullback_distance: float       # Phi^* D2 (by definition) vs D1
    pullback_equals_D1: bool
    printed_formula_distance: float    # {v : (J1 - s2+)v in ker dPhi} vs definition
    corrected_formula_distance: float  # {v : (J1 - s2-)v in ker dPhi} vs definition
    rank_varies: bool
    samples: int


def leaf_correspondence_check(phi: MapSpec, J1: EndoField, params1: MetallicParams, params2: MetallicParams,
                              samples, J2: EndoField | None = None, tol: float = ZERO_TOL) -> LeafCorrespondence:
    params1.require_real()
    params2.require_real()
    n = J1.n
    cond, pull, printed, corrected = 0.0, 0.0, 0.0, 0.0
    ranks = set()
    for pt in samples:
        pt = _pt(pt)
        dphi = phi.jacobian(pt)
        ranks.add(numerical_rank(dphi) if dphi.size else 0)
        A = J1.at(pt)
        I = np.eye(n)
        ker = _kernel(dphi)
        eig1 = _kernel(A - params1.sigma_plus * I)
        rhs = _span((A - params2.sigma_plus * I) @ eig1)
        cond = max(cond, subspace_distance(ker, rhs))
        P1 = -(A - params1.sigma_plus * I) / params1.sqrt_disc
        D1 = _span(P1)
        if J2 is not None:
            Bm = J2.at(phi.at(pt))
            P2p = (Bm - params2.sigma_minus * np.eye(Bm.shape[0])) / params2.sqrt_disc
            pb = _kernel(P2p @ dphi)
        else:
            pb = _kernel(dphi @ (A - params2.sigma_minus * I))
        pull = max(pull, subspace_distance(pb, D1))
        printed = max(printed, subspace_distance(_kernel(dphi @ (A - params2.sigma_plus * I)), pb))
        corrected = max(corrected, subspace_distance(_kernel(dphi @ (A - params2.sigma_minus * I)), pb))
    return LeafCorrespondence(cond, cond < tol, pull, pull < tol, printed, corrected, len(ranks) > 1,
                              len(np.atleast_2d(samples)))
