"""Check suites producing report rows; shared by the CLI and the acceptance tests."""

from __future__ import annotations

from itertools import product

import numpy as np

from . import expr as E
from .chart import (
    DEGENERACY_THRESHOLD, DegenerateMetricError, coordinate_fields, levi_civita, nabla_endo, nabla_metric,
    polynomial_fields, torsion,
)
from .connections import (
    connection_law_residuals, oneill_gray_kirichenko, schouten_van_kampen, svk_closed, svk_torsion_formula, vidal,
    vidal_metricity_defect, vidal_projector, vranceanu, vranceanu_expanded, vranceanu_first_line,
    vranceanu_torsion_formula,
)
from .metallic import (
    deformation, deformation_suite, jordan_tensor, jp_relations, nijenhuis, projector_scalings, rel_residual, validate,
)
from .report import FAIL, FLUSH, PASS, Row, fmt_point


class _Max:
    """Running maximum with the location where it occurred."""

    __slots__ = ("v", "loc")

    def __init__(self):
        self.v, self.loc = 0.0, ""

    def add(self, v, pt):
        v = float(v)
        if v > self.v:
            self.v, self.loc = v, fmt_point(pt) if v >= FLUSH else ""
        return self


def _pts(samples):
    return [tuple(float(v) for v in p) for p in np.atleast_2d(samples)]


def check_nondegenerate(g, samples):
    pts = np.atleast_2d(samples)
    if len(pts) == 0:
        return
    dets = np.abs(np.linalg.det(g.batch(pts)))
    k = int(np.argmin(dets))
    if dets[k] < DEGENERACY_THRESHOLD:
        raise DegenerateMetricError(f"metric degenerate at {fmt_point(pts[k])} (|det g| = {dets[k]:.3g})")


def _thr(tol, default):
    return default if tol is None else tol


# --- validate -------------------------------------------------------------------

def validate_rows(g, J, params, samples, tol: float = 1e-8) -> list:
    check_nondegenerate(g, samples)
    rep = validate(g, J, params, samples, tol)
    loc = fmt_point(rep.worst_point)
    sig = Row("signature admissible", "metallic.validate", None, None, PASS if rep.signature_ok else FAIL,
              f"signature {rep.signature}", True)
    return [
        Row.test("J^2 = pJ + qI", "metallic.validate", rep.metallic_residual, tol, loc),
        Row.test("g(JX,Y) = g(X,JY)", "metallic.validate", rep.symmetry_residual, tol, loc),
        Row.test("g symmetric", "metallic.validate", g.symmetric_residual(samples), tol),
        sig,
        Row.info("g-skew residual", "metallic.validate", rep.skew_residual, rep.skew_diagnostic),
    ]


# --- tensors --------------------------------------------------------------------

def _field_pairs(n, seed=0):
    coords = coordinate_fields(n)
    pairs = [(coords[i], coords[j]) for i, j in product(range(n), repeat=2)]
    X, Y = polynomial_fields(n, 2, seed)
    return pairs + [(X, Y)]


def tensor_rows(g, J, params, samples, tol=None, seed: int = 0) -> list:
    params.require_real()
    check_nondegenerate(g, samples)
    lc = levi_civita(g)
    t = _thr(tol, 1e-8)
    acc = {}

    def put(key, v, pt):
        acc.setdefault(key, _Max()).add(v, pt)

    for pt in _pts(samples):
        for X, Y in _field_pairs(J.n, seed):
            N = nijenhuis(J, X, Y, pt)
            M = jordan_tensor(lc, J, X, Y, pt)
            H = deformation(lc, J, X, Y, pt)
            put("|N_J|", np.linalg.norm(N), pt)
            put("|M_J|", np.linalg.norm(M), pt)
            put("|H_J|", np.linalg.norm(H), pt)
            put("2H_J = N_J + M_J", rel_residual(2 * H, N + M), pt)
            for k, v in deformation_suite(g, J, params, X, Y, pt, lc).closed_form_residuals().items():
                put(k, v, pt)
            for k, v in projector_scalings(g, J, params, X, Y, pt).items():
                put(k + " = " + k[0] + "_J/disc", v, pt)
            for k, v in jp_relations(g, J, params, X, Y, pt).items():
                put("J_p relation " + k, v, pt)
    rows = [Row.info(k, "metallic.assoc_tensor", acc[k].v, acc[k].loc) for k in ("|N_J|", "|M_J|", "|H_J|")]
    rows.append(Row.test("2H_J = N_J + M_J", "metallic.deformation", acc["2H_J = N_J + M_J"].v, t,
                         acc["2H_J = N_J + M_J"].loc))
    for k in ("L", "L'", "K", "K'"):
        rows.append(Row.test(f"{k} closed form", "metallic.deformation_suite", acc[k].v, t, acc[k].loc))
    rows.append(Row.test("H+H' = H_J/disc (printed)", "metallic.deformation_suite", acc["H+H'=H_J/disc"].v, t,
                         acc["H+H'=H_J/disc"].loc))
    rows.append(Row.test("H+H' = -H_J/disc (derived)", "metallic.deformation_suite", acc["H+H'=-H_J/disc"].v, t,
                         acc["H+H'=-H_J/disc"].loc))
    for k in sorted(a for a in acc if a[1:3] == "_P"):
        rows.append(Row.test(k, "metallic.projector_scalings", acc[k].v, t, acc[k].loc))
    for k in sorted(a for a in acc if a.startswith("J_p relation")):
        rows.append(Row.test(k, "metallic.jp_relations", acc[k].v, t, acc[k].loc))
    return rows


# --- connections ------------------------------------------------------------------

def connection_rows(g, J, params, samples, tol=None, seed: int = 0) -> list:
    params.require_real()
    check_nondegenerate(g, samples)
    lc = levi_civita(g)
    svk, svc = schouten_van_kampen(g, J, params, lc), svk_closed(g, J, params, lc)
    vd, vdp = vidal(g, J, params, lc), vidal_projector(g, J, params, lc)
    vr, vre, vr1 = vranceanu(lc, J, params), vranceanu_expanded(lc, J, params), vranceanu_first_line(lc, J, params)
    X, Y, Z = polynomial_fields(J.n, 3, seed)
    f = E.coord(0) * E.coord(J.n - 1) + 1.0
    acc = {}

    def put(key, v, pt):
        acc.setdefault(key, _Max()).add(v, pt)

    for pt in _pts(samples):
        put("SvK projector = closed form", rel_residual(svk(X, Y, pt), svc(X, Y, pt)), pt)
        put("SvK nabla g = 0", abs(nabla_metric(svk, g, X, Y, Z, pt)), pt)
        put("SvK nabla J = 0", np.abs(nabla_endo(svk, J, X, Y, pt)).max(), pt)
        put("SvK torsion formula", rel_residual(torsion(svk, X, Y, pt), svk_torsion_formula(lc, J, params, X, Y, pt)), pt)
        put("Vranceanu(LC) = Vidal", rel_residual(vr(X, Y, pt), vd(X, Y, pt)), pt)
        put("Vranceanu expanded = projector form", rel_residual(vre(X, Y, pt), vr(X, Y, pt)), pt)
        put("Vranceanu torsion (derived)", rel_residual(
            torsion(vr, X, Y, pt), vranceanu_torsion_formula(lc, J, params, X, Y, pt, "derived")), pt)
        put("Vranceanu torsion (printed)", rel_residual(
            torsion(vr, X, Y, pt), vranceanu_torsion_formula(lc, J, params, X, Y, pt, "printed")), pt)
        law = connection_law_residuals(vr1, X, Y, f, pt)
        put("Vranceanu first line (printed): Leibniz", law["leibniz"], pt)
        put("Vidal closed = projector form", rel_residual(vd(X, Y, pt), vdp(X, Y, pt)), pt)
        put("Vidal torsion = N_J/disc", rel_residual(torsion(vd, X, Y, pt), nijenhuis(J, X, Y, pt) / params.disc), pt)
        put("Vidal nabla J = 0", np.abs(nabla_endo(vd, J, X, Y, pt)).max(), pt)
        m = vidal_metricity_defect(g, J, params, X, Y, Z, pt)
        put("Vidal metricity: nabla J form", rel_residual(m.direct, m.closed_nabla), pt)
        put("Vidal metricity: M_J form (printed)", rel_residual(m.direct, m.closed_mj), pt)
        put("Vidal metricity: M_J form + J(nabla J) terms", rel_residual(m.direct, m.closed_mj_corrected), pt)
        k = oneill_gray_kirichenko(g, J, params, X, Y, pt)
        put("Kirichenko C relation", k.C_relation, pt)
        put("Kirichenko B relation", k.B_relation, pt)
        for name, conn in (("SvK", svk), ("Vranceanu", vr), ("Vidal", vd)):
            law = connection_law_residuals(conn, X, Y, f, pt)
            put(f"{name} connection laws", max(law.values()), pt)
    t9, t8 = _thr(tol, 1e-9), _thr(tol, 1e-8)
    spec = [
        ("SvK projector = closed form", "connections.schouten_van_kampen", t9, True),
        ("SvK nabla g = 0", "connections.schouten_van_kampen", t9, True),
        ("SvK nabla J = 0", "connections.schouten_van_kampen", t9, True),
        ("SvK torsion formula", "connections.svk_torsion_formula", t9, True),
        ("Vranceanu(LC) = Vidal", "connections.vranceanu", t9, True),
        ("Vranceanu expanded = projector form", "connections.vranceanu_expanded", t9, True),
        ("Vranceanu torsion (derived)", "connections.vranceanu_torsion_formula", t9, True),
        ("Vranceanu torsion (printed)", "connections.vranceanu_torsion_formula", t9, False),
        ("Vranceanu first line (printed): Leibniz", "connections.vranceanu_first_line", t9, False),
        ("Vidal closed = projector form", "connections.vidal", t9, True),
        ("Vidal torsion = N_J/disc", "connections.vidal", t9, True),
        ("Vidal nabla J = 0", "connections.vidal", t9, True),
        ("Vidal metricity: nabla J form", "connections.vidal_metricity_defect", t8, True),
        ("Vidal metricity: M_J form (printed)", "connections.vidal_metricity_defect", t8, True),
        ("Vidal metricity: M_J form + J(nabla J) terms", "connections.vidal_metricity_defect", t8, True),
        ("Kirichenko C relation", "connections.oneill_gray_kirichenko", t9, True),
        ("Kirichenko B relation", "connections.oneill_gray_kirichenko", t9, True),
        ("SvK connection laws", "connections.connection_law_residuals", t9, True),
        ("Vranceanu connection laws", "connections.connection_law_residuals", t9, True),
        ("Vidal connection laws", "connections.connection_law_residuals", t9, True),
    ]
    return [Row.test(k, op, acc[k].v, thr, acc[k].loc, enforced) for k, op, thr, enforced in spec]


# --- foliation ----------------------------------------------------------------------

def equivalence_triples(g, J, params, samples, seed: int = 0) -> dict:
    """Max |N_J|, |Vidal torsion|, |M_J| and |Vidal metricity| plus the two invariance reports."""
    from .foliation import geodesic_invariance_report, integrability_report

    lc = levi_civita(g)
    vd = vidal(g, J, params, lc)
    coords = coordinate_fields(J.n)
    fields = coords + list(polynomial_fields(J.n, 2, seed))
    out = {k: _Max() for k in ("N_J", "vidal_torsion", "M_J", "vidal_metricity")}
    for pt in _pts(samples):
        for X, Y in product(fields, repeat=2):
            out["N_J"].add(np.linalg.norm(nijenhuis(J, X, Y, pt)), pt)
            out["vidal_torsion"].add(np.linalg.norm(torsion(vd, X, Y, pt)), pt)
            out["M_J"].add(np.linalg.norm(jordan_tensor(lc, J, X, Y, pt)), pt)
        for X, Y, Z in product(coords, repeat=3):
            out["vidal_metricity"].add(abs(nabla_metric(vd, g, X, Y, Z, pt)), pt)
    res = {k: v.v for k, v in out.items()}
    res["locations"] = {k: v.loc for k, v in out.items()}
    res["integrability"] = integrability_report(g, J, params, samples)
    res["geodesic"] = geodesic_invariance_report(g, J, params, samples)
    return res


def foliation_rows(g, J, params, samples, seed: int = 0) -> list:
    from .foliation import ZERO_TOL, classify

    params.require_real()
    check_nondegenerate(g, samples)
    eq = equivalence_triples(g, J, params, samples, seed)
    rows = []
    for kind, label, op in (("integrability", "integrable", "foliation.integrability_report"),
                            ("geodesic", "geodesically invariant", "foliation.geodesic_invariance_report")):
        rep = eq[kind]
        loc = fmt_point(rep.worst_point)
        for dv in (rep.D, rep.Dp):
            rows.append(Row.info(f"{dv.name} {label}", op, dv.direct, loc, "yes" if dv.holds else "no"))
            rows.append(Row.info(f"{dv.name} {label}: eigencondition", op, dv.eigen, "",
                                 classify(dv.eigen, ZERO_TOL)))
            rows.append(Row.info(f"{dv.name} {label}: nabla J criterion", op, dv.nabla_j, "",
                                 classify(dv.nabla_j, ZERO_TOL)))
            rows.append(Row.info(f"{dv.name} {label}: criteria agree", op, None, "",
                                 "agree" if dv.agree else "disagree"))
    loc = eq["locations"]
    both_int = eq["integrability"].D.holds and eq["integrability"].Dp.holds
    both_geo = eq["geodesic"].D.holds and eq["geodesic"].Dp.holds
    rows.append(Row.info("N_J", "metallic.nijenhuis", eq["N_J"], loc["N_J"], classify(eq["N_J"], ZERO_TOL)))
    rows.append(Row.info("Vidal torsion", "connections.vidal", eq["vidal_torsion"], loc["vidal_torsion"],
                         classify(eq["vidal_torsion"], ZERO_TOL)))
    rows.append(Row.info("D and D' integrable <=> N_J = 0 <=> Vidal torsion-free", "foliation.integrability_report",
                         None, "", _agree(both_int, eq["N_J"], eq["vidal_torsion"])))
    rows.append(Row.info("M_J", "metallic.jordan_tensor", eq["M_J"], loc["M_J"], classify(eq["M_J"], ZERO_TOL)))
    rows.append(Row.info("Vidal metricity defect", "connections.vidal", eq["vidal_metricity"], loc["vidal_metricity"],
                         classify(eq["vidal_metricity"], ZERO_TOL)))
    rows.append(Row.info("D and D' geodesically invariant <=> M_J = 0 <=> Vidal metric",
                         "foliation.geodesic_invariance_report", None, "",
                         _agree(both_geo, eq["M_J"], eq["vidal_metricity"])))
    return rows


def _agree(holds: bool, *values, zero_tol: float = 1e-7, margin: float = 1e-3) -> str:
    sides = {holds} | {v < zero_tol for v in values}
    if any(zero_tol <= v <= margin for v in values):
        return "ambiguous"
    return "agree" if len(sides) == 1 else "disagree"


# --- Chen -------------------------------------------------------------------------

def chen_rows(g, J, params, a, b, c, pt, tol: float = 1e-8, seed: int = 0) -> list:
    from .foliation import chen_report

    params.require_real()
    check_nondegenerate(g, [pt])
    r = chen_report(g, J, params, a, b, c, pt, tol=tol, seed=seed)
    loc = fmt_point(r.point)
    op = "foliation.chen_report"
    rows = [
        Row.info("rank D", op, float(r.n), loc),
        Row.info("tau_D", op, r.tau, loc),
        Row.info("inf K_D", op, r.inf_K, loc),
        Row.info("delta_D (lhs)", op, r.lhs, loc),
        Row.info("rhs", op, r.rhs, loc),
        Row.info("|H|^2", op, r.H2, loc),
        Row.info("|h|^2", op, r.h2, loc),
        Row.info("Chen inequality", op, r.lhs - r.rhs, loc, "holds" if r.holds else "violated"),
        Row.test("2 tau identity", op, r.two_tau_residual, 1e-6, loc, enforced=False),
        Row.test("constraint q a^2 - p a b - b^2 = 1", op, abs(r.constraint_residual), tol, loc, enforced=False),
        Row.test("curvature ansatz", op, r.e3_residual, tol, loc, enforced=False),
    ]
    for flag in r.flags:
        rows.append(Row.info("flag", op, None, flag, "warn"))
    return rows


# --- Norden -------------------------------------------------------------------------

def norden_rows(g, J, params, samples, tol=None, seed: int = 0) -> list:
    from .norden import (
        complex_connection, complex_frames, complex_invariance_report, complex_projectors, norden_check, norden_jc,
    )

    params.require_norden()
    check_nondegenerate(g, samples)
    t10, t9, t8 = _thr(tol, 1e-10), _thr(tol, 1e-9), _thr(tol, 1e-8)
    Jc = norden_jc(J, params)
    lc = levi_civita(g)
    svk = complex_connection("SVK", g, J, params)
    vr = complex_connection("VRANCEANU", g, J, params)
    vd = complex_connection("VIDAL", g, J, params)
    X, Y, Z = polynomial_fields(J.n, 3, seed)
    Xc, Yc, Zc = X + Y.scale(1j), Y + Z.scale(0.5j), Z + X.scale(-1j)
    acc = {}

    def put(key, v, pt):
        acc.setdefault(key, _Max()).add(v, pt)

    for pt in _pts(samples):
        nc = norden_check(g, J, params, pt)
        put("J_c^2 = -I", nc.square, pt)
        put("g(J_c X, Y) symmetric", nc.g_symmetry, pt)
        put("N_Jc = 4/(-disc) N_J", nc.nijenhuis, pt)
        put("J_c = -i on D^C' (measured)", abs(nc.eig_on_Dp + 1j), pt)
        put("J_c = +i on D^C' (printed)", abs(nc.eig_on_Dp - 1j), pt)
        for k, v in complex_projectors(J, params, pt).residuals().items():
            put("complex projectors: " + k, v, pt)
        put("complex frames conjugate", complex_frames(J, params, pt).conjugacy, pt)
        put("complex Vidal torsion = N_J/disc",
            rel_residual(torsion(vd, Xc, Yc, pt), nijenhuis(J, Xc, Yc, pt) / params.disc), pt)
        put("complex SvK nabla J = 0", np.abs(nabla_endo(svk, J, Xc, Yc, pt)).max(), pt)
        put("complex SvK nabla g = 0", abs(nabla_metric(svk, g, Xc, Yc, Zc, pt)), pt)
        put("complex Vidal nabla J = 0", np.abs(nabla_endo(vd, J, Xc, Yc, pt)).max(), pt)
        put("complex Vranceanu = Vidal", rel_residual(vr(Xc, Yc, pt), vd(Xc, Yc, pt)), pt)
        put("real fields stay real", max(np.abs(np.imag(c(X, Y, pt))).max() for c in (svk, vr, vd)), pt)
        m = vidal_metricity_defect(g, J, params, Xc, Yc, Zc, pt, allow_complex=True)
        put("complex Vidal metricity: nabla J form", rel_residual(m.direct, m.closed_nabla), pt)
        put("complex Vidal metricity: M_J form (printed)", rel_residual(m.direct, m.closed_mj), pt)
    spec = [
        ("J_c^2 = -I", "norden.norden_jc", t10, True),
        ("g(J_c X, Y) symmetric", "norden.norden_jc", t10, True),
        ("N_Jc = 4/(-disc) N_J", "norden.norden_jc", t8, True),
        ("J_c = -i on D^C' (measured)", "norden.norden_check", t10, True),
        ("J_c = +i on D^C' (printed)", "norden.norden_check", t10, False),
    ]
    spec += [(k, "norden.complex_projectors", t10, True) for k in sorted(acc) if k.startswith("complex projectors")]
    spec += [
        ("complex frames conjugate", "norden.complex_frames", t10, True),
        ("complex Vidal torsion = N_J/disc", "norden.complex_connection", t8, True),
        ("complex SvK nabla J = 0", "norden.complex_connection", t9, True),
        ("complex SvK nabla g = 0", "norden.complex_connection", t9, True),
        ("complex Vidal nabla J = 0", "norden.complex_connection", t9, True),
        ("complex Vranceanu = Vidal", "norden.complex_connection", t9, True),
        ("real fields stay real", "norden.complex_connection", t10, True),
        ("complex Vidal metricity: nabla J form", "connections.vidal_metricity_defect", t8, True),
        ("complex Vidal metricity: M_J form (printed)", "connections.vidal_metricity_defect", t8, False),
    ]
    rows = [Row.test(k, op, acc[k].v, thr, acc[k].loc, enf) for k, op, thr, enf in spec]
    inv = complex_invariance_report(g, J, params, samples)
    op = "norden.complex_invariance_report"
    for k, v in (("complex Frobenius D^C", inv.frobenius_D), ("complex Frobenius D^C'", inv.frobenius_Dp),
                 ("complex geodesic D^C", inv.geodesic_D), ("complex geodesic D^C'", inv.geodesic_Dp),
                 ("N_J", inv.nijenhuis), ("M_J", inv.jordan), ("complex Vidal torsion", inv.vidal_torsion)):
        rows.append(Row.info(k, op, v, "", "zero" if v < 1e-7 else "nonzero"))
    rows.append(Row("integrable <=> N_J = 0 <=> Vidal torsion-free", op, None, None,
                    PASS if inv.integrable_agree else FAIL, "", True))
    rows.append(Row("geodesically invariant <=> M_J = 0", op, None, None,
                    PASS if inv.geodesic_agree else FAIL, "", True))
    jc_complex = all(v < 1e-7 for v in (inv.nijenhuis,))
    rows.append(Row.info("(M, J_c) complex (N_Jc = 0 on samples)", "norden.norden_jc", None, "",
                         "yes" if jc_complex else "no"))
    return rows


# --- forms ----------------------------------------------------------------------

FORMS_ENFORCED = ("d.d = 0", "dc.dc = 0", "d.dc + dc.d = 0", "dbar = explicit", "dbar.dbar = 0",
                  "Deltac = -J*c.Delta.J*c")


def forms_rows(g, J, params, chart, samples, forms=None, tol=None, convention="graded") -> list:
    from .forms import FormOps, identity_conformance, trig_forms

    params.require_norden()
    check_nondegenerate(g, samples)
    ops = FormOps(g, J, params, chart, convention=convention, ref_pt=np.atleast_2d(samples)[0])
    forms = forms or trig_forms(chart.n, 3)
    t = _thr(tol, 1e-9)
    rows = []
    for r in identity_conformance(ops, forms, samples, tol=t, pair_tol=_thr(tol, 1e-8)):
        rows.append(Row.test(r.check, "forms.identity_conformance", r.residual, r.threshold,
                             f"{r.cases} cases, scale {r.scale:.3g}", r.check in FORMS_ENFORCED))
    return rows


# --- maps -------------------------------------------------------------------------

def map_rows(phi, src, tgt, samples, tol=None) -> list:
    from .foliation import leaf_correspondence_check, metallic_map_report

    t = _thr(tol, 1e-8)
    rep = metallic_map_report(phi, src.J, tgt.J, src.params, tgt.params, samples)
    op = "foliation.metallic_map_report"
    rows = [
        Row.test("dPhi J1 = J2 dPhi", op, rep.metallic, t),
        Row.test("odd power J^3", op, rep.odd_powers[1], t),
        Row.test("odd power J^5", op, rep.odd_powers[2], t),
        Row.test("kernel containment", op, rep.containment, t),
        Row.test("Jacobian vs finite differences", op, rep.jacobian_fd, 1e-5, enforced=False),
    ]
    if src.params.disc > 0 and tgt.params.disc > 0:
        lc = leaf_correspondence_check(phi, src.J, src.params, tgt.params, samples, J2=tgt.J)
        op = "foliation.leaf_correspondence_check"
        rows += [
            Row.info("ker dPhi = (J1 - s2+)(ker(J1 - s1+))", op, lc.condition_distance, "principal angle",
                     "yes" if lc.condition_holds else "no"),
            Row.info("Phi^* D2 = D1", op, lc.pullback_distance, "principal angle",
                     "yes" if lc.pullback_equals_D1 else "no"),
            Row.info("pull-back via sigma2+ (printed)", op, lc.printed_formula_distance, "principal angle",
                     "matches" if lc.printed_formula_distance < 1e-7 else "differs"),
            Row.info("pull-back via sigma2-", op, lc.corrected_formula_distance, "principal angle",
                     "matches" if lc.corrected_formula_distance < 1e-7 else "differs"),
        ]
    return rows

