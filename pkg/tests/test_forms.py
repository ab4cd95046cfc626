import math

import numpy as np
import pytest

from metallic_geom import expr as E
from metallic_geom.chart import Chart, DegenerateMetricError, MetricField
from metallic_geom.fixtures import get
from metallic_geom.forms import (
    ADJOINT_ROW, DegreeError, FormField, FormOps, Hodge, PeriodicityError, exterior_d, harmonic_check,
    identity_conformance, jstar_c, trig_forms, wedge,
)
from metallic_geom.metallic import BranchError
from metallic_geom.norden import norden_jc

x1, x2 = E.coord(0), E.coord(1)
dx = FormField.dx


def same(a, b, pts, tol=1e-12):
    return (a - b).max_abs(pts) < tol


@pytest.fixture
def pts(rng):
    return rng.uniform(-2, 2, size=(20, 2))


def test_wedge_basics(pts):
    assert same(wedge(dx(2, 0), dx(2, 1)), -wedge(dx(2, 1), dx(2, 0)), pts)
    assert wedge(dx(2, 0).scale(x1), dx(2, 0)).max_abs(pts) == 0.0
    assert same(wedge(dx(2, 0) + dx(2, 1), dx(2, 1)), dx(2, 0, 1), pts)


def test_wedge_overflow():
    with pytest.raises(DegreeError):
        wedge(dx(2, 0, 1), dx(2, 0))


def test_graded_commutative(rng):
    n = 3
    a = dx(n, 0).scale(E.sin(E.coord(1))) + dx(n, 2)
    b = dx(n, 1, 2).scale(E.coord(0))
    p = rng.uniform(-1, 1, size=(10, n))
    assert same(wedge(a, b), wedge(b, a), p)  # (-1)^(1*2) = 1
    assert same(wedge(a, dx(n, 1)), -wedge(dx(n, 1), a), p)


def test_exterior_d(pts):
    f = FormField.function(2, x1 * x2)
    assert same(exterior_d(f), dx(2, 0).scale(x2) + dx(2, 1).scale(x1), pts)
    g = FormField.function(2, E.sin(x1 * x2))
    assert exterior_d(exterior_d(g)).max_abs(pts) < 1e-12
    assert same(exterior_d(dx(2, 1).scale(x1)), dx(2, 0, 1), pts)


def test_leibniz(rng):
    n = 3
    xs = [E.coord(i) for i in range(n)]
    a = dx(n, 0).scale(xs[1] * xs[2]) + dx(n, 2).scale(E.cos(xs[0]))
    b = dx(n, 1).scale(E.sin(xs[2]) * xs[0])
    p = rng.uniform(-1, 1, size=(10, n))
    lhs = exterior_d(wedge(a, b))
    rhs = wedge(exterior_d(a), b) - wedge(a, exterior_d(b))
    assert (lhs - rhs).max_abs(p) < 1e-11


def test_jstar_c_f4(pts):
    f = get("F4")
    Jc = norden_jc(f.J, f.params)
    assert same(jstar_c(dx(2, 0), Jc), -dx(2, 1), pts, 1e-15)
    func = FormField.function(2, x1)
    assert same(jstar_c(func, Jc), func, pts)
    # top forms pick up det J_c = 1 argumentwise; graded adds (-1)^(r(r-1)/2)
    assert same(jstar_c(dx(2, 0, 1), Jc, "argumentwise"), dx(2, 0, 1), pts)
    assert same(jstar_c(dx(2, 0, 1), Jc, "graded"), -dx(2, 0, 1), pts)


def test_hodge_euclidean(pts):
    h = Hodge(MetricField.constant(np.eye(2)))
    assert same(h(dx(2, 0)), dx(2, 1), pts)
    assert same(h(dx(2, 1)), -dx(2, 0), pts)
    assert same(h(FormField.function(2, 1.0)), dx(2, 0, 1), pts)


@pytest.mark.parametrize("name", ["F4", "F5", "F7"])
def test_star_star(name):
    f = get(name)
    h = Hodge(f.g, f.samples(1)[0])
    n = f.n
    p = f.samples(6)
    for a in trig_forms(n, 1)[:: max(1, len(trig_forms(n, 1)) // 12)]:
        r = a.degree
        sign = h.sign * (-1) ** (r * (n - r))
        assert (h(h(a)) - a.scale(float(sign))).max_abs(p) < 1e-11


def test_star_volume_and_inner(pts):
    f = get("F4")
    h = Hodge(f.g)
    one = FormField.function(2, 1.0)
    assert same(h(h.volume()), one.scale(float(h.sign)), pts)
    a = dx(2, 0).scale(x2) + dx(2, 1)
    b = dx(2, 0) + dx(2, 1).scale(x1)
    re, im = h.inner(a, b)
    lhs = wedge(a, h(b))
    rhs = h.volume().scale((re, im))
    assert same(lhs, rhs, pts)


def test_hodge_degenerate():
    with pytest.raises(DegenerateMetricError):
        Hodge(MetricField.constant([[1.0, 1.0], [1.0, 1.0]]))


def test_dc_composition(pts):
    f = get("F4")
    ops = FormOps(f.g, f.J, f.params)
    func = FormField.function(2, x1 * x2)
    assert same(ops.dc(func), ops.jc(exterior_d(func)), pts)
    assert same(ops.dc(func), -dx(2, 1).scale(x2) + dx(2, 0).scale(x1), pts)


def test_dbar_explicit_f4(pts):
    f = get("F4")
    ops = FormOps(f.g, f.J, f.params)
    a = dx(2, 0).scale(E.sin(x1))
    assert (ops.dbar(a) - ops.dbar_explicit(a)).max_abs(pts) < 1e-10


def test_dbar_explicit_argumentwise_metallic_breaks(pts):
    f = get("F4")
    ops = FormOps(f.g, f.J, f.params, metallic_convention="argumentwise")
    func = FormField.function(2, E.sin(x1) * x2)
    assert (ops.dbar(func) - ops.dbar_explicit(func)).max_abs(pts) > 1e-3


def test_operators_reject_real_branch():
    f = get("F1")
    with pytest.raises(BranchError):
        FormOps(f.g, f.J, f.params)


def test_apply_dispatch(pts):
    f = get("F4")
    ops = FormOps(f.g, f.J, f.params)
    a = dx(2, 1).scale(E.cos(x1))
    assert same(ops.apply("LAPLACE_C", a), ops.laplace_c(a), pts)
    assert same(ops.apply("STAR", a), ops.star(a), pts)


@pytest.fixture(scope="module")
def f5_table():
    f = get("F5")
    ops = FormOps(f.g, f.J, f.params, f.chart)
    samples = f.samples(8)
    return {r.check: r for r in identity_conformance(ops, trig_forms(2, 3), samples)}


@pytest.mark.parametrize("row", [
    "d.d = 0", "dc.dc = 0", "d.dc + dc.d = 0", "deltac.deltac = 0", "delta.deltac + deltac.delta = 0",
    "deltac = J*c.delta.J*c", "dbar.dbar = 0", "dbarbar.dbarbar = 0", "dbar = explicit",
    ADJOINT_ROW,
])
def test_f5_rows_hold(f5_table, row):
    r = f5_table[row]
    assert r.residual < r.threshold and r.cases > 0


@pytest.mark.parametrize("row", [
    "Deltac = -J*c.Delta.J*c", "J*c.star = star.J*c", "dc.J*c = -J*c.d", "J*c.dc = -d.J*c",
])
def test_f5_rows_measured_failing(f5_table, row):
    # J*_c squares to (-1)^r on r-forms, so these carry a degree-dependent sign
    assert f5_table[row].residual > 1.0


def test_conformance_needs_periodic_chart():
    f = get("F4")
    ops = FormOps(f.g, f.J, f.params)
    with pytest.raises(PeriodicityError):
        identity_conformance(ops, trig_forms(2, 1)[:3], f.samples(2), pairing=True)
    with pytest.raises(PeriodicityError):
        ops.pairing(FormField.function(2, 1.0), FormField.function(2, 1.0))


def test_pairing_symmetric_bilinear():
    f = get("F5")
    ops = FormOps(f.g, f.J, f.params, f.chart)
    a = dx(2, 0).scale(E.sin(x1)) + dx(2, 1).scale(E.cos(x2))
    b = dx(2, 0).scale(E.sin(x1) + E.cos(x2)) + dx(2, 1).scale(E.sin(2 * x2))
    assert abs(ops.pairing(a, b) - ops.pairing(b, a)) < 1e-10
    assert abs(ops.pairing(a.scale(3.0), b) - 3 * ops.pairing(a, b)) < 1e-10


def test_argumentwise_table_differs():
    f = get("F5")
    ops = FormOps(f.g, f.J, f.params, f.chart, convention="argumentwise")
    rows = {r.check: r for r in identity_conformance(ops, trig_forms(2, 1), f.samples(4), pairing=False)}
    assert rows["dc.dc = 0"].residual < 1e-9
    assert rows["d.dc + dc.d = 0"].residual > 0.1 and rows["dbar.dbar = 0"].residual > 0.1
    assert rows["Deltac.J*c = J*c.Delta"].residual < 1e-9


def test_harmonic_constant():
    f = get("F5")
    ops = FormOps(f.g, f.J, f.params, f.chart)
    rep = harmonic_check(ops, dx(2, 0).scale(2.0), f.samples(6))
    assert rep.laplace_c < 1e-10 and rep.laplace_of_jc < 1e-10
    assert rep.implication_i and rep.equivalence_iv


def test_harmonic_transport_by_degree():
    f = get("F5")
    ops = FormOps(f.g, f.J, f.params, f.chart)
    s = f.samples(6)
    on_functions = harmonic_check(ops, FormField.function(2, E.sin(x1)), s)
    assert on_functions.transport < 1e-10
    on_one_forms = harmonic_check(ops, dx(2, 1).scale(E.sin(x1)), s)
    assert on_one_forms.transport > 1e-3


def test_form_parse():
    c = Chart(2)
    a = FormField.parse(c, 1, [((0,), "x2"), ((1,), "1", "x1")])
    assert a.degree == 1 and a.is_complex
    v = a.components([(2.0, 3.0)])
    assert v[0, 0] == pytest.approx(3.0) and v[0, 1] == pytest.approx(1 + 2j)


def test_bad_multi_index():
    with pytest.raises(DegreeError):
        FormField(2, 2, {(1, 0): 1.0})
    with pytest.raises(DegreeError):
        dx(2, 0) + dx(2, 0, 1)


def test_trig_forms_cover_degrees():
    forms = trig_forms(2, 3)
    assert {a.degree for a in forms} == {0, 1, 2}
    assert math.isclose(forms[0].max_abs([(0.0, 0.0)]), 1.0)
