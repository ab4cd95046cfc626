import numpy as np
import pytest

from metallic_geom.chart import (
    VectorField, coordinate_fields, levi_civita, nabla_endo, nabla_metric, polynomial_fields, torsion,
)
from metallic_geom.fixtures import get
from metallic_geom.metallic import BranchError, nijenhuis, rel_residual
from metallic_geom.norden import (
    complex_connection, complex_field, complex_frames, complex_invariance_report, complex_projectors, complexify,
    g_complex, norden_check, norden_jc,
)

SQ3 = np.sqrt(3.0)


def test_complexify_real_embedding():
    f = get("F4")
    e1, e2 = coordinate_fields(2)
    zero = VectorField([0.0, 0.0])
    c = complexify(f.g, f.J, e1, zero, e1, zero, (0.1, 0.2))
    assert np.allclose(c.JC, f.J.at((0.1, 0.2)) @ [1, 0])


def test_complexify_metric_value():
    f = get("F4")
    e1, e2 = coordinate_fields(2)
    c = complexify(f.g, f.J, e1, e2, e1, e2, (0.0, 0.0))
    assert c.gC == pytest.approx(2.0)


def test_g_complex_bilinear(rng):
    f = get("F7")
    u = rng.normal(size=4) + 1j * rng.normal(size=4)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    pt = (0.3, 0.1, -0.2, 0.4)
    assert abs(g_complex(f.g, 1j * u, v, pt) - 1j * g_complex(f.g, u, v, pt)) < 1e-12
    assert abs(g_complex(f.g, u, v, pt) - g_complex(f.g, v, u, pt)) < 1e-12


def test_f4_projectors():
    f = get("F4")
    pair = complex_projectors(f.J, f.params, (0.5, -0.5))
    assert pair.sigma_plus == pytest.approx((1 + 1j * SQ3) / 2)
    assert pair.sigma_minus == pytest.approx((1 - 1j * SQ3) / 2)
    for k, v in pair.residuals().items():
        assert v < 1e-12, k
    assert np.allclose(pair.Pp, np.conj(pair.P), atol=1e-15)


def test_f7_frames():
    f = get("F7")
    fr = complex_frames(f.J, f.params, (0.3, 0.0, 0.0, 0.0))
    assert fr.D.shape[1] == 2 and fr.Dp.shape[1] == 2
    assert fr.conjugacy < 1e-12


def test_projectors_reject_real_branch():
    f = get("F1")
    with pytest.raises(BranchError):
        complex_projectors(f.J, f.params, (0.0, 0.0))
    with pytest.raises(BranchError):
        norden_jc(f.J, f.params)


def test_f4_jc():
    f = get("F4")
    C = norden_jc(f.J, f.params).at((0.0, 0.0))
    assert np.allclose(C, [[0, -1], [1, 0]], atol=1e-15)
    assert np.allclose(C @ C, -np.eye(2), atol=1e-15)


def test_jc_eigenvalues_f4():
    # measured: -i on the sigma+ eigenspace, +i on its conjugate
    f = get("F4")
    nc = norden_check(f.g, f.J, f.params, (0.0, 0.0))
    assert abs(nc.eig_on_Dp + 1j) < 1e-12
    assert abs(nc.eig_on_D - 1j) < 1e-12
    C = norden_jc(f.J, f.params).at((0.0, 0.0))
    v = np.array([1.0, 1j])
    assert np.allclose(f.J.at((0.0, 0.0)) @ v, f.params.sigma_plus * v)
    assert np.allclose(C @ v, -1j * v)


@pytest.mark.parametrize("name", ["F7", "F4B"])
def test_norden_check(name):
    f = get(name)
    for pt in f.samples(10):
        nc = norden_check(f.g, f.J, f.params, pt)
        assert nc.square < 1e-10 and nc.g_symmetry < 1e-10 and nc.nijenhuis < 1e-8
        assert abs(nc.eig_on_Dp + 1j) < 1e-10


def test_f7_nijenhuis_ratio():
    f = get("F7")
    Jc = norden_jc(f.J, f.params)
    e = coordinate_fields(4)
    for pt in f.samples(10):
        a = nijenhuis(Jc, e[0], e[2], pt)
        b = nijenhuis(f.J, e[0], e[2], pt) * 4 / 3
        assert rel_residual(a, b) < 1e-9


def test_f4_connections_flat():
    f = get("F4")
    e = coordinate_fields(2)
    X, Y = e[0] + e[1].scale(1j), e[1]
    for kind in ("SVK", "VRANCEANU", "VIDAL"):
        c = complex_connection(kind, f.g, f.J, f.params)
        assert np.abs(c(X, Y, (0.2, 0.3))).max() < 1e-14
        assert np.abs(torsion(c, X, Y, (0.2, 0.3))).max() < 1e-14


def test_f7_connections():
    f = get("F7")
    vd = complex_connection("VIDAL", f.g, f.J, f.params)
    svk = complex_connection("SVK", f.g, f.J, f.params)
    e = coordinate_fields(4)
    for pt in f.samples(10):
        t = torsion(vd, e[0], e[2], pt)
        assert rel_residual(t, nijenhuis(f.J, e[0], e[2], pt) / -3.0) < 1e-8
    X, Y, Z = polynomial_fields(4, 3, 1)
    Xc, Yc = complex_field(X, Y), Y + Z.scale(0.5j)
    pt = (0.3, 0.1, -0.2, 0.4)
    assert np.abs(nabla_endo(svk, f.J, Xc, Yc, pt)).max() < 1e-9
    assert abs(nabla_metric(svk, f.g, Xc, Yc, Z, pt)) < 1e-9


def test_real_fields_stay_real():
    f = get("F7")
    X, Y, _ = polynomial_fields(4, 3, 0)
    pt = (0.2, -0.1, 0.3, 0.1)
    for kind in ("SVK", "VRANCEANU", "VIDAL"):
        v = complex_connection(kind, f.g, f.J, f.params)(X, Y, pt)
        assert np.abs(np.imag(v)).max() < 1e-10


def test_vranceanu_equals_vidal():
    f = get("F4B")
    vr = complex_connection("VRANCEANU", f.g, f.J, f.params)
    vd = complex_connection("VIDAL", f.g, f.J, f.params)
    X, Y, _ = polynomial_fields(2, 3, 4)
    Xc = X + Y.scale(1j)
    assert rel_residual(vr(Xc, Y, (0.3, -0.4)), vd(Xc, Y, (0.3, -0.4))) < 1e-10


def test_unknown_kind():
    f = get("F4")
    with pytest.raises(ValueError):
        complex_connection("LEVI", f.g, f.J, f.params)


def test_invariance_f4():
    f = get("F4")
    r = complex_invariance_report(f.g, f.J, f.params, f.samples(5))
    assert max(r.frobenius_D, r.frobenius_Dp, r.geodesic_D, r.geodesic_Dp, r.nijenhuis, r.jordan,
               r.vidal_torsion) < 1e-10
    assert r.integrable_agree and r.geodesic_agree


def test_invariance_f7():
    f = get("F7")
    r = complex_invariance_report(f.g, f.J, f.params, [(0.3, 0.0, 0.0, 0.0)])
    assert r.nijenhuis > 1e-3 and r.frobenius_D > 1e-3 and r.vidal_torsion > 1e-3
    assert r.integrable_agree


def test_invariance_frozen():
    f = get("F7F")
    r = complex_invariance_report(f.g, f.J, f.params, f.samples(5))
    assert max(r.frobenius_D, r.frobenius_Dp, r.geodesic_D, r.geodesic_Dp, r.nijenhuis, r.jordan,
               r.vidal_torsion) < 1e-10
