import json

import pytest

from metallic_geom.report import FAIL, INFO, PASS, Report, Row, fmt, fmt_point, rounded


def test_rounding():
    assert rounded(1.23456e-5) == 1.23e-5
    assert rounded(5e-14) == 0.0
    assert rounded(-2e-14) == 0.0
    assert rounded(None) is None
    assert rounded(True) is True
    assert fmt(0.0) == "0" and fmt(None) == "-"
    assert fmt(123456.0) == "1.23e+05"


def test_fmt_point():
    assert fmt_point((0.5, 1e-20, -1.0)) == "(0.5, 0, -1)"
    assert fmt_point(()) == ""


def test_verdict_uses_rounded_residual():
    # 9.996e-9 rounds to 1e-8, which does not pass a 1e-8 threshold
    assert Row.test("x", "op", 9.996e-9, 1e-8).verdict == FAIL
    assert Row.test("x", "op", 9.94e-9, 1e-8).verdict == PASS
    assert Row.test("x", "op", 3e-14, 1e-13).verdict == PASS


def test_failed_only_when_enforced():
    assert Row.test("x", "op", 1.0, 1e-8).failed
    assert not Row.test("x", "op", 1.0, 1e-8, enforced=False).failed
    assert not Row.info("x", "op", 1.0).failed
    assert Row.info("x", "op", 1.0).verdict == INFO


def _report():
    rep = Report("validate", "F1.spec", "ab" * 32, {"n": 2, "tol": 1e-8, "disc": 5.0000000001})
    rep.add(Row.test("law", "metallic.metallic_law", 2.2e-11, 1e-10, "(0.1, 0.2)"),
            Row.test("printed", "op", 0.5, 1e-8, "", enforced=False),
            Row.info("rank", "op", 1.0, "", "yes"))
    return rep


def test_text_and_json_agree():
    rep = _report()
    data = json.loads(rep.render("json"))
    text = rep.render("text")
    assert data["header"]["disc"] == 5.0 and "disc=5" in text
    for r in data["rows"]:
        assert r["check"] in text
    assert data["rows"][0]["residual"] == 2.2e-11 and "2.2e-11" in text
    assert "fail*" in text and "* measured only" in text
    assert text.rstrip().endswith("exit 0") and data["exit"] == 0
    assert not rep.failed


def test_render_deterministic():
    assert _report().render("text") == _report().render("text")
    assert _report().render("json") == _report().render("json")


def test_failed_report():
    rep = _report()
    rep.add(Row.test("bad", "op", 1.0, 1e-8))
    assert rep.failed
    assert "FAIL" in rep.render()


@pytest.mark.parametrize("out", ["text", "json"])
def test_header_line(out):
    s = _report().render(out)
    assert "metallic-geom" in s and "F1.spec" in s
