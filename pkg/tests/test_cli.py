"""CLI reports against stored goldens, plus exit codes.

Regenerate the goldens with ``UPDATE_GOLDEN=1 python3 -m pytest tests/test_cli.py``.
"""

import json
import os
import subprocess
import sys

import pytest

from metallic_geom.cli import main

from conftest import GOLDEN, SPECS

CASES = [
    ("validate_F1", ["validate", "F1.spec"], 0),
    ("validate_F2", ["validate", "F2.spec"], 0),
    ("validate_F3", ["validate", "F3.spec"], 0),
    ("validate_F4", ["validate", "F4.spec"], 0),
    ("validate_F5", ["validate", "F5.spec"], 0),
    ("validate_F6", ["validate", "F6.spec"], 0),
    ("validate_F7", ["validate", "F7.spec"], 0),
    ("validate_F7F", ["validate", "F7F.spec"], 0),
    ("validate_F4B", ["validate", "F4B.spec"], 0),
    ("tensors_F2", ["tensors", "F2.spec"], 0),
    ("tensors_F3", ["tensors", "F3.spec"], 0),
    ("tensors_F6", ["tensors", "F6.spec"], 0),
    ("connections_F1", ["connections", "F1.spec"], 0),
    ("connections_F3", ["connections", "F3.spec"], 1),
    ("foliate_F2", ["foliate", "F2.spec"], 0),
    ("foliate_F6", ["foliate", "F6.spec"], 0),
    ("chen_F6", ["chen", "F6.spec", "--a", "1", "--b", "0", "--c", "0"], 0),
    ("norden_F4", ["norden", "F4.spec"], 0),
    ("norden_F7", ["norden", "F7.spec"], 0),
    ("forms_F5", ["forms", "F5.spec"], 1),
    ("map_F1_eigenline", ["map", "F1.spec", "eigenline.spec", "F1_eigenline.map"], 0),
    ("validate_F1_json", ["validate", "F1.spec", "--output", "json"], 0),
    ("connections_F3_json", ["connections", "F3.spec", "--output", "json"], 1),
]


def _argv(args):
    return [str(SPECS / a) if a.endswith((".spec", ".map")) else a for a in args]


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name, args, code", CASES, ids=[c[0] for c in CASES])
def test_golden(capsys, name, args, code):
    got_code, out, _ = _run(capsys, _argv(args))
    assert got_code == code
    path = GOLDEN / (name + (".json" if "json" in name else ".txt"))
    if os.environ.get("UPDATE_GOLDEN") == "1":
        path.write_text(out, encoding="utf-8")
    assert out == path.read_text(encoding="utf-8")
    assert f"exit {code}" in out or json.loads(out)["exit"] == code


def test_text_json_parity(capsys):
    _, text, _ = _run(capsys, _argv(["connections", "F3.spec"]))
    _, js, _ = _run(capsys, _argv(["connections", "F3.spec", "--output", "json"]))
    data = json.loads(js)
    for row in data["rows"]:
        assert row["check"] in text
    assert data["header"]["n"] == 3 and data["spec"] == "F3.spec"


def test_deterministic(capsys):
    a = _run(capsys, _argv(["tensors", "F6.spec"]))[1]
    b = _run(capsys, _argv(["tensors", "F6.spec"]))[1]
    assert a == b


def test_seed_and_samples_change_header(capsys):
    _, out, _ = _run(capsys, _argv(["validate", "F1.spec", "--samples", "7", "--seed", "3"]))
    assert "samples=7" in out and "seed=3" in out


def test_exit_fail_on_perturbed(capsys):
    code, out, _ = _run(capsys, ["validate", str(GOLDEN / "F1_perturbed.spec")])
    assert code == 1 and "FAIL" in out


def test_exit_parse_error(capsys):
    code, out, err = _run(capsys, ["validate", str(GOLDEN / "F1_malformed.spec")])
    assert code == 2 and out == ""
    assert "F1_malformed.spec:13:10: unexpected end of input" in err


def test_exit_wrong_branch(capsys):
    code, _, err = _run(capsys, _argv(["norden", "F1.spec"]))
    assert code == 3 and "wrong branch" in err
    assert _run(capsys, _argv(["tensors", "F4.spec"]))[0] == 3


def test_exit_numeric(capsys):
    code, _, err = _run(capsys, ["validate", str(GOLDEN / "F1_degenerate.spec")])
    assert code == 4 and "degenerate" in err


def test_missing_file(capsys):
    code, _, err = _run(capsys, ["validate", str(GOLDEN / "nope.spec")])
    assert code == 2 and "cannot read" in err


def test_argparse_errors():
    with pytest.raises(SystemExit) as info:
        main(["chen", str(SPECS / "F6.spec")])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "metallic_geom", "validate", str(SPECS / "F1.spec")],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout == (GOLDEN / "validate_F1.txt").read_text(encoding="utf-8")
