import json

import pytest

from natbound.cli import EXIT_CERTIFICATION, EXIT_OK, EXIT_VALIDATION, run


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def test_expand_quadratic(capsys):
    code, doc = invoke(capsys, "expand", "--poly", "1 + T + p*T^2", "--depth", "24")
    assert code == EXIT_OK and doc["schema"] == 1 and doc["command"] == "expand"
    e = {(r["n"], r["m"]): r["e"] for r in doc["expansion"]}
    assert e[(0, 1)] == 1 and e[(2, 5)] == 1 and doc["estermann"]["terminated"] is False


def test_expand_preset_comparison(capsys):
    code, doc = invoke(capsys, "expand", "--preset", "quadratic-half")
    row = next(r for r in doc["reference_comparison"] if (r["n"], r["m"]) == (1, 3))
    assert row == {**row, "canonical": -1, "reference": 1, "agree": False} and "note" in row


@pytest.mark.parametrize(
    "argv, code, err",
    [
        (["expand", "--poly", "1 + T +"], EXIT_VALIDATION, "polynomial_syntax"),
        (["expand", "--poly", "2 + T"], EXIT_VALIDATION, "polynomial_invalid"),
        (["expand", "--preset", "nope"], EXIT_VALIDATION, "validation_error"),
        (["expand"], EXIT_VALIDATION, "validation_error"),
        (["bogus"], EXIT_VALIDATION, "usage_error"),
        (["zeros", "--tmax", "9000"], EXIT_VALIDATION, "validation_error"),
        (["density", "--poly", "1 + T", "--variant", "ratio"], EXIT_VALIDATION, "validation_error"),
        (["randlab", "--V", "-1"], EXIT_VALIDATION, "config_invalid"),
    ],
)
def test_error_codes(capsys, argv, code, err):
    got, doc = invoke(capsys, *argv)
    assert got == code and doc["status"] == "error" and doc["error"]["code"] == err


def test_no_partial_output_on_error(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _ = invoke(capsys, "--out", str(out), "expand", "--poly", "1 +")
    assert code == EXIT_VALIDATION and not out.exists()


def test_options_after_subcommand(capsys, tmp_path):
    out, csv = tmp_path / "c.json", tmp_path / "c.csv"
    code, _ = invoke(capsys, "coeffs", "--preset", "polarised-z6", "--N", "1000", "--out", str(out), "--csv", str(csv))
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["checks"]["dual_route_equal"] and doc["support"] == "cubes"
    assert csv.read_text().splitlines()[27] == "27,1120"


def test_spec_file_and_prefactor(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"W": "1 - T", "prefactors": [[1, 1, 1]]}))
    code, doc = invoke(capsys, "coeffs", "--spec", str(spec), "--N", "50", "--prefactor", "1,0,1")
    # zeta(s) zeta(s-1) / zeta(s) = zeta(s-1): a_n = n
    assert code == EXIT_OK and [r["a_n"] for r in doc["first_nonzero"][:5]] == [1, 2, 3, 4, 5]


def test_zeros_gap_check(capsys, tmp_path):
    code, doc = invoke(capsys, "--cache-dir", str(tmp_path), "zeros", "--tmax", "1010", "--check-gaps", "1000")
    assert code == EXIT_OK and doc["counting"]["gaps_ok"] and doc["counting"]["gap_range"] == [1000, 1004]


def test_cache_corruption_exit_code(capsys, tmp_path):
    assert invoke(capsys, "--cache-dir", str(tmp_path), "cache", "warm", "--tmax", "60")[0] == EXIT_OK
    csv = tmp_path / "zeros.csv"
    csv.write_text(csv.read_text()[:80])
    code, doc = invoke(capsys, "--cache-dir", str(tmp_path), "cache", "verify")
    assert code == EXIT_CERTIFICATION and doc["error"]["code"] == "cache_corrupt"
    assert invoke(capsys, "--cache-dir", str(tmp_path), "cache", "purge")[0] == EXIT_OK
    assert invoke(capsys, "--cache-dir", str(tmp_path), "cache", "purge")[1]["cache"]["removed"] == 0


def test_byte_identical_reports(capsys, tmp_path):
    argv = ["--cache-dir", str(tmp_path), "randlab", "--seeds", "3", "--t-to", "8"]
    run(argv)
    first = capsys.readouterr().out
    run(["--jobs", "3", *argv])
    assert capsys.readouterr().out == first
