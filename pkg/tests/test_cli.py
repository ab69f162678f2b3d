import json
import logging
import math
import os

import pytest

from rotalg.main import main
from rotalg.services.file_manager import FileManager


@pytest.fixture(autouse=True)
def _restore_root_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers = handlers
    root.setLevel(level)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_of_harper(app_config, capsys):
    code, out, _ = _run(capsys, "norm", "--p", "1", "--q", "2", "--expr", "U+U'+V+V'")
    assert code == 0
    assert float(out.strip()) == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    path = os.path.join(app_config["system"]["output_dir"], "norm_U_Uadj_V_Vadj.json")
    data = json.loads(open(path, encoding="utf-8").read())
    assert data["norm"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert data["grid"] == [32, 32]


def test_norm_of_u_plus_v(app_config, capsys, tmp_path):
    out_path = str(tmp_path / "n.json")
    code, out, _ = _run(capsys, "norm", "--p", "1", "--q", "2", "--expr", "U+V", "--grid", "16x16", "--out", out_path)
    assert code == 0
    assert float(out.strip()) == pytest.approx(2.0, abs=1e-6)
    assert os.path.exists(out_path)


def test_norm_of_zero(app_config, capsys, tmp_path):
    code, out, _ = _run(capsys, "norm", "--p", "2", "--q", "5", "--expr", "0", "--out", str(tmp_path / "z.json"))
    assert code == 0
    assert out.strip() == "0"


def test_normal_form(app_config, capsys):
    code, out, _ = _run(capsys, "normal-form", "--p", "1", "--q", "2", "V*U")
    assert code == 0
    assert out.strip() == "(-1)·U^1·V^1"
    code, out, _ = _run(capsys, "normal-form", "--p", "1", "--q", "2", "--expr", "U-U")
    assert out.strip() == "0"


def test_spectrum_prints_bands(app_config, capsys, tmp_path):
    code, out, _ = _run(
        capsys, "spectrum", "--p", "1", "--q", "3", "--expr", "V+V'", "--format", "csv", "--out", str(tmp_path / "s.csv")
    )
    assert code == 0
    lo, hi = (float(v) for v in out.split())
    assert (lo, hi) == (pytest.approx(-2.0, abs=1e-12), pytest.approx(2.0, abs=1e-12))
    assert open(tmp_path / "s.csv", encoding="utf-8").readline() == "band_lo,band_hi\n"


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["--p", "1", "--q", "3", "--p2", "2", "--q2", "3"], "isomorphic"),
        (["--p", "1", "--q", "5", "--p2", "2", "--q2", "5"], "not-isomorphic"),
        (["--p", "1", "--q", "2", "--p2", "1", "--q2", "3"], "not-isomorphic"),
    ],
)
def test_classify(app_config, capsys, argv, expected):
    code, out, _ = _run(capsys, "classify", *argv)
    assert code == 0
    assert out.strip() == expected


def test_rep_equiv(app_config, capsys):
    code, out, _ = _run(capsys, "rep-equiv", "--q", "4", "1", "1", "i", "i")
    assert (code, out.strip()) == (0, "equivalent")
    code, out, _ = _run(capsys, "rep-equiv", "--q", "3", "1", "1", "i", "1")
    assert (code, out.strip()) == (0, "not-equivalent")


@pytest.mark.parametrize(
    "argv",
    [
        ["rep-equiv", "--q", "4", "1", "1", "-i", "-i"],
        ["rep-equiv", "1", "-i", "i", "-1", "--q", "4"],
        ["rep-equiv", "--q", "4", "-0.6+0.8i", "1", "0.6-0.8i", "1"],
        ["rep-equiv", "--q", "4", "--", "-1", "-i", "1", "i"],
    ],
)
def test_rep_equiv_accepts_points_with_leading_minus(app_config, capsys, argv):
    code, out, _ = _run(capsys, *argv)
    assert (code, out.strip()) == (0, "equivalent")


def test_spectral_decomp_of_identity(app_config, capsys, tmp_path):
    matrix = tmp_path / "eye.json"
    matrix.write_text(json.dumps([[1, 0], [0, 1]]), encoding="utf-8")
    out_path = tmp_path / "family.json"
    code, out, _ = _run(capsys, "spectral-decomp", str(matrix), "--out", str(out_path))
    assert code == 0
    assert float(out.strip()) == 2 * math.pi
    data = json.loads(out_path.read_text(encoding="utf-8"))
    assert data["phases"] == [2 * math.pi]
    assert data["polynomials"] == [{"min_power": 0, "coeffs": [[1.0, 0.0]]}]


def test_section_pipeline(app_config, capsys, tmp_path):
    section = str(tmp_path / "section.json")
    code, out, _ = _run(capsys, "synthesize", "--p", "2", "--q", "5", "--expr", "U^2*V", "--out", section)
    assert code == 0 and out.strip() == section

    code, out, _ = _run(capsys, "verify-section", section)
    assert code == 0
    assert out.startswith("member max_violation=")

    coeffs = str(tmp_path / "coeffs.csv")
    code, out, _ = _run(capsys, "fourier", section, "--mmax", "4", "--out", coeffs)
    assert code == 0
    table = FileManager().load_coeff_table(coeffs)
    assert set(table.coeffs) == {(2, 1)}
    assert table.get(2, 1) == pytest.approx(1.0, abs=1e-12)

    code, out, _ = _run(capsys, "normal-form", "--p", "2", "--q", "5", "--coeffs", coeffs)
    assert code == 0
    assert out.strip().endswith("·U^2·V^1")
    assert " + " not in out


def test_verify_section_reports_non_members(app_config, capsys, tmp_path):
    values = [[[1, 0], [0, 0]]] * 64
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"p": 1, "q": 2, "n": 8, "values": values}), encoding="utf-8")
    code, out, _ = _run(capsys, "verify-section", str(path))
    assert code == 0
    assert out.startswith("not-member max_violation=1")
    code, _, err = _run(capsys, "fourier", str(path))
    assert code == 3
    assert "[ERROR]" in err


def _butterfly_bytes(capsys, tmp_path, name):
    out_path = tmp_path / name
    code, _, _ = _run(capsys, "butterfly", "--qmax", "5", "--expr", "U+U'+V+V'", "--grid", "16x16", "--out", str(out_path))
    assert code == 0
    return out_path.read_bytes()


def test_butterfly_csv_is_deterministic(app_config, capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ROTALG_THREADS", "1")
    first = _butterfly_bytes(capsys, tmp_path, "a.csv")
    second = _butterfly_bytes(capsys, tmp_path, "b.csv")
    monkeypatch.setenv("ROTALG_THREADS", "4")
    threaded = _butterfly_bytes(capsys, tmp_path, "c.csv")
    assert first == second == threaded
    assert b"\r" not in first
    lines = first.decode("utf-8").splitlines()
    assert lines[0] == "p,q,theta,band_lo,band_hi"
    assert lines[1].startswith("1,2,0.5,")


@pytest.mark.parametrize(
    "argv, code",
    [
        (["normal-form", "--p", "1", "--q", "2", "U+"], 2),
        (["normal-form", "--p", "1", "--q", "2", ""], 2),
        (["norm", "--p", "2", "--q", "4", "--expr", "U"], 3),
        (["spectrum", "--p", "1", "--q", "3", "--expr", "U+V"], 3),
        (["butterfly", "--qmax", "1", "--expr", "U+U'+V+V'"], 3),
        (["norm", "--p", "1", "--q", "2", "--expr", "U", "--grid", "2x2"], 3),
        (["rep-equiv", "--q", "4", "1", "1", "x", "1"], 3),
        (["verify-section", "does-not-exist.json"], 4),
    ],
)
def test_exit_codes(app_config, capsys, argv, code):
    got, _, err = _run(capsys, *argv)
    assert got == code
    assert "[ERROR]" in err


def test_syntax_error_reports_position(app_config, capsys):
    code, _, err = _run(capsys, "normal-form", "--p", "1", "--q", "2", "(U+V")
    assert code == 2
    assert "位置 4" in err


@pytest.mark.parametrize(
    "content",
    [
        "[[1, 0], [0",
        json.dumps([[["a", 0], [0, 0]], [[0, 0], [1, 0]]]),
        json.dumps([[[None, 0], [0, 0]], [[0, 0], [1, 0]]]),
    ],
)
def test_malformed_input_file(app_config, capsys, tmp_path, content):
    path = tmp_path / "broken.json"
    path.write_text(content, encoding="utf-8")
    code, _, err = _run(capsys, "spectral-decomp", str(path))
    assert code == 4
    assert "[ERROR]" in err


def test_argparse_errors_exit_with_usage_code(app_config, capsys):
    assert main(["norm", "--p", "1"]) == 2
    assert main([]) == 2
