import csv
import io
import json

import pytest

from tunnelguide.cli import main, to_csv, to_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eigen_json(capsys):
    code, out, _ = run(capsys, "eigen", "--a", "1.0", "--nmodes", "40")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) >= 1
    assert list(rows[0]) == ["j", "lambda", "parity", "psi", "N", "tol"]
    assert rows[0]["parity"] == "even" and rows[0]["N"] == 40


def test_eigen_rejects_negative_a(capsys):
    code, _, err = run(capsys, "eigen", "--a", "-1")
    assert code == 1
    assert "a > 0" in err


def test_eigen_csv_header(capsys):
    code, out, _ = run(capsys, "eigen", "--a", "1.0", "--nmodes", "16", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "j,lambda,parity,psi,N,tol"
    assert "\r" not in out


def test_verify_flux_and_exit(capsys):
    code, out, _ = run(capsys, "verify", "--a", "1.0", "--nmodes", "64")
    report = json.loads(out)
    assert all(s["errors"]["flux"] < 1e-6 for s in report["states"])
    assert code == 0, f"identity errors: {[s['errors'] for s in report['states']]}"


def test_verify_tight_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "--a", "1.0", "--nmodes", "32", "--tol-transmission", "1e-9")
    assert code == 3
    assert json.loads(out)["passed"] is False


def test_verify_missing_a(capsys):
    code, _, err = run(capsys, "verify")
    assert code == 1
    assert "--a" in err


def test_resonance_row(capsys):
    code, out, _ = run(capsys, "resonance", "--a", "1", "--lplus", "10", "--lminus", "10", "--j", "1",
                       "--nmodes", "24")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 1
    assert rows[0]["Lambda_im"] < 0
    assert rows[0]["residual"] < 1e-9


def test_resonance_barrier_validation(capsys):
    code, _, err = run(capsys, "resonance", "--lplus", "1.5", "--a", "2", "--lminus", "5")
    assert code == 1
    assert "lplus" in err


def test_resonance_missing_state(capsys):
    code, _, _ = run(capsys, "resonance", "--a", "1", "--lplus", "8", "--lminus", "8", "--j", "3",
                     "--nmodes", "16")
    assert code == 1


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--a", "1", "--j", "1", "--l-from", "6", "--l-to", "12",
                       "--l-step", "2", "--nmodes", "24")
    assert code == 0
    rows = json.loads(out)
    assert [r["L"] for r in rows] == [6, 8, 10, 12]
    errors = [r["ratio_error"] for r in rows]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert {"ratio_re", "ratio_im", "remainder_scale"} <= set(rows[0])


def test_sweep_failure_exit(capsys):
    code, out, err = run(capsys, "sweep", "--a", "1", "--nmodes", "16", "--tol-ratio", "1e-9")
    assert code == 6
    assert len(json.loads(out)) == 4
    assert "study failed" in err


def test_sweep_jobs_deterministic(capsys):
    argv = ["sweep", "--a", "1", "--nmodes", "16"]
    _, serial, _ = run(capsys, *argv)
    _, parallel, _ = run(capsys, *argv, "--jobs", "2")
    assert serial == parallel


def test_oracle_example(capsys):
    code, out, _ = run(capsys, "oracle", "--a", "1", "--h", "0.01", "--L", "12")
    assert code == 0
    rows = json.loads(out)
    assert rows and all(abs(r["diff"]) < 1e-3 for r in rows)


def test_oracle_coarse_grid(capsys):
    code, _, err = run(capsys, "oracle", "--h", "0.2")
    assert code == 2
    assert "GridTooCoarse" in err


@pytest.mark.slow
def test_oracle_row_count_a05(capsys):
    code, out, _ = run(capsys, "oracle", "--a", "0.5")
    assert code == 0
    rows = json.loads(out)
    assert all(r["lambda_mm"] is not None and r["lambda_fd"] is not None for r in rows)


def test_unknown_command_and_flag(capsys):
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "eigen", "--a", "1", "--frobnicate")[0] == 1
    assert run(capsys, "eigen", "--a", "1", "--nmodes", "4")[0] == 1


def test_config_merge(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# window\na = 1.0\nnmodes = 16\nformat = csv\n")
    code, out, _ = run(capsys, "eigen", "--config", str(cfg))
    assert code == 0
    assert out.startswith("j,lambda")
    assert ",16," in out.splitlines()[1]
    # flags win over the file
    code, out, _ = run(capsys, "eigen", "--config", str(cfg), "--format", "json")
    assert json.loads(out)[0]["N"] == 16


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 3\n")
    assert run(capsys, "eigen", "--config", str(cfg))[0] == 1


def test_out_file(tmp_path, capsys):
    target = tmp_path / "eigen.json"
    code, out, _ = run(capsys, "eigen", "--a", "1", "--nmodes", "16", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())[0]["j"] == 1


def test_writers_are_deterministic():
    rows = [{"x": 0.1, "y": None, "z": True, "s": "even"}, {"x": 1 / 3, "y": 2, "z": False, "s": "odd"}]
    text = to_json(rows)
    assert json.loads(text)[1]["x"] == 1 / 3
    assert "0.10000000000000001" in text
    parsed = list(csv.DictReader(io.StringIO(to_csv(rows))))
    assert parsed[1]["x"] == format(1 / 3, ".17g")
