import json
from pathlib import Path

import pytest

from switchlab import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_tradeoff_outputs_rows(capsys):
    code, out, _ = _run(capsys, "tradeoff", "--n", "4", "--max-m", "8")
    assert code == cli.EXIT_OK
    lines = out.strip().splitlines()
    assert len(lines) == 4
    m, nb, rnd = lines[0].split(",")
    assert int(m) == 5 and float(nb) == 4.0
    assert float(nb) > float(rnd)


def test_deflect_constants_line(capsys):
    code, out, _ = _run(capsys, "deflect", "--rho", "1.0")
    assert code == cli.EXIT_OK
    assert "a=1.4285" in out and "c=1.2906" in out


def test_assign_reference_permutation(capsys):
    code, out, _ = _run(capsys, "assign", "1,3,2,0,6,4,7,5", "--n", "2")
    assert code == cli.EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0].startswith("S\t0\t1")
    assert lines[1] == "D\t1\t3\t2\t0\t6\t4\t7\t5"
    assert lines[-1] == "valid=True"


def test_schedule_wfq(capsys):
    code, out, _ = _run(capsys, "schedule", "0.5,0.125,0.125,0.125,0.125")
    assert code == cli.EXIT_OK
    assert out.splitlines()[0] == "P1 P1 P1 P1 P2 P3 P4 P5"


def test_decompose_and_schedule2d(tmp_path, capsys):
    matrix = tmp_path / "cap.txt"
    matrix.write_text("6 0 1 1\n1 4 3 0\n1 1 4 2\n0 3 0 5\n")
    code, out, _ = _run(capsys, "decompose", str(matrix), "--frame", "8")
    assert code == cli.EXIT_OK
    assert "frame_size=8" in out
    code, out, _ = _run(capsys, "schedule2d", str(matrix), "--frame", "8",
                        "--algorithm", "hurr")
    assert code == cli.EXIT_OK
    assert "smoothness," in out and "entropy," in out


def test_unknown_experiment_is_usage_error(tmp_path, capsys):
    code, _, err = _run(capsys, "experiment", "nope", "--outdir", str(tmp_path))
    assert code == cli.EXIT_USAGE


def test_empty_parameter_grid_writes_header_only(tmp_path, capsys):
    code, _, _ = _run(capsys, "experiment", "fig6", "--outdir", str(tmp_path),
                      "--param", "n=8", "--param", "max_m=8")
    assert code == cli.EXIT_OK
    lines = (tmp_path / "fig6.csv").read_text().strip().splitlines()
    assert len(lines) == 2  # comment + header, zero data rows


def test_experiment_manifest_roundtrip(tmp_path, capsys):
    manifest = tmp_path / "run.manifest"
    manifest.write_text(f"experiment=fig10\nseed=3\noutdir={tmp_path/'a'}\nslots=500\n")
    code, out, _ = _run(capsys, "experiment", "--manifest", str(manifest))
    assert code == cli.EXIT_OK
    assert (tmp_path / "a" / "fig10b.csv").exists()
    json_manifest = tmp_path / "run.json"
    json_manifest.write_text(json.dumps(
        {"experiment": "fig10", "seed": 3, "outdir": str(tmp_path / "b"), "slots": "500"}
    ))
    code, _, _ = _run(capsys, "experiment", "--manifest", str(json_manifest))
    assert code == cli.EXIT_OK
    a = (tmp_path / "a" / "fig10c.csv").read_bytes()
    b = (tmp_path / "b" / "fig10c.csv").read_bytes()
    assert a == b  # identical manifests give byte-identical artifacts


def test_experiment_rerun_is_deterministic(tmp_path, capsys):
    for sub in ("x", "y"):
        code, _, _ = _run(capsys, "experiment", "montecarlo",
                          "--outdir", str(tmp_path / sub), "--seed", "5",
                          "--param", "slots=20000", "--param", "dslots=500")
        assert code == cli.EXIT_OK
    for name in ("montecarlo_crossbar.csv", "montecarlo_deflection.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()


def test_validate_full_run(tmp_path, capsys):
    for exp in ("fig10", "table2", "table4", "table5", "table6", "sec6c",
                "fig21", "boltzmann"):
        code, _, _ = _run(capsys, "experiment", exp, "--outdir", str(tmp_path),
                          "--param", "slots=800")
        assert code == cli.EXIT_OK
    code, _, _ = _run(capsys, "experiment", "montecarlo", "--outdir", str(tmp_path),
                      "--param", "slots=60000", "--param", "dslots=600")
    assert code == cli.EXIT_OK
    code, out, _ = _run(capsys, "validate", "--outdir", str(tmp_path))
    assert code == cli.EXIT_OK
    assert "FAIL" not in out


def test_validate_flags_tampered_csv(tmp_path, capsys):
    _run(capsys, "experiment", "table4", "--outdir", str(tmp_path))
    path = tmp_path / "table4.csv"
    path.write_text(path.read_text().replace("P2", "P5"))
    code, out, _ = _run(capsys, "validate", "--outdir", str(tmp_path))
    assert code == cli.EXIT_FAIL
    assert "wfq_trace,FAIL" in out


def test_validate_reports_missing_outputs(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    code, out, _ = _run(capsys, "validate", "--outdir", str(tmp_path / "empty"))
    assert code == cli.EXIT_FAIL
    assert "missing output file" in out


def test_validate_tolerance_override(tmp_path, capsys):
    _run(capsys, "experiment", "fig10", "--outdir", str(tmp_path),
         "--param", "slots=400")
    # absurdly tight tolerance must fail the constants check
    code, out, _ = _run(capsys, "validate", "--outdir", str(tmp_path),
                        "--tolerance", "1e-9")
    assert code == cli.EXIT_FAIL
    assert "deflection_constants,FAIL" in out


def test_missing_outdir_is_usage_error(tmp_path, capsys):
    code, _, _ = _run(capsys, "validate", "--outdir", str(tmp_path / "nothere"))
    assert code == cli.EXIT_USAGE
