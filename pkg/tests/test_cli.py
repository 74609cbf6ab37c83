import json

import numpy as np
import pytest

from beltrami.cli import load_config, main
from beltrami.coefficients import CoefficientField
from beltrami.grid import ComplexField, make_grid, sample
from beltrami.io import read_field, write_coefficients, write_field


def scenario(tmp_path, name="s.ini", **sections):
    base = {
        "scenario": {"schema": 1},
        "grid": {"halfwidth": 1.5, "resolution": 128},
        "coefficient": {"source": "example1", "alpha": 1},
        "ladder": {"levels": "2, 3, 5"},
        "solver": {"tol": 1e-9, "max_iter": 500},
        "analysis": {"p": 2},
        "classify": {"q_source": "example1"},
        "output": {"dir": "out"},
    }
    for sec, vals in sections.items():
        base.setdefault(sec, {}).update(vals)
    text = "\n".join(f"[{s}]\n" + "\n".join(f"{k} = {v}" for k, v in kv.items()) + "\n" for s, kv in base.items())
    path = tmp_path / name
    path.write_text(text)
    return path


def read(path):
    return json.loads(path.read_text())


def test_solve_writes_artifacts(tmp_path):
    cfg = scenario(tmp_path)
    assert main(["solve", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    ladder = read(out / "ladder.json")
    assert ladder["levels"] == [2, 3, 5]
    assert len(ladder["cauchy_gaps"]) == 2
    diag = read(out / "level_3_diagnostics.json")
    assert set(diag) == {"level", "iterations", "residual", "cauchy_gap_prev", "flagged_nodes"}
    f3 = read_field(out / "level_3.csv")
    assert f3.meaning == "displacement" and f3.spec.resolution == 128
    rows = (out / "far_field.csv").read_text().splitlines()
    assert rows[0] == "level,R,sup_error" and len(rows) > 3


def test_solve_example_gaps_decrease_1024(tmp_path):
    cfg = scenario(tmp_path, grid={"resolution": 1024}, ladder={"levels": "2, 3, 5, 9"})
    assert main(["solve", "--config", str(cfg)]) == 0
    gaps = read(tmp_path / "out" / "ladder.json")["cauchy_gaps"]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_solve_zero_coefficient_file(tmp_path):
    spec = make_grid(0, 1.5, 128)
    write_coefficients(tmp_path / "zero.csv", CoefficientField.zero(spec))
    cfg = scenario(tmp_path, coefficient={"source": "file", "path": "zero.csv"}, ladder={"levels": "4"})
    assert main(["solve", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    assert read(out / "level_4_diagnostics.json")["residual"] <= 1e-12
    assert np.all(read_field(out / "level_4.csv").values == 0)


def test_solve_malformed_coefficients(tmp_path, capsys):
    spec = make_grid(0, 1.5, 128)
    path = write_coefficients(tmp_path / "bad.csv", CoefficientField.zero(spec))
    lines = path.read_text().splitlines()
    lines[41] = "1,2,3"
    path.write_text("\n".join(lines) + "\n")
    cfg = scenario(tmp_path, coefficient={"source": "file", "path": "bad.csv"})
    assert main(["solve", "--config", str(cfg)]) == 4
    assert "line 42" in capsys.readouterr().err


def test_solve_missing_coefficient_file(tmp_path):
    cfg = scenario(tmp_path, coefficient={"source": "file", "path": "nope.csv"})
    assert main(["solve", "--config", str(cfg)]) == 4


def test_solve_failure_keeps_partial_artifacts(tmp_path):
    cfg = scenario(tmp_path, solver={"max_iter": 3, "tol": 1e-12})
    assert main(["solve", "--config", str(cfg)]) == 3
    out = tmp_path / "out"
    assert (out / "level_2.csv").exists()
    manifest = read(out / "failure.json")
    assert manifest["failed_level"] == 3 and manifest["completed_levels"] == [2]
    assert manifest["error"] == "NoConvergence"


@pytest.mark.parametrize(
    "sections",
    [
        {"scenario": {"schema": 2}},
        {"analysis": {"p": 2.5}},
        {"analysis": {"p": 1}},
        {"ladder": {"levels": "3, 2"}},
        {"solver": {"tol": 0}},
        {"grid": {"resolution": 100}},
        {"coefficient": {"source": "magic"}},
        {"grid": {"halfwidth": "wide"}},
    ],
)
def test_config_errors(tmp_path, sections):
    cfg = scenario(tmp_path, **sections)
    assert main(["solve", "--config", str(cfg)]) == 2


def test_missing_config(tmp_path):
    assert main(["classify", "--config", str(tmp_path / "none.ini")]) == 2


def test_cli_overrides(tmp_path):
    cfg = load_config(scenario(tmp_path), out=tmp_path / "elsewhere", seed=7)
    assert cfg.out == tmp_path / "elsewhere" and cfg.seed == 7
    assert load_config(scenario(tmp_path)).seed == 0


def test_verify_oracle_1024(tmp_path):
    cfg = scenario(tmp_path, grid={"resolution": 1024}, ladder={"levels": "3"})
    assert main(["verify-oracle", "--config", str(cfg)]) == 0
    rep = read(tmp_path / "out" / "oracle_report.json")
    lvl = rep["levels"][0]
    th = rep["thresholds"]
    assert lvl["f_error"]["max"] <= th["f_sup"]
    assert lvl["f_error"]["median"] <= th["f_median"]
    assert lvl["g_inner_error"]["max"] <= th["g_inner"]
    assert lvl["g_outer_rel_error"]["max"] <= th["g_outer_rel"]
    assert lvl["K_mu_g_rel_error"]["max"] <= th["K_rel"]
    assert rep["all_passed"]


def test_verify_oracle_small_alpha(tmp_path):
    cfg = scenario(tmp_path, coefficient={"alpha": 0.5}, ladder={"levels": "3"})
    assert main(["verify-oracle", "--config", str(cfg)]) == 0
    assert read(tmp_path / "out" / "oracle_report.json")["levels"][0]["passed"]


@pytest.mark.parametrize("alpha, levels", [(1, "1, 3"), (0.5, "2")])
def test_verify_oracle_rejects_small_k(tmp_path, alpha, levels):
    cfg = scenario(tmp_path, coefficient={"alpha": alpha}, ladder={"levels": levels})
    assert main(["verify-oracle", "--config", str(cfg)]) == 2


def test_verify_oracle_needs_example(tmp_path):
    spec = make_grid(0, 1.5, 128)
    write_coefficients(tmp_path / "zero.csv", CoefficientField.zero(spec))
    cfg = scenario(tmp_path, coefficient={"source": "file", "path": "zero.csv"})
    assert main(["verify-oracle", "--config", str(cfg)]) == 2


@pytest.mark.parametrize("q, verdict", [({"q_source": "constant", "q_value": 1}, "compact"), ({"q_source": "example1"}, "normal")])
def test_classify(tmp_path, q, verdict):
    cfg = scenario(tmp_path, classify=q)
    assert main(["classify", "--config", str(cfg)]) == 0
    assert read(tmp_path / "out" / "verdict.json")["verdict"] == verdict


def test_classify_infinite_disk_file(tmp_path):
    spec = make_grid(0, 2.0, 256)
    write_field(tmp_path / "q.csv", sample(lambda y: np.where(np.abs(y) < 1.5, np.inf, 1.0), spec))
    cfg = scenario(tmp_path, classify={"q_source": "file", "q_path": "q.csv", "probes": "0"})
    assert main(["classify", "--config", str(cfg)]) == 0
    assert read(tmp_path / "out" / "verdict.json")["verdict"] == "undetermined"


def test_classify_unreadable_q(tmp_path):
    cfg = scenario(tmp_path, classify={"q_source": "file", "q_path": "missing.csv"})
    assert main(["classify", "--config", str(cfg)]) == 4


def test_diagnose_and_determinism(tmp_path):
    cfg = scenario(tmp_path, grid={"resolution": 256})
    assert main(["diagnose", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["diagnose", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    for p in sorted(a.iterdir()):
        assert p.read_bytes() == (b / p.name).read_bytes(), p.name
    rep = read(a / "diagnostics.json")
    assert [lv["level"] for lv in rep["levels"]] == [2, 3, 5]
    assert all(all(x["holds"] for x in lv["poletsky"]) for lv in rep["levels"])
    assert all(lv["change_of_variables"]["rel_gap"] < 0.05 for lv in rep["levels"])
    assert np.isfinite(rep["equicontinuity"]["C_hat"])


def test_seed_changes_sampling(tmp_path):
    cfg = scenario(tmp_path, grid={"resolution": 128}, ladder={"levels": "3"}, analysis={"poletsky": "no"})
    main(["diagnose", "--config", str(cfg), "--out", str(tmp_path / "s0")])
    main(["diagnose", "--config", str(cfg), "--out", str(tmp_path / "s5"), "--seed", "5"])
    e0 = read(tmp_path / "s0" / "diagnostics.json")["equicontinuity"]
    e5 = read(tmp_path / "s5" / "diagnostics.json")["equicontinuity"]
    assert e0["worst"] != e5["worst"]


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "beltrami", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("solve", "verify-oracle", "classify", "diagnose"):
        assert cmd in res.stdout
