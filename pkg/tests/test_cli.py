import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from rgbsde.cli import main
from rgbsde.config import ConfigError, load_problem, parse_problem
from rgbsde.output import fmt, read_csv

EXAMPLES = Path(__file__).resolve().parents[1] / "docs" / "examples"
PUT = str(EXAMPLES / "american_put.toml")
FAST = ["--nx", "51", "--nt", "400", "--x-min", "0", "--x-max", "2.5"]


def run(*argv):
    return main([str(a) for a in argv])


# --- config -----------------------------------------------------------------------

def test_examples_parse():
    for path in EXAMPLES.glob("*.toml"):
        pf = load_problem(path)
        assert pf.g_params.sigma_hi_sq > 0


def test_config_generator_forms():
    raw = {
        "T": 1.0, "g": {"sigma_lo_sq": 0.04, "sigma_hi_sq": 0.04},
        "component": [
            {"phi": {"kind": "put-payoff", "params": [1.0]},
             "f": {"kind": "arctan", "component": 2, "scale": 0.5}},
            {"phi": 0.0, "f": {"kind": "linear", "y": [0.1, -0.2], "z": 0.3}, "g": -0.1},
        ],
    }
    spec = parse_problem(raw).spec
    assert spec.k == 2
    assert spec.f[0].params == (1.0, 1.0, 0.5, 0.0)  # 0-based component index inside
    assert spec.f[1].params == (0.0, 0.0, 0.3, 0.1, -0.2)
    assert spec.g[1].kind == "constant"
    assert spec.l[0](0.0, np.array([0.0]))[0] == -1e6


@pytest.mark.parametrize("raw,msg", [
    ({"T": 1.0}, r"\[g\]"),
    ({"T": 1.0, "g": {"sigma_lo_sq": 1, "sigma_hi_sq": 1}, "component": [{"l": 0.0}]}, "phi"),
    ({"T": 1.0, "g": {"sigma_lo_sq": 1, "sigma_hi_sq": 1},
      "component": [{"phi": {"kind": "exp"}}]}, "component 1.phi"),
    ({"T": 1.0, "g": {"sigma_lo_sq": 1, "sigma_hi_sq": 1},
      "component": [{"phi": 0.0, "f": {"kind": "arctan", "component": 2}}]}, "outside"),
])
def test_config_errors(raw, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_problem(raw)


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 1e-300, -2.5e17, float("nan")):
        s = fmt(v)
        assert s == repr(v)
        if v == v:
            assert float(s) == v
    assert fmt(np.int64(3)) == "3"
    assert fmt(True) == "1"


# --- commands --------------------------------------------------------------------

def test_solve_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert run("solve", "--problem", PUT, *FAST, "--out", out) == 0
    names = {p.name for p in out.iterdir()}
    assert names >= {"field.csv", "residual.csv", "trace.csv", "diagnostics.json",
                     "manifest.json", "validation.json"}
    header, data = read_csv(out / "field.csv")
    assert header == ["i", "t", "x", "u", "l", "residual"]
    assert set(np.unique(data[:, 1])) >= {0.0, 1.0}
    trace_header, _ = read_csv(out / "trace.csv")
    assert trace_header[:3] == ["m", "sup_delta", "sup_neg_part"]
    man = json.loads((out / "manifest.json").read_text())
    assert man["effective"]["grid"]["nx"] == 51 and man["effective"]["grid"]["nt"] == 400
    assert man["seed"] == 0 and "numpy" in man["versions"]
    assert man["effective"]["schedule"]["m_values"][-1] == 256
    assert set(man["outputs"]) >= {"field.csv", "trace.csv"}
    assert "u(0, 1)" in capsys.readouterr().out


def test_solve_is_deterministic_and_rerunnable(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run("solve", "--problem", PUT, *FAST, "--out", a) == 0
    assert run("solve", "--problem", PUT, *FAST, "--out", b) == 0
    for name in ("field.csv", "trace.csv", "residual.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    man = json.loads((a / "manifest.json").read_text())
    argv = list(man["rerun"])
    argv[argv.index("--problem") + 1] = str(a / "manifest.json")
    assert run(*argv, "--out", c) == 0
    for name in ("field.csv", "trace.csv"):
        assert (a / name).read_bytes() == (c / name).read_bytes()


def test_compare_unordered_exit_2(tmp_path, capsys):
    lo = EXAMPLES / "put_low_terminal.toml"
    code = run("compare", "--problem-hi", lo, "--problem-lo", PUT, *FAST, "--out", tmp_path)
    assert code == 2
    assert "(ii)" in capsys.readouterr().err


def test_compare_ordered_exit_0(tmp_path):
    lo = EXAMPLES / "put_low_terminal.toml"
    code = run("compare", "--problem-hi", PUT, "--problem-lo", lo, *FAST, "--out", tmp_path)
    assert code == 0
    rep = json.loads((tmp_path / "diagnostics.json").read_text())
    assert rep["ordered"] is True


def test_study_ratio(tmp_path, capsys):
    assert run("study", "--problem", PUT, "--nx", 26, "--refine", 3, "--out", tmp_path) == 0
    header, data = read_csv(tmp_path / "study.csv")
    assert header == ["level", "nx", "nt", "dx", "dt", "value", "residual_sup", "delta", "ratio"]
    assert len(data) == 4
    assert np.all((data[1:, -1] >= 3) & (data[1:, -1] <= 5))
    assert "ratio" in capsys.readouterr().out


def test_unknown_command_exit_1(capsys):
    assert run("frobnicate") == 1
    assert "unknown command" in capsys.readouterr().err
    assert run() == 1


def test_bad_flag_exit_1(tmp_path):
    assert run("solve", "--problem", PUT, "--nx", "many", "--out", tmp_path) == 1
    assert run("solve", "--out", tmp_path) == 1


def test_validation_failure_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(Path(PUT).read_text().replace("L = 1.0", "L = 0.1"))
    assert run("solve", "--problem", bad, *FAST, "--out", tmp_path / "o") == 2
    assert "lipschitz_phi" in capsys.readouterr().err
    rep = json.loads((tmp_path / "o" / "validation.json").read_text())
    assert rep["ok"] is False


def test_config_error_exit_2(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("T = 1.0\n[g]\nsigma_lo_sq = 2.0\nsigma_hi_sq = 1.0\n")
    assert run("solve", "--problem", bad, "--out", tmp_path) == 2
    assert run("solve", "--problem", tmp_path / "missing.toml", "--out", tmp_path) == 2


def test_unstable_grid_exit_2(tmp_path, capsys):
    assert run("solve", "--problem", PUT, "--nx", 251, "--nt", 100, "--out", tmp_path) == 2
    assert "1/2" in capsys.readouterr().err


def test_nonconvergence_exit_3(tmp_path):
    dput = EXAMPLES / "discounted_put.toml"
    code = run("solve", "--problem", dput, *FAST, "--j-max", 2, "--stop-tol", "1e-12",
               "--out", tmp_path)
    assert code == 3
    assert (tmp_path / "field.csv").exists()
    assert json.loads((tmp_path / "manifest.json").read_text())["status"] == "not converged"


def test_picard_command(tmp_path):
    prob = EXAMPLES / "coupled_arctan.toml"
    assert run("picard", "--problem", prob, "--nx", 51, "--out", tmp_path) == 0
    header, data = read_csv(tmp_path / "slabs.csv")
    assert header[:2] == ["slab", "t_start"]
    assert np.all(data[:, header.index("factor")] <= 0.5)


def test_gexp_and_mc_bound(tmp_path):
    prob = EXAMPLES / "g_square.toml"
    assert run("gexp", "--problem", prob, "--nx", 161, "--nt", 1000, "--x-min", -8,
               "--x-max", 8, "--out", tmp_path / "g") == 0
    value = json.loads((tmp_path / "g" / "diagnostics.json").read_text())["value"]
    assert value == pytest.approx(4.0, rel=1e-3)
    header, _ = read_csv(tmp_path / "g" / "field.csv")
    assert header == ["t", "x", "u"]
    assert run("mc-bound", "--problem", prob, "--n-paths", 2000, "--seed", 3,
               "--out", tmp_path / "m") == 0
    text = (tmp_path / "m" / "scenarios.csv").read_text().splitlines()
    assert text[0] == "control_id,mean,stderr"
    assert [line.split(",")[0] for line in text[1:]] == ["lo", "hi", "switch"]


def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--problem", PUT, "--n-steps", 40, "--n-paths", 30, "--seed", 5,
            "--reconstruct", "--nx", 51]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    for name in ("paths.csv", "path_extrema.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    diag = json.loads((tmp_path / "a" / "diagnostics.json").read_text())
    assert diag["min_obstacle_gap"] >= -diag["tol_path"]


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RGBSDE_OUT", str(tmp_path / "env"))
    assert run("mc-bound", "--problem", EXAMPLES / "g_square.toml", "--n-paths", 1000) == 0
    assert (tmp_path / "env" / "scenarios.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rgbsde", "nope"], capture_output=True,
                          text=True)
    assert proc.returncode == 1
    assert "usage" in proc.stderr


def test_plotting_renders_from_csv(tmp_path):
    from rgbsde.plotting import plot_run

    assert run("solve", "--problem", PUT, *FAST, "--out", tmp_path) == 0
    figs = plot_run(tmp_path)
    assert {p.name for p in figs} == {"field.png", "trace.png"}
    assert all(p.stat().st_size > 0 for p in figs)
