import json
import logging

import pytest

from weylvd import __version__
from weylvd.cli import COROLLARY2_COLUMNS, THEOREM2_COLUMNS, main
from weylvd.diagnostics import read_rows
from weylvd.ode import free_m
from weylvd.potential import PotentialSpec, write_potential_csv

EXPERIMENT = """
[potential]
generator = bump_train
bump_height = 3
bump_width = 1
gap_growth = 2
count = 3
first_gap = 5
h = 0.25
{windows}

[experiment]
a_set = [1, 2]
s_set = (0, inf)
d_ladder = 0.1, 0.01
k_range = {k_range}
lambda_points = 201
"""


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    package = logging.getLogger("weylvd")
    handlers, root_level, package_level = root.handlers[:], root.level, package.level
    yield
    root.handlers[:] = handlers
    root.setLevel(root_level)
    package.setLevel(package_level)


@pytest.fixture
def zero_csv(tmp_path):
    path = tmp_path / "zero.csv"
    write_potential_csv(path, PotentialSpec.zero(100.0, 0.5))
    return path


@pytest.fixture
def step_csv(tmp_path, step_potential):
    path = tmp_path / "step.csv"
    write_potential_csv(path, step_potential)
    return path


def write_experiment(tmp_path, windows="", k_range="3"):
    path = tmp_path / "experiment.cfg"
    path.write_text(EXPERIMENT.format(windows=windows, k_range=k_range))
    return path


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_mfunction_free_potential(tmp_path, zero_csv):
    out = tmp_path / "m.csv"
    assert main(["mfunction", "--potential", str(zero_csv), "--z", "1,1", "--z=-1,0.5", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [row["re_z"] for row in rows] == ["1", "-1"]
    for row in rows:
        z = complex(float(row["re_z"]), float(row["im_z"]))
        assert complex(float(row["re_m"]), float(row["im_m"])) == pytest.approx(free_m(z), rel=1e-9)
        assert float(row["gamma_diag"]) <= 1e-8


def test_mfunction_missing_file(tmp_path):
    args = ["mfunction", "--potential", str(tmp_path / "nope.csv"), "--z", "1,1", "--out", str(tmp_path / "m.csv")]
    assert main(args) == 1


def test_mfunction_bad_start(tmp_path, zero_csv):
    args = ["mfunction", "--potential", str(zero_csv), "--z", "1,1", "--start", "500", "--out", str(tmp_path / "m.csv")]
    assert main(args) == 1


def test_mfunction_non_convergence(tmp_path, step_csv):
    out = tmp_path / "m.csv"
    args = ["mfunction", "--potential", str(step_csv), "--z", "1,1", "--tail", "3", "--tol", "0", "--attempts", "1"]
    assert main([*args, "--out", str(out)]) == 2
    assert out.read_text() == "re_z,im_z,re_m,im_m,gamma_diag\n"


@pytest.mark.parametrize("z", ["1", "a,b", "1,0", "1,-1"])
def test_mfunction_rejects_bad_z(tmp_path, zero_csv, z):
    args = ["mfunction", "--potential", str(zero_csv), f"--z={z}", "--out", str(tmp_path / "m.csv")]
    try:
        code = main(args)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["bounds"])
    assert exc.value.code == 1


def test_bounds_pass(tmp_path):
    out = tmp_path / "bounds.csv"
    assert main(["bounds", "--check", "lemma3", "--check", "constants", "--draws", "3", "--out", str(out)]) == 0
    rows = read_rows(out)
    top = [row for row in rows if "/" not in row["check"]]
    assert [row["check"] for row in top] == ["lemma3"] * 3 + ["constants"]
    assert all(row["pass"] == "true" for row in rows)
    assert all(row["seed"] for row in rows)


def test_bounds_are_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        assert main(["bounds", "--check", "lemma3", "--draws", "4", "--seed", "9", "--out", str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_bounds_violation(tmp_path, capsys):
    out = tmp_path / "bounds.csv"
    assert main(["bounds", "--check", "constants", "--rhs-scale", "0.5", "--out", str(out)]) == 3
    assert "constants seed=" in capsys.readouterr().err
    assert read_rows(out)[0]["pass"] == "false"


def test_bounds_rejects_zero_draws(tmp_path):
    assert main(["bounds", "--check", "lemma3", "--draws", "0", "--out", str(tmp_path / "b.csv")]) == 1


def test_sparse_experiment(tmp_path):
    outdir = tmp_path / "run"
    config = write_experiment(tmp_path)
    assert main(["sparse-experiment", "--config", str(config), "--outdir", str(outdir), "--plot"]) == 0

    theorem2 = read_rows(outdir / "theorem2.csv")
    assert list(theorem2[0]) == list(THEOREM2_COLUMNS)
    assert [row["k"] for row in theorem2] == ["3"]
    corollary2 = read_rows(outdir / "corollary2.csv")
    assert list(corollary2[0]) == list(COROLLARY2_COLUMNS)
    assert corollary2[0]["valid"] == "true"
    assert (outdir / "discrepancy.svg").exists()

    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["command"] == "sparse-experiment"
    assert manifest["tool_version"] == __version__
    assert manifest["row_errors"] == []
    assert manifest["outputs"] == ["theorem2.csv", "corollary2.csv", "discrepancy.svg"]
    assert manifest["extra"]["corollary2_targets"]["plus"] == pytest.approx(1.0)


def test_sparse_experiment_is_reproducible(tmp_path):
    config = write_experiment(tmp_path)
    for name in ("a", "b"):
        assert main(["sparse-experiment", "--config", str(config), "--outdir", str(tmp_path / name)]) == 0
    for output in ("theorem2.csv", "corollary2.csv"):
        assert (tmp_path / "a" / output).read_bytes() == (tmp_path / "b" / output).read_bytes()


def test_sparse_experiment_invalid_windows(tmp_path):
    config = write_experiment(tmp_path, windows="windows = 1:6, 7:9", k_range="1-2")
    assert main(["sparse-experiment", "--config", str(config), "--outdir", str(tmp_path / "run")]) == 4


def test_sparse_experiment_bad_config(tmp_path):
    config = write_experiment(tmp_path, k_range="7")
    assert main(["sparse-experiment", "--config", str(config), "--outdir", str(tmp_path / "run")]) == 1
    assert main(["sparse-experiment", "--config", str(tmp_path / "nope.cfg"), "--outdir", str(tmp_path / "run")]) == 1
