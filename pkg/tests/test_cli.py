import csv

import pytest

from nskfluid.cli import main, run, write_csv

CONFIG = """nu = 1.0
alpha_a = 0.1
alpha_b = 0.0
x_min = -12
x_max = 12
n_cells = 256
dt = 0.005
t_end = 0.1
eos_k = 0.5
eos_gamma = 1.6666666666666667
init_a = 1
"""


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_params_quantum():
    r = run(["params", "--preset", "quantum"])
    assert r.exit_code == 0
    assert r.summary["kappa"] == pytest.approx(0.25)


def test_min_state_example():
    r = run(["min-state", "--alpha-a", "0.1", "--alpha-b", "0.5", "--nu", "1", "--A", "2"])
    assert r.exit_code == 0
    assert r.summary["std_product"] == pytest.approx(r.summary["min_std_product"], rel=1e-14)


@pytest.mark.parametrize("argv", [
    ["params", "--nu", "1"],
    ["params", "--alpha-a", "0.5", "--alpha-b", "0.5", "--nu", "1"],
    ["nonsense"],
    ["phase-diagram", "--k-max", "1", "--s-max", "1", "--nk", "1", "--out", "x"],
    ["uncertainty", "--preset", "quantum", "--state-file", "/nonexistent.csv"],
])
def test_validation_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and err.count("\n") == 1


def test_phase_diagram_csv(tmp_path):
    r = run(["phase-diagram", "--k-max", "2", "--s-max", "4", "--nk", "3", "--ns", "5", "--out", str(tmp_path)])
    rows = _rows(r.artifacts[0])
    assert len(rows) == 15
    assert list(rows[0]) == ["k", "s", "min_over_mnu", "improves_paper", "improves_direct"]
    assert {row["improves_paper"] for row in rows} <= {"true", "false"}


def test_min_curve_csv(tmp_path):
    r = run(["min-curve", "--xi-max", "2", "--n", "3", "--out", str(tmp_path)])
    rows = _rows(r.artifacts[0])
    assert float(rows[1]["std_product"]) == 0.0


def test_bounds_media():
    r = run(["bounds", "--mass", "3e-26", "--water", "--vapor"])
    assert r.summary["in_units_of_half_hbar"] == pytest.approx(569, rel=2e-3)
    assert r.summary["vapor_alt_in_units_of_half_hbar"] == pytest.approx(51, rel=1e-2)


def test_evolve_uncertainty_and_sde(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG)
    out = tmp_path / "out"
    r = run(["evolve", "--config", str(cfg), "--out", str(out)])
    assert r.exit_code == 0 and r.summary["all_hold"]
    diag = _rows(out / "diagnostics.csv")
    assert float(diag[-1]["t"]) == pytest.approx(0.1)
    snap = str(out / "snapshot_final.csv")
    u = run(["uncertainty", "--alpha-a", "0.1", "--alpha-b", "0", "--nu", "1", "--state-file", snap])
    assert u.summary["std_product"] == pytest.approx(float(diag[-1]["std_product"]), rel=1e-6)
    s = run(["sde", "--drift", "from-snapshot", "--snapshot", snap, "--particles", "500", "--steps", "5",
             "--nu", "1", "--out", str(out)])
    assert s.exit_code == 0
    assert len(_rows(out / "ensemble_summary.csv")) >= 2


def test_evolve_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG + "viscosity = 3\n")
    r = run(["evolve", "--config", str(cfg), "--out", str(tmp_path)])
    assert r.exit_code == 1 and "viscosity" in r.summary["error"]


def test_evolve_numerical_abort_exit_2(tmp_path):
    cfg = tmp_path / "run.cfg"
    # a width-0.1 packet on a 0.094 grid cannot be resolved
    cfg.write_text(CONFIG.replace("init_a = 1", "init_a = 50"))
    r = run(["evolve", "--config", str(cfg), "--out", str(tmp_path)])
    assert r.exit_code == 2
    assert "density" in r.summary["error"]


def test_sde_ground_state_reproducible(tmp_path):
    args = ["sde", "--drift", "ground-state", "--particles", "2000", "--steps", "20", "--seed", "4"]
    a = run(args + ["--out", str(tmp_path / "a")])
    b = run(args + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "ensemble_summary.csv").read_text() == (tmp_path / "b" / "ensemble_summary.csv").read_text()
    assert a.exit_code == b.exit_code == 0


def test_write_csv_format(tmp_path):
    path = write_csv(tmp_path / "x.csv", ["a", "b", "c"], [[1.5, True, 3]])
    assert open(path).read() == "a,b,c\n1.5000000000000000e+00,true,3\n"
