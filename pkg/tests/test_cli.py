import csv
import math

import numpy as np
import pytest

from rotwaves.cli import EXIT_CONFIG, EXIT_TRIP, main
from rotwaves.config import ConfigError, load_config

BASE = """
[scenario]
model = {model}
preset = {preset}

[params]
eps = 0.1
beta = 0.05
mu = 0.04
ro = 1.0

[grid]
nx = 32
nz = 8

[bathymetry]
b_cos = 1.0

[time]
t_end = {t_end}
dt = {dt}
output_every = {every}
"""


def write(tmp_path, name="case.ini", **kw):
    opts = dict(model="waterwaves", preset="rest", t_end=0.2, dt=0.05, every=2)
    opts.update(kw)
    path = tmp_path / name
    path.write_text(BASE.format(**opts))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_rest_run_has_zero_diagnostics(tmp_path):
    out = tmp_path / "out"
    assert main(["--out-dir", str(out), "run", str(write(tmp_path))]) == 0
    rows = read_csv(out / "run.csv")
    assert len(rows) == 5
    for r in rows:
        for col in ("zeta_l2", "zeta_max", "energy", "vbar_max", "mass"):
            assert float(r[col]) == 0.0
        assert float(r["min_depth"]) == pytest.approx(0.95)
    fields = sorted(p.name for p in out.glob("fields_*.csv"))
    assert fields == ["fields_0.000000.csv", "fields_0.100000.csv", "fields_0.200000.csv"]
    manifest = (out / "manifest.txt").read_text()
    assert "config.params.eps = 0.1" in manifest and "code_version" in manifest
    assert "status = ok" in manifest


def test_inertial_preset_traces_circle(tmp_path):
    period = 2 * math.pi * 1.0 / 0.1
    path = write(tmp_path, model="swe", preset="inertial", t_end=period, dt=period / 512, every=32)
    path.write_text(path.read_text().replace("b_cos = 1.0", "b_cos = 0.0"))
    out = tmp_path / "out"
    assert main(["--out-dir", str(out), "run", str(path)]) == 0
    radius = []
    for f in sorted(out.glob("fields_*.csv")):
        rows = read_csv(f)
        radius.append(math.hypot(float(rows[0]["vbar_x"]), float(rows[0]["vbar_y"])))
    assert len(radius) == 17
    assert max(abs(r - math.hypot(0.3, 0.2)) for r in radius) < 1e-10


def test_both_models_write_compare(tmp_path):
    path = write(tmp_path, model="both", preset="sheared_wave", t_end=0.2, dt=0.05, every=1)
    out = tmp_path / "out"
    assert main(["--out-dir", str(out), "run", str(path)]) == 0
    rows = read_csv(out / "compare.csv")
    assert [float(r["t"]) for r in rows] == pytest.approx([0, 0.05, 0.1, 0.15, 0.2])
    assert float(rows[0]["err_max"]) < 1e-12
    assert all(float(r["err_max"]) >= 0 for r in rows)
    models = {r["model"] for r in read_csv(out / "run.csv")}
    assert models == {"waterwaves", "swe"}


def test_run_is_deterministic(tmp_path):
    path = write(tmp_path, model="both", preset="sheared_wave")
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["--out-dir", str(o), "run", str(path)]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    for n in names:
        a, b = ((o / n).read_bytes() for o in outs)
        if n == "manifest.txt":
            strip = lambda s: [l for l in s.splitlines() if not l.startswith(b"timestamp")]
            a, b = strip(a), strip(b)
        assert a == b, n


def test_floats_use_full_precision(tmp_path):
    out = tmp_path / "out"
    main(["--out-dir", str(out), "run", str(write(tmp_path, preset="standing_wave"))])
    row = read_csv(out / "fields_0.000000.csv")[1]
    assert float(row["x"]) == 2 * math.pi / 32
    assert float(row["zeta"]) == 0.5 * math.cos(2 * math.pi / 32)


def test_config_error_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[params]\neps = 0.1\nmu = lots\n")
    assert main(["run", str(path)]) == EXIT_CONFIG
    assert "line 3" in capsys.readouterr().err


def test_band_limit_enforced():
    text = BASE.format(model="swe", preset="rest", t_end=1, dt=0.1, every=1)
    text += "\n[initial]\nzeta_cos = " + ", ".join(["0.1"] * 11) + "\n"
    with pytest.raises(ConfigError, match="dealiased band"):
        load_config(text=text)


def test_narrow_step_rejected():
    text = BASE.format(model="swe", preset="rest", t_end=1, dt=0.1, every=1)
    text += "\n[forcing]\nkind = smooth_step\np0 = 0.1\nell = 0.2\n"
    with pytest.raises(ConfigError, match="4 dx"):
        load_config(text=text)


@pytest.mark.parametrize("values", ["0.1, 0.1, 0.05", "0.1, 0.05", "0.01, 0.02, 0.04"])
def test_sweep_values_rejected(values):
    text = BASE.format(model="swe", preset="rest", t_end=1, dt=0.1, every=1)
    text += f"\n[sweep]\nparameter = eps\nvalues = {values}\n"
    with pytest.raises(ConfigError, match="line"):
        load_config(text=text)


def test_sweep_needs_section(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path / "o"), "sweep", str(write(tmp_path))]) == EXIT_CONFIG


def test_dt_sweep_on_inertial_error(tmp_path, capsys):
    path = write(tmp_path, model="swe", preset="inertial")
    with open(path, "a") as fh:
        fh.write("\n[sweep]\nparameter = dt\nvalues = 1.0, 0.5, 0.25\nmetric = inertial_error\n")
    out = tmp_path / "out"
    assert main(["--out-dir", str(out), "--threads", "2", "sweep", str(path)]) == 0
    table = read_csv(out / "sweep.csv")
    assert [float(r["dt"]) for r in table] == [1.0, 0.5, 0.25]
    fit = read_csv(out / "sweep_fit.csv")[0]
    assert float(fit["slope"]) == pytest.approx(4.0, abs=0.2)
    assert "slope" in capsys.readouterr().out


def test_mu_sweep_on_dispersion(tmp_path):
    path = write(tmp_path, model="swe", preset="rest", dt=0.001)
    with open(path, "a") as fh:
        fh.write("\n[sweep]\nparameter = mu\nvalues = 0.04, 0.01, 0.0025\n"
                 "metric = dispersion_error\nmode = 2\n")
    out = tmp_path / "out"
    assert main(["--out-dir", str(out), "sweep", str(path)]) == 0
    assert float(read_csv(out / "sweep_fit.csv")[0]["slope"]) == pytest.approx(1.0, abs=0.1)


def test_monitor_trip_exits_nonzero(tmp_path, capsys):
    path = write(tmp_path, model="waterwaves", preset="rest", t_end=3.0, dt=0.01, every=50)
    text = path.read_text().replace("eps = 0.1", "eps = 0.5")
    text += "\n[forcing]\nkind = traveling_bump\np0 = 3.0\nc = 1.0\nell = 0.4\n"
    path.write_text(text)
    out = tmp_path / "out"
    assert main(["--out-dir", str(out), "run", str(path)]) == EXIT_TRIP
    manifest = (out / "manifest.txt").read_text()
    assert "status = tripped" in manifest and "trip.kind" in manifest
    assert any(out.glob("fields_*.csv"))


def test_seed_override_changes_random_data(tmp_path):
    path = write(tmp_path, model="swe")
    with open(path, "a") as fh:
        fh.write("\n[initial]\nrandom_amplitude = 0.1\n")
    a = load_config(path, seed=1)
    b = load_config(path, seed=2)
    from rotwaves.scenario import initial_state
    assert not np.allclose(initial_state(a).zeta, initial_state(b).zeta)
    np.testing.assert_array_equal(initial_state(a).zeta, initial_state(load_config(path, seed=1)).zeta)


def test_check_battery(capsys):
    assert main(["check"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6 and all(l.startswith("PASS") for l in lines)
