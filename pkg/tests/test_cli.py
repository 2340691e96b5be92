import math
from pathlib import Path

import numpy as np
import pytest

from coulombgas.cli import (
    fit_loglog,
    initial_configuration,
    load_config,
    main,
    metropolis_reject_fraction,
    run_command,
    run_experiment_chain,
)
from coulombgas.constraints import LinearStat, LogAbs, QuadStat, RadialGap, ConstraintSet, evaluate

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, text) -> Path:
    path = tmp_path / "experiment.cfg"
    path.write_text(text, encoding="utf-8")
    return path


TINY = """
[model]
d = 2
n = 12
beta = n_squared
confinement = quadratic
interaction = coulomb

[constraint]
kind = affine
v = 1, 0
c = 1.0

[sampler]
dt = 0.4
gamma = 1.0
n_iter = 400
seed = 7
burn_in_fraction = 0.1
snapshot_stride = 10

[output]
directory = {out}
"""


class TestConfigLoading:
    def test_bundled_configs_parse(self):
        for path in CONFIGS.glob("*.cfg"):
            cfg = load_config(path)
            assert cfg.model.n >= 2

    def test_horizon_sets_iteration_count(self):
        cfg = load_config(CONFIGS / "large" / "ginibre_shift.cfg")
        assert cfg.params.n_iter == math.ceil(1_000_000 / 0.5)

    def test_invalid_particle_count_names_the_invariant(self, tmp_path, capsys):
        bad = TINY.replace("n = 12", "n = 1").format(out=tmp_path)
        rc = main(["run", str(write_config(tmp_path, bad))])
        assert rc == 2
        assert "n >= 2" in capsys.readouterr().err

    def test_missing_file_fails_cleanly(self, tmp_path, capsys):
        rc = main(["run", str(tmp_path / "absent.cfg")])
        assert rc == 2
        assert "not found" in capsys.readouterr().err


class TestInitialConfiguration:
    def test_line_grid_avoids_the_origin(self):
        from coulombgas.model import GasModel, Log1D, Quadratic

        model = GasModel(1, 101, 101.0**2, Quadratic(), Log1D())
        cs = ConstraintSet((LinearStat(LogAbs(0.0)),))
        x = initial_configuration(model, cs, seed=0)
        assert np.all(np.abs(x) > 0)

    def test_presolve_lands_on_homogeneous_manifolds(self):
        from coulombgas.model import Coulomb, GasModel, Quartic

        model = GasModel(2, 20, 400.0, Quartic(), Coulomb())
        cs = ConstraintSet((QuadStat(RadialGap(1.0)),))
        x = initial_configuration(model, cs, seed=1)
        assert abs(evaluate(x, cs)[0]) < 1e-12


class TestRunCommand:
    def test_writes_the_csv_suite(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, TINY.format(out=tmp_path / "out"))
        assert main(["run", str(cfg_path)]) == 0
        for name in ("positions.csv", "scalars.csv", "stats.csv"):
            assert (tmp_path / "out" / name).exists()
        lines = (tmp_path / "out" / "stats.csv").read_text().splitlines()
        rows = [l for l in lines if l and not l.startswith("#")]
        counts = [int(t) for t in rows[1].split(",")]
        assert sum(counts[:-1]) == counts[-1] == 400

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg_path = write_config(tmp_path, TINY.format(out=tmp_path / "a"))
        assert main(["run", str(cfg_path)]) == 0
        assert main(["run", str(cfg_path), "--out", str(tmp_path / "b")]) == 0
        for name in ("positions.csv", "scalars.csv", "stats.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_unconstrained_run(self, tmp_path):
        text = TINY.replace("kind = affine", "kind = none").format(out=tmp_path / "u")
        rc = main(["run", str(write_config(tmp_path, text))])
        assert rc == 0
        assert (tmp_path / "u" / "positions.csv").exists()

    def test_two_chains_merge_counters(self, tmp_path):
        cfg = load_config(write_config(tmp_path, TINY.format(out=tmp_path / "m")))
        record, meta = run_command(cfg, chains=2, threads=1)
        assert record.stats.total == 800
        assert meta["chains"] == 2

    def test_parallel_chains_match_sequential_merge(self, tmp_path):
        cfg = load_config(write_config(tmp_path, TINY.format(out=tmp_path / "p1")))
        seq, _ = run_command(cfg, chains=2, threads=1)
        cfg2 = load_config(write_config(tmp_path, TINY.format(out=tmp_path / "p2")))
        par, _ = run_command(cfg2, chains=2, threads=2)
        assert seq.stats.as_dict() == par.stats.as_dict()
        assert seq.barycenter_dot_v == par.barycenter_dot_v


class TestScan:
    def test_fit_recovers_a_cubic_law(self):
        dts = np.array([0.05, 0.1, 0.2, 0.4])
        fractions = 0.7 * dts**3
        slope, intercept, used, warnings = fit_loglog(dts, fractions)
        assert slope == pytest.approx(3.0, abs=1e-12)
        assert intercept == pytest.approx(math.log(0.7), abs=1e-12)
        assert used.all() and not warnings

    def test_saturated_points_are_excluded_with_warning(self):
        dts = np.array([0.1, 0.2, 0.4, 0.8])
        fractions = np.array([1e-3, 8e-3, 6.4e-2, 1.0])
        slope, _, used, warnings = fit_loglog(dts, fractions)
        assert used.tolist() == [True, True, True, False]
        assert warnings and "saturated" in warnings[0]
        assert slope == pytest.approx(3.0, abs=1e-9)

    def test_too_few_points_rejected(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, TINY.format(out=tmp_path / "s"))
        rc = main(["scan-dt", str(cfg_path), "--dt", "0.1,0.2"])
        assert rc == 2
        assert "at least 3" in capsys.readouterr().err

    def test_scan_writes_rows_and_prints_fit(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, TINY.format(out=tmp_path / "scan"))
        rc = main(
            ["scan-dt", str(cfg_path), "--dt", "0.2,0.35,0.5", "--n-iter", "1500",
             "--out", str(tmp_path / "scan")]
        )
        assert rc == 0
        printed = capsys.readouterr().out
        assert "loglog_fit slope=" in printed
        rows = [
            l
            for l in (tmp_path / "scan" / "rate_scan.csv").read_text().splitlines()
            if l and not l.startswith("#")
        ]
        assert rows[0] == "dt,metropolis_reject_fraction"
        assert len(rows) == 4

    def test_duplicate_dt_values_both_present(self, tmp_path):
        cfg_path = write_config(tmp_path, TINY.format(out=tmp_path / "dup"))
        rc = main(
            ["scan-dt", str(cfg_path), "--dt", "0.3,0.3,0.5", "--n-iter", "800",
             "--out", str(tmp_path / "dup")]
        )
        assert rc == 0
        rows = [
            l
            for l in (tmp_path / "dup" / "rate_scan.csv").read_text().splitlines()
            if l and not l.startswith("#")
        ]
        assert len(rows) == 4
        assert rows[1].split(",")[0] == rows[2].split(",")[0]
