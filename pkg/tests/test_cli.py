import json
import os

import numpy as np
import pytest

from levyfit.cli import main
from levyfit.config import RunConfig, config_from_dict, load_config
from levyfit.errors import ConfigError
from levyfit.experiment import run_experiment

TINY = """
# tiny deterministic experiment
n_space = 64
n_time = 30
sample_count = 1500
seed = 7
sim_kind = compound_poisson
sim_rates = 1.0, 0.5
n_theta_list = 2, 3
max_iters = 60
"""


@pytest.fixture
def tiny_cfg(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY)
    return path


class TestConfig:
    def test_defaults_follow_reference_experiment(self):
        cfg = RunConfig()
        assert cfg.n_space == 420 and cfg.n_time == 250
        assert cfg.sigma2 == pytest.approx(0.02)
        assert cfg.init_concentration == 400.0
        assert cfg.alpha0 == 0.1
        assert cfg.armijo_delta == 0.1
        assert cfg.step_init == 0.5 and cfg.step_shrink == 0.3
        assert cfg.objective_floor == 1e-12
        assert cfg.hist_bins == 40

    def test_file_and_overrides(self, tiny_cfg):
        cfg = load_config(tiny_cfg, overrides=["seed=9", "n_space = 32"])
        assert cfg.seed == 9
        assert cfg.n_space == 32
        assert cfg.sim_rates == (1.0, 0.5)
        assert cfg.n_theta_list == (2, 3)

    def test_unknown_key_rejected(self, tiny_cfg):
        with pytest.raises(ConfigError, match="unknown"):
            load_config(tiny_cfg, overrides=["n_spacee=3"])

    def test_bad_value_rejected(self, tiny_cfg):
        with pytest.raises(ConfigError, match="bad value"):
            load_config(tiny_cfg, overrides=["n_space=abc"])

    def test_requires_data_source(self):
        with pytest.raises(ConfigError, match="data source"):
            run_experiment(RunConfig(sim_kind="", samples_csv="",
                                     n_space=32, n_time=10))


class TestRunExperiment:
    def test_artifacts_and_schema(self, tiny_cfg, tmp_path):
        cfg = load_config(tiny_cfg)
        out = tmp_path / "out"
        result = run_experiment(cfg, out_dir=out)
        report = json.loads((out / "report.json").read_text())
        assert set(report) == {"config", "seed", "selected_n_theta", "fits",
                               "errors"}
        fit = report["fits"][0]
        assert set(fit) == {"n_theta", "alpha_star", "j_eps", "aic",
                            "iterations", "converged", "diagnostics"}
        bounds = fit["diagnostics"]["bounds"]
        assert set(bounds) == {"dt_used", "dt_euler_pos", "dt_bdf2"}
        # density has one row per grid node, histogram one per bin
        assert len((out / "density.csv").read_text().splitlines()) == 64 + 1
        assert len((out / "histogram.csv").read_text().splitlines()) == 40 + 1
        assert len((out / "aic.csv").read_text().splitlines()) == 2 + 1

    def test_histogram_mass_is_one(self, tiny_cfg, tmp_path):
        cfg = load_config(tiny_cfg)
        result = run_experiment(cfg, out_dir=tmp_path / "o")
        rows = (tmp_path / "o" / "histogram.csv").read_text().splitlines()[1:]
        heights = np.array([float(r.split(",")[1]) for r in rows])
        width = 2 * np.pi / 40
        assert width * heights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_deterministic_reports(self, tiny_cfg, tmp_path):
        cfg = load_config(tiny_cfg)
        a = run_experiment(cfg, out_dir=tmp_path / "a")
        b = run_experiment(cfg, out_dir=tmp_path / "b")
        assert (tmp_path / "a" / "report.json").read_bytes() == \
               (tmp_path / "b" / "report.json").read_bytes()

    def test_round_trip_from_report_echo(self, tiny_cfg, tmp_path):
        cfg = load_config(tiny_cfg)
        first = run_experiment(cfg, out_dir=tmp_path / "a")
        echoed = json.loads((tmp_path / "a" / "report.json").read_text())
        cfg2 = config_from_dict(echoed["config"])
        second = run_experiment(cfg2, out_dir=tmp_path / "b")
        for r1, r2 in zip(first.report["fits"], second.report["fits"]):
            assert r1["alpha_star"] == r2["alpha_star"]


class TestCliEntry:
    def test_run_success(self, tiny_cfg, tmp_path, capsys):
        out = tmp_path / "cli_out"
        assert main(["run", str(tiny_cfg), "--out", str(out)]) == 0
        assert (out / "report.json").exists()
        assert "selected n_theta" in capsys.readouterr().out

    def test_missing_config_is_usage_error(self, capsys):
        assert main(["run", "/nonexistent/nope.cfg"]) == 1

    def test_bad_key_is_usage_error(self, tiny_cfg):
        assert main(["run", str(tiny_cfg), "--set", "bogus=1"]) == 1

    def test_numerical_failure_exit_code(self, tiny_cfg, tmp_path):
        # sigma2 large enough that every sweep entry violates the step bound
        code = main(["run", str(tiny_cfg), "--set", "sigma2=50.0",
                     "--out", str(tmp_path / "x")])
        assert code == 2

    def test_simulate_writes_csv(self, tiny_cfg, tmp_path):
        out = tmp_path / "samples.csv"
        assert main(["simulate", str(tiny_cfg), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        values = [l for l in lines if not l.startswith("#")]
        assert len(values) == 1500

    def test_preprocess_pipeline(self, tmp_path, capsys):
        raw = tmp_path / "raw.csv"
        rng = np.random.default_rng(0)
        data = list(rng.normal(2e-4, 0.004, 500)) + [-0.04]
        raw.write_text("\n".join(repr(float(v)) for v in data) + "\n")
        out = tmp_path / "torus.csv"
        assert main(["preprocess", str(raw), "--out", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["n_wrapped"] == 1
        assert summary["n_values"] == 501

    def test_fit_from_csv_source(self, tmp_path):
        rng = np.random.default_rng(1)
        path = tmp_path / "vals.csv"
        path.write_text("\n".join(repr(float(v))
                                  for v in rng.normal(0, 0.5, 800)) + "\n")
        out = tmp_path / "o"
        code = main(["run", "--set", f"samples_csv={path}",
                     "--set", "sim_kind=", "--set", "n_space=48",
                     "--set", "n_time=24", "--set", "n_theta_list=2",
                     "--set", "max_iters=40", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["selected_n_theta"] == 2
