import json
import math

import numpy as np
import pytest

from pinchslp.bench import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    emit_csv,
    generate_scenario,
    load_config,
    run_convergence,
    run_power_vs_numpas,
    run_power_vs_sinr,
)
from pinchslp.cli import main as cli_main
from pinchslp.placement import PGDConfig

FAST = dict(
    num_waveguides=2,
    num_users=2,
    num_pas=2,
    trials=2,
    gamma_db=(14.0,),
    schemes=("fixed", "random"),
)


class TestConfig:
    def test_defaults_match_simulation_setup(self):
        cfg = ExperimentConfig()
        assert cfg.carrier_freq_hz == 2.8e10
        assert cfg.noise_dbm == -80.0
        assert cfg.num_waveguides == 4 and cfg.num_users == 4
        assert cfg.psk_order == 4
        assert cfg.noise_w == pytest.approx(1e-11, rel=1e-12)
        assert cfg.theta_th == pytest.approx(math.pi / 4)
        assert cfg.spacing == pytest.approx(cfg.params.wavelength / 2)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            config_from_dict({"carier_freq_hz": 1e9})

    def test_unknown_subconfig_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown pgd keys"):
            config_from_dict({"pgd": {"maxiters": 3}})

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ConfigError, match="unknown scheme"):
            config_from_dict({"schemes": ["proposed", "zf"]})

    def test_subconfig_parsed(self):
        cfg = config_from_dict({"pgd": {"max_iters": 17}, "gamma_db": [10, 12]})
        assert cfg.pgd == PGDConfig(max_iters=17)
        assert cfg.gamma_sweep() == (10, 12)

    def test_load_config_roundtrip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"trials": 3, "master_seed": 9}))
        cfg = load_config(str(path))
        assert cfg.trials == 3 and cfg.master_seed == 9

    def test_load_config_rejects_non_object(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_config(str(path))


class TestGenerateScenario:
    def test_deterministic(self):
        cfg = ExperimentConfig(**FAST)
        g1, s1 = generate_scenario(cfg, 3)
        g2, s2 = generate_scenario(cfg, 3)
        assert g1.users == g2.users
        assert np.array_equal(s1.s, s2.s)

    def test_trials_differ(self):
        cfg = ExperimentConfig(**FAST)
        g1, _ = generate_scenario(cfg, 0)
        g2, _ = generate_scenario(cfg, 1)
        assert g1.users != g2.users

    def test_users_inside_square_at_ground(self):
        cfg = ExperimentConfig(**FAST)
        for trial in range(10):
            geom, _ = generate_scenario(cfg, trial)
            for u in geom.users:
                assert 0 <= u.x <= 20 and 0 <= u.y <= 20 and u.z == 0

    def test_symbols_unit_modulus(self):
        cfg = ExperimentConfig(**FAST)
        _, s = generate_scenario(cfg, 5)
        assert np.allclose(np.abs(s.s), 1.0, atol=1e-15)

    def test_scenario_independent_of_sweep_value(self):
        cfg = ExperimentConfig(**FAST)
        g1, s1 = generate_scenario(cfg, 2, num_pas=1)
        g2, s2 = generate_scenario(cfg, 2, num_pas=4)
        assert g1.users == g2.users
        assert np.array_equal(s1.s, s2.s)
        assert g2.num_pas_per_waveguide == 4


class TestRunners:
    def test_record_count_single_point(self):
        cfg = ExperimentConfig(**{**FAST, "schemes": ("fixed",), "trials": 1})
        records = run_power_vs_sinr(cfg)
        assert len(records) == 1
        r = records[0]
        assert r.scheme == "fixed" and r.experiment == "power-vs-sinr"
        assert r.converged and r.power_w > 0
        assert r.power_dbm == pytest.approx(10 * math.log10(r.power_w * 1e3), rel=1e-12)

    def test_record_count_sweeps(self):
        cfg = ExperimentConfig(**{**FAST, "gamma_db": (10.0, 14.0), "trials": 3})
        records = run_power_vs_sinr(cfg)
        assert len(records) == 2 * 2 * 3  # gammas x schemes x trials

    def test_numpas_sweep_counts_and_labels(self):
        cfg = ExperimentConfig(
            **{**FAST, "num_pas": (1, 3), "gamma_db": 14.0, "trials": 2}
        )
        records = run_power_vs_numpas(cfg)
        assert len(records) == 2 * 2 * 2
        assert sorted({r.num_pas for r in records}) == [1, 3]

    def test_power_non_decreasing_in_gamma(self):
        cfg = ExperimentConfig(**{**FAST, "gamma_db": (10.0, 16.0), "trials": 3})
        records = run_power_vs_sinr(cfg)
        by = {}
        for r in records:
            by[(r.scheme, r.trial, r.gamma_db)] = r.power_w
        for scheme in cfg.schemes:
            for trial in range(cfg.trials):
                assert by[(scheme, trial, 10.0)] <= by[(scheme, trial, 16.0)] * (1 + 1e-9)

    def test_convergence_traces(self):
        cfg = ExperimentConfig(
            **{**FAST, "schemes": ("proposed",), "trials": 1, "gamma_db": 14.0}
        )
        records = run_convergence(cfg)
        assert all(r.experiment == "convergence" for r in records)
        iters = [r.ao_iters for r in records]
        assert iters == list(range(len(iters)))
        powers = [r.power_w for r in records]
        assert all(a >= b - 1e-18 for a, b in zip(powers, powers[1:]))
        if records[0].converged:
            assert abs(powers[-1] - powers[-2]) / powers[-2] <= cfg.ao.rel_tol

    def test_bit_identical_reruns(self):
        cfg = ExperimentConfig(**FAST)
        r1 = run_power_vs_sinr(cfg)
        r2 = run_power_vs_sinr(cfg)
        assert r1 == r2


class TestEmitCsv:
    HEADER = "experiment,trial,seed,scheme,gamma_db,num_pas,power_w,power_dbm,ao_iters,converged"

    def test_header_only_when_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], str(path))
        assert path.read_text() == self.HEADER + "\n"

    def test_roundtrip_and_order(self, tmp_path):
        cfg = ExperimentConfig(**{**FAST, "trials": 2})
        records = run_power_vs_sinr(cfg)
        path = tmp_path / "out.csv"
        emit_csv(records, str(path))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == self.HEADER
        assert len(lines) == len(records) + 1
        # trial-major, scheme-minor within a sweep point
        cols = [ln.split(",") for ln in lines[1:]]
        keys = [(int(c[1]), c[3]) for c in cols]
        assert keys == sorted(keys)
        # parse back and compare to 9 significant digits
        for c, r in zip(cols, records):
            assert float(c[6]) == pytest.approx(r.power_w, rel=1e-8)
            assert float(c[7]) == pytest.approx(r.power_dbm, rel=1e-8)
            assert c[9] in ("true", "false")

    def test_dbm_column_identity(self, tmp_path):
        cfg = ExperimentConfig(**{**FAST, "trials": 1})
        records = run_power_vs_sinr(cfg)
        path = tmp_path / "out.csv"
        emit_csv(records, str(path))
        line = path.read_text().strip().split("\n")[1].split(",")
        assert float(line[7]) == pytest.approx(
            10 * math.log10(float(line[6]) * 1e3), rel=1e-7
        )

    def test_write_failure_has_path_context(self, tmp_path):
        with pytest.raises(OSError, match="no/such/dir"):
            emit_csv([], str(tmp_path / "no/such/dir/out.csv"))


class TestCli:
    def write_cfg(self, tmp_path, **overrides):
        path = tmp_path / "cfg.json"
        data = {
            "num_waveguides": 2,
            "num_users": 2,
            "num_pas": 2,
            "trials": 2,
            "gamma_db": [14.0],
            "schemes": ["fixed"],
        }
        data.update(overrides)
        path.write_text(json.dumps(data))
        return str(path)

    def test_run_writes_csv(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path)
        out = tmp_path / "results.csv"
        code = cli_main(
            ["run", "--config", cfg, "--experiment", "power-vs-sinr", "--out", str(out)]
        )
        assert code == 0
        assert out.exists()
        assert len(out.read_text().strip().split("\n")) == 3  # header + 2 trials

    def test_flag_overrides(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        out = tmp_path / "r.csv"
        code = cli_main(
            ["run", "--config", cfg, "--experiment", "power-vs-sinr",
             "--trials", "1", "--seed", "99", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 2
        assert lines[1].split(",")[2] == "99"

    def test_identical_seeds_identical_files(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            assert cli_main(
                ["run", "--config", cfg, "--experiment", "power-vs-sinr",
                 "--seed", "5", "--out", str(out)]
            ) == 0
        assert out1.read_text() == out2.read_text()

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"bogus_key": 1}))
        code = cli_main(
            ["run", "--config", str(path), "--experiment", "power-vs-sinr"]
        )
        assert code == 2
        assert "unknown config keys" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = cli_main(
            ["run", "--config", str(tmp_path / "nope.json"),
             "--experiment", "power-vs-sinr"]
        )
        assert code == 2
