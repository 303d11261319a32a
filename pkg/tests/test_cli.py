"""Command-line behavior: parsing, artifacts, exit codes, reproducibility."""

import json
import math
import re

import numpy as np
import pytest

from casimir.cli import compile_phi, main, parse_config, parse_range, run
from casimir.errors import ConfigError
from casimir.materials import DrudeParams, OscillatorSet, PlasmaParams
from casimir.optics import synthesize_nk_table

ERROR_LINE = re.compile(r'^ERROR code=(\d) kind=(\w+) message="(.*)"$')


def stderr_record(capsys):
    err = [line for line in capsys.readouterr().err.splitlines() if line]
    assert err, "expected an error record on stderr"
    m = ERROR_LINE.match(err[-1])
    assert m, f"unparseable error record: {err[-1]!r}"
    return int(m.group(1)), m.group(2), m.group(3)


class TestParseRange:
    def test_forms(self):
        assert parse_range("42") == [42.0]
        assert parse_range("1:3:3") == [1.0, 2.0, 3.0]
        assert parse_range("1:100:3L") == pytest.approx([1.0, 10.0, 100.0])
        assert parse_range("5:9:1") == [5.0]

    def test_errors(self):
        for bad in ("abc", "1:2", "1:2:3:4", "1:2:xL", "1:2:0", "-1:2:3L"):
            with pytest.raises(ConfigError):
                parse_range(bad)


class TestParseConfig:
    def test_full_document(self):
        cfg = parse_config(
            json.dumps(
                {
                    "materials": {
                        "au": {"type": "drude", "plasma_freq_ev": 9.0, "relaxation_ev": 0.035},
                        "nested": {
                            "dielectric": {"type": "plasma", "plasma_freq_ev": 9.0},
                            "permeability": {"static_mu": 2.0},
                        },
                    },
                    "material": "au",
                    "tolerances": {"quad": 1e-10, "trunc": 1e-9, "kk": 1e-8},
                    "l_max_cap": 5000,
                    "workers": 2,
                    "seed": 7,
                    "output_dir": "out",
                }
            )
        )
        assert isinstance(cfg.materials["au"].dielectric, DrudeParams)
        assert cfg.materials["nested"].permeability.static_mu == 2.0
        assert cfg.material is cfg.materials["au"]
        assert (cfg.quad_tol, cfg.trunc_tol, cfg.kk_tol) == (1e-10, 1e-9, 1e-8)
        assert (cfg.l_max_cap, cfg.workers, cfg.seed) == (5000, 2, 7)
        assert cfg.output_dir == "out"

    def test_inline_material(self):
        cfg = parse_config({"material": {"type": "plasma", "plasma_freq_ev": 9.0}})
        assert isinstance(cfg.material.dielectric, PlasmaParams)

    def test_errors(self):
        with pytest.raises(ConfigError, match="not valid JSON"):
            parse_config("{")
        with pytest.raises(ConfigError, match="root must be an object"):
            parse_config("[1]")
        with pytest.raises(ConfigError, match="/mood: unknown key"):
            parse_config({"mood": "good"})
        with pytest.raises(ConfigError, match="/material: unknown material name"):
            parse_config({"material": "unobtainium"})
        with pytest.raises(ConfigError, match="/tolerances/speed: unknown key"):
            parse_config({"tolerances": {"speed": 0.5}})
        with pytest.raises(ConfigError, match="/tolerances/quad: must be a number in"):
            parse_config({"tolerances": {"quad": 2.0}})
        with pytest.raises(ConfigError, match="/workers: must be a positive integer"):
            parse_config({"workers": 0})
        with pytest.raises(ConfigError, match="/l_max_cap"):
            parse_config({"l_max_cap": "many"})
        with pytest.raises(ConfigError, match="/seed: must be an integer"):
            parse_config({"seed": 1.5})
        with pytest.raises(ConfigError, match="relaxation_ev: must be > 0"):
            parse_config(
                {"materials": {"x": {"type": "drude", "plasma_freq_ev": 9.0, "relaxation_ev": 0.0}}}
            )


class TestCompilePhi:
    def test_evaluates(self):
        phi = compile_phi("omega*exp(-omega^2)")
        assert phi(0.0) == 0.0
        assert phi(1.0) == pytest.approx(math.exp(-1.0))

    def test_rejects_unknown_names(self):
        with pytest.raises(ConfigError, match="disallowed names: open"):
            compile_phi("open('/etc/passwd')")
        with pytest.raises(ConfigError, match="__import__"):
            compile_phi("__import__('os').system('true')")

    def test_rejects_bad_syntax(self):
        with pytest.raises(ConfigError, match="phi expression"):
            compile_phi("omega*(")


def read_manifest(outdir):
    with open(outdir / "run_manifest.json") as handle:
        return json.load(handle)


class TestPressureCommand:
    def test_end_to_end(self, tmp_path, capsys):
        code = main(
            [
                "pressure",
                "--model", "plasma", "--wp", "1000",
                "--a", "1000", "--T", "10",
                "--out", str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "pressure.csv").read_text().splitlines()
        assert lines[0] == (
            "a_nm,T_K,model_id,P_Pa,F_J_per_m2,l0_TE_Pa,l0_TM_Pa,"
            "l_max_used,quad_err_est"
        )
        fields = lines[1].split(",")
        assert fields[0] == "1000.0" and fields[1] == "10.0"
        assert fields[2] == "plasma(wp=1000)"
        assert float(fields[3]) == pytest.approx(-1.3001e-3, rel=1e-2)
        manifest = read_manifest(tmp_path)
        assert manifest["command"] == "pressure"
        assert manifest["workers"] == 1
        assert set(manifest["outputs"]) == {"pressure.csv", "pressure.gp"}
        assert (tmp_path / "pressure.gp").exists()
        assert "pressure: 1 points" in capsys.readouterr().out

    def test_worker_count_leaves_bytes_unchanged(self, tmp_path):
        argv = ["pressure", "--model", "gold-drude", "--a", "500:1000:2", "--T", "300"]
        out1, out4 = tmp_path / "w1", tmp_path / "w4"
        assert main(argv + ["--out", str(out1), "--workers", "1"]) == 0
        assert main(argv + ["--out", str(out4), "--workers", "4"]) == 0
        assert (out1 / "pressure.csv").read_bytes() == (out4 / "pressure.csv").read_bytes()

    def test_config_material_and_gamma_zero_rejection(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {"materials": {"x": {"type": "drude", "plasma_freq_ev": 9.0, "relaxation_ev": 0.0}}}
            )
        )
        code = main(
            ["pressure", "--config", str(cfg), "--model", "x",
             "--a", "1000", "--T", "300", "--out", str(tmp_path)]
        )
        assert code == 1
        ec, kind, msg = stderr_record(capsys)
        assert (ec, kind) == (1, "ConfigError")
        assert 'use {"type": "plasma"}' in msg

    def test_nonconvergence_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"l_max_cap": 2}))
        code = main(
            ["pressure", "--config", str(cfg), "--model", "gold-drude",
             "--a", "1000", "--T", "300", "--out", str(tmp_path)]
        )
        assert code == 2
        ec, kind, _ = stderr_record(capsys)
        assert (ec, kind) == (2, "ConvergenceError")

    def test_missing_config_exits_3(self, tmp_path, capsys):
        code = main(
            ["pressure", "--config", str(tmp_path / "nope.json"),
             "--a", "1000", "--T", "300", "--out", str(tmp_path)]
        )
        assert code == 3
        assert stderr_record(capsys)[0] == 3

    def test_unknown_model_exits_1(self, tmp_path, capsys):
        code = main(
            ["pressure", "--model", "adamantium", "--a", "1000", "--T", "300",
             "--out", str(tmp_path)]
        )
        assert code == 1
        assert "unknown model" in stderr_record(capsys)[2]

    def test_missing_required_flag_exits_1(self, tmp_path, capsys):
        code = main(["pressure", "--a", "1000", "--out", str(tmp_path)])
        assert code == 1
        assert stderr_record(capsys)[1] == "ConfigError"

    def test_env_worker_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CASIMIR_KERNEL_WORKERS", "3")
        argv = ["pressure", "--model", "gold-drude", "--a", "1000", "--T", "300",
                "--out", str(tmp_path)]
        assert main(argv) == 0
        assert read_manifest(tmp_path)["workers"] == 3

    def test_bad_env_worker_exits_1(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("CASIMIR_KERNEL_WORKERS", "many")
        argv = ["pressure", "--model", "gold-drude", "--a", "1000", "--T", "300",
                "--out", str(tmp_path)]
        assert main(argv) == 1
        assert "not an integer" in stderr_record(capsys)[2]


class TestCompareCommand:
    def test_default_model_set(self, tmp_path):
        code = main(
            ["compare", "--a", "1000", "--T", "300", "--out", str(tmp_path),
             "--quad-tol", "1e-10", "--trunc-tol", "1e-10"]
        )
        assert code == 0
        lines = (tmp_path / "compare.csv").read_text().splitlines()
        assert lines[0] == "# temperature_K = 300.0"
        # three gold-like models plus the four-rung loss ladder
        assert len(lines) == 2 + 7
        ids = [line.split(",")[1] for line in lines[2:]]
        assert ids[0] == "drude(wp=9;gamma=0.035)"
        assert ids[1] == "plasma(wp=9)"
        assert ids[2] == "generalized(wp=9;K=6)"
        assert all(line.endswith(",ok") for line in lines[2:])

    def test_requires_single_temperature(self, tmp_path, capsys):
        code = main(["compare", "--a", "1000", "--T", "300:600:2", "--out", str(tmp_path)])
        assert code == 1
        assert "single temperature" in stderr_record(capsys)[2]


class TestKKCommand:
    def test_standard_relation_report(self, tmp_path):
        code = main(
            ["kk-check", "--model", "gold-drude", "--relation", "standard",
             "--grid", "0.1:10:16L", "--out", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "kk_report.csv").read_text().splitlines()
        assert len(lines) == 17
        rel_residuals = [float(line.split(",")[4]) for line in lines[1:]]
        assert max(rel_residuals) <= 1e-9

    def test_inadmissible_pair_exits_1(self, tmp_path, capsys):
        code = main(
            ["kk-check", "--model", "gold-plasma", "--relation", "standard",
             "--grid", "0.1:10:16L", "--out", str(tmp_path)]
        )
        assert code == 1
        ec, kind, msg = stderr_record(capsys)
        assert kind == "InadmissibleModelError"
        assert msg.startswith("INADMISSIBLE:")

    def test_small_grid_rejected(self, tmp_path, capsys):
        code = main(
            ["kk-check", "--model", "gold-drude", "--relation", "standard",
             "--grid", "0.1:10:8L", "--out", str(tmp_path)]
        )
        assert code == 1
        assert "at least 16 nodes" in stderr_record(capsys)[2]


class TestWeakLimitCommand:
    def test_drude_mode(self, tmp_path):
        code = main(
            ["weak-limit", "--phi", "omega*exp(-omega^2)", "--mode", "drude",
             "--gammas", "1e-2:1e-4:3L", "--out", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "weak_limit.csv").read_text().splitlines()
        assert lines[0] == "gamma_eV,I_gamma,predicted_limit,abs_error"
        last = lines[-1].split(",")
        assert float(last[2]) == pytest.approx(math.pi, rel=1e-6)
        assert float(last[3]) <= 1e-3

    def test_mollified_mode(self, tmp_path):
        code = main(
            ["weak-limit", "--phi", "1 + omega^2", "--mode", "mollified",
             "--widths", "1e-1:1e-2:2L", "--family", "gaussian",
             "--out", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "weak_limit.csv").read_text().splitlines()
        assert lines[0] == "width_eV,family,value"
        vals = [abs(float(line.split(",")[2])) for line in lines[1:]]
        assert vals[1] < vals[0]

    def test_bad_phi_exits_1(self, tmp_path, capsys):
        code = main(
            ["weak-limit", "--phi", "omega*import", "--out", str(tmp_path)]
        )
        assert code == 1
        assert stderr_record(capsys)[1] == "ConfigError"


class TestEntropyCommand:
    def test_short_ladder(self, tmp_path):
        code = main(
            ["entropy", "--model", "gold-plasma", "--a", "1000",
             "--T-ladder", "300:100:3", "--quad-tol", "1e-8",
             "--trunc-tol", "1e-8", "--out", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "entropy.csv").read_text().splitlines()
        assert lines[0] == "T_K,S,fd_step,err_est"
        assert len(lines) == 4
        s300 = float(lines[1].split(",")[1])
        assert s300 == pytest.approx(1.1234142526257093e-13, rel=1e-3)


class TestNernstCommand:
    def test_coarse_probe(self, tmp_path):
        code = main(
            ["nernst", "--model", "gold-drude", "--a", "2000",
             "--T-ladder", "12:2:6L", "--quad-tol", "1e-8",
             "--trunc-tol", "1e-8", "--out", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "nernst.csv").read_text().splitlines()
        assert lines[-1].startswith("# classification: violates third law")

    def test_bad_ladder_exits_1(self, tmp_path, capsys):
        code = main(
            ["nernst", "--model", "gold-drude", "--a", "1000",
             "--T-ladder", "300:2:4L", "--out", str(tmp_path)]
        )
        assert code == 1
        assert "at least 6 points" in stderr_record(capsys)[2]


def write_table(path, dielectric, grid):
    table = synthesize_nk_table(dielectric, grid)
    rows = ["# omega_eV n k"]
    for i, w in enumerate(table.omega_ev):
        rows.append(f"{w!r} {table.n[i]!r} {table.k[i]!r}")
    path.write_text("\n".join(rows) + "\n")


class TestFitCommand:
    def test_single_oscillator(self, tmp_path):
        data = tmp_path / "table.txt"
        write_table(data, OscillatorSet(9.0, ((3.0, 0.5, 20.0),)), np.geomspace(2.0, 30.0, 80))
        code = main(
            ["fit", "--data", str(data), "--K", "1", "--wp", "9",
             "--out", str(tmp_path)]
        )
        assert code == 0
        doc = json.loads((tmp_path / "fit_result.json").read_text())
        assert doc["converged"] is True
        (w, g, f) = doc["oscillators"][0]
        assert w == pytest.approx(3.0, rel=1e-5)
        lines = (tmp_path / "fit_residuals.csv").read_text().splitlines()
        assert lines[0].startswith("omega_eV,eps_re_data")
        assert len(lines) == 81


class TestEpsFromDataCommand:
    def test_reconstruction(self, tmp_path):
        data = tmp_path / "table.txt"
        write_table(data, DrudeParams(9.0, 0.035), np.geomspace(1e-3, 1e3, 160))
        code = main(
            ["eps-from-data", "--data", str(data), "--xi", "0.5",
             "--extrapolation", "drude", "--wp", "9", "--gamma", "0.035",
             "--out", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "eps_imag.csv").read_text().splitlines()
        assert lines[0] == "xi_eV,eps_i_xi"
        got = float(lines[1].split(",")[1])
        assert got == pytest.approx(1.0 + 81.0 / (0.5 * 0.535), rel=5e-3)

    def test_coverage_failure_exits_1(self, tmp_path, capsys):
        data = tmp_path / "table.txt"
        write_table(data, DrudeParams(9.0, 0.035), np.geomspace(1.0, 10.0, 40))
        code = main(
            ["eps-from-data", "--data", str(data), "--xi", "0.5",
             "--out", str(tmp_path)]
        )
        assert code == 1
        assert stderr_record(capsys)[1] == "CoverageError"


class TestManifest:
    def test_versions_and_parameters(self, tmp_path):
        assert run(
            ["pressure", "--model", "gold-drude", "--a", "1000", "--T", "300",
             "--out", str(tmp_path), "--seed", "11"]
        ) == 0
        manifest = read_manifest(tmp_path)
        assert manifest["seed"] == 11
        assert manifest["parameters"]["model"] == "drude(wp=9;gamma=0.035)"
        for key in ("python", "numpy", "scipy", "casimir-lifshitz"):
            assert key in manifest["versions"]
        assert manifest["wall_time_s"] > 0.0
        assert manifest["argv"][0] == "pressure"
