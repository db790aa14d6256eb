import json
from pathlib import Path

import numpy as np
import pytest

from degcz.cli import main, parse_config_file


def write_cfg(path: Path, text: str) -> str:
    path.write_text(text)
    return str(path)


class TestConfigParsing:
    def test_dotted_keys_and_json_values(self, tmp_path):
        cfg = parse_config_file(
            write_cfg(
                tmp_path / "a.cfg",
                """
                # comment
                example.eps = [0.5, 0.25]
                example.variant = "plain"
                mesh.angular = 16
                flag = true
                name = bare-string
                """,
            )
        )
        assert cfg["example"]["eps"] == [0.5, 0.25]
        assert cfg["example"]["variant"] == "plain"
        assert cfg["mesh"]["angular"] == 16
        assert cfg["flag"] is True
        assert cfg["name"] == "bare-string"

    def test_malformed_line(self, tmp_path):
        path = write_cfg(tmp_path / "bad.cfg", "just words\n")
        assert main(["nfun-props", "--config", path, "--out", str(tmp_path)]) == 1


class TestExitCodes:
    def test_usage_error_unknown_weight(self, tmp_path):
        cfg = write_cfg(tmp_path / "w.cfg", 'weight.kind = "martian"\n')
        assert main(["analyze-weight", "--config", cfg, "--out", str(tmp_path / "o")]) == 1

    def test_usage_error_missing_weight(self, tmp_path):
        assert main(["analyze-weight", "--out", str(tmp_path / "o")]) == 1

    def test_setup_error_bad_mesh(self, tmp_path):
        cfg = write_cfg(tmp_path / "m.cfg", 'mesh.kind = "torus"\n')
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_nonconvergence_exit(self, tmp_path):
        # curved boundary data needs Newton steps; forbidding them leaves the
        # warm start with a residual above tolerance
        cfg = write_cfg(
            tmp_path / "s.cfg",
            """
            mesh.kind = "square"
            mesh.divisions = 6
            weight.kind = "identity"
            problem.p = 4.0
            problem.dirichlet = "example"
            solver.tolerance = 1e-12
            solver.max_iterations = 0
            """,
        )
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 3

    def test_property_violation_wrong_theta(self, tmp_path):
        cfg = write_cfg(
            tmp_path / "t.cfg",
            """
            example.variant = "plain"
            example.eps = 0.5
            example.theta_override = 1.0
            """,
        )
        assert main(["verify-example", "--config", cfg, "--out", str(tmp_path / "o")]) == 4


class TestVerifyExample:
    def test_plain_passes(self, tmp_path):
        assert main(["verify-example", "--eps", "0.5", "--out", str(tmp_path / "o")]) == 0
        rows = (tmp_path / "o" / "verify_example.csv").read_text().splitlines()
        assert any("divergence_identity" in r for r in rows)

    def test_degenerate_n3(self, tmp_path):
        cfg = write_cfg(
            tmp_path / "d.cfg",
            'example.variant = "degenerate"\nexample.n = 3\nexample.eps = 0.1\n',
        )
        assert main(["verify-example", "--config", cfg, "--out", str(tmp_path / "o")]) == 0


class TestSolveCommand:
    def test_linear_problem_reproduces_interpolant(self, tmp_path):
        cfg = write_cfg(
            tmp_path / "s.cfg",
            """
            mesh.kind = "square"
            mesh.divisions = 8
            weight.kind = "identity"
            problem.p = 2.0
            problem.dirichlet = [1.0, 0.0, 0.0]
            """,
        )
        out = tmp_path / "o"
        assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
        lines = [
            ln for ln in (out / "solution.csv").read_text().splitlines()
            if not ln.startswith("#")
        ][1:]
        vals = np.array([[float(x) for x in ln.split(",")[1:]] for ln in lines])
        assert np.abs(vals[:, 2] - vals[:, 0]).max() <= 1e-10
        trace = [json.loads(ln) for ln in (out / "trace.jsonl").read_text().splitlines()]
        assert len(trace) == 1


class TestSweepCommand:
    SWEEP = """
    example.variant = "plain"
    example.eps = [0.5]
    sweep.rho = [3.0, 5.0]
    sweep.levels = [1, 2, 3]
    mesh.angular = 12
    mesh.base_layers = 15
    mesh.layers_per_level = 80
    seed = 11
    """

    def test_phase_boundary(self, tmp_path):
        cfg = write_cfg(tmp_path / "sw.cfg", self.SWEEP)
        out = tmp_path / "o"
        assert main(["cz-sweep", "--config", cfg, "--out", str(out)]) == 0
        summary = json.loads((out / "cz_summary.json").read_text())
        assert summary["phase_boundaries"] == [{"eps": 0.5, "rho_boundary": 4.0}]

    def test_rerun_determinism(self, tmp_path):
        cfg = write_cfg(tmp_path / "sw.cfg", self.SWEEP)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["cz-sweep", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["cz-sweep", "--config", cfg, "--out", str(out2)]) == 0
        assert (out1 / "cz_report.csv").read_bytes() == (out2 / "cz_report.csv").read_bytes()

    def test_threads_same_rows(self, tmp_path):
        cfg_text = self.SWEEP.replace("[0.5]", "[0.25, 0.5]").replace(
            "[3.0, 5.0]", "[3.0]"
        )
        cfg = write_cfg(tmp_path / "sw.cfg", cfg_text)
        out1, out2 = tmp_path / "t1", tmp_path / "t2"
        assert main(["cz-sweep", "--config", cfg, "--threads", "1", "--out", str(out1)]) == 0
        assert main(["cz-sweep", "--config", cfg, "--threads", "2", "--out", str(out2)]) == 0
        body1 = [ln for ln in (out1 / "cz_report.csv").read_text().splitlines() if not ln.startswith("#")]
        body2 = [ln for ln in (out2 / "cz_report.csv").read_text().splitlines() if not ln.startswith("#")]
        assert body1 == body2

    def test_env_var_overrides_out(self, tmp_path, monkeypatch):
        cfg = write_cfg(tmp_path / "sw.cfg", self.SWEEP)
        env_out = tmp_path / "env_out"
        monkeypatch.setenv("DEGCZ_OUT", str(env_out))
        assert main(["cz-sweep", "--config", cfg, "--out", str(tmp_path / "ignored")]) == 0
        assert (env_out / "cz_report.csv").exists()
        assert not (tmp_path / "ignored").exists()


class TestAnalyzeWeight:
    def test_constant_weight_reports(self, tmp_path):
        cfg = write_cfg(
            tmp_path / "w.cfg",
            'weight.kind = "constant"\nweight.matrix = [[2.0, 0.0], [0.0, 1.0]]\nap.p_list = [2.0]\n',
        )
        out = tmp_path / "o"
        assert main(["analyze-weight", "--config", cfg, "--out", str(out)]) == 0
        summary = json.loads((out / "weight_analysis.json").read_text())
        assert summary["bmo_log_M"] <= 1e-12
        assert summary["bmo_log_omega"] <= 1e-12
        assert summary["ap_p=2"] == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_weight_flags(self, tmp_path):
        cfg = write_cfg(
            tmp_path / "w.cfg",
            'weight.kind = "power-radial"\nweight.eps = 0.25\nap.p_list = [2.0]\n',
        )
        out = tmp_path / "o"
        assert main(["analyze-weight", "--config", cfg, "--out", str(out)]) == 0
        summary = json.loads((out / "weight_analysis.json").read_text())
        assert summary["bmo_log_M"] <= 0.375
        assert "unbounded" in summary["bmo_M_flag"]


class TestReport:
    def test_merges_outputs(self, tmp_path):
        out = tmp_path / "o"
        assert main(["nfun-props", "--out", str(out), "--seed", "2"]) in (0, 4)
        assert main(["report", "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert "nfun_props.csv" in summary["files"]
