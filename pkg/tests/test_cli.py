import csv
import json
import math
import subprocess
import sys

import pytest

from elastocorner.cli import EXIT_FAIL, EXIT_OK, EXIT_REGIME, EXIT_USAGE, main
from elastocorner.config import ConfigError, ExperimentConfig, parse_angle

TRIANGLE = [[-0.5, -0.4], [0.6, -0.3], [0.0, 0.6]]
FLAT = {"rho": {"kind": "constant-one"}}


def _run(tmp_path, doc, *argv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    out = tmp_path / "out"
    return main([*argv, "--config", str(cfg), "--out", str(out)]), out


class TestAbcd:
    def test_right_corner(self, capsys):
        assert main(["abcd", "0", "pi/2"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "1 0 0 -1"

    def test_report(self, tmp_path):
        assert main(["abcd", "pi/6", "pi/2", "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "report.json").read_text())
        assert rep["theta_m"] == pytest.approx(math.pi / 6)

    @pytest.mark.parametrize("argv", [["abcd", "0", "pi"], ["abcd", "0", "banana"],
                                      ["abcd", "0"], ["frobnicate"], []])
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_USAGE

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "elastocorner", "abcd", "0", "pi/2"],
                             capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.strip() == "1 0 0 -1"


class TestConfig:
    def test_angle_parser(self):
        assert parse_angle("-pi/6") == pytest.approx(-math.pi / 6)
        assert parse_angle("2*pi/3") == pytest.approx(2 * math.pi / 3)
        with pytest.raises(ConfigError):
            parse_angle("__import__('os')")

    def test_roundtrip(self):
        doc = {"geometry": {"polygon": {"vertices": TRIANGLE}}, "source": {"value": [1, 0.5]}}
        cfg = ExperimentConfig.from_dict(doc)
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again.to_dict() == cfg.to_dict()

    @pytest.mark.parametrize("doc", [
        {"solver": {"R1": 2.5}},
        {"solver": {"tol": 0}},
        {"solver": {"tau_sweep": []}},
        {"solver": {"box_B": 1.0}},
        {"geometry": {"polygon": {"vertices": [[0, 0], [2, 0], [0, 2]]}}},
        {"geometry": {"circle": {}}},
    ])
    def test_rejected(self, doc):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(doc)

    def test_unreadable_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["forward", "--config", str(bad)]) == EXIT_USAGE


class TestCgoVerify:
    def test_homogeneous_passes(self, tmp_path):
        code, out = _run(tmp_path, {"medium": FLAT}, "cgo-verify", "--tau-sweep", "20,40")
        assert code == EXIT_OK
        rep = json.loads((out / "report.json").read_text())
        assert rep["homogeneous"] and rep["passed"]
        with open(out / "series.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["tau"]) for r in rows] == [20.0, 40.0]
        assert all(float(r["R"]) == 0.0 for r in rows)

    def test_small_tau_is_a_regime_error(self, tmp_path, capsys):
        code, _ = _run(tmp_path, {}, "cgo-verify", "--tau-sweep", "1,2")
        assert code == EXIT_REGIME
        assert "numerical regime error" in capsys.readouterr().err


class TestCornerTest:
    def test_constant_triangle_vertex(self, tmp_path):
        doc = {"geometry": {"polygon": {"vertices": TRIANGLE}}, "source": {"value": [1.0, 0.5]},
               "options": {"vertex": 1, "expected": "radiating-certified"}}
        code, out = _run(tmp_path, doc, "corner-test")
        assert code == EXIT_OK
        assert json.loads((out / "report.json").read_text())["passed"]

    def test_relations_satisfied(self, tmp_path):
        doc = {"geometry": {"sector": {"apex": [0, 0], "theta_m": 0, "theta_M": math.pi / 2,
                                       "h": 0.5}},
               "source": {"value": [0, 0], "gradient": [[1, 3], [3, -1]]},
               "options": {"expected": "relations-satisfied"}}
        assert _run(tmp_path, doc, "corner-test")[0] == EXIT_OK

    def test_wrong_expectation_fails(self, tmp_path):
        doc = {"geometry": {"sector": {"apex": [0, 0], "theta_m": 0, "theta_M": math.pi / 2,
                                       "h": 0.5}},
               "source": {"value": [0, 0], "gradient": [[1, 0], [0, 1]]},
               "options": {"expected": "relations-satisfied"}}
        assert _run(tmp_path, doc, "corner-test")[0] == EXIT_FAIL

    def test_straight_sector_is_usage_error(self, tmp_path):
        doc = {"geometry": {"sector": {"apex": [0, 0], "theta_m": 0, "theta_M": math.pi,
                                       "h": 0.5}}}
        assert _run(tmp_path, doc, "corner-test")[0] == EXIT_USAGE


class TestForwardAndFarField:
    def test_forward_writes_cauchy_data(self, tmp_path):
        doc = {"geometry": {"polygon": {"vertices": TRIANGLE}}, "source": {"value": [1.0, 0.5]},
               "options": {"n_cauchy": 32}}
        code, out = _run(tmp_path, doc, "forward", "--grid", "64")
        assert code == EXIT_OK
        with open(out / "cauchy.csv") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 33 and len(rows[0]) == 9
        rep = json.loads((out / "report.json").read_text())
        err = rep["farfield_crosscheck"]["error"]
        assert err[2] < err[0]

    def test_forward_smooth_source_residual(self, tmp_path):
        code, out = _run(tmp_path, {"options": {"nonradiating": True}}, "forward")
        assert code == EXIT_OK
        assert json.loads((out / "report.json").read_text())["stencil_residual"] <= 1e-2

    def test_unknown_density_is_usage_error(self, tmp_path):
        doc = {"medium": {"rho": {"kind": "marble"}}}
        assert _run(tmp_path, doc, "forward")[0] == EXIT_USAGE

    def test_nonradiating_far_field(self, tmp_path):
        code, out = _run(tmp_path, {"options": {"nonradiating": True}}, "farfield")
        assert code == EXIT_OK
        rep = json.loads((out / "report.json").read_text())
        assert rep["reference_ratio"] <= 1e-3 and rep["passed"]
        assert (out / "farfield.csv").exists()


class TestScan:
    DOC = {"medium": FLAT, "geometry": {"polygon": {"vertices": TRIANGLE}},
           "source": {"value": [1.0, 0.5]}, "options": {"reference_tau": 40}}

    def test_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            d = tmp_path / name
            d.mkdir()
            code, out = _run(d, self.DOC, "scan", "--tau-sweep", "20,40", "--seed", "7")
            assert code == EXIT_OK
            outs.append(out)
        for f in ("scan.csv", "report.json"):
            assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()

    def test_needs_polygon(self, tmp_path):
        doc = {"geometry": {"sector": {"apex": [0, 0], "theta_m": 0, "theta_M": 1.0, "h": 0.5}}}
        assert _run(tmp_path, doc, "scan")[0] == EXIT_USAGE
