"""Command-line behavior: exit codes, determinism, golden regression."""

import copy
from pathlib import Path

import numpy as np
import pytest
import yaml

from grasspin.cli import main

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "golden" / "bmt_regression.csv"


BASE = {
    "params": {"mass": 1.0, "charge": 1.0, "mu_prime": 1.2},
    "field": {"kind": "constant", "E": [0.0, 0.0, 0.0], "B": [0.0, 0.0, 1.0]},
    "initial": {
        "x0": [0.0, 0.0, 0.0, 0.0],
        "u0": [2.0, 1.7320508075688772, 0.0, 0.0],
        "spin": {"xi": [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]},
    },
    "integrator": {"h": 2 * np.pi / 1000, "steps": 300, "record_every": 50},
    "algebra": {"n_generators": 4},
    "seed": 4242,
}


def write_cfg(tmp_path, overrides=None, name="cfg.yaml"):
    cfg = copy.deepcopy(BASE)
    for path, value in (overrides or {}).items():
        node = cfg
        keys = path.split(".")
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


class TestExitCodes:
    def test_config_error_names_field(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {"initial.u0": [2.0, 1.0, 0.0, 0.0]})
        code = main(["simulate-super", "--config", cfg])
        assert code == 2
        assert "initial.u0" in capsys.readouterr().err

    def test_missing_section(self, tmp_path, capsys):
        raw = copy.deepcopy(BASE)
        del raw["integrator"]
        p = tmp_path / "bad.yaml"
        p.write_text(yaml.safe_dump(raw))
        assert main(["simulate-bmt", "--config", str(p)]) == 2
        assert "integrator" in capsys.readouterr().err

    def test_bmt_requires_tensor_spin(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path)
        assert main(["simulate-bmt", "--config", cfg]) == 2
        assert "s_tensor" in capsys.readouterr().err

    def test_direct_field_only_for_verify(self, tmp_path, capsys):
        cfg = write_cfg(
            tmp_path,
            {"field": {"kind": "direct",
                       "f_terms": [{"pair": [1, 2], "exponents": [0, 0, 0, 1],
                                    "coefficient": 1.0}]}},
        )
        assert main(["simulate-super", "--config", cfg]) == 2

    def test_threshold_fail_exit(self, tmp_path):
        cfg = write_cfg(tmp_path, {
            "initial.spin": {"s_tensor": [0, 0, 0, 0, 0, 0.5]},
            "thresholds": {"uu_drift": 1e-30},
        })
        assert main(["simulate-bmt", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 1


class TestSimulateBmt:
    def test_golden_regression(self, tmp_path):
        out = tmp_path / "reg.csv"
        code = main([
            "simulate-bmt",
            "--config", str(ROOT / "configs" / "bmt_regression.yaml"),
            "--out", str(out),
        ])
        assert code == 0
        got = read_csv(out)
        want = read_csv(GOLDEN)
        assert got.dtype.names == want.dtype.names
        for name in got.dtype.names:
            assert np.max(np.abs(got[name] - want[name])) < 1e-10

    def test_zero_field_no_drift(self, tmp_path):
        cfg = write_cfg(tmp_path, {
            "field": {"kind": "constant", "E": [0, 0, 0], "B": [0, 0, 0]},
            "initial.spin": {"s_tensor": [0, 0, 0, 0, 0, 0.5]},
        })
        out = tmp_path / "o.csv"
        assert main(["simulate-bmt", "--config", cfg, "--out", str(out)]) == 0
        data = read_csv(out)
        assert np.max(np.abs(data["uu"] - data["uu"][0])) == 0.0
        assert np.max(np.abs(data["ss"] - data["ss"][0])) == 0.0


class TestSimulateSuper:
    def test_determinism_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate-super", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["simulate-super", "--config", cfg, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_no_anomaly_lambda_column_zero(self, tmp_path):
        cfg = write_cfg(tmp_path, {"params.mu_prime": 1.0})
        out = tmp_path / "o.csv"
        assert main(["simulate-super", "--config", cfg, "--out", str(out)]) == 0
        data = read_csv(out)
        assert np.max(np.abs(data["lambda"])) == 0.0

    def test_orthogonal_init_constraint_small(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "o.csv"
        assert main(["simulate-super", "--config", cfg, "--out", str(out)]) == 0
        data = read_csv(out)
        assert np.max(np.abs(data["constraint"])) < 1e-9

    def test_zero_spin_matches_bmt(self, tmp_path):
        cfg_s = write_cfg(tmp_path, {"initial.spin": {"xi": [[0.0] * 4, [0.0] * 4]}},
                          name="super.yaml")
        cfg_b = write_cfg(tmp_path, {"initial.spin": {"s_tensor": [0.0] * 6}},
                          name="bmt.yaml")
        out_s, out_b = tmp_path / "s.csv", tmp_path / "b.csv"
        assert main(["simulate-super", "--config", cfg_s, "--out", str(out_s)]) == 0
        assert main(["simulate-bmt", "--config", cfg_b, "--out", str(out_b)]) == 0
        ds, db = read_csv(out_s), read_csv(out_b)
        for col in ["x0", "x1", "x2", "x3", "u0", "u1", "u2", "u3"]:
            assert np.max(np.abs(ds[col] - db[col])) == 0.0

    def test_coefficient_mask_columns(self, tmp_path):
        cfg = write_cfg(tmp_path, {"output": {"coefficient_masks": [1, 3]}})
        out = tmp_path / "o.csv"
        assert main(["simulate-super", "--config", cfg, "--out", str(out)]) == 0
        header = out.read_text().splitlines()[0].split(",")
        assert "xi2_c1" in header and "x0_c3" in header


class TestCompare:
    def test_constant_field_within_threshold(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "dev.csv"
        assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
        data = read_csv(out)
        assert np.max(data["dev_spin"]) < 1e-6

    def test_zero_field_exact(self, tmp_path):
        cfg = write_cfg(tmp_path, {"field": {"kind": "constant", "E": [0, 0, 0],
                                             "B": [0, 0, 0]}})
        out = tmp_path / "dev.csv"
        assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
        data = read_csv(out)
        for col in ("dev_x", "dev_u", "dev_spin"):
            assert np.max(data[col]) == 0.0

    def test_tight_threshold_fails(self, tmp_path):
        cfg = write_cfg(tmp_path)
        code = main(["compare", "--config", cfg, "--out", str(tmp_path / "d.csv"),
                     "--threshold", "1e-30"])
        assert code == 1

    def test_gradient_field_report_only(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {
            "field": {
                "kind": "polynomial",
                "terms": [
                    {"component": 1, "exponents": [0, 0, 1, 0], "coefficient": 0.5},
                    {"component": 1, "exponents": [0, 0, 2, 0], "coefficient": 0.0125},
                    {"component": 2, "exponents": [0, 1, 0, 0], "coefficient": -0.5},
                    {"component": 2, "exponents": [0, 1, 1, 0], "coefficient": -0.025},
                ],
            },
            "compare": {"threshold": 1e-30, "enforce": False},
        })
        out = tmp_path / "dev.csv"
        assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
        assert "not enforced" in capsys.readouterr().out


class TestVerify:
    def test_potential_field_passes(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {
            "integrator": {"h": 2 * np.pi / 1000, "steps": 200, "record_every": 1},
            "verify": {"points": 40, "variations": 2},
        })
        out = tmp_path / "resid.csv"
        code = main(["verify", "--config", cfg, "--out", str(out)])
        text = capsys.readouterr().out
        assert code == 0, text
        assert "maxwell: PASS" in text
        assert "constraint: PASS" in text
        assert "stationarity: PASS" in text
        data = read_csv(out)
        assert data["x_residual"].max() < 1e-2

    def test_nonclosed_expected_fail(self, capsys):
        code = main(["verify", "--config", str(ROOT / "configs" / "nonclosed_f.yaml")])
        text = capsys.readouterr().out
        assert code == 0
        assert "maxwell: PASS" in text and "expected" in text

    def test_nonclosed_without_expectation_fails(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {
            "field": {"kind": "direct",
                      "f_terms": [{"pair": [1, 2], "exponents": [0, 0, 0, 1],
                                   "coefficient": 1.0}]},
            "verify": {"points": 20},
        })
        code = main(["verify", "--config", cfg])
        text = capsys.readouterr().out
        assert code == 1
        assert "maxwell: FAIL" in text

    def test_seed_override_changes_nothing_material(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {"verify": {"points": 30, "variations": 2},
                                   "integrator": {"h": 2 * np.pi / 1000, "steps": 150,
                                                  "record_every": 1}})
        assert main(["verify", "--config", cfg, "--seed", "1"]) == 0
        assert main(["verify", "--config", cfg, "--seed", "2"]) == 0
