"""CLI: reports, determinism, exit codes, file formats."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from tws.cli import main

CONFIG_LEB = {
    "p": 2.0,
    "seed": 11,
    "weights": {
        "sigma": {"builtin": "lebesgue", "a": -256.0, "b": 256.0},
        "omega": {"builtin": "lebesgue", "a": -256.0, "b": 256.0},
    },
    "budgets": {
        "family_random": 200,
        "family_depth": 8,
        "forward_subsets": 2,
        "dual_f_budget": 2,
        "pivotal_depth": 4,
        "poisson_rounds": 4,
    },
}


def write_config(tmp_path, cfg, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


class TestConstants:
    def test_lebesgue_analytic_values(self, tmp_path):
        cfg = write_config(tmp_path, CONFIG_LEB)
        out = tmp_path / "out"
        rc = main(["constants", "--config", cfg, "--out", str(out),
                   "--verify-witness"])
        assert rc == 0
        doc = json.loads((out / "constants.json").read_text())
        assert doc["reports"]["ap"]["estimate"] == pytest.approx(1.0, abs=1e-9)
        assert doc["reports"]["strengthened-ap"]["estimate"] == pytest.approx(
            2.0, rel=0.02
        )
        assert doc["chains"]["plain_le_2x_strengthened"] is True
        assert doc["witness_failures"] == []
        assert doc["doubling"]["sigma"] == pytest.approx(3.0, abs=1e-9)

    def test_zero_omega_all_zero(self, tmp_path):
        cfg = dict(CONFIG_LEB)
        cfg["weights"] = {
            "sigma": {"builtin": "lebesgue", "a": 0.0, "b": 4.0},
            "omega": {"resolution": 0, "cells": [], "atoms": []},
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        rc = main(["constants", "--config", path, "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "constants.json").read_text())
        for name in ("ap", "forward-testing", "dual-testing", "maximal-norm"):
            assert doc["reports"][name]["estimate"] == 0.0

    def test_outputs_dir_from_config(self, tmp_path):
        cfg = dict(CONFIG_LEB)
        cfg["outputs"] = {"dir": str(tmp_path / "cfgout")}
        path = write_config(tmp_path, cfg)
        assert main(["plotdata", "poisson-profile", "--config", path]) == 0
        assert (tmp_path / "cfgout" / "plot_poisson-profile.csv").exists()

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, CONFIG_LEB)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["constants", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["constants", "--config", cfg, "--out", str(out2)]) == 0
        assert (out1 / "constants.json").read_bytes() == (
            out2 / "constants.json"
        ).read_bytes()


class TestCheck:
    def test_unknown_suite_exit_2(self, capsys):
        assert main(["check", "nosuch"]) == 2

    def test_small_suite_passes(self, tmp_path):
        cfg = write_config(tmp_path, {"seed": 3, "budgets": {"check_scale": 0.25}})
        out = tmp_path / "out"
        rc = main(["check", "measure", "--config", cfg, "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "check_measure.json").read_text())
        assert doc["all_hard_passed"] is True
        assert all(r["passed"] for r in doc["results"] if r["hard"])


class TestConfigErrors:
    def test_corrupted_measure_file(self, tmp_path):
        bad = tmp_path / "measure.json"
        bad.write_text('{"resolution": 0, "cells": [{"k": 0')
        cfg = {
            "p": 2.0,
            "weights": {"sigma": {"path": "measure.json"}, "omega": {"path": "measure.json"}},
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        rc = main(["constants", "--config", path, "--out", str(out)])
        assert rc == 2
        assert not (out / "constants.json").exists()  # no partial report

    def test_nan_weight_rejected(self, tmp_path):
        bad = tmp_path / "measure.json"
        bad.write_text('{"resolution": 0, "cells": [{"k": 0, "w": NaN}]}')
        cfg = {
            "p": 2.0,
            "weights": {"sigma": {"path": "measure.json"}, "omega": {"path": "measure.json"}},
        }
        path = write_config(tmp_path, cfg)
        rc = main(["constants", "--config", path, "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_missing_config(self, tmp_path):
        rc = main(["constants", "--config", str(tmp_path / "nope.json")])
        assert rc == 2


class TestSearch:
    def test_strengthened_ratio_bound(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {"seed": 2, "generator": {"count": 4, "k": 4, "resolution": 4}},
        )
        out = tmp_path / "out"
        rc = main(["search", "strengthened-over-plain", "--config", cfg,
                   "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "search_strengthened-over-plain.json").read_text())
        assert doc["findings"]
        for entry in doc["findings"]:
            # the tail weight is at least 1/2 on the cube itself
            assert entry["ratio"] >= 0.5 - 1e-12

    def test_k_zero_empty(self, tmp_path):
        cfg = write_config(
            tmp_path, {"seed": 2, "generator": {"count": 2, "k": 0, "resolution": 4}}
        )
        out = tmp_path / "out"
        rc = main(["search", "pivotal-vs-dual", "--config", cfg, "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "search_pivotal-vs-dual.json").read_text())
        assert doc["findings"] == []


class TestPlotdata:
    def test_point_mass_profile(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "p": 2.0,
                "seed": 1,
                "weights": {
                    "sigma": {"builtin": "dirac", "x": 0.0},
                    "omega": {"builtin": "lebesgue", "a": 0.0, "b": 1.0},
                },
            },
        )
        out = tmp_path / "out"
        rc = main(["plotdata", "tnat-profile", "--config", cfg, "--out", str(out)])
        assert rc == 0
        lines = (out / "plot_tnat-profile.csv").read_text().strip().splitlines()
        assert lines[0] == "x,t_natural"
        for row in lines[1:]:
            x, v = map(float, row.split(","))
            if abs(x) > 1e-6:
                assert v == pytest.approx(1.0 / abs(x), rel=1e-6)

    def test_zero_measure_zero_column(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "p": 2.0,
                "weights": {
                    "sigma": {"resolution": 0, "cells": [], "atoms": []},
                    "omega": {"builtin": "lebesgue", "a": 0.0, "b": 1.0},
                },
            },
        )
        out = tmp_path / "out"
        assert main(["plotdata", "tnat-profile", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "plot_tnat-profile.csv").read_text().strip().splitlines()
        assert len(lines) > 1
        assert all(float(r.split(",")[1]) == 0.0 for r in lines[1:])

    def test_deterministic_bytes(self, tmp_path):
        cfg = write_config(tmp_path, CONFIG_LEB)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["plotdata", "condition-vs-scale", "--config", cfg, "--out", str(out1)])
        main(["plotdata", "condition-vs-scale", "--config", cfg, "--out", str(out2)])
        assert (out1 / "plot_condition-vs-scale.csv").read_bytes() == (
            out2 / "plot_condition-vs-scale.csv"
        ).read_bytes()


class TestDecompositionCommands:
    def test_whitney_json(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "p": 2.0,
                "seed": 4,
                "weights": {
                    "sigma": {"builtin": "dirac", "x": 0.25},
                    "omega": {"builtin": "lebesgue", "a": 0.0, "b": 1.0},
                },
                "whitney": {"level": 1},
            },
        )
        out = tmp_path / "out"
        rc = main(["whitney", "--config", cfg, "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "whitney.json").read_text())
        assert doc["cubes"]
        assert doc["constants"]["overlap_constant"] <= 64

    def test_cz_json(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["cz", "--seed", "9", "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "cz.json").read_text())
        assert doc["invariants"]["identity_ok"] is True
        assert doc["invariants"]["mean_zero_residual"] <= 1e-9


class TestEntrypoint:
    def test_module_invocation(self, tmp_path):
        # the console entry point runs in a fresh interpreter
        res = subprocess.run(
            [sys.executable, "-m", "tws.cli", "plotdata", "poisson-profile",
             "--config", write_config(tmp_path, CONFIG_LEB), "--out",
             str(tmp_path / "o")],
            capture_output=True,
            text=True,
            cwd=str(Path(__file__).resolve().parent.parent),
            env={"PYTHONPATH": "src", "PATH": "/usr/bin:/bin"},
        )
        assert res.returncode == 0, res.stderr
