import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from hetbounds.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def synthetic_panel(path, n_per=300, constant_treatment_in=None):
    """Three settings with a shared confounder; optionally one setting gets a
    constant treatment column to provoke a per-setting estimation error."""
    rng = np.random.default_rng(17)
    frames = []
    for i, setting in enumerate(["A", "B", "C"]):
        c = rng.normal(size=n_per)
        d = c + rng.normal(size=n_per)
        if setting == constant_treatment_in:
            d = np.ones(n_per)
        y = (1.0 + 0.2 * i) * d + 0.5 * c + rng.normal(scale=0.1, size=n_per)
        frames.append(pd.DataFrame({"year": setting, "y": y, "d": d, "c": c}))
    pd.concat(frames, ignore_index=True).to_csv(path, index=False)


class TestEstimate:
    def test_three_settings_json(self, runner, tmp_path):
        data = tmp_path / "panel.csv"
        synthetic_panel(data)
        result = runner.invoke(
            main,
            ["estimate", "--data", str(data), "--outcome", "y", "--treatment", "d",
             "--controls-bench", "c", "--by", "year", "--format", "json"],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(result.stdout)
        settings = {r["setting"]: r for r in doc["settings"]}
        assert list(settings) == ["A", "B", "C"]
        # dropping the confounder moves the estimate up by gamma/2, so the
        # short-minus-supershort change is negative
        assert settings["A"]["b_ss"] == pytest.approx(-0.25, abs=0.05)
        assert doc["errors"] == []

    def test_bad_setting_reported_others_proceed(self, runner, tmp_path):
        data = tmp_path / "panel.csv"
        synthetic_panel(data, constant_treatment_in="B")
        result = runner.invoke(
            main,
            ["estimate", "--data", str(data), "--outcome", "y", "--treatment", "d",
             "--controls-bench", "c", "--by", "year", "--format", "json"],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(result.stdout)
        assert [r["setting"] for r in doc["settings"]] == ["A", "C"]
        assert [e["setting"] for e in doc["errors"]] == ["B"]
        assert "error in setting 'B'" in result.stderr

    def test_min_rows_skips_small_settings(self, runner, tmp_path):
        data = tmp_path / "panel.csv"
        synthetic_panel(data, n_per=30)
        result = runner.invoke(
            main,
            ["estimate", "--data", str(data), "--outcome", "y", "--treatment", "d",
             "--controls-bench", "c", "--by", "year", "--min-rows", "50",
             "--format", "json"],
        )
        doc = json.loads(result.stdout)
        assert doc["settings"] == []
        assert "skipped" in result.stderr


class TestRho:
    def test_supershort_from_values(self, runner):
        result = runner.invoke(
            main, ["rho", "supershort", "--b-ss", "j=0.1", "--b-ss", "k=0.2"]
        )
        assert result.exit_code == 0, result.output
        rows = [line.split(",") for line in result.output.strip().splitlines()]
        assert rows[0] == ["setting", "j", "k"]
        # upper triangle holds rho_u, lower triangle rho_l
        assert float(rows[1][2]) == pytest.approx(2.0)
        assert float(rows[2][1]) == pytest.approx(0.5)

    def test_supershort_writes_csv_and_json_twin(self, runner, tmp_path):
        out = tmp_path / "rho.csv"
        result = runner.invoke(
            main,
            ["rho", "supershort", "--b-ss", "j=0.1", "--b-ss", "k=0.2", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert out.exists()
        twin = json.loads((tmp_path / "rho.json").read_text())
        [pair] = twin["pairs"]
        assert pair["rho_l"] == pytest.approx(0.5)
        assert pair["rho_u"] == pytest.approx(2.0)

    def test_decay_distance_two(self, runner):
        result = runner.invoke(
            main, ["rho", "decay", "--base", "0.95", "--settings", "a,b,c"]
        )
        assert result.exit_code == 0, result.output
        rows = [line.split(",") for line in result.output.strip().splitlines()]
        # cell (a, c) spans two steps
        assert float(rows[1][3]) == pytest.approx(1.0 / 0.95**2)
        assert float(rows[3][1]) == pytest.approx(0.95**2)

    def test_adjacency_blank_for_distant_pairs(self, runner):
        result = runner.invoke(
            main,
            ["rho", "adjacency", "--value", "1.1", "--settings", "a,b,c",
             "--pairs", "a:b,b:c"],
        )
        assert result.exit_code == 0, result.output
        rows = [line.split(",") for line in result.output.strip().splitlines()]
        assert rows[1][3] == ""  # (a, c) unrestricted
        assert float(rows[1][2]) == pytest.approx(1.1)

    def test_supershort_requires_inputs(self, runner):
        result = runner.invoke(main, ["rho", "supershort"])
        assert result.exit_code != 0


class TestSolve:
    def test_text_table(self, runner, fixtures_dir):
        result = runner.invoke(
            main, ["solve", "--problem", str(fixtures_dir / "college_years.json")]
        )
        assert result.exit_code == 0, result.output
        assert "0.376" in result.output and "0.514" in result.output

    def test_json_deterministic_across_runs(self, runner, fixtures_dir):
        args = ["solve", "--problem", str(fixtures_dir / "college_years.json"),
                "--format", "json"]
        one = runner.invoke(main, args)
        two = runner.invoke(main, args)
        assert one.exit_code == 0 and two.exit_code == 0
        assert one.output == two.output
        assert json.loads(one.output)["feasible"] is True

    def test_svg_output(self, runner, fixtures_dir, tmp_path):
        out = tmp_path / "plot.svg"
        result = runner.invoke(
            main,
            ["solve", "--problem", str(fixtures_dir / "worked_example.json"),
             "--format", "svg", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert out.read_text().startswith("<svg")

    def test_infeasible_exits_2(self, runner, tmp_path):
        doc = {
            "settings": [
                {"label": "a", "theta_s": 0.0, "nu_l": 1.0, "nu_u": 1.0},
                {"label": "b", "theta_s": 0.0, "nu_l": -0.001, "nu_u": 0.001},
            ],
            "rho": {"pairs": [{"j": "a", "k": "b", "rho_l": 0.9, "rho_u": 1.1}]},
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["solve", "--problem", str(path)])
        assert result.exit_code == 2
        assert "INFEASIBLE" in result.output


class TestPin:
    def test_worked_example_fractions(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["pin", "--problem", str(fixtures_dir / "worked_example.json"),
             "--setting", "j", "--fraction", "0", "--fraction", "1"],
        )
        assert result.exit_code == 0, result.output
        assert "Pinned j at 0.000" in result.output
        assert "Pinned j at 2.000" in result.output

    def test_json_conditionals(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["pin", "--problem", str(fixtures_dir / "worked_example.json"),
             "--setting", "j", "--value", "0", "--format", "json"],
        )
        assert result.exit_code == 0, result.output
        [table] = json.loads(result.output)["pin_tables"]
        assert table["conditional"]["k"] == [0.0, 1.0]

    def test_requires_value_or_fraction(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["pin", "--problem", str(fixtures_dir / "worked_example.json"),
             "--setting", "j"],
        )
        assert result.exit_code != 0


class TestAudit:
    def test_clean_fixture(self, runner, fixtures_dir):
        result = runner.invoke(
            main, ["audit", "--problem", str(fixtures_dir / "college_years.json")]
        )
        assert result.exit_code == 0, result.output
        assert "feasible: True" in result.output
        assert "no transitivity violations" in result.output

    def test_violations_listed(self, runner, tmp_path):
        doc = {
            "settings": [
                {"label": lab, "theta_s": 0.0, "nu_l": -1, "nu_u": 1}
                for lab in ["j", "k", "m"]
            ],
            "rho": {"pairs": [
                {"j": "j", "k": "k", "rho_l": 1.0, "rho_u": 1.1},
                {"j": "k", "k": "m", "rho_l": 1.0, "rho_u": 1.1},
                {"j": "j", "k": "m", "rho_l": 2.0, "rho_u": 3.0},
            ]},
        }
        path = tmp_path / "p.json"
        path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["audit", "--problem", str(path)])
        assert "transitivity violation" in result.output

    def test_json_format(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["audit", "--problem", str(fixtures_dir / "college_years.json"),
             "--format", "json"],
        )
        doc = json.loads(result.output)
        assert doc["feasible"] is True
        assert doc["transitivity_violations"] == []


class TestLoadErrors:
    def test_malformed_problem(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        result = runner.invoke(main, ["solve", "--problem", str(path)])
        assert result.exit_code != 0
        assert "failed to load problem" in result.output
