"""
Tests for the sim.py command line.
"""

import json

import numpy as np
import pytest
import sim
from src.database import ResultStore
from src.parsers import CSV_HEADER, format_channel_dump, parse_channel_dump, parse_results_csv
from src.switching import LookupTable


@pytest.fixture
def channel_file(tmp_path, rng):
    """Dump of an 8×2 channel matching the scenario_writer system."""
    h_b = (rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))) * 1e-3
    path = tmp_path / "channel.txt"
    path.write_text(format_channel_dump(h_b, np.array([1e-6, 2e-6])), encoding="utf-8")
    return path


class TestTrain:
    """Tests for the train command."""

    def test_writes_table_and_store(self, scenario_writer, tmp_path):
        """Test training adds the scenario entry and records its points."""
        scenario = scenario_writer()

        assert sim.main(["train", str(scenario)]) == 0

        table = LookupTable.load(str(tmp_path / "results/switching_table.txt"))
        model = table.get((2, 3))
        assert model.domain == (2.0, 6.0)
        points = ResultStore(str(tmp_path / "results/runs.db")).get_training_points((2, 3), seed=7)
        assert len(points) == 6

    def test_deterministic_table(self, scenario_writer, tmp_path):
        """Test the same scenario and seed write the same bytes."""
        scenario = scenario_writer()
        table = tmp_path / "table.txt"

        sim.main(["train", str(scenario), "--table", str(table)])
        first = table.read_bytes()
        table.unlink()
        sim.main(["train", str(scenario), "--table", str(table)])

        assert table.read_bytes() == first

    def test_infeasible_grid(self, scenario_writer, capsys):
        """Test a grid that cannot power one chain exits with a training error."""
        scenario = scenario_writer(training={"p_grid": {"start": 0.1, "stop": 0.5, "num": 6}})

        assert sim.safe_main(["train", str(scenario)]) == 2

        assert 'error code=training_failed message="' in capsys.readouterr().err


    def test_unwritable_table(self, scenario_writer, tmp_path, capsys):
        """Test a table path below a regular file exits 2 with the unwritable_path code."""
        scenario = scenario_writer()
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory", encoding="utf-8")

        code = sim.safe_main(["train", str(scenario), "--table", str(blocker / "sub" / "table.txt")])

        assert code == 2
        lines = capsys.readouterr().err.splitlines()
        assert any(line.startswith('error code=unwritable_path message="cannot write ') for line in lines)


class TestSweep:
    """Tests for the sweep command."""

    def test_writes_csv(self, scenario_writer, tmp_path):
        """Test a sweep after training writes one row per method and b̄."""
        scenario = scenario_writer()
        sim.main(["train", str(scenario)])

        assert sim.main(["sweep", str(scenario)]) == 0

        text = (tmp_path / "results/sweep.csv").read_text(encoding="utf-8")
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        rows = parse_results_csv(text)
        assert [(r["b_bar"], r["method"]) for r in rows][:4] == [
            (1, "infinite"),
            (1, "fixed"),
            (1, "adc_ba"),
            (1, "proposed_ba"),
        ]
        assert len(rows) == 12
        assert all(r["n"] == 5 for r in rows)
        stats = ResultStore(str(tmp_path / "results/runs.db")).get_statistics((2, 3))
        assert stats["sweep_rows"] == 12

    def test_deterministic_csv(self, scenario_writer, tmp_path):
        """Test two sweeps with the same seed write byte-identical CSV files."""
        scenario = scenario_writer()
        sim.main(["train", str(scenario)])

        sim.main(["sweep", str(scenario), "--output", str(tmp_path / "first.csv")])
        sim.main(["sweep", str(scenario), "--output", str(tmp_path / "second.csv")])

        assert (tmp_path / "first.csv").read_bytes() == (tmp_path / "second.csv").read_bytes()

    def test_unwritable_output(self, scenario_writer, tmp_path, capsys):
        """Test a CSV path below a regular file exits 2 with the unwritable_path code."""
        scenario = scenario_writer(sweep={"b_bar": [2]})
        sim.main(["train", str(scenario)])
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory", encoding="utf-8")

        assert sim.safe_main(["sweep", str(scenario), "--output", str(blocker / "sweep.csv")]) == 2
        assert "code=unwritable_path" in capsys.readouterr().err

    def test_explicit_output(self, scenario_writer, tmp_path):
        """Test --output overrides output.csv."""
        scenario = scenario_writer(sweep={"b_bar": [3]})
        sim.main(["train", str(scenario)])

        sim.main(["sweep", str(scenario), "--output", str(tmp_path / "mine.csv")])

        assert len(parse_results_csv((tmp_path / "mine.csv").read_text(encoding="utf-8"))) == 4

    def test_missing_table_entry(self, scenario_writer, capsys):
        """Test sweeping an untrained scenario exits 2 with the missing entry code."""
        scenario = scenario_writer()

        assert sim.safe_main(["sweep", str(scenario)]) == 2

        err = capsys.readouterr().err
        assert err.startswith("error code=missing_table_entry message=")
        assert "n_u=2, l=3" in err


class TestAllocate:
    """Tests for the allocate command."""

    def test_json_report(self, scenario_writer, channel_file, capsys):
        """Test the JSON report of one allocation."""
        scenario = scenario_writer()

        code = sim.main(
            ["allocate", str(scenario), "--channel", str(channel_file), "--budget", "2.0", "--psw", "1e-3", "--json"]
        )

        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert len(report["bits"]) == 8
        assert sum(b > 0 for b in report["bits"]) <= report["m_opt"]
        assert report["psw_bar_w"] == 1e-3
        assert report["power"]["switching"] == pytest.approx(2 * 8 * 1e-3)
        assert report["power"]["total"] <= 2.0 * (1 + 1e-12)

    def test_text_report(self, scenario_writer, channel_file, capsys):
        """Test the table printout lists every chain and the power breakdown."""
        scenario = scenario_writer()

        sim.main(["allocate", str(scenario), "--channel", str(channel_file), "--budget", "2.0", "--psw", "0"])

        out = capsys.readouterr().out
        assert "M_opt =" in out
        assert "total =" in out
        assert len([line for line in out.splitlines() if line.strip()[:1].isdigit()]) == 8

    def test_missing_table_falls_back_to_zero(self, scenario_writer, channel_file, capsys, mocker):
        """Test an untrained scenario allocates with P_SW = 0 and warns."""
        warning = mocker.patch.object(sim.logger, "warning")
        scenario = scenario_writer()

        sim.main(["allocate", str(scenario), "--channel", str(channel_file), "--budget", "2.0", "--json"])

        assert json.loads(capsys.readouterr().out)["psw_bar_w"] == 0.0
        warning.assert_called_once()

    def test_wrong_channel_size(self, scenario_writer, tmp_path, capsys):
        """Test a channel with the wrong number of RF chains exits 2."""
        scenario = scenario_writer()
        dump = tmp_path / "small.txt"
        dump.write_text(format_channel_dump(np.ones((3, 2))), encoding="utf-8")

        code = sim.safe_main(["allocate", str(scenario), "--channel", str(dump), "--budget", "2.0"])

        assert code == 2
        assert "code=dimension_mismatch" in capsys.readouterr().err

    def test_infeasible_budget(self, scenario_writer, channel_file, capsys):
        """Test a budget below one chain's power exits 2."""
        scenario = scenario_writer()

        code = sim.safe_main(["allocate", str(scenario), "--channel", str(channel_file), "--budget", "0.6"])

        assert code == 2
        assert "code=infeasible_budget" in capsys.readouterr().err


class TestDumpChannel:
    """Tests for the dump-channel command."""

    def test_dump_feeds_allocate(self, scenario_writer, tmp_path, capsys):
        """Test a dumped channel has the scenario shape and is accepted by allocate."""
        scenario = scenario_writer()
        dump = tmp_path / "block.txt"

        assert sim.main(["dump-channel", str(scenario), "--output", str(dump)]) == 0
        h_b, gamma = parse_channel_dump(dump.read_text(encoding="utf-8"))
        assert h_b.shape == (8, 2)
        assert gamma.shape == (2,)
        capsys.readouterr()

        code = sim.main(["allocate", str(scenario), "--channel", str(dump), "--budget", "2.0", "--psw", "0", "--json"])

        assert code == 0
        assert len(json.loads(capsys.readouterr().out)["bits"]) == 8

    def test_blocks_are_reproducible_and_distinct(self, scenario_writer, tmp_path):
        """Test the same block gives the same bytes and another block differs."""
        scenario = scenario_writer()
        paths = [tmp_path / name for name in ("a.txt", "b.txt", "c.txt")]

        sim.main(["dump-channel", str(scenario), "--block", "1", "--output", str(paths[0])])
        sim.main(["dump-channel", str(scenario), "--block", "1", "--output", str(paths[1])])
        sim.main(["dump-channel", str(scenario), "--block", "2", "--output", str(paths[2])])

        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert paths[0].read_bytes() != paths[2].read_bytes()

    def test_default_output(self, scenario_writer, tmp_path, capsys):
        """Test the dump lands in results/channel.txt under the output directory."""
        scenario = scenario_writer()

        sim.main(["dump-channel", str(scenario)])

        path = tmp_path / "results" / "channel.txt"
        assert capsys.readouterr().out.strip() == str(path)
        assert path.exists()

    def test_negative_block(self, scenario_writer, capsys):
        """Test a negative block index exits 2."""
        assert sim.safe_main(["dump-channel", str(scenario_writer()), "--block", "-1"]) == 2
        assert "code=invalid_parameter" in capsys.readouterr().err


class TestReport:
    """Tests for the report command."""

    def test_writes_summary(self, scenario_writer, tmp_path, capsys):
        """Test report summarizes the stored sweep."""
        scenario = scenario_writer(sweep={"b_bar": [1, 12]})
        sim.main(["train", str(scenario)])
        sim.main(["sweep", str(scenario)])

        assert sim.main(["report", str(scenario)]) == 0

        path = tmp_path / "results/summary.json"
        assert capsys.readouterr().out.strip() == str(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["scenario"] == {"n_u": 2, "n_paths": 3, "seed": 7}
        assert data["converged_b_bar"]["fixed"] == 12
        assert data["training"]["points"] == 6

    def test_without_database(self, scenario_writer):
        """Test report refuses to run without a result store."""
        scenario = scenario_writer(output={"database": None})

        assert sim.main(["report", str(scenario)]) == 1


class TestSafeMain:
    """Tests for exit-code mapping."""

    def test_missing_scenario(self, tmp_path, capsys):
        """Test a missing scenario file is an invalid configuration."""
        assert sim.safe_main(["train", str(tmp_path / "nope.yaml")]) == 2

        assert "code=invalid_config" in capsys.readouterr().err

    def test_unexpected_error(self, scenario_writer, mocker):
        """Test unexpected exceptions exit 1."""
        mocker.patch("sim.cmd_train", side_effect=RuntimeError("boom"))

        assert sim.safe_main(["train", str(scenario_writer())]) == 1

    def test_interrupted(self, scenario_writer, mocker):
        """Test Ctrl-C exits 130."""
        mocker.patch("sim.cmd_sweep", side_effect=KeyboardInterrupt)

        assert sim.safe_main(["sweep", str(scenario_writer())]) == 130

    def test_quotes_escaped(self, mocker, capsys):
        """Test double quotes in messages are escaped on the error line."""
        from src.errors import FormatError

        mocker.patch("sim.cmd_report", side_effect=FormatError('bad "token"'))

        assert sim.safe_main(["report", "x.yaml"]) == 2
        assert capsys.readouterr().err.strip() == 'error code=bad_format message="<string>: bad \\"token\\""'

    def test_missing_command(self):
        """Test argparse rejects a call without a sub-command."""
        with pytest.raises(SystemExit):
            sim.main([])
