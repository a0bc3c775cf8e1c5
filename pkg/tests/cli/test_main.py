"""Tests for the command-line interface."""

import csv
import json

from click.testing import CliRunner

from hybridfv import __version__
from hybridfv.cli.main import main
from hybridfv.mesh import read_mesh


def write_config(path, out, **sections):
    """Write a small test1 configuration that runs in well under a second."""
    config = {
        "problem": {"name": "test1"},
        "mesh": {"resolution": [2, 1, 1], "refine_probability": 0.0},
        "time": {"T": 0.1, "N": 2},
        "output": {"directory": str(out), "formats": ["csv", "gnuplot"]},
    }
    for name, values in sections.items():
        config.setdefault(name, {}).update(values)
    path.write_text(json.dumps(config))
    return path


class TestMain:
    """Tests for the command group."""

    def test_version(self) -> None:
        """Test that --version prints the package version."""
        result = CliRunner().invoke(main, ["--version"])

        assert result.exit_code == 0
        assert __version__ in result.output

    def test_help_lists_commands(self) -> None:
        """Test that every subcommand is registered."""
        result = CliRunner().invoke(main, ["--help"])

        for command in ("mesh-gen", "run", "convergence", "check"):
            assert command in result.output


class TestRun:
    """Tests for the run command."""

    def test_dry_run_writes_metadata_only(self, tmp_path) -> None:
        """Test that a dry run validates and records without solving."""
        out = tmp_path / "out"
        config = write_config(tmp_path / "config.json", out)

        result = CliRunner().invoke(main, ["run", "--config", str(config), "--dry-run"])

        assert result.exit_code == 0, result.output
        assert sorted(p.name for p in out.iterdir()) == ["metadata.json"]
        record = json.loads((out / "metadata.json").read_text())
        events = [event["type"] for event in record["events"]]
        assert "dry_run" in events

    def test_run_writes_artifacts(self, tmp_path) -> None:
        """Test that a run writes diagnostics and the error summary."""
        out = tmp_path / "out"
        config = write_config(tmp_path / "config.json", out)

        result = CliRunner().invoke(main, ["run", "--config", str(config)])

        assert result.exit_code == 0, result.output
        assert "Err = " in result.output
        with (out / "diagnostics.csv").open(newline="") as f:
            assert len(list(csv.reader(f))) == 3
        with (out / "errors.csv").open(newline="") as f:
            header, row = list(csv.reader(f))
        assert header[:5] == ["N", "h", "elements", "faces", "Err"]
        assert row[:1] == ["2"]
        assert (out / "errors.dat").exists()
        assert not list(out.glob("*.vtk"))

    def test_out_overrides_directory(self, tmp_path) -> None:
        """Test that --out replaces output.directory."""
        config = write_config(tmp_path / "config.json", tmp_path / "ignored")

        other = str(tmp_path / "other")
        result = CliRunner().invoke(
            main, ["run", "--config", str(config), "--out", other, "--dry-run"]
        )

        assert result.exit_code == 0, result.output
        assert (tmp_path / "other" / "metadata.json").exists()
        assert not (tmp_path / "ignored").exists()

    def test_invalid_config(self, tmp_path) -> None:
        """Test that an invalid key exits with status 1 and names the key."""
        config = write_config(tmp_path / "config.json", tmp_path / "out", time={"N": 0})

        result = CliRunner().invoke(main, ["run", "--config", str(config)])

        assert result.exit_code == 1
        assert "time.N" in result.output

    def test_invalid_override(self, tmp_path) -> None:
        """Test that a negative --seed is rejected with its key."""
        config = write_config(tmp_path / "config.json", tmp_path / "out")

        result = CliRunner().invoke(
            main, ["run", "--config", str(config), "--seed", "-1"]
        )

        assert result.exit_code == 1
        assert "mesh.refine_seed" in result.output

    def test_same_seed_same_output(self, tmp_path) -> None:
        """Test that two runs with the same seed write identical tables."""
        config = write_config(
            tmp_path / "config.json",
            tmp_path / "unused",
            mesh={"refine_probability": 0.5},
        )
        outputs = [tmp_path / "first", tmp_path / "second"]

        for out in outputs:
            args = ["run", "--config", str(config), "--seed", "13", "--out", str(out)]
            result = CliRunner().invoke(main, args)
            assert result.exit_code == 0, result.output

        diagnostics = [(out / "diagnostics.csv").read_bytes() for out in outputs]
        assert diagnostics[0] == diagnostics[1]
        tables = []
        for out in outputs:
            with (out / "errors.csv").open(newline="") as f:
                rows = list(csv.reader(f))
            runtime = rows[0].index("runtime_s")
            tables.append([row[:runtime] + row[runtime + 1 :] for row in rows])
        assert tables[0] == tables[1]


class TestOtherCommands:
    """Tests for mesh-gen, convergence and check."""

    def test_mesh_gen(self, tmp_path) -> None:
        """Test that the generated mesh is written and readable."""
        config = write_config(tmp_path / "config.json", tmp_path / "out")
        target = tmp_path / "mesh.txt"

        result = CliRunner().invoke(
            main, ["mesh-gen", "--config", str(config), "-o", str(target)]
        )

        assert result.exit_code == 0, result.output
        assert "Wrote 2 cells" in result.output
        assert read_mesh(target).n_cells == 2

    def test_convergence_single_level(self, tmp_path) -> None:
        """Test that one level gives a table without orders."""
        out = tmp_path / "out"
        config = write_config(tmp_path / "config.json", out)

        result = CliRunner().invoke(
            main, ["convergence", "--config", str(config), "--levels", "1"]
        )

        assert result.exit_code == 0, result.output
        with (out / "convergence.csv").open(newline="") as f:
            rows = list(csv.reader(f))
        assert len(rows) == 2
        assert rows[1][5] == ""

    def test_check(self, tmp_path) -> None:
        """Test that the default problem passes the checks."""
        config = write_config(tmp_path / "config.json", tmp_path / "out")

        result = CliRunner().invoke(main, ["check", "--config", str(config)])

        assert result.exit_code == 0, result.output
        assert "Configuration OK" in result.output
