import csv
import json
import tempfile
from pathlib import Path

import pytest
from click.testing import CliRunner
from pytest_mock.plugin import MockerFixture

from psfeec.api.config import Config
from psfeec.cli import main

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def runner(mocker: MockerFixture):
    mocker.patch.object(Config, "config_file", return_value=Path("/nonexistent/psfeec/config.py"))
    return CliRunner()


class TestUsage:
    def test_help(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("refine", "dims", "unisolvence", "commute", "exactness", "preimage", "stokes"):
            assert command in result.output

    def test_unknown_flag(self, runner):
        assert runner.invoke(main, ["dims", "--bogus"]).exit_code == 2

    def test_bad_degree(self, runner):
        result = runner.invoke(main, ["exactness", "--r", "4..2"])
        assert result.exit_code == 2
        assert runner.invoke(main, ["exactness", "--r", "x"]).exit_code == 2

    def test_degree_below_minimum(self, runner):
        result = runner.invoke(main, ["unisolvence", "--family", "S0", "--r", "1", "--trials", "1"])
        assert result.exit_code == 2
        assert "S0 needs r >= 2" in result.output

    def test_unknown_chain(self, runner):
        assert runner.invoke(main, ["exactness", "--chains", "lvv,bogus"]).exit_code == 2

    def test_missing_mesh(self, runner):
        assert runner.invoke(main, ["refine", "--mesh", "/nonexistent.msh"]).exit_code == 2

    def test_malformed_mesh(self, runner):
        result = runner.invoke(main, ["refine", "--mesh", str(DATA / "malformed.msh")])
        assert result.exit_code == 2
        assert "line 3" in result.output


class TestCommands:
    def test_refine(self, runner):
        with tempfile.TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / "complex.json"
            result = runner.invoke(main, ["refine", "--mesh", str(DATA / "square.msh"), "--out", str(out)])
            assert result.exit_code == 0
            with out.open("r") as file:
                report = json.load(file)
        assert report["command"] == "refine"
        assert report["rows"] == [{"V": 4, "E": 5, "T": 2, "subtriangles": 12}]
        assert len(report["meta"]["complex"]["vertices"]) == 11
        assert report["failures"] == []

    def test_dims(self, runner):
        result = runner.invoke(main, ["dims", "--r-max", "2"])
        assert result.exit_code == 0
        assert "match=False" not in result.output
        assert "family=S0 ring=False r=2 formula=9 computed=9 match=True" in result.output

    def test_dims_failure(self, runner, mocker: MockerFixture):
        mocked = mocker.patch("psfeec.cli.build_space")
        mocked.return_value.dim = -1
        result = runner.invoke(main, ["dims", "--r-max", "1"])
        assert result.exit_code == 1
        assert "dims:" in result.output

    def test_unisolvence(self, runner):
        result = runner.invoke(main, ["unisolvence", "--family", "edge2", "--r", "1..4"])
        assert result.exit_code == 0
        result = runner.invoke(main, ["--seed", "3", "unisolvence", "--family", "L1", "--r", "1", "--trials", "2"])
        assert result.exit_code == 0
        assert result.output.count("passed=True") == 3

    def test_commute(self, runner):
        result = runner.invoke(main, ["commute", "--which", "thm2", "--r", "3", "--trials", "2"])
        assert result.exit_code == 0

    def test_exactness(self, runner):
        with tempfile.TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / "exactness.csv"
            result = runner.invoke(
                main, ["exactness", "--r", "3", "--chains", "ssl,ring_slv_v2", "--out", str(out)]
            )
            assert result.exit_code == 0
            with out.open("r", newline="") as file:
                rows = list(csv.DictReader(file))
        assert [row["sequence"] for row in rows] == ["ssl", "ring_slv_v2"]
        assert rows[0]["exact"] == "True"
        assert rows[1]["deficit"] == "3"
        assert rows[1]["tolerance"] == rows[0]["tolerance"]

    def test_preimage(self, runner):
        result = runner.invoke(main, ["preimage", "--r", "0..1", "--trials", "2"])
        assert result.exit_code == 0

    def test_global_dims(self, runner):
        result = runner.invoke(main, ["global-dims", "--builtin", "pentagon", "--r", "2..3"])
        assert result.exit_code == 0
        assert "match=False" not in result.output

    def test_global_exactness(self, runner):
        result = runner.invoke(main, ["global-exactness", "--mesh", str(DATA / "lshape.msh"), "--r", "2"])
        assert result.exit_code == 0
        assert "exact=True" in result.output

    def test_stokes(self, runner):
        result = runner.invoke(main, ["stokes", "--pair", "SLV", "--refine", "1"])
        assert result.exit_code in (0, 1)
        assert "level=1" in result.output

    def test_tolerance_flags(self, runner):
        result = runner.invoke(main, ["--tol-rank", "1e-8", "--threads", "2", "dims", "--r-max", "1"])
        assert result.exit_code == 0
        assert Config.current().tolerance.rank == 1e-8
        assert Config.current().run.threads == 2
