import csv
import json
import tempfile
from pathlib import Path

import numpy as np
from pytest_mock.plugin import MockerFixture

from psfeec.api.config import Config
from psfeec.api.report import Report
from psfeec.enums import Family


def _report() -> Report:
    report = Report("dims")
    report.add_row({"family": Family.S0, "r": 2, "value": np.float64(0.125), "match": np.bool_(True)})
    report.add_row({"family": "L1", "r": 1, "extra": None})
    report.set_meta("mesh", "square")
    return report


def test_report_json():
    report = _report()
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "nested" / "report.json"
        report.write(path)
        data = json.loads(path.read_text())
        assert data["command"] == "dims"
        assert data["seed"] == 0
        assert data["tolerances"]["rank"] == 1e-9
        assert data["rows"][0] == {"family": "S0", "r": 2, "value": 0.125, "match": True}
        assert data["meta"] == {"mesh": "square"}
        first = path.read_text()
        _report().write(path)
        assert path.read_text() == first


def test_report_csv():
    report = _report()
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "report.csv"
        report.write(path)
        with path.open() as file:
            rows = list(csv.reader(file))
    assert rows[0] == ["family", "r", "value", "match", "extra", "tolerance"]
    assert rows[1] == ["S0", "2", "1.250000000e-01", "True", "", "1.000000000e-09"]
    assert rows[2][-2:] == ["", "1.000000000e-09"]


def test_report_verdicts(config: Config):
    config.run.seed = 5
    report = Report("commute")
    report.set_meta("tolerance", 1e-6)
    assert report.tolerance == 1e-6
    assert report.passed
    report.fail("residual too large")
    assert not report.passed
    assert dict(report)["failures"] == ["residual too large"]
    assert dict(report)["seed"] == 5


def test_output_dir(mocker: MockerFixture):
    with tempfile.TemporaryDirectory() as tmpdir:
        mocker.patch.dict("os.environ", {"XDG_DATA_HOME": tmpdir})
        mocker.patch("sys.platform", "linux")
        out = Report("dims").output_dir
        assert out == Path(tmpdir) / "psfeec"
        assert out.exists()
