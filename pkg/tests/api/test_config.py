import tempfile
from pathlib import Path

import pytest
from pytest_mock.plugin import MockerFixture

from psfeec.api.config import Config, ToleranceConfig
from psfeec.enums import InteriorRule
from psfeec.exceptions import ClientError


def test_tolerance_config(monkeypatch):
    assert dict(ToleranceConfig())["rank"] == 1e-9
    monkeypatch.setenv("PSFEEC_TOL_RANK", "1e-11")
    monkeypatch.setenv("PSFEEC_TOL_RESIDUAL", "")
    config = ToleranceConfig()
    assert config.rank == 1e-11
    assert config.residual == 1e-10
    monkeypatch.setenv("PSFEEC_TOL_RANK", "tiny")
    with pytest.raises(ClientError):
        ToleranceConfig()


def test_current_config():
    config = Config()
    assert Config.current() is config
    assert config.refine.interior_rule == InteriorRule.incenter
    assert config.quadrature.moment_degree == 20
    assert config.run.seed == 0
    Config.active_instance = None
    assert isinstance(Config.current(), Config)


def test_config_file(monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", "/tmp/conf")
    assert Config.config_file() == Path("/tmp/conf/psfeec/config.py")


def test_load_config(mocker: MockerFixture):
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "config.py"
        mocker.patch.object(Config, "config_file", return_value=path)
        assert Config.load_config().tolerance.rank == 1e-9
        path.write_text(
            "from psfeec.api.config import Config\n"
            "config = Config()\n"
            "config.run.threads = 3\n"
        )
        assert Config.load_config().run.threads == 3
        path.write_text("raise RuntimeError('broken')\n")
        with pytest.raises(ClientError):
            Config.load_config()
