"""Module contains the main config class."""
import os
import sys
from importlib import util as import_util
from pathlib import Path
from typing import Any, Iterator, Optional, Tuple

from psfeec.enums import BoundaryRule, InteriorRule
from psfeec.exceptions import ClientError


class ToleranceConfig:
    """Tolerance config class.

    All tolerances are relative to a natural scale of the quantity
    being tested (largest singular value, input norm, edge length).

    The rank and residual tolerances can be overridden with the
    ``PSFEEC_TOL_RANK`` and ``PSFEEC_TOL_RESIDUAL`` environment variables.
    """

    def __init__(self) -> None:
        self.rank = _env_float("PSFEEC_TOL_RANK", 1e-9)
        self.ambiguity = (1e-11, 1e-7)
        self.membership = 1e-9
        self.residual = _env_float("PSFEEC_TOL_RESIDUAL", 1e-10)
        self.preimage = 1e-8
        self.geometry = 1e-12
        self.commute = 1e-9
        self.idempotent = 1e-11

    def __iter__(self) -> Iterator[Tuple[str, Any]]:
        """Override __iter__ to allow dict representation."""
        for attr, value in self.__dict__.items():
            yield attr, value


class QuadratureConfig:
    """Quadrature config class.

    Attributes:
        max_degree: Largest exactness degree of the available rules.
        moment_degree: Exactness used by edge and interior moment functionals.
    """

    def __init__(self) -> None:
        self.max_degree = 20
        self.moment_degree = 20


class RefineConfig:
    """Powell–Sabin refinement config class."""

    def __init__(self) -> None:
        self.interior_rule = InteriorRule.incenter
        self.boundary_rule = BoundaryRule.midpoint


class RunConfig:
    """Run config class."""

    def __init__(self) -> None:
        self.seed = 0
        self.threads = 1


class LoggingConfig:
    """Logging config class."""

    def __init__(self) -> None:
        self.level = "WARNING"
        self.fmt = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Config:
    """Configuration class to customise psfeec.

    Note:
        This is just a highlevel container for all config classes. Please
        reference individual config class documentation for detailed usage.

    Examples:
        >>> from psfeec.api.config import Config
        >>> config = Config()
        >>> config.tolerance.rank = 1e-10
        >>> Config.current().tolerance.rank
        1e-10
        >>> _ = Config()
    """

    active_instance: Optional["Config"] = None

    def __init__(self):
        self._tolerance = ToleranceConfig()
        self._quadrature = QuadratureConfig()
        self._refine = RefineConfig()
        self._run = RunConfig()
        self._logging = LoggingConfig()
        self.__class__.active_instance = self

    @property
    def tolerance(self) -> ToleranceConfig:
        """:class:`ToleranceConfig`: Tolerance config."""
        return self._tolerance

    @property
    def quadrature(self) -> QuadratureConfig:
        """:class:`QuadratureConfig`: Quadrature config."""
        return self._quadrature

    @property
    def refine(self) -> RefineConfig:
        """:class:`RefineConfig`: Refinement config."""
        return self._refine

    @property
    def run(self) -> RunConfig:
        """:class:`RunConfig`: Run config."""
        return self._run

    @property
    def logging(self) -> LoggingConfig:
        """:class:`LoggingConfig`: Logging config."""
        return self._logging

    @classmethod
    def current(cls) -> "Config":
        """Retrieve the active config, creating a default one if needed.

        Returns:
            The active config object.
        """
        if cls.active_instance is None:
            return cls()
        return cls.active_instance

    @classmethod
    def load_config(cls) -> "Config":
        """Load custom config file.

        If custom config does not exist or :class:`Config` is not
        properly initialised, use the default config.

        Returns:
            A config object.

        Raises:
            ClientError: When the custom config file fails to execute.
        """
        config_file = cls.config_file()
        if not config_file.exists() or not config_file.is_file():
            return cls()
        spec = import_util.spec_from_file_location("custom_config", config_file)
        module = import_util.module_from_spec(spec)  # type: ignore
        try:
            spec.loader.exec_module(module)  # type: ignore
        except Exception as e:
            raise ClientError("failed to load %s: %s" % (config_file, e))
        if cls.active_instance:
            return cls.active_instance
        return cls()

    @staticmethod
    def config_file() -> Path:
        """Location of the custom config file.

        Returns:
            Path to ``psfeec/config.py`` under the user config directory.
        """
        if sys.platform.startswith("darwin") or sys.platform.startswith("linux"):
            base_dir = os.getenv("XDG_CONFIG_HOME", "~/.config")
            return Path("%s/psfeec/config.py" % base_dir).expanduser()
        base_dir = os.getenv("APPDATA", "~")
        return Path("%s\\psfeec\\config\\config.py" % base_dir).expanduser()


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        return float(value)
    except ValueError:
        raise ClientError("environment variable %s is not a number: %s" % (name, value))
