"""Module contains the :class:`Report` class.

Used to collect the tables produced by the checks and store them
as deterministic JSON or CSV files.
"""
import csv
import json
import os
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from psfeec.api.config import Config
from psfeec.utils import format_float

__all__ = ["Report"]


class Report:
    """Used for collecting and writing check results.

    Every report carries the tolerances and seed in effect so that
    a table can be reproduced from its own metadata.

    Args:
        command: Name of the command producing the report.
        config: Config providing tolerances and seed.

    Examples:
        >>> report = Report("dims")
        >>> report.add_row({"family": "S0", "r": 2, "match": True})
        >>> report.passed
        True
        >>> report.fail("dimension mismatch")
        >>> report.passed
        False
    """

    def __init__(self, command: str, config: Optional[Config] = None) -> None:
        config = config or Config.current()
        self._command = command
        self._seed = config.run.seed
        self._tolerances = {
            key: list(value) if isinstance(value, tuple) else value
            for key, value in config.tolerance
        }
        self._meta: Dict[str, Any] = {}
        self._rows: List[Dict[str, Any]] = []
        self._failures: List[str] = []

    def add_row(self, row: Dict[str, Any]) -> None:
        """Append a table row."""
        self._rows.append(dict(row))

    def set_meta(self, key: str, value: Any) -> None:
        """Record a metadata entry."""
        self._meta[key] = value

    def fail(self, message: str) -> None:
        """Record a failed verdict."""
        self._failures.append(message)

    def __iter__(self) -> Iterator[Tuple[str, Any]]:
        """Override __iter__ to allow dict representation."""
        for attr, value in self.__dict__.items():
            yield attr.lstrip("_"), value

    def write_json(self, path: Path) -> None:
        """Write the report as JSON with sorted keys."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as file:
            json.dump(_jsonable(dict(self)), file, indent=2, sort_keys=True)
            file.write("\n")

    def write_csv(self, path: Path) -> None:
        """Write the rows as CSV with a trailing tolerance column."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        columns: List[str] = []
        for row in self._rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        columns.append("tolerance")
        tolerance = format_float(self.tolerance)
        with path.open("w", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(columns)
            for row in self._rows:
                writer.writerow(
                    [_cell(row.get(key, "")) for key in columns[:-1]] + [tolerance]
                )

    def write(self, path: Path) -> None:
        """Write CSV or JSON depending on the suffix of the path."""
        if Path(path).suffix.lower() == ".csv":
            self.write_csv(path)
        else:
            self.write_json(path)

    @property
    def command(self) -> str:
        """str: Command that produced the report."""
        return self._command

    @property
    def rows(self) -> List[Dict[str, Any]]:
        """List[Dict[str, Any]]: Table rows."""
        return self._rows

    @property
    def meta(self) -> Dict[str, Any]:
        """Dict[str, Any]: Metadata entries."""
        return self._meta

    @property
    def failures(self) -> List[str]:
        """List[str]: Failed verdicts."""
        return self._failures

    @property
    def passed(self) -> bool:
        """bool: Whether every verdict passed."""
        return not self._failures

    @property
    def tolerance(self) -> float:
        """float: Tolerance the verdicts of this report were decided with."""
        return self._meta.get("tolerance", self._tolerances["rank"])

    @property
    def output_dir(self) -> Path:
        """:class:`pathlib.Path`: Default directory for report files."""
        if sys.platform.startswith("darwin") or sys.platform.startswith("linux"):
            base_dir = os.getenv("XDG_DATA_HOME", "~/.local/share")
            out_dir = Path("%s/psfeec" % base_dir).expanduser()
        else:
            base_dir = os.getenv("APPDATA", "~")
            out_dir = Path("%s\\psfeec\\reports" % base_dir).expanduser()
        if not out_dir.exists():
            out_dir.mkdir(parents=True)
        return out_dir


def _cell(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (float, int, np.floating, np.integer, bool, np.bool_)):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(format_float(float(value)))
    if hasattr(value, "value") and not isinstance(value, (str, int)):
        return value.value
    return value
