import logging
import threading

import numpy as np
import pytest

from psfeec.api.config import Config
from psfeec.utils import (
    chebyshev_points,
    format_float,
    parallel_map,
    parse_degree_range,
    setup_logging,
)


def test_parallel_map_order(config: Config):
    seen = set()

    def work(x):
        seen.add(threading.get_ident())
        return x * 10

    assert parallel_map(work, range(20), threads=4) == [x * 10 for x in range(20)]
    config.run.threads = 3
    assert parallel_map(work, range(5)) == [0, 10, 20, 30, 40]
    assert parallel_map(work, []) == []


def test_parse_degree_range():
    assert parse_degree_range("3") == (3,)
    assert parse_degree_range("1..3") == (1, 2, 3)
    assert parse_degree_range("5, 2,2") == (2, 5)
    for value in ("", "a", "3..1", "-1"):
        with pytest.raises(ValueError):
            parse_degree_range(value)


def test_numbers():
    assert format_float(1e-3) == "1.000000000e-03"
    assert format_float(np.int64(4)) == "4"
    assert format_float(True) == "True"
    points = chebyshev_points(6)
    assert ((points > 0) & (points < 1)).all()
    assert np.allclose(points + points[::-1], 1.0)


def test_setup_logging():
    setup_logging("debug", "%(message)s")
    logger = logging.getLogger("psfeec")
    assert logger.level == logging.DEBUG
    handlers = len(logger.handlers)
    setup_logging("warning", "%(message)s")
    assert logger.level == logging.WARNING
    assert len(logger.handlers) == handlers
