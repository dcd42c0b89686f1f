"""Internal helper functions for `psfeec`.

These helper functions are standalone functions that
have no dependency on the finite element machinery.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None
) -> List[R]:
    """Apply a function to every item, optionally on a thread pool.

    Results are returned in the order of the input regardless of
    the number of threads used.

    Args:
        func: The function to apply.
        items: Inputs to apply the function to.
        threads: Maximum number of worker threads. Defaults to the
            :attr:`~psfeec.api.config.RunConfig.threads` of the active config.

    Returns:
        A list of results in input order.

    Examples:
        >>> parallel_map(lambda x: x * x, [1, 2, 3])
        [1, 4, 9]
        >>> parallel_map(lambda x: x + 1, range(4), threads=2)
        [1, 2, 3, 4]
    """
    if threads is None:
        from psfeec.api.config import Config

        threads = Config.current().run.threads
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))


def parse_degree_range(value: str) -> Tuple[int, ...]:
    """Convert a degree range argument into a tuple of degrees.

    Args:
        value: A single degree ``"3"``, an inclusive range ``"2..4"``
            or a comma separated list ``"1,3"``.

    Returns:
        Degrees in increasing order.

    Raises:
        ValueError: When the value cannot be parsed.

    Examples:
        >>> parse_degree_range("3")
        (3,)
        >>> parse_degree_range("2..4")
        (2, 3, 4)
        >>> parse_degree_range("4,1")
        (1, 4)
    """
    value = value.strip()
    if ".." in value:
        low, high = value.split("..", 1)
        degrees = range(int(low), int(high) + 1)
    else:
        degrees = (int(item) for item in value.split(",") if item.strip())
    result = tuple(sorted(set(degrees)))
    if not result or result[0] < 0:
        raise ValueError("invalid degree range %s" % value)
    return result


def chebyshev_points(count: int) -> np.ndarray:
    """Chebyshev points of the first kind mapped into the open interval (0, 1).

    Args:
        count: Number of points.

    Returns:
        Increasing array of ``count`` points.

    Examples:
        >>> chebyshev_points(1).tolist()
        [0.5]
        >>> bool(np.all(np.diff(chebyshev_points(5)) > 0))
        True
    """
    k = np.arange(count)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * count))
    return np.sort((1.0 - nodes) / 2.0)


def setup_logging(level: str, fmt: str) -> None:
    """Configure the ``psfeec`` logger.

    Args:
        level: Name of the log level.
        fmt: Format string of the stream handler.
    """
    logger = logging.getLogger("psfeec")
    logger.setLevel(level.upper())
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(fmt))
        logger.addHandler(handler)
    else:
        for handler in logger.handlers:
            handler.setFormatter(logging.Formatter(fmt))


def format_float(value: float) -> str:
    """Deterministic float formatting used in reports.

    Args:
        value: Value to format.

    Returns:
        Formatted value.

    Examples:
        >>> format_float(0.5)
        '5.000000000e-01'
        >>> format_float(3)
        '3'
    """
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    return "%.9e" % value

