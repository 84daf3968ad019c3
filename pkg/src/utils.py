"""Utility module"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional

from logutils import get_logger

logger = get_logger(__name__)


def get_configs(config_name: str, default_value: Optional[str] = None) -> Optional[str]:
    """Environment value of a setting; blank or unset falls back to default_value."""
    value = os.environ.get(config_name, "").strip()
    return value or default_value


def get_int_config(config_name: str, default_value: int) -> int:
    """Reads an integer configuration, falling back to the default on bad values.

    Args:
        config_name (str): Environment variable name.
        default_value (int): Value used when unset or not an integer.

    Returns:
        int: The configured value.
    """
    raw = get_configs(config_name, default_value=str(default_value))
    try:
        return int(raw)
    except (TypeError, ValueError):
        logger.warning(
            "Configuration '%s' is not an integer (%r); using %d.",
            config_name,
            raw,
            default_value,
        )
        return default_value


def resolve_thread_count(requested: Optional[int] = None) -> int:
    """Number of worker threads for level/replicate evaluation.

    An explicit request wins over WAVECORR_THREADS; 0 means one worker per CPU.

    Args:
        requested (int, optional): Thread count given on the command line.

    Returns:
        int: A positive worker count.
    """
    threads = (
        requested
        if requested is not None
        else get_int_config("WAVECORR_THREADS", default_value=0)
    )
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def evaluate_concurrently(
    func: Callable, items: Iterable, threads: Optional[int] = None
) -> List:
    """Maps func over items with a bounded thread pool.

    Results come back in submission order, so any aggregation over them does not
    depend on the schedule.

    Args:
        func (Callable): Function applied to each item.
        items (Iterable): Work items.
        threads (int, optional): Worker cap; see resolve_thread_count.

    Returns:
        list: func(item) for every item, in order.
    """
    items = list(items)
    workers = min(resolve_thread_count(threads), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]

    logger.debug("Evaluating %d items on %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
