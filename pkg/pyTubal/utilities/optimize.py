"""
Per-band work on a thread pool.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from pyTubal.utilities.core import tbconfig

_T = TypeVar("_T")


def map_bands(
    func: Callable[..., _T], *band_lists: Iterable, workers: int | None = None, name: str = "band"
) -> list[_T]:
    """
    Apply ``func`` to matching items of ``band_lists``, like ``list(map(func, *band_lists))``.

    Parameters
    ----------
    func: Callable
        Function of one item from each list.
    *band_lists:
        The per-band inputs.
    workers: int, optional
        Thread count. Defaults to ``system.preferences.threads``; ``1`` runs in the calling thread.
    name: str, optional
        Thread name prefix.

    Returns
    -------
    list
        The results in input order, independent of ``workers``.
    """
    if workers is None:
        workers = int(tbconfig.config.system.preferences.threads)
    if workers < 1:
        raise ValueError(f"Need at least one worker thread, got {workers}.")

    if workers == 1:
        return list(map(func, *band_lists))

    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix=name) as executor:
        return list(executor.map(func, *band_lists))
