import concurrent.futures
from collections.abc import Callable, Iterable
from typing import TypeVar

import numpy as np

T = TypeVar('T')
R = TypeVar('R')


def parallel_map(fn: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> list[R]:
    """Apply fn to every item, optionally on a thread pool

    Results always come back in submission order so any reduction over them is
    independent of scheduling. Exceptions raised by fn propagate to the caller.

    Args:
        fn (Callable): the work function
        items (Iterable): inputs
        max_workers (int, optional): 1 (the default) runs everything inline

    Returns:
        list: fn(item) for each item, in order
    """
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(fn, item) for item in items]
        return [future.result() for future in futures]


def spawn_generators(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child generators derived from one master seed"""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]
