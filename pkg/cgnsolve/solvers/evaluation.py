"""
Function-evaluation plumbing shared by the solvers.

Evaluations are the cost metric of every experiment, so they are counted explicitly and
parallel work is always reduced back in input order.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


class EvaluationCounter:
    """Thread-safe counter of model evaluations."""

    def __init__(self, start: int = 0):
        self._count = start
        self._lock = threading.Lock()

    def add(self, n: int = 1) -> int:
        with self._lock:
            self._count += n
            return self._count

    @property
    def count(self) -> int:
        with self._lock:
            return self._count


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply ``fn`` to every item, results in input order.

    Args:
        fn (Callable): Pure function of one item.
        items (Iterable): Inputs.
        workers (int): Thread count; 1 runs inline.

    Returns:
        List: ``[fn(item) for item in items]``, independent of ``workers``.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(fn, items))


def counted(evaluate: Callable[[np.ndarray], Optional[np.ndarray]], counter: EvaluationCounter) -> Callable[[np.ndarray], Optional[np.ndarray]]:
    """Wrap ``evaluate`` so every call, evaluable or not, bumps ``counter``."""

    def wrapper(x: np.ndarray) -> Optional[np.ndarray]:
        counter.add()
        return evaluate(x)

    return wrapper
