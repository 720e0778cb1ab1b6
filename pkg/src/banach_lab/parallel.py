"""Order-preserving parallel map shared by the table and witness builders."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

JOBS_ENV = "BANACH_LAB_JOBS"


def resolve_jobs(jobs: int | None = None) -> int:
    """Worker cap: explicit value, else ``$BANACH_LAB_JOBS``, else 1."""
    if jobs is None:
        raw = os.environ.get(JOBS_ENV, "").strip()
        if not raw:
            return 1
        try:
            jobs = int(raw)
        except ValueError as exc:
            raise ValueError(f"{JOBS_ENV} must be an integer, got {raw!r}") from exc
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    return jobs


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, evaluated on up to ``jobs`` threads.

    Results come back in input order, so anything folded from them is
    independent of the worker count.
    """
    items = list(items)
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
