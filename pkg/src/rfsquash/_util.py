"""Seed derivation and thread-pool helpers used across modules."""

from __future__ import annotations

import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# Stream tags keep the per-purpose RNG streams disjoint even when the same
# (seed, index) pair feeds several of them.
SUBSAMPLE_STREAM = 0x5355
TREE_STREAM = 0x5452
FEATURE_STREAM = 0x4645


def rng_for(*keys: int) -> np.random.Generator:
    """Deterministic generator keyed on an ordered tuple of non-negative ints."""
    for k in keys:
        if k < 0:
            raise ValueError(f"seed keys must be non-negative, got {k}")
    return np.random.default_rng(list(keys))


def derive_seed(*keys: int) -> int:
    """Collapse a key tuple into a single 64-bit seed."""
    a, b = np.random.SeedSequence(list(keys)).generate_state(2)
    return (int(a) << 32) | int(b)


def thread_count(explicit: int | None = None) -> int:
    """Resolve the worker count: explicit argument, else RFSQ_THREADS, else 1."""
    if explicit is not None:
        return max(1, explicit)
    raw = os.environ.get("RFSQ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], n_jobs: int | None = None) -> list[R]:
    """Map fn over items, preserving input order regardless of worker count."""
    jobs = thread_count(n_jobs)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
