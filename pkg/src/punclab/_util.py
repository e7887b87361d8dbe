"""Seeded RNG streams, confidence intervals and a deterministic parallel map."""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

WILSON_Z99 = 2.5758293035489004


def _key_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("stream keys must be non-negative")
        return int(key)
    return zlib.crc32(str(key).encode("utf-8"))


def stream(seed: int, *keys) -> np.random.Generator:
    """Independent generator addressed by ``(seed, *keys)``.

    Streams depend only on the address, never on how many other streams were
    drawn before, so trials can be farmed out to any number of workers.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


class Interval(NamedTuple):
    low: float
    high: float


def wilson(successes: int, trials: int, z: float = WILSON_Z99) -> Interval:
    if trials <= 0:
        return Interval(0.0, 1.0)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return Interval(max(0.0, centre - half), min(1.0, centre + half))


def binomial_sigma(p: float, trials: int) -> float:
    if trials <= 0:
        return 0.0
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def parallel_map(fn: Callable, items: Iterable, threads: int = 1) -> list:
    """Ordered map; results never depend on ``threads``."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunks(total: int, size: int) -> list[range]:
    return [range(s, min(s + size, total)) for s in range(0, total, size)]


def as_index_array(values: Sequence[int] | np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(values, dtype=np.int64))
