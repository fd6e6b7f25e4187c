"""Seeded sample points and order-preserving parallel evaluation."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from ..kernel.patch import Domain

EXCLUSION_BAND = 1e-3
MAX_REDRAWS = 10_000


@dataclass(frozen=True)
class SamplePlan:
    """``count`` points drawn uniformly from ``box`` (default: the domain's sampling box).

    Point ``i`` comes from its own generator seeded with ``(seed, i)``, so
    the sequence does not depend on how points are distributed to threads.
    """

    seed: int = 0
    count: int = 20
    box: tuple | None = None
    band: float = EXCLUSION_BAND

    def with_box(self, box: Sequence[tuple[float, float]]) -> "SamplePlan":
        return SamplePlan(self.seed, self.count, tuple(tuple(map(float, b)) for b in box), self.band)

    def with_count(self, count: int) -> "SamplePlan":
        return SamplePlan(self.seed, count, self.box, self.band)

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, index])

    def points(self, domain: Domain) -> list[np.ndarray]:
        box = np.asarray(self.box if self.box is not None else domain.sampling_box(), dtype=float)
        if box.shape[0] != domain.dim:
            raise ValueError(f"sampling box has {box.shape[0]} intervals for a {domain.dim}-dimensional chart")
        out = []
        for i in range(self.count):
            rng = self.rng(i)
            for _ in range(MAX_REDRAWS):
                x = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random(domain.dim)
                if domain.contains(x, self.band):
                    out.append(x)
                    break
            else:
                raise ValueError(f"could not draw point {i} inside the domain")
        return out


def thread_count() -> int:
    raw = os.environ.get("EF_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"EF_THREADS must be a positive integer, got {raw!r}") from exc
        if n < 1:
            raise ValueError(f"EF_THREADS must be a positive integer, got {raw!r}")
        return n
    return min(4, os.cpu_count() or 1)


def evaluate(fn: Callable, items: Iterable) -> list:
    """``[fn(item) for item in items]``, possibly on worker threads; order is preserved."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    # the first item runs alone so that jit compilation happens once
    first = fn(items[0])
    with ThreadPoolExecutor(max_workers=min(n, len(items) - 1)) as pool:
        return [first] + list(pool.map(fn, items[1:]))
