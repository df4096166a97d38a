"""Per-sample wall-time measurement for scaling studies."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset
from .sampler import SamplerConfig, build_metric, sample


@dataclass(frozen=True)
class Timing:
    k: int
    n: int
    n_samples: int
    seconds: float

    @property
    def per_sample(self) -> float:
        return self.seconds / self.n_samples


def time_sampling(dataset: Dataset, config: SamplerConfig, repeats: int = 5) -> Timing:
    """Best-of-``repeats`` single-threaded wall time, after one warm-up call.

    The warm-up absorbs JIT compilation and first-touch allocation, and the
    metric context is built once outside the timed region.
    """
    ctx = build_metric(dataset, config.metric)
    sample(dataset, replace(config, n_samples=min(config.n_samples, 64)), ctx=ctx, threads=1)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        sample(dataset, config, ctx=ctx, threads=1)
        best = min(best, time.perf_counter() - t0)
    return Timing(config.k, dataset.n, config.n_samples, best)


def time_interleaved(cases, repeats: int = 9) -> list[Timing]:
    """Best-of-``repeats`` timings for several ``(dataset, config)`` cases.

    Each round runs every case once, so slow periods on a shared machine
    hit all cases alike instead of skewing their ratios.
    """
    prepared = []
    for dataset, config in cases:
        ctx = build_metric(dataset, config.metric)
        sample(dataset, replace(config, n_samples=min(config.n_samples, 64)), ctx=ctx, threads=1)
        prepared.append((dataset, config, ctx))
    best = [np.inf] * len(prepared)
    for _ in range(repeats):
        for i, (dataset, config, ctx) in enumerate(prepared):
            t0 = time.perf_counter()
            sample(dataset, config, ctx=ctx, threads=1)
            best[i] = min(best[i], time.perf_counter() - t0)
    return [Timing(c.k, d.n, c.n_samples, t) for (d, c, _), t in zip(prepared, best)]


def gaussian_data(m: int, n: int, seed: int = 0) -> Dataset:
    return Dataset(np.random.default_rng(seed).standard_normal((m, n)))


def scaling_ratio(base: Timing, other: Timing) -> float:
    return other.per_sample / base.per_sample
