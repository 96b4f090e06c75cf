"""Run a sampler many times and summarize the result."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .errors import SampleError
from .rng import StreamKey

DEFAULT_CHUNK = 2048


@dataclass
class Welford:
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> "Welford":
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0


def welford_update(acc: Welford, x: float) -> Welford:
    return acc.push(x)


@dataclass(frozen=True)
class EstimateResult:
    mean: float
    variance: float
    stderr: float
    ci_low: float
    ci_high: float
    n: int
    wall_time: float
    z: float = 1.96

    def to_dict(self):
        return asdict(self)


def summarize(values, wall_time: float = 0.0, z: float = 1.96) -> EstimateResult:
    acc = Welford()
    for v in values:
        acc.push(float(v))
    var = acc.variance
    se = math.sqrt(var / acc.n) if acc.n else math.nan
    return EstimateResult(acc.mean, var, se, acc.mean - z * se, acc.mean + z * se,
                          acc.n, wall_time, z)


def sample_values(sampler, n: int, root_seed: int, workers: int = 1,
                  chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """Evaluate samples ``0..n-1``; sample ``m`` uses ``StreamKey(root_seed, (m,))``."""
    out = np.empty(n)
    block = getattr(sampler, "block", None)

    def run(lo):
        hi = min(lo + chunk, n)
        if block is not None:
            out[lo:hi] = block(root_seed, lo, hi)
        else:
            for m in range(lo, hi):
                try:
                    out[m] = sampler(StreamKey(root_seed, (m,)))
                except SampleError:
                    raise
                except Exception as exc:
                    raise SampleError(m, exc) from exc

    starts = range(0, n, chunk)
    if workers <= 1:
        for lo in starts:
            run(lo)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(run, lo) for lo in starts]:
                fut.result()
    return out


def run_estimator(sampler: Callable, n: int, root_seed: int, workers: int = 1,
                  z: float = 1.96, keep: Optional[list] = None) -> EstimateResult:
    """Mean, variance and normal confidence interval over ``n`` keyed samples.

    The reduction runs in sample-index order, so the result does not depend
    on ``workers``. Pass a list as ``keep`` to receive the raw samples.
    """
    if n < 2:
        raise ValueError("at least two samples are needed to estimate a variance")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    t0 = time.perf_counter()
    values = sample_values(sampler, n, root_seed, workers)
    wall = time.perf_counter() - t0
    if keep is not None:
        keep.append(values)
    return summarize(values, wall, z)
