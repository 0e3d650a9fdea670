"""Throughput benchmark of the mask + merge pipeline with per-stage timings."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .clip import Clip, temporal_average
from .errors import PreconditionError
from .foreground import DEFAULT_BINS, binarize, sample_color_model, seed_region, soft_mask
from .merge import merge_arrays

STAGES = ("seed", "color_model", "soft_mask", "binarize", "merge")
WARMUP = 3


@dataclass
class BenchReport:
    shape: tuple
    iterations: int
    threads: int
    wall_seconds: float
    clips_per_second: float
    fps: float
    stage_seconds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shape"] = list(self.shape)
        return d


def _timed_pipeline(fg: Clip, bg: np.ndarray, beta: float, bins: int) -> dict:
    times = {}
    t0 = time.perf_counter()
    seed = seed_region(fg)
    t1 = time.perf_counter()
    avg = temporal_average(fg)
    model = sample_color_model(avg, seed, bins=bins)
    t2 = time.perf_counter()
    soft = soft_mask(avg, model)
    t3 = time.perf_counter()
    mask = binarize(soft, beta)
    t4 = time.perf_counter()
    merge_arrays(fg.data, bg, mask)
    t5 = time.perf_counter()
    for name, a, b in zip(STAGES, (t0, t1, t2, t3, t4), (t1, t2, t3, t4, t5)):
        times[name] = b - a
    return times


def run_bench(
    t: int = 16,
    h: int = 112,
    w: int = 112,
    iters: int = 10,
    threads: int = 1,
    beta: float = 0.5,
    bins: int = DEFAULT_BINS,
    seed: int = 0,
) -> BenchReport:
    """Time ``iters`` mask+merge passes over random RGB clips.

    Each pass masks one clip and pastes it onto another; clips are generated
    up front and ``WARMUP`` untimed passes run first. With ``threads > 1`` the
    passes are spread over a thread pool (parallelism across clips only).
    """
    if iters < 10:
        raise PreconditionError(f"iters must be at least 10, got {iters}")
    if threads < 1:
        raise PreconditionError(f"threads must be positive, got {threads}")
    rng = np.random.default_rng(seed)
    pool_size = min(iters, 8)
    clips = [Clip(rng.random((3, t, h, w), dtype=np.float32)) for _ in range(pool_size + 1)]
    jobs = [(clips[i % pool_size], clips[(i % pool_size) + 1].data) for i in range(iters)]

    for fg, bg in jobs[:WARMUP]:
        _timed_pipeline(fg, bg, beta, bins)

    start = time.perf_counter()
    if threads == 1:
        per_job = [_timed_pipeline(fg, bg, beta, bins) for fg, bg in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            per_job = list(ex.map(lambda job: _timed_pipeline(*job, beta, bins), jobs))
    wall = time.perf_counter() - start

    stages = {name: sum(j[name] for j in per_job) for name in STAGES}
    if threads > 1:
        # stage times are summed over workers; report per-worker share
        stages = {k: v / threads for k, v in stages.items()}
    return BenchReport(
        shape=(3, t, h, w),
        iterations=iters,
        threads=threads,
        wall_seconds=wall,
        clips_per_second=iters / wall,
        fps=iters * t / wall,
        stage_seconds=stages,
    )
