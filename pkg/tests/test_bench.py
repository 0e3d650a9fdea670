import json

import pytest

from fame.bench import STAGES, run_bench
from fame.errors import PreconditionError


def test_report_fields_and_stage_sum():
    r = run_bench(t=4, h=16, w=16, iters=10)
    d = r.to_dict()
    json.dumps(d)
    assert d["shape"] == [3, 4, 16, 16]
    assert set(r.stage_seconds) == set(STAGES)
    assert sum(r.stage_seconds.values()) <= r.wall_seconds
    assert r.fps == pytest.approx(10 * 4 / r.wall_seconds)


def test_threads_run():
    r = run_bench(t=4, h=16, w=16, iters=12, threads=2)
    assert r.threads == 2 and r.fps > 0


def test_bench_preconditions():
    with pytest.raises(PreconditionError):
        run_bench(t=4, h=16, w=16, iters=9)
    with pytest.raises(PreconditionError):
        run_bench(t=4, h=16, w=16, threads=0)


def test_fps_is_stable_between_runs():
    a = run_bench(16, 112, 112, iters=10)
    b = run_bench(16, 112, 112, iters=10)
    assert abs(a.fps - b.fps) <= 0.2 * max(a.fps, b.fps)
