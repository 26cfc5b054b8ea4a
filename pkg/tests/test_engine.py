import math

import numpy as np
import pytest

import gilbert.engine as engine
from gilbert.engine import (MarkedConfig, branch_history, branch_length,
                            build, partial_tessellation)
from gilbert.geom import DegenerateConfiguration, MarkedPoint, Rect

HALF_PI = math.pi / 2


def _example2():
    return MarkedConfig((MarkedPoint(0.0, 0.0, 0.0, 0),
                         MarkedPoint(1.0, 2.0, HALF_PI, 1)))


def _example3():
    return MarkedConfig((MarkedPoint(0.0, 0.0, 0.0, 0),
                         MarkedPoint(1.0, 2.0, HALF_PI, 1),
                         MarkedPoint(-1.0, 5.0, HALF_PI, 2)))


def test_single_seed_grows_forever():
    tess = build(MarkedConfig((MarkedPoint(3.0, 4.0, 1.0, 7),)))
    assert tess.length(7, 1) == math.inf
    assert tess.length(7, -1) == math.inf
    assert tess.events == ()


def test_empty_config():
    tess = build(MarkedConfig(()))
    assert tess.branch_lengths == {}
    assert tess.events == ()


def test_two_seed_example():
    tess = build(_example2())
    assert tess.length(0, 1) == math.inf
    assert tess.length(0, -1) == math.inf
    assert tess.length(1, 1) == math.inf
    assert tess.length(1, -1) == 2.0
    assert len(tess.events) == 1
    ev = tess.events[0]
    assert ev.time == 2.0
    assert ev.blocked == (1, -1)
    assert ev.blocker == (0, 1)
    assert ev.point == pytest.approx((1.0, 0.0), abs=1e-9)


def test_three_seed_example():
    tess = build(_example3())
    assert tess.length(2, -1) == 5.0
    assert tess.length(2, 1) == math.inf
    assert tess.blocker_of[(2, -1)] == (0, -1)
    assert tess.blocker_of[(1, -1)] == (0, 1)
    times = [ev.time for ev in tess.events]
    assert times == sorted(times)
    ev_c = [ev for ev in tess.events if ev.blocked == (2, -1)][0]
    assert ev_c.point == pytest.approx((-1.0, 0.0), abs=1e-9)


def test_branch_length_lookup_errors():
    tess = build(_example2())
    assert branch_length(tess, 1, -1) == 2.0
    with pytest.raises(KeyError):
        branch_length(tess, 99, 1)
    with pytest.raises(ValueError):
        branch_length(tess, 1, 0)


def test_event_count_bound(rng):
    from conftest import random_config
    for _ in range(40):
        cfg = random_config(rng)
        tess = build(cfg)
        m = len(cfg)
        assert len(tess.events) <= m * (m - 1) // 2


def test_partial_tessellation_at_zero():
    tess = build(_example3())
    for seg in partial_tessellation(tess, 0.0):
        assert (seg.x0, seg.y0) == (seg.x1, seg.y1)


def test_partial_tessellation_example_times():
    tess = build(_example2())
    segs = {(s.seed, s.sign): s for s in partial_tessellation(tess, 1.0)}
    assert (segs[(0, 1)].x1, segs[(0, 1)].y1) == pytest.approx((1.0, 0.0))
    assert (segs[(0, -1)].x1, segs[(0, -1)].y1) == pytest.approx((-1.0, 0.0))
    assert (segs[(1, 1)].x1, segs[(1, 1)].y1) == pytest.approx((1.0, 3.0))
    assert (segs[(1, -1)].x1, segs[(1, -1)].y1) == pytest.approx((1.0, 1.0))


def test_partial_tessellation_monotone(rng):
    from conftest import random_config
    for _ in range(20):
        tess = build(random_config(rng))
        grid = sorted(rng.uniform(0, 12, 6))
        prev = None
        for t in grid:
            segs = partial_tessellation(tess, t)
            reach = [math.hypot(s.x1 - s.x0, s.y1 - s.y0) for s in segs]
            if prev is not None:
                assert all(a <= b + 1e-12 for a, b in zip(prev, reach))
            prev = reach


def test_partial_tessellation_negative_time():
    with pytest.raises(ValueError):
        partial_tessellation(build(_example2()), -0.5)


def test_partial_tessellation_infinite_time_clips_to_window():
    pts = (MarkedPoint(0.0, 0.0, 0.0, 0), MarkedPoint(1.0, 2.0, HALF_PI, 1))
    tess = build(MarkedConfig(pts, window=Rect(-5.0, -5.0, 10.0, 10.0)))
    segs = {(s.seed, s.sign): s for s in partial_tessellation(tess, math.inf)}
    assert segs[(0, 1)].x1 == pytest.approx(5.0)
    assert segs[(0, -1)].x1 == pytest.approx(-5.0)
    assert segs[(1, -1)].y1 == pytest.approx(0.0, abs=1e-9)  # finite branch
    assert segs[(1, 1)].y1 == pytest.approx(5.0)
    with pytest.raises(ValueError):
        partial_tessellation(build(MarkedConfig(pts)), math.inf)


def test_branch_history():
    tess = build(_example2())
    assert branch_history(tess, 0, 1, 0.0) == (0.0, 0.0)
    assert branch_history(tess, 1, -1, 5.0) == pytest.approx((1.0, 0.0), abs=1e-9)
    assert branch_history(tess, 0, 1, 3.0) == pytest.approx((3.0, 0.0))
    with pytest.raises(ValueError):
        branch_history(tess, 0, 1, -1.0)


def test_duplicate_positions_raise():
    with pytest.raises(DegenerateConfiguration):
        MarkedConfig((MarkedPoint(1.0, 1.0, 0.3, 0),
                      MarkedPoint(1.0, 1.0, 0.9, 1)))


def test_near_duplicate_positions_raise_in_build():
    cfg = MarkedConfig((MarkedPoint(1.0, 1.0, 0.3, 0),
                        MarkedPoint(1.0 + 1e-13, 1.0, 0.9, 1)))
    with pytest.raises(DegenerateConfiguration):
        build(cfg)


def test_collinear_overlapping_seeds_raise():
    cfg = MarkedConfig((MarkedPoint(0.0, 0.0, 0.0, 0),
                        MarkedPoint(3.0, 0.0, 0.0, 1)))
    with pytest.raises(DegenerateConfiguration):
        build(cfg)


def test_seed_on_growth_line_raises():
    # the vertical line of seed 1 passes exactly through seed 0's track
    cfg = MarkedConfig((MarkedPoint(0.0, 0.0, 0.0, 0),
                        MarkedPoint(2.0, 0.0, HALF_PI, 1)))
    with pytest.raises(DegenerateConfiguration):
        build(cfg)


def test_simultaneous_arrival_tie():
    cfg = MarkedConfig((MarkedPoint(0.0, 0.0, 0.0, 0),
                        MarkedPoint(2.0, 2.0, HALF_PI, 1)))
    with pytest.raises(DegenerateConfiguration):
        build(cfg)
    tess = build(cfg, tie_break=True)
    # lexicographic override: branch (0, +) wins and keeps growing
    assert tess.length(1, -1) == pytest.approx(2.0)
    assert tess.length(0, 1) == math.inf


def test_unique_ids_required():
    with pytest.raises(ValueError):
        MarkedConfig((MarkedPoint(0.0, 0.0, 0.1, 5),
                      MarkedPoint(1.0, 1.0, 0.2, 5)))


def test_staged_path_equals_full_enumeration(rng):
    from conftest import random_config
    for _ in range(25):
        cfg = random_config(rng, m=int(rng.integers(20, 60)), side=12.0)
        full = build(cfg)
        old = engine._FULL_ENUM_MAX
        engine._FULL_ENUM_MAX = 1
        try:
            staged = build(cfg)
        finally:
            engine._FULL_ENUM_MAX = old
        assert staged.branch_lengths == full.branch_lengths
        assert staged.events == full.events


def sample_grown_difference(base, extended, t, n_samples=7):
    """Points on branch sub-segments grown in one tessellation but not the
    other at time ``t`` (plus the inserted seed's own branches)."""
    reach1 = {}
    for s in partial_tessellation(base, t):
        reach1[(s.seed, s.sign)] = math.hypot(s.x1 - s.x0, s.y1 - s.y0)
    pts = []
    for s in partial_tessellation(extended, t):
        key = (s.seed, s.sign)
        r2 = math.hypot(s.x1 - s.x0, s.y1 - s.y0)
        r1 = reach1.get(key, 0.0)
        lo, hi = min(r1, r2), max(r1, r2)
        if hi - lo < 1e-12:
            continue
        seed = extended.config.points[extended.config.index_of(s.seed)]
        d = seed.direction
        # strict interior of the differing sub-segment
        for frac in np.linspace(0.0, 1.0, n_samples + 2)[1:-1]:
            u = lo + (hi - lo) * frac
            pts.append((seed.x + s.sign * u * d[0],
                        seed.y + s.sign * u * d[1]))
    return pts


def test_insertion_locality_sampled(rng):
    # points where the grown sets differ must sit within distance t of
    # the inserted seed
    from conftest import random_config
    for _ in range(10):
        cfg = random_config(rng, m=8)
        y = (rng.uniform(0, 10), rng.uniform(0, 10))
        ymark = rng.uniform(0, math.pi)
        cfg2 = cfg.with_extra([MarkedPoint(y[0], y[1], ymark, 100)])
        t1, t2 = build(cfg), build(cfg2)
        for t in rng.uniform(0.2, 12.0, 5):
            for px, py in sample_grown_difference(t1, t2, t):
                assert math.hypot(px - y[0], py - y[1]) <= t + 1e-6
