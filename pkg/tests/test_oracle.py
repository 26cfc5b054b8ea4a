import math

import numpy as np
import pytest

from conftest import random_config
from gilbert.engine import MarkedConfig, _pair_candidates, build
from gilbert.geom import MarkedPoint
from gilbert.oracle import build_fixedpoint, build_timestep

HALF_PI = math.pi / 2


def _example3():
    return MarkedConfig((MarkedPoint(0.0, 0.0, 0.0, 0),
                         MarkedPoint(1.0, 2.0, HALF_PI, 1),
                         MarkedPoint(-1.0, 5.0, HALF_PI, 2)))


def test_fixedpoint_single_seed():
    cfg = MarkedConfig((MarkedPoint(0.0, 0.0, 1.0, 0),))
    assert build_fixedpoint(cfg) == {(0, 1): math.inf, (0, -1): math.inf}


def test_timestep_single_seed():
    cfg = MarkedConfig((MarkedPoint(0.0, 0.0, 1.0, 0),))
    assert build_timestep(cfg, 1e-3) == {(0, 1): math.inf, (0, -1): math.inf}


def test_fixedpoint_matches_engine_on_examples():
    for cfg in (_example3(),):
        assert build_fixedpoint(cfg) == build(cfg).branch_lengths


def test_timestep_example_accuracy():
    cfg = _example3()
    lengths = build_timestep(cfg, 1e-4)
    assert lengths[(1, -1)] == pytest.approx(2.0, abs=5e-4)
    assert lengths[(2, -1)] == pytest.approx(5.0, abs=5e-4)
    assert lengths[(0, 1)] == math.inf
    assert lengths[(1, 1)] == math.inf


def test_timestep_rejects_bad_dt():
    with pytest.raises(ValueError):
        build_timestep(_example3(), 0.0)
    with pytest.raises(ValueError):
        build_timestep(_example3(), -1e-3)


def test_oracles_gated_to_small_inputs(rng):
    cfg = random_config(rng, m=201, side=40.0)
    with pytest.raises(ValueError):
        build_fixedpoint(cfg)
    with pytest.raises(ValueError):
        build_timestep(cfg, 1e-3)


def test_engine_agrees_with_both_oracles(rng):
    dt = 1e-4
    for _ in range(120):
        cfg = random_config(rng)
        tess = build(cfg)
        fp = build_fixedpoint(cfg)
        ts = build_timestep(cfg, dt)
        for key, ref in tess.branch_lengths.items():
            assert math.isinf(ref) == math.isinf(fp[key])
            assert math.isinf(ref) == math.isinf(ts[key])
            if math.isfinite(ref):
                assert fp[key] == pytest.approx(ref, rel=1e-9)
                assert abs(ts[key] - ref) <= 5 * dt


def test_fixedpoint_is_stationary(rng):
    # one extra application of the blocking map must not move the result
    for _ in range(25):
        cfg = random_config(rng)
        lengths = build_fixedpoint(cfg)
        m = len(cfg)
        idx = {}
        for k, p in enumerate(cfg.points):
            idx[2 * k] = (p.id, 1)
            idx[2 * k + 1] = (p.id, -1)
        ii, jj = np.triu_indices(m, k=1)
        s_bd, s_br, bd, br, _, _ = _pair_candidates(
            cfg.positions, cfg.directions, ii, jj, 0.0, math.inf, None)
        for b in range(2 * m):
            best = math.inf
            for k in range(len(s_bd)):
                if int(bd[k]) == b and s_bd[k] < best \
                        and lengths[idx[int(br[k])]] >= s_br[k]:
                    best = float(s_bd[k])
            assert lengths[idx[b]] == best


def test_timestep_handles_far_crossings():
    # nearly parallel seeds whose only crossing sits far away: the
    # fast-forward must reach it in reasonable time and block one branch
    a = MarkedPoint(0.0, 0.0, 0.78, 0)
    b = MarkedPoint(0.0, 1.0, 0.781, 1)
    cfg = MarkedConfig((a, b))
    tess = build(cfg)
    ts = build_timestep(cfg, 1e-4)
    for key, ref in tess.branch_lengths.items():
        if math.isfinite(ref):
            assert ts[key] == pytest.approx(ref, abs=5e-4)
        else:
            assert math.isinf(ts[key])
