import math

import numpy as np
import pytest

from gilbert.engine import MarkedConfig, build
from gilbert.geom import Ball, MarkedPoint, Rect
from gilbert.pointproc import ProcessParams
from gilbert.stabilize import (certify_point, stab_tail, whole_plane_xi,
                               whole_plane_xi_pair, whole_plane_xi_triple)

PARAMS = ProcessParams(intensity=1.0, master_seed=2026)


def test_empty_environment_never_certifies():
    sparse = ProcessParams(intensity=1e-9, master_seed=5)
    res = whole_plane_xi((0.0, 0.0), sparse, m_max=3)
    assert not res.certified
    assert res.rho_hat is None
    assert res.xi_plus == math.inf and res.xi_minus == math.inf
    assert res.windows_tried == 3


def test_certified_result_structure():
    res = whole_plane_xi((0.0, 0.0), PARAMS, m_max=64)
    assert res.certified
    assert res.R == 2.0 * max(res.xi_plus, res.xi_minus)
    assert res.R <= res.rho_hat <= 64
    assert res.center.id == 0
    assert len(res.config) >= 1


def test_certified_invariant_under_m_max():
    for k in range(30):
        p = PARAMS.with_stream(k)
        a = whole_plane_xi((0.0, 0.0), p, m_max=64)
        b = whole_plane_xi((0.0, 0.0), p, m_max=128)
        assert a.certified
        assert (a.xi_plus, a.xi_minus) == (b.xi_plus, b.xi_minus)
        assert a.rho_hat == b.rho_hat


def test_certification_rate_at_unit_intensity():
    certified = sum(
        whole_plane_xi((0.0, 0.0), PARAMS.with_stream(k), m_max=64).certified
        for k in range(300))
    assert certified >= 0.97 * 300


def test_certified_values_survive_outside_insertions():
    rng = np.random.default_rng(7)
    for k in range(30):
        res = whole_plane_xi((0.0, 0.0), PARAMS.with_stream(k), m_max=64)
        assert res.certified
        extra = []
        base_id = max(p.id for p in res.config.points) + 1
        for j in range(50):
            r = res.R + 1e-9 + rng.uniform(0.0, 10.0)
            th = rng.uniform(0, 2 * math.pi)
            extra.append(MarkedPoint(r * math.cos(th), r * math.sin(th),
                                     rng.uniform(0, math.pi), base_id + j))
        tess = build(res.config.with_extra(extra))
        assert tess.length(0, 1) == res.xi_plus
        assert tess.length(0, -1) == res.xi_minus


def test_whole_plane_center_elsewhere():
    res = whole_plane_xi((10.0, 7.0), PARAMS, m_max=64)
    assert res.certified
    assert res.center.x == 10.0 and res.center.y == 7.0


def test_certify_point_hand_config():
    pts = (MarkedPoint(5.0, 5.0, 0.0, 0),
           MarkedPoint(6.0, 4.5, math.pi / 2, 1),
           MarkedPoint(4.0, 4.8, math.pi / 2, 2))
    window = Rect(0.0, 0.0, 10.0, 10.0)
    tess = build(MarkedConfig(pts, window))
    assert tess.length(0, 1) == pytest.approx(1.0)
    assert tess.length(0, -1) == pytest.approx(1.0)
    assert certify_point(tess, window, 0)
    assert not certify_point(tess, window, 1)  # unbounded branches
    assert certify_point(tess, Ball(5.0, 5.0, 2.5), 0)
    assert not certify_point(tess, Ball(5.0, 5.0, 1.9), 0)


def test_pair_certification():
    res = whole_plane_xi_pair((0.0, 0.0), (3.0, 0.0), PARAMS, m_max=64)
    assert res.certified
    assert all(math.isfinite(v) for v in res.xi_x + res.xi_y)
    # invariance under m_max enlargement, same realization
    res2 = whole_plane_xi_pair((0.0, 0.0), (3.0, 0.0), PARAMS, m_max=128)
    assert res.xi_x == res2.xi_x and res.xi_y == res2.xi_y


def test_triple_solo_values_match_single_insertion_far_apart():
    # far apart, the joint and solo values coincide realization-wise
    res = whole_plane_xi_triple((0.0, 0.0), (20.0, 0.0), PARAMS, m_max=128)
    assert res.certified
    assert res.xi_x == res.xi_x_solo
    assert res.xi_y == res.xi_y_solo


def test_stab_tail_shape_and_fit():
    grid = [0.5 * i for i in range(17)]
    res = stab_tail(1.0, grid, 300, PARAMS, m_max=64)
    assert res.survival[0] == 1.0
    assert all(a >= b for a, b in zip(res.survival, res.survival[1:]))
    assert res.slope < 0
    assert res.C_hat > 0
    # the reported envelope dominates the measured survival everywhere
    for r, s in zip(res.r_grid, res.survival):
        assert s <= res.dominating_bound(r) + 1e-12


def test_stab_tail_input_validation():
    with pytest.raises(ValueError):
        stab_tail(1.0, [0, 1, 2], 50, PARAMS)


def test_m_max_validation():
    with pytest.raises(ValueError):
        whole_plane_xi((0.0, 0.0), PARAMS, m_max=0)
