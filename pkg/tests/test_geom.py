import math

import numpy as np
import pytest

from gilbert.geom import (Ball, DegenerateConfiguration, EPS_GEOM, Ray, Rect,
                          clip_ray_to_rect, mark_to_direction,
                          ray_intersection)


def test_mark_to_direction_axis_aligned():
    assert np.allclose(mark_to_direction(0.0), [1.0, 0.0])
    assert np.allclose(mark_to_direction(math.pi / 2), [0.0, 1.0], atol=1e-15)
    assert np.allclose(mark_to_direction(math.pi / 4),
                       [math.sqrt(2) / 2, math.sqrt(2) / 2])


@pytest.mark.parametrize("bad", [-0.1, math.pi, 4.0, math.pi + 1e-12])
def test_mark_to_direction_domain(bad):
    with pytest.raises(ValueError):
        mark_to_direction(bad)


def test_mark_to_direction_unit_norm(rng):
    for mark in rng.uniform(0, math.pi, 200):
        d = mark_to_direction(mark)
        assert abs(np.hypot(*d) - 1.0) <= EPS_GEOM


def test_mark_injective(rng):
    marks = rng.uniform(0, math.pi, 300)
    dirs = np.array([mark_to_direction(m) for m in marks])
    for i in range(0, 300, 7):
        for j in range(i + 1, 300, 11):
            if abs(marks[i] - marks[j]) > 1e-9:
                assert not np.allclose(dirs[i], dirs[j], atol=1e-12)


def test_ray_intersection_orthogonal_exact():
    a = Ray((0.0, 0.0), (1.0, 0.0))
    b = Ray((1.0, 2.0), (0.0, -1.0))
    hit = ray_intersection(a, b)
    assert hit is not None
    p, s_a, s_b = hit
    assert s_a == 1.0 and s_b == 2.0
    assert p == (1.0, 0.0)


def test_ray_intersection_parallel_distinct():
    a = Ray((0.0, 0.0), (1.0, 0.0))
    b = Ray((0.0, 1.0), (1.0, 0.0))
    assert ray_intersection(a, b) is None


def test_ray_intersection_behind_origin():
    a = Ray((0.0, 0.0), (1.0, 0.0))
    b = Ray((-1.0, 2.0), (0.0, -1.0))
    assert ray_intersection(a, b) is None


def test_ray_intersection_collinear_overlap_raises():
    a = Ray((0.0, 0.0), (1.0, 0.0))
    b = Ray((1.0, 0.0), (1.0, 0.0))
    with pytest.raises(DegenerateConfiguration):
        ray_intersection(a, b)
    c = Ray((3.0, 0.0), (-1.0, 0.0))
    with pytest.raises(DegenerateConfiguration):
        ray_intersection(a, c)


def test_ray_intersection_collinear_disjoint_is_empty():
    # pointing away from each other along one line: tracks never meet
    a = Ray((0.0, 0.0), (-1.0, 0.0))
    b = Ray((1.0, 0.0), (1.0, 0.0))
    assert ray_intersection(a, b) is None


def _random_ray(rng):
    ang = rng.uniform(0, 2 * math.pi)
    return Ray((rng.uniform(-5, 5), rng.uniform(-5, 5)),
               (math.cos(ang), math.sin(ang)))


def test_ray_intersection_swap_symmetry(rng):
    hits = 0
    while hits < 200:
        a, b = _random_ray(rng), _random_ray(rng)
        try:
            fwd = ray_intersection(a, b)
            rev = ray_intersection(b, a)
        except DegenerateConfiguration:
            continue
        assert (fwd is None) == (rev is None)
        if fwd is None:
            continue
        p, s_a, s_b = fwd
        q, r_b, r_a = rev
        assert s_a == r_a and s_b == r_b and p == q
        hits += 1


def test_ray_intersection_reconstruction_residual(rng):
    hits = 0
    while hits < 200:
        a, b = _random_ray(rng), _random_ray(rng)
        try:
            hit = ray_intersection(a, b)
        except DegenerateConfiguration:
            continue
        if hit is None:
            continue
        _, s_a, s_b = hit
        pa = np.array(a.point_at(s_a))
        pb = np.array(b.point_at(s_b))
        assert np.hypot(*(pa - pb)) <= EPS_GEOM * (1 + s_a + s_b)
        hits += 1


def test_ray_unit_direction_enforced():
    with pytest.raises(ValueError):
        Ray((0.0, 0.0), (1.0, 1.0))


def test_window_geometry():
    r = Rect(0.0, 0.0, 10.0, 6.0)
    assert r.area == 60.0
    assert r.contains(5, 3) and not r.contains(11, 3)
    assert r.contains_ball((5, 3), 2.9) and not r.contains_ball((5, 3), 3.1)
    assert not r.contains_ball((5, 3), math.inf)
    b = Ball(1.0, 1.0, 2.0)
    assert math.isclose(b.area, math.pi * 4)
    assert b.contains(2, 1) and not b.contains(4, 1)
    assert b.contains_ball((1, 1.5), 1.5) and not b.contains_ball((1, 1.5), 1.6)
    assert b.bounding_rect() == Rect(-1.0, -1.0, 4.0, 4.0)


def test_rect_rejects_negative_sides():
    with pytest.raises(ValueError):
        Rect(0, 0, -1.0, 2.0)
    assert Rect(0, 0, 0.0, 0.0).area == 0.0


def test_clip_ray_to_rect():
    r = Rect(0.0, 0.0, 4.0, 4.0)
    lo, hi = clip_ray_to_rect((2.0, 2.0), (1.0, 0.0), r)
    assert lo == 0.0 and hi == 2.0
    assert clip_ray_to_rect((5.0, 5.0), (1.0, 0.0), r) is None
    lo, hi = clip_ray_to_rect((-1.0, 2.0), (1.0, 0.0), r)
    assert lo == 1.0 and hi == 5.0
