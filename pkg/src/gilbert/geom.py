"""Planar primitives: marked seed points, growth rays, ray intersections.

All tolerance decisions in the package funnel through ``EPS_GEOM`` /
``eps_at`` so that every predicate uses the same policy: 1e-9 relative,
scaled by the local magnitudes entering the comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative tolerance for parallelism tests, point coincidence and
# arrival-time comparisons.  Double precision keeps ~6 digits of headroom
# at desk-scale coordinates (up to ~1e4), so this is conservative.
EPS_GEOM = 1e-9


class DegenerateConfiguration(ValueError):
    """Measure-zero input geometry on which crack growth is not defined.

    Raised instead of silently tie-breaking: under continuous seed
    positions and marks these inputs occur with probability zero, so
    hitting one almost always means a harness bug.
    """


def eps_at(*magnitudes: float) -> float:
    """Tolerance scaled by the largest magnitude entering a comparison."""
    scale = 1.0
    for m in magnitudes:
        a = abs(m)
        if a > scale:
            scale = a
    return EPS_GEOM * scale


def cross2(ax: float, ay: float, bx: float, by: float) -> float:
    """z-component of the 2-d cross product a x b."""
    return ax * by - ay * bx


def mark_to_direction(mark: float) -> np.ndarray:
    """Unit growth direction [cos(mark), sin(mark)] for a mark in [0, pi)."""
    if not 0.0 <= mark < math.pi:
        raise ValueError(f"mark must lie in [0, pi), got {mark}")
    return np.array([math.cos(mark), math.sin(mark)])


@dataclass(frozen=True)
class MarkedPoint:
    """A seed location plus its undirected growth angle in [0, pi)."""

    x: float
    y: float
    alpha: float
    id: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < math.pi:
            raise ValueError(f"mark must lie in [0, pi), got {self.alpha}")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.alpha), math.sin(self.alpha)])


@dataclass(frozen=True)
class Ray:
    """Half-line from ``origin`` along the unit vector ``direction``.

    ``owner`` identifies the emitting branch as (seed id, sign); sign +1
    is the branch along +direction of the seed's mark, -1 the opposite.
    """

    origin: tuple[float, float]
    direction: tuple[float, float]
    owner: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        n = math.hypot(*self.direction)
        if abs(n - 1.0) > eps_at(1.0):
            raise ValueError(f"direction must be unit length, |d| = {n}")

    def point_at(self, s: float) -> tuple[float, float]:
        return (self.origin[0] + s * self.direction[0],
                self.origin[1] + s * self.direction[1])


def ray_intersection(a: Ray, b: Ray) -> tuple[tuple[float, float], float, float] | None:
    """Forward intersection of two rays.

    Returns ``(p, s_a, s_b)`` where ``p`` is reached after travelling
    ``s_a >= 0`` along ``a`` and ``s_b >= 0`` along ``b`` (unit-speed
    arrival times), or ``None`` when the supporting lines are parallel,
    or when the crossing lies behind either origin.  The returned point
    is the average of the two parametric evaluations, which makes it
    exactly symmetric under argument swap.

    Raises:
        DegenerateConfiguration: collinear rays with overlapping tracks.
    """
    dx = b.origin[0] - a.origin[0]
    dy = b.origin[1] - a.origin[1]
    dist = math.hypot(dx, dy)
    denom = cross2(a.direction[0], a.direction[1], b.direction[0], b.direction[1])
    if abs(denom) <= EPS_GEOM:
        # Parallel supporting lines; coincident ones need an overlap test.
        if abs(cross2(dx, dy, a.direction[0], a.direction[1])) <= eps_at(1.0, dist):
            along = dx * a.direction[0] + dy * a.direction[1]
            same_way = (a.direction[0] * b.direction[0]
                        + a.direction[1] * b.direction[1]) > 0.0
            if same_way or along >= -eps_at(1.0, dist):
                raise DegenerateConfiguration(
                    "collinear rays with overlapping tracks")
        return None
    s_a = cross2(dx, dy, b.direction[0], b.direction[1]) / denom
    s_b = cross2(dx, dy, a.direction[0], a.direction[1]) / denom
    if s_a < 0.0 or s_b < 0.0:
        return None
    pax = a.origin[0] + s_a * a.direction[0]
    pay = a.origin[1] + s_a * a.direction[1]
    pbx = b.origin[0] + s_b * b.direction[0]
    pby = b.origin[1] + s_b * b.direction[1]
    return ((pax + pbx) / 2.0, (pay + pby) / 2.0), s_a, s_b


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0, x0+width] x [y0, y0+height]."""

    x0: float
    y0: float
    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width < 0 or self.height < 0:
            raise ValueError("rectangle sides must be nonnegative")

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def x1(self) -> float:
        return self.x0 + self.width

    @property
    def y1(self) -> float:
        return self.y0 + self.height

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def contains_many(self, xy: np.ndarray) -> np.ndarray:
        return ((xy[:, 0] >= self.x0) & (xy[:, 0] <= self.x1)
                & (xy[:, 1] >= self.y0) & (xy[:, 1] <= self.y1))

    def contains_ball(self, center: tuple[float, float], radius: float) -> bool:
        if not math.isfinite(radius):
            return False
        cx, cy = center
        return (cx - radius >= self.x0 and cx + radius <= self.x1
                and cy - radius >= self.y0 and cy + radius <= self.y1)

    def bounding_rect(self) -> "Rect":
        return self


@dataclass(frozen=True)
class Ball:
    """Closed disc of given center and radius."""

    cx: float
    cy: float
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def area(self) -> float:
        return math.pi * self.radius * self.radius

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.cx, y - self.cy) <= self.radius

    def contains_many(self, xy: np.ndarray) -> np.ndarray:
        d2 = (xy[:, 0] - self.cx) ** 2 + (xy[:, 1] - self.cy) ** 2
        return d2 <= self.radius * self.radius

    def contains_ball(self, center: tuple[float, float], radius: float) -> bool:
        if not math.isfinite(radius):
            return False
        return math.hypot(center[0] - self.cx, center[1] - self.cy) + radius <= self.radius

    def bounding_rect(self) -> Rect:
        return Rect(self.cx - self.radius, self.cy - self.radius,
                    2 * self.radius, 2 * self.radius)


Window = Rect | Ball


def clip_ray_to_rect(origin: tuple[float, float], direction: tuple[float, float],
                     rect: Rect) -> tuple[float, float] | None:
    """Parameter interval [s_lo, s_hi] of the ray inside ``rect``.

    Liang-Barsky slab clipping restricted to s >= 0; ``None`` when the
    forward ray misses the rectangle entirely.
    """
    s_lo, s_hi = 0.0, math.inf
    ox, oy = origin
    dx, dy = direction
    for o, d, lo, hi in ((ox, dx, rect.x0, rect.x1), (oy, dy, rect.y0, rect.y1)):
        if abs(d) <= EPS_GEOM:
            if o < lo or o > hi:
                return None
            continue
        t0 = (lo - o) / d
        t1 = (hi - o) / d
        if t0 > t1:
            t0, t1 = t1, t0
        s_lo = max(s_lo, t0)
        s_hi = min(s_hi, t1)
    if s_hi < s_lo:
        return None
    return s_lo, s_hi
