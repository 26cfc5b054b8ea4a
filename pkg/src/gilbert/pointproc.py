"""Homogeneous Poisson seed sampling with uniform angular marks.

Randomness is counter-based: every draw comes from a Generator keyed by
``(master_seed, stream_index, *path)`` through ``SeedSequence`` spawn
keys.  Identical parameters therefore reproduce bit-identical
configurations no matter how replicates are scheduled, and disjoint
stream indices or paths give independent streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .engine import MarkedConfig
from .geom import Ball, DegenerateConfiguration, MarkedPoint, Rect, Window, eps_at


@dataclass(frozen=True)
class ProcessParams:
    """Intensity plus the seeding coordinates of one sampling stream."""

    intensity: float
    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if not self.intensity > 0:
            raise ValueError(f"intensity must be positive, got {self.intensity}")
        if self.stream_index < 0:
            raise ValueError("stream index must be nonnegative")

    def rng(self, *path: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed,
                                     spawn_key=(self.stream_index, *path))
        return np.random.default_rng(seq)

    def with_stream(self, stream_index: int) -> "ProcessParams":
        return replace(self, stream_index=stream_index)

    def with_intensity(self, intensity: float) -> "ProcessParams":
        return replace(self, intensity=intensity)


def _mk_points(xs, ys, marks, id_start: int) -> list[MarkedPoint]:
    return [MarkedPoint(float(x), float(y), float(a), id_start + k)
            for k, (x, y, a) in enumerate(zip(xs, ys, marks))]


def sample_poisson(window: Window, params: ProcessParams, *,
                   path: tuple[int, ...] = (), id_start: int = 0) -> MarkedConfig:
    """One realization on ``window``: Poisson count, uniform positions,
    marks i.i.d. uniform on [0, pi)."""
    rng = params.rng(*path)
    n = int(rng.poisson(params.intensity * window.area))
    if isinstance(window, Rect):
        xs = rng.uniform(window.x0, window.x1, n)
        ys = rng.uniform(window.y0, window.y1, n)
    elif isinstance(window, Ball):
        xs, ys = _rejection_ball(rng, window.cx, window.cy,
                                 0.0, window.radius, n)
    else:
        raise TypeError(f"unsupported window type {type(window)!r}")
    marks = rng.uniform(0.0, math.pi, n)
    win = window if isinstance(window, Rect) else window.bounding_rect()
    return MarkedConfig(_mk_points(xs, ys, marks, id_start), win)


def sample_annulus(center: tuple[float, float], r_in: float, r_out: float,
                   params: ProcessParams, *, path: tuple[int, ...] = (),
                   id_start: int = 0) -> list[MarkedPoint]:
    """Points of one realization falling in r_in < |x - center| <= r_out.

    Sampling annulus by annulus with per-annulus paths keeps growing
    balls consistent: the union over annuli is one fixed realization.
    """
    if not 0 <= r_in < r_out:
        raise ValueError("need 0 <= r_in < r_out")
    rng = params.rng(*path)
    area = math.pi * (r_out * r_out - r_in * r_in)
    n = int(rng.poisson(params.intensity * area))
    xs, ys = _rejection_ball(rng, center[0], center[1], r_in, r_out, n)
    marks = rng.uniform(0.0, math.pi, n)
    return _mk_points(xs, ys, marks, id_start)


def _rejection_ball(rng: np.random.Generator, cx: float, cy: float,
                    r_in: float, r_out: float, n: int):
    """Uniform points in an annulus by rejection from the bounding square."""
    xs = np.empty(n)
    ys = np.empty(n)
    got = 0
    while got < n:
        batch = max(2 * (n - got), 16)
        x = rng.uniform(cx - r_out, cx + r_out, batch)
        y = rng.uniform(cy - r_out, cy + r_out, batch)
        d2 = (x - cx) ** 2 + (y - cy) ** 2
        ok = (d2 <= r_out * r_out) & (d2 > r_in * r_in)
        take = min(int(ok.sum()), n - got)
        xs[got:got + take] = x[ok][:take]
        ys[got:got + take] = y[ok][:take]
        got += take
    return xs, ys


def add_point(config: MarkedConfig, position: tuple[float, float],
              params: ProcessParams, *, path: tuple[int, ...] = ()) -> MarkedConfig:
    """Insert ``position`` with a fresh uniform mark into ``config``."""
    px, py = float(position[0]), float(position[1])
    for p in config.points:
        if math.hypot(p.x - px, p.y - py) <= eps_at(1.0, px, py, p.x, p.y):
            raise DegenerateConfiguration(
                f"point ({px}, {py}) duplicates an existing seed")
    mark = float(params.rng(*path).uniform(0.0, math.pi))
    next_id = max((p.id for p in config.points), default=-1) + 1
    return config.with_extra([MarkedPoint(px, py, mark, next_id)])
