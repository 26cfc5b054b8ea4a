"""Exact event-driven construction of planar crack-growth tessellations.

Every seed emits two branches growing at unit rate along +/- its mark
direction; a branch halts permanently the moment it meets an edge that is
already present.  For a finite marked configuration the whole history is
determined by the pairwise crossings of the supporting lines, which is
what the builder exploits:

1. For each seed pair whose lines cross, exactly one branch of each seed
   can reach the crossing (at arrival lengths ``s_i``, ``s_j``).  The
   later arrival is the only branch that can be blocked there, so each
   pair contributes at most one candidate event -- the classical
   ``m(m-1)/2`` bound on collisions.
2. Candidates are processed in nondecreasing blocked-arrival order
   (ties resolved by blocker arrival, then branch ids).  At pop time a
   candidate commits unless the blocked branch already stopped earlier or
   the blocker was itself stopped before reaching the crossing.  Because
   commits happen in time order, both checks are final when made.
3. For large inputs, candidates are generated lazily in geometric time
   rounds: any event with blocked arrival <= T involves seeds at distance
   <= 2T (triangle inequality), so scanning alive seeds' neighborhoods of
   radius 2T per round is complete.  A final exhaustive pass over the
   still-alive seeds finishes arbitrarily distant crossings.

Exactly simultaneous arrivals are measure zero under continuous marks;
they raise ``DegenerateConfiguration`` unless ``tie_break=True`` asks for
the deterministic lexicographic override.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .geom import (EPS_GEOM, DegenerateConfiguration, MarkedPoint, Rect,
                   clip_ray_to_rect, eps_at)

# Configurations up to this many seeds are enumerated in one full pass;
# larger ones use the staged neighborhood search.
_FULL_ENUM_MAX = 600

# First time horizon of the staged search.
_ROUND_T0 = 1.0

# Seed chunk size for neighborhood queries (bounds transient memory).
_CHUNK = 256

_INF = math.inf


class BranchSegment(NamedTuple):
    seed: int
    sign: int
    x0: float
    y0: float
    x1: float
    y1: float


@dataclass(frozen=True)
class CollisionEvent:
    """A branch (``blocked``) stopping on an already-present edge."""

    time: float
    blocked: tuple[int, int]
    blocker: tuple[int, int]
    point: tuple[float, float]


class MarkedConfig:
    """A finite marked seed configuration, optionally with a window."""

    def __init__(self, points: Iterable[MarkedPoint], window: Rect | None = None):
        self.points: tuple[MarkedPoint, ...] = tuple(points)
        self.window = window
        ids = [p.id for p in self.points]
        if len(set(ids)) != len(ids):
            raise ValueError("seed ids must be unique within a configuration")
        seen: set[tuple[float, float]] = set()
        for p in self.points:
            key = (p.x, p.y)
            if key in seen:
                raise DegenerateConfiguration(
                    f"duplicate seed position ({p.x}, {p.y})")
            seen.add(key)
        self._index = {p.id: k for k, p in enumerate(self.points)}

    def __len__(self) -> int:
        return len(self.points)

    def index_of(self, seed_id: int) -> int:
        try:
            return self._index[seed_id]
        except KeyError:
            raise KeyError(f"unknown seed id {seed_id}") from None

    @cached_property
    def positions(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 2))
        return np.array([[p.x, p.y] for p in self.points])

    @cached_property
    def marks(self) -> np.ndarray:
        return np.array([p.alpha for p in self.points])

    @cached_property
    def directions(self) -> np.ndarray:
        return np.column_stack((np.cos(self.marks), np.sin(self.marks)))

    @classmethod
    def from_arrays(cls, xs, ys, alphas, window: Rect | None = None,
                    id_start: int = 0) -> "MarkedConfig":
        pts = tuple(MarkedPoint(float(x), float(y), float(a), id_start + k)
                    for k, (x, y, a) in enumerate(zip(xs, ys, alphas)))
        return cls(pts, window)

    def with_extra(self, extra: Iterable[MarkedPoint]) -> "MarkedConfig":
        return MarkedConfig(self.points + tuple(extra), self.window)


class Tessellation:
    """Finished growth history: final branch lengths plus collision log."""

    def __init__(self, config: MarkedConfig, lengths: np.ndarray,
                 events: tuple[CollisionEvent, ...]):
        self.config = config
        self._lengths = lengths
        self.events = events

    def _branch_index(self, seed_id: int, sign: int) -> int:
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        return 2 * self.config.index_of(seed_id) + (0 if sign > 0 else 1)

    def length(self, seed_id: int, sign: int) -> float:
        return float(self._lengths[self._branch_index(seed_id, sign)])

    @cached_property
    def branch_lengths(self) -> dict[tuple[int, int], float]:
        out: dict[tuple[int, int], float] = {}
        for k, p in enumerate(self.config.points):
            out[(p.id, 1)] = float(self._lengths[2 * k])
            out[(p.id, -1)] = float(self._lengths[2 * k + 1])
        return out

    @cached_property
    def blocker_of(self) -> dict[tuple[int, int], tuple[int, int] | None]:
        out: dict[tuple[int, int], tuple[int, int] | None] = {
            key: None for key in self.branch_lengths}
        for ev in self.events:
            out[ev.blocked] = ev.blocker
        return out

    def lengths_array(self) -> np.ndarray:
        """Final lengths as a (m, 2) array in config order, +/- columns."""
        return self._lengths.reshape(-1, 2).copy()


def _branch_key(config: MarkedConfig, b: int) -> tuple[int, int]:
    return (config.points[b // 2].id, 1 if b % 2 == 0 else -1)


_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _cached_triu(m: int) -> tuple[np.ndarray, np.ndarray]:
    got = _TRIU_CACHE.get(m)
    if got is None:
        if len(_TRIU_CACHE) > 512:
            _TRIU_CACHE.clear()
        got = np.triu_indices(m, k=1)
        _TRIU_CACHE[m] = got
    return got


def _pair_candidates(pos: np.ndarray, dirs: np.ndarray,
                     ii: np.ndarray, jj: np.ndarray,
                     lo: float, hi: float,
                     blen: np.ndarray | None):
    """Candidate events for the seed index pairs (ii, jj).

    Returns arrays (s_blocked, s_blocker, blocked, blocker, px, py)
    filtered to blocked arrivals in (lo, hi] and, when ``blen`` is given,
    to candidates not already ruled out by committed lengths.  Raises on
    collinear seed pairs and on crossings that hit a seed exactly.
    """
    if len(ii) == 0:
        e = np.empty(0)
        return e, e, e.astype(np.int64), e.astype(np.int64), e, e
    dx = pos[jj, 0] - pos[ii, 0]
    dy = pos[jj, 1] - pos[ii, 1]
    dix, diy = dirs[ii, 0], dirs[ii, 1]
    djx, djy = dirs[jj, 0], dirs[jj, 1]
    denom = dix * djy - diy * djx
    dist = np.hypot(dx, dy)
    tolp = EPS_GEOM * np.maximum(1.0, dist)
    parallel = np.abs(denom) <= EPS_GEOM
    if parallel.any():
        on_line = np.abs(dx * diy - dy * dix) <= tolp
        if (parallel & on_line).any():
            raise DegenerateConfiguration(
                "two seeds share a supporting line with overlapping branches")
    safe = np.where(parallel, 1.0, denom)
    t_i = (dx * djy - dy * djx) / safe
    t_j = (dx * diy - dy * dix) / safe
    keep = ~parallel
    at_seed = keep & ((np.abs(t_i) <= tolp) | (np.abs(t_j) <= tolp))
    if at_seed.any():
        raise DegenerateConfiguration(
            "a seed lies exactly on another seed's growth line")
    s_i = np.abs(t_i)
    s_j = np.abs(t_j)
    bi = 2 * ii + (t_i < 0.0)
    bj = 2 * jj + (t_j < 0.0)
    blocked_is_i = s_i > s_j
    exact_tie = s_i == s_j
    if exact_tie.any():
        # keep one orientation deterministically: smaller branch id blocks
        blocked_is_i = np.where(exact_tie, bi > bj, blocked_is_i)
    s_bd = np.where(blocked_is_i, s_i, s_j)
    s_br = np.where(blocked_is_i, s_j, s_i)
    bd = np.where(blocked_is_i, bi, bj)
    br = np.where(blocked_is_i, bj, bi)
    keep &= (s_bd > lo) & (s_bd <= hi)
    if blen is not None:
        keep &= blen[bd] >= s_bd - EPS_GEOM * np.maximum(1.0, s_bd)
        keep &= blen[br] >= s_br - EPS_GEOM * np.maximum(1.0, s_br)
    if not keep.any():
        e = np.empty(0)
        return e, e, e.astype(np.int64), e.astype(np.int64), e, e
    # averaged two-point evaluation: bit-identical under pair swap
    px = ((pos[ii, 0] + t_i * dix) + (pos[jj, 0] + t_j * djx)) * 0.5
    py = ((pos[ii, 1] + t_i * diy) + (pos[jj, 1] + t_j * djy)) * 0.5
    return (s_bd[keep], s_br[keep], bd[keep], br[keep], px[keep], py[keep])


def _process_candidates(cand, blen: list[float], config: MarkedConfig,
                        events: list[CollisionEvent], tie_break: bool) -> None:
    """Commit/discard candidates in queue order, mutating ``blen``.

    Processed in blocks: after each block the remaining candidates are
    re-filtered in bulk against the lengths committed so far, which
    discards the vast majority without touching them one by one.
    """
    s_bd, s_br, bd, br, px, py = cand
    if len(s_bd) == 0:
        return
    order = np.lexsort((br, bd, s_br, s_bd))
    arrs = tuple(a[order] for a in (s_bd, s_br, bd, br, px, py))
    if len(arrs[0]) <= 768:
        _process_block(*arrs, blen, config, events, tie_break)
        return
    block = max(256, len(arrs[0]) // 8)
    while len(arrs[0]):
        head = tuple(a[:block] for a in arrs)
        _process_block(*head, blen, config, events, tie_break)
        arrs = tuple(a[block:] for a in arrs)
        if len(arrs[0]):
            blen_arr = np.asarray(blen)
            sb_t, sr_t, bd_t, br_t = arrs[0], arrs[1], arrs[2], arrs[3]
            keep = blen_arr[bd_t] >= sb_t - EPS_GEOM * np.maximum(1.0, sb_t)
            keep &= blen_arr[br_t] >= sr_t - EPS_GEOM * np.maximum(1.0, sr_t)
            if not keep.all():
                arrs = tuple(a[keep] for a in arrs)


def _process_block(s_bd, s_br, bd, br, px, py, blen: list[float],
                   config: MarkedConfig, events: list[CollisionEvent],
                   tie_break: bool) -> None:
    ls_bd = s_bd.tolist()
    ls_br = s_br.tolist()
    lbd = bd.tolist()
    lbr = br.tolist()
    lpx = px.tolist()
    lpy = py.tolist()
    for k in range(len(ls_bd)):
        sb = ls_bd[k]
        b = lbd[k]
        tol_b = EPS_GEOM * (sb if sb > 1.0 else 1.0)
        cur = blen[b]
        if cur != _INF:
            # commits are time ordered, so cur <= sb: either stale or a tie
            if sb - cur <= tol_b:
                if tie_break:
                    continue
                raise DegenerateConfiguration(
                    f"branch {_branch_key(config, b)} reached by two blockers "
                    f"at the same arc length {sb!r}")
            continue
        sr = ls_br[k]
        r = lbr[k]
        tol_r = EPS_GEOM * (sr if sr > 1.0 else 1.0)
        other = blen[r]
        if other != _INF and other < sr - tol_r:
            continue  # blocker was stopped before the crossing
        if sb - sr <= tol_b:
            if not tie_break:
                raise DegenerateConfiguration(
                    f"branches {_branch_key(config, b)} and "
                    f"{_branch_key(config, r)} reach their crossing "
                    f"simultaneously at arc length {sb!r}")
        elif other != _INF and other - sr <= tol_r:
            if not tie_break:
                raise DegenerateConfiguration(
                    f"branch {_branch_key(config, b)} meets the frozen tip of "
                    f"{_branch_key(config, r)} exactly")
        blen[b] = sb
        events.append(CollisionEvent(
            time=sb,
            blocked=_branch_key(config, b),
            blocker=_branch_key(config, r),
            point=(lpx[k], lpy[k]),
        ))


def _chunked_alive_pairs(tree: cKDTree, pos: np.ndarray, alive: np.ndarray,
                         radius: float):
    """Yield (ii, jj) seed index pair chunks for alive seeds vs neighbors.

    Pairs with both sides alive appear once (from the smaller index).
    """
    alive_idx = np.flatnonzero(alive)
    for start in range(0, len(alive_idx), _CHUNK):
        chunk = alive_idx[start:start + _CHUNK]
        hoods = tree.query_ball_point(pos[chunk], r=radius)
        counts = np.fromiter((len(h) for h in hoods), dtype=np.int64,
                             count=len(hoods))
        if counts.sum() == 0:
            continue
        ii = np.repeat(chunk, counts)
        jj = np.concatenate([np.asarray(h, dtype=np.int64) for h in hoods])
        keep = jj != ii
        keep &= ~alive[jj] | (jj > ii)
        if keep.any():
            yield ii[keep], jj[keep]


def build(config: MarkedConfig, *, tie_break: bool = False) -> Tessellation:
    """Grow the tessellation of ``config`` and return its full history.

    Pure function of its input; the result is immutable.  With
    ``tie_break=True``, measure-zero simultaneous arrivals are resolved
    lexicographically (smaller (seed id, sign) wins) instead of raising.
    """
    m = len(config)
    blen: list[float] = [_INF] * (2 * m)
    events: list[CollisionEvent] = []
    if m >= 2:
        pos = config.positions
        dirs = config.directions
        if m <= _FULL_ENUM_MAX:
            ii, jj = _cached_triu(m)
            cand = _pair_candidates(pos, dirs, ii, jj, 0.0, _INF, None)
            _process_candidates(cand, blen, config, events, tie_break)
        else:
            _staged_build(pos, dirs, blen, config, events, tie_break)
    lengths = np.array(blen) if blen else np.empty(0)
    events.sort(key=lambda ev: (ev.time, ev.blocked, ev.blocker))
    return Tessellation(config, lengths, tuple(events))


def _staged_build(pos: np.ndarray, dirs: np.ndarray, blen: list[float],
                  config: MarkedConfig, events: list[CollisionEvent],
                  tie_break: bool) -> None:
    m = len(config)
    tree = cKDTree(pos)
    span = pos.max(axis=0) - pos.min(axis=0)
    diam = math.hypot(span[0], span[1])
    t_prev = 0.0
    t_hi = _ROUND_T0
    while True:
        blen_arr = np.array(blen)
        alive = (blen_arr[0::2] == _INF) | (blen_arr[1::2] == _INF)
        if not alive.any():
            return
        last = 2.0 * t_hi >= diam
        radius = diam + 1.0 if last else 2.0 * t_hi
        hi = _INF if last else t_hi
        parts = []
        for ii, jj in _chunked_alive_pairs(tree, pos, alive, radius):
            parts.append(_pair_candidates(pos, dirs, ii, jj, t_prev, hi,
                                          blen_arr))
        if parts:
            cand = tuple(np.concatenate([p[k] for p in parts])
                         for k in range(6))
            _process_candidates(cand, blen, config, events, tie_break)
        if last:
            return
        t_prev, t_hi = t_hi, 2.0 * t_hi


def branch_length(tess: Tessellation, seed_id: int, sign: int) -> float:
    """Final length of one branch; ``math.inf`` when never blocked."""
    return tess.length(seed_id, sign)


def branch_history(tess: Tessellation, seed_id: int, sign: int,
                   t: float) -> tuple[float, float]:
    """Growth tip of a branch at time ``t`` (immobile after blocking)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    k = tess.config.index_of(seed_id)
    p = tess.config.points[k]
    reach = min(t, tess.length(seed_id, sign))
    d = p.direction
    return (float(p.x + sign * reach * d[0]), float(p.y + sign * reach * d[1]))


def partial_tessellation(tess: Tessellation, t: float) -> list[BranchSegment]:
    """All branch segments as grown by time ``t``, in (seed, +/-) order.

    ``t = math.inf`` asks for the finished picture: branches that never
    stop are clipped to the configuration window (required in that case),
    which is the rendering convention for infinite edges.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    segs: list[BranchSegment] = []
    lengths = tess.lengths_array()
    for k, p in enumerate(tess.config.points):
        d = p.direction
        for col, sign in ((0, 1), (1, -1)):
            reach = min(t, lengths[k, col])
            if math.isinf(reach):
                window = tess.config.window
                if window is None:
                    raise ValueError(
                        "rendering an unbounded branch requires a window")
                clip = clip_ray_to_rect((p.x, p.y),
                                        (sign * d[0], sign * d[1]), window)
                reach = clip[1] if clip is not None else 0.0
            segs.append(BranchSegment(
                p.id, sign, p.x, p.y,
                float(p.x + sign * reach * d[0]),
                float(p.y + sign * reach * d[1])))
    return segs
