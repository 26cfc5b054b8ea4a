"""Reference builders used only to cross-check the event-driven engine.

Two deliberately different routes to the same final branch lengths:

* ``build_fixedpoint`` -- algebraic: sweep a self-consistency map over
  candidate blocking lengths until stationary (exact arithmetic, same
  crossing parameters as the engine but none of its event scheduling).
* ``build_timestep`` -- kinetic: advance every growth tip by ``dt`` per
  step and freeze a branch when its swept sub-segment geometrically hits
  an edge that was already present, giving lengths with O(dt) error.

Both are O(m^3)-ish and gated to small inputs; they exist so that a bug
in the engine's commit/discard logic cannot hide behind itself.
"""

from __future__ import annotations

import math

import numpy as np

from .engine import MarkedConfig, _pair_candidates
from .geom import DegenerateConfiguration

MAX_ORACLE_SEEDS = 200

_INF = math.inf


def _branch_keys(config: MarkedConfig) -> list[tuple[int, int]]:
    keys = []
    for p in config.points:
        keys.append((p.id, 1))
        keys.append((p.id, -1))
    return keys


def _all_candidates(config: MarkedConfig):
    m = len(config)
    ii, jj = np.triu_indices(m, k=1)
    return _pair_candidates(config.positions, config.directions,
                            ii, jj, 0.0, _INF, None)


def build_fixedpoint(config: MarkedConfig) -> dict[tuple[int, int], float]:
    """Branch lengths as the unique fixed point of the blocking relation.

    Start from "nothing ever blocks" and repeatedly set each branch's
    length to the earliest crossing whose blocker, under the current
    estimates, survives long enough to be present there.  Stationarity is
    reached within m(m-1)/2 + 1 sweeps; exceeding the bound indicates a
    degenerate input and raises.
    """
    m = len(config)
    if m > MAX_ORACLE_SEEDS:
        raise ValueError(f"fixed-point oracle is gated to {MAX_ORACLE_SEEDS} seeds")
    keys = _branch_keys(config)
    lengths = [_INF] * (2 * m)
    if m >= 2:
        s_bd, s_br, bd, br, _, _ = _all_candidates(config)
        per_branch: list[list[tuple[float, int, float]]] = [[] for _ in range(2 * m)]
        for k in range(len(s_bd)):
            per_branch[int(bd[k])].append((float(s_bd[k]), int(br[k]), float(s_br[k])))
        max_sweeps = m * (m - 1) // 2 + 1
        for _ in range(max_sweeps + 1):
            changed = False
            for b in range(2 * m):
                best = _INF
                for sb, r, sr in per_branch[b]:
                    if sb < best and lengths[r] >= sr:
                        best = sb
                if best != lengths[b]:
                    lengths[b] = best
                    changed = True
            if not changed:
                break
        else:
            raise RuntimeError(
                "blocking relation did not reach a fixed point within the "
                "sweep bound; the configuration is effectively degenerate")
    return dict(zip(keys, lengths))


def _seg_cross(p0x, p0y, p1x, p1y, q0x, q0y, q1x, q1y,
               slack_u: float, slack_v: float):
    """Crossing of segments [p0,p1] and [q0,q1] as params (u, v), or None."""
    rx, ry = p1x - p0x, p1y - p0y
    sx, sy = q1x - q0x, q1y - q0y
    den = rx * sy - ry * sx
    if den == 0.0:
        return None
    qpx, qpy = q0x - p0x, q0y - p0y
    u = (qpx * sy - qpy * sx) / den
    v = (qpx * ry - qpy * rx) / den
    if -slack_u <= u <= 1.0 + slack_u and -slack_v <= v <= 1.0 + slack_v:
        return u, v
    return None


def build_timestep(config: MarkedConfig, dt: float) -> dict[tuple[int, int], float]:
    """Discrete-time growth with per-step swept-segment collision tests.

    Stretches with no possible contact are skipped by fast-forwarding the
    step counter to just before the next pairwise crossing time, which
    changes nothing about how contacts are detected.  A branch is
    declared unbounded once every crossing at which it could ever be
    blocked has been passed or invalidated.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = len(config)
    if m > MAX_ORACLE_SEEDS:
        raise ValueError(f"time-step oracle is gated to {MAX_ORACLE_SEEDS} seeds")
    keys = _branch_keys(config)
    nb = 2 * m
    if m < 2:
        return dict(zip(keys, [_INF] * nb))

    pos = config.positions
    dirs = config.directions
    sx = np.repeat(pos[:, 0], 2).tolist()
    sy = np.repeat(pos[:, 1], 2).tolist()
    bdx = np.stack((dirs[:, 0], -dirs[:, 0]), axis=1).ravel().tolist()
    bdy = np.stack((dirs[:, 1], -dirs[:, 1]), axis=1).ravel().tolist()

    s_bd, s_br, bd, br, _, _ = _all_candidates(config)
    pending: list[list[tuple[float, int, float]]] = [[] for _ in range(nb)]
    order = np.argsort(-s_bd)  # store descending so the front sits at the end
    for k in order:
        pending[int(bd[k])].append((float(s_bd[k]), int(br[k]), float(s_br[k])))

    frozen: list[float | None] = [None] * nb
    unbounded = [False] * nb
    k_step = 0
    max_iter = 200 * (len(s_bd) + nb) + 10_000

    for _ in range(max_iter):
        t0 = k_step * dt
        # prune stale fronts; classify branches that can no longer be blocked
        s_next = _INF
        undecided = 0
        for b in range(nb):
            if frozen[b] is not None or unbounded[b]:
                continue
            lst = pending[b]
            while lst:
                sb, r, sr = lst[-1]
                fr = frozen[r]
                if sb <= t0 - dt or (fr is not None and fr < sr):
                    lst.pop()
                else:
                    break
            if not lst:
                unbounded[b] = True
                continue
            undecided += 1
            if lst[-1][0] < s_next:
                s_next = lst[-1][0]
        if undecided == 0:
            break
        if s_next > t0 + dt:
            k_target = int(math.floor((s_next - dt) / dt)) - 1
            if k_target > k_step:
                k_step = k_target
                continue
        t1 = (k_step + 1) * dt

        contacts: list[tuple[float, int, int, float]] = []
        for b in range(nb):
            if frozen[b] is not None or unbounded[b] or not pending[b]:
                continue
            if pending[b][-1][0] > t1 + dt:
                continue
            p0x = sx[b] + t0 * bdx[b]
            p0y = sy[b] + t0 * bdy[b]
            p1x = sx[b] + t1 * bdx[b]
            p1y = sy[b] + t1 * bdy[b]
            for o in range(nb):
                if o // 2 == b // 2:
                    continue
                lo = frozen[o] if frozen[o] is not None else t0
                if lo > 0.0:
                    hit = _seg_cross(p0x, p0y, p1x, p1y,
                                     sx[o], sy[o],
                                     sx[o] + lo * bdx[o], sy[o] + lo * bdy[o],
                                     1e-6, 1e-9)
                    if hit is not None:
                        contacts.append((t0 + hit[0] * dt, b, o, hit[1] * lo))
                if frozen[o] is None:
                    hit = _seg_cross(p0x, p0y, p1x, p1y,
                                     sx[o] + t0 * bdx[o], sy[o] + t0 * bdy[o],
                                     sx[o] + t1 * bdx[o], sy[o] + t1 * bdy[o],
                                     1e-6, 1e-6)
                    if hit is not None:
                        arc_b = t0 + hit[0] * dt
                        arc_o = t0 + hit[1] * dt
                        if arc_o < arc_b:
                            contacts.append((arc_b, b, o, arc_o))
                        elif arc_b == arc_o:
                            raise DegenerateConfiguration(
                                "two growth tips meet simultaneously")
        contacts.sort()
        for arc_b, b, o, arc_o in contacts:
            if frozen[b] is not None:
                continue
            fo = frozen[o]
            if fo is not None and fo < arc_o:
                continue
            frozen[b] = arc_b
        k_step += 1
    else:
        raise RuntimeError("time-step oracle failed to settle; degenerate input?")

    lengths = [frozen[b] if frozen[b] is not None else _INF for b in range(nb)]
    return dict(zip(keys, lengths))
