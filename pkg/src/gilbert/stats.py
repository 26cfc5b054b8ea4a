"""Monte Carlo estimators for per-point mass and variance, and the
experiment drivers that check the large-window limit laws at desk scale.

Replicates are indexed by explicit stream offsets from the caller's
``ProcessParams.stream_index``, and every estimator documents which
stream block it consumes, so runs are bit-reproducible and blocks never
overlap within one driver.  Aggregation is a deterministic fold in
stream order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .functionals import (Phi, TestFunction, empirical_measure, integrate,
                          phi_eval, unit_square_integral)
from .pointproc import ProcessParams
from .stabilize import (StabTailResult, whole_plane_xi, whole_plane_xi_pair,
                        whole_plane_xi_triple)

ORIGIN = (0.0, 0.0)


@dataclass(frozen=True)
class EstimatorReport:
    estimate: float
    std_error: float
    n_rep: int
    certified_fraction: float
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CltReport:
    samples: tuple[float, ...]
    ks_statistic: float
    p_value: float
    sample_mean: float
    sample_variance: float
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentRow:
    lam: float
    estimate: float
    std_error: float
    target: float
    n_rep: int
    certified_fraction: float


def _kolmogorov_sf(t: float) -> float:
    """Survival function of the Kolmogorov distribution, 2*sum (-1)^(k-1) e^(-2k^2t^2)."""
    if t < 1.1e-16:
        return 1.0
    x = -2.0 * t * t
    total = 0.0
    sign = 1.0
    for k in range(1, 101):
        term = math.exp(x * k * k)
        total += sign * term
        if term <= 1e-16 * max(total, 1e-300):
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_statistic(samples: Sequence[float]) -> tuple[float, float]:
    """One-sample KS distance to the standard normal and asymptotic p-value."""
    xs = np.sort(np.asarray(list(samples), dtype=float))
    n = len(xs)
    if n < 8:
        raise ValueError("need at least 8 samples for a KS statistic")
    cdf = ndtr(xs)
    hi = np.max(np.arange(1, n + 1) / n - cdf)
    lo = np.max(cdf - np.arange(0, n) / n)
    d = float(max(hi, lo))
    return d, _kolmogorov_sf(math.sqrt(n) * d)


def _mean_se(vals: np.ndarray) -> tuple[float, float]:
    m = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return m, se


def _phi_moment(tau: float, phi: Phi, power: int, n_rep: int,
                params: ProcessParams, m_max: int,
                center: tuple[float, float]) -> EstimatorReport:
    if n_rep < 30:
        raise ValueError("need at least 30 replicates")
    base = params.with_intensity(tau)
    vals = []
    uncertified = 0
    for r in range(n_rep):
        p = base.with_stream(params.stream_index + r)
        res = whole_plane_xi(center, p, m_max)
        if not res.certified:
            res = whole_plane_xi(center, p, 2 * m_max)
        if res.certified:
            v = phi_eval(phi, res.xi_plus, res.xi_minus)
            vals.append(v ** power if power != 1 else v)
        else:
            uncertified += 1
    if uncertified > 0.1 * n_rep:
        raise RuntimeError(
            f"{uncertified}/{n_rep} replicates failed to certify even after "
            "doubling m_max; raise m_max")
    est, se = _mean_se(np.asarray(vals))
    return EstimatorReport(
        estimate=est, std_error=se, n_rep=n_rep,
        certified_fraction=1.0 - uncertified / n_rep,
        metadata={"tau": tau, "phi": phi.label(), "power": power,
                  "center": list(center), "m_max": m_max,
                  "master_seed": params.master_seed,
                  "stream_base": params.stream_index,
                  "n_excluded": uncertified})


def estimate_E(tau: float, phi: Phi, n_rep: int, params: ProcessParams,
               m_max: int = 64,
               center: tuple[float, float] = ORIGIN) -> EstimatorReport:
    """Mean functional value of a typical point (mass per point).

    Streams used: ``stream_index + [0, n_rep)``.
    """
    return _phi_moment(tau, phi, 1, n_rep, params, m_max, center)


def estimate_c0(tau: float, phi: Phi, n_rep: int, params: ProcessParams,
                m_max: int = 64,
                center: tuple[float, float] = ORIGIN) -> EstimatorReport:
    """Mean squared functional value (one-point correlation).

    Shares the stream layout of ``estimate_E``, so for an indicator
    functional the two reports agree replicate by replicate.
    """
    return _phi_moment(tau, phi, 2, n_rep, params, m_max, center)


def estimate_cxy(tau: float, phi: Phi, displacement: tuple[float, float],
                 n_rep: int, params: ProcessParams, m_max: int = 64,
                 e_report: EstimatorReport | None = None) -> EstimatorReport:
    """Two-point correlation at the given displacement.

    Each replicate inserts both points into one realization, builds once
    on a window certified for both, and averages the product of the two
    functional values; the squared mass-per-point term is estimated from
    an independent stream block to avoid bias correlation.

    Streams used: ``stream_index + [0, n_rep)`` for products and, when
    ``e_report`` is not supplied, ``+ [n_rep, 2 n_rep)`` for the mean.
    """
    if math.hypot(*displacement) == 0:
        raise ValueError("displacement must be nonzero")
    if n_rep < 30:
        raise ValueError("need at least 30 replicates")
    base = params.with_intensity(tau)
    prods = []
    uncertified = 0
    for r in range(n_rep):
        p = base.with_stream(params.stream_index + r)
        res = whole_plane_xi_pair(ORIGIN, displacement, p, m_max)
        if not res.certified:
            res = whole_plane_xi_pair(ORIGIN, displacement, p, 2 * m_max)
        if res.certified:
            prods.append(phi_eval(phi, *res.xi_x) * phi_eval(phi, *res.xi_y))
        else:
            uncertified += 1
    if uncertified > 0.1 * n_rep:
        raise RuntimeError(
            f"{uncertified}/{n_rep} replicates failed to certify; raise m_max")
    if e_report is None:
        e_report = estimate_E(tau, phi, n_rep,
                              params.with_stream(params.stream_index + n_rep),
                              m_max)
    prod_mean, prod_se = _mean_se(np.asarray(prods))
    e = e_report.estimate
    est = prod_mean - e * e
    se = math.sqrt(prod_se ** 2 + (2.0 * e * e_report.std_error) ** 2)
    return EstimatorReport(
        estimate=est, std_error=se, n_rep=n_rep,
        certified_fraction=1.0 - uncertified / n_rep,
        metadata={"tau": tau, "phi": phi.label(),
                  "displacement": list(displacement), "m_max": m_max,
                  "master_seed": params.master_seed,
                  "stream_base": params.stream_index,
                  "product_mean": prod_mean, "e_hat": e,
                  "n_excluded": uncertified})


def _local_value(phi: Phi, point, patch, cap: float) -> float:
    """phi of the point's branch lengths computed from the ``patch``
    sub-configuration only, lengths clipped to ``cap``.

    Any deterministic function of a fixed region of the realization
    works as a control variate; on a degenerate sub-configuration we
    fall back to 0.
    """
    from .engine import MarkedConfig, build as _build
    from .geom import DegenerateConfiguration as _Degen
    try:
        tess = _build(MarkedConfig([point, *patch]))
    except _Degen:
        return 0.0
    return phi_eval(phi, min(tess.length(point.id, 1), cap),
                    min(tess.length(point.id, -1), cap))


def _cxy_node(tau: float, phi: Phi, displacement: tuple[float, float],
              n_rep: int, params: ProcessParams, m_max: int,
              e_hat: float) -> tuple[float, float, float]:
    """Variance-reduced two-point correlation at one quadrature node.

    Writing a, b for the two jointly inserted points' values, the node
    value is E[ab] - E^2 = Cov(a, b) + E[a]E[b] - E^2.  Two exact
    rewrites tame the noise:

    * E[a] = E + E[a - a_solo] with a_solo from the same realization
      without the second insertion, so the mean enters only through the
      tiny interaction shift instead of area-amplified E^2 subtraction.
    * Cov(a, b) = Cov(a - a_loc, b) + Cov(a_loc, b - b_loc), where the
      control variates a_loc, b_loc are computed from the two open
      half-planes cut by the perpendicular bisector of the pair
      (restricted to a fixed sampled ball); the half-planes are disjoint,
      so Cov(a_loc, b_loc) is exactly zero by Poisson independence, and
      the residuals a - a_loc vanish except when a point's value depends
      on the far side of the bisector, so the sampling noise decays with
      the node radius.

    Returns (estimate, std_error, certified_fraction).
    """
    sep = math.hypot(*displacement)
    # patch region: half-plane cut to the ball of radius q around the
    # midpoint; sampling always covers q, keeping the region deterministic
    q = int(math.ceil(sep / 2.0)) + 2
    ux, uy = displacement[0] / sep, displacement[1] / sep
    mx, my = displacement[0] / 2.0, displacement[1] / 2.0
    a = []
    b = []
    a0 = []
    b0 = []
    a_loc = []
    b_loc = []
    uncertified = 0
    base = params.with_intensity(tau)
    for r in range(n_rep):
        p = base.with_stream(params.stream_index + r)
        res = whole_plane_xi_triple(ORIGIN, displacement, p, m_max, q)
        if not res.certified:
            res = whole_plane_xi_triple(ORIGIN, displacement, p, 2 * m_max, q)
        if res.certified:
            a.append(phi_eval(phi, *res.xi_x))
            b.append(phi_eval(phi, *res.xi_y))
            a0.append(phi_eval(phi, *res.xi_x_solo))
            b0.append(phi_eval(phi, *res.xi_y_solo))
            patch_x = []
            patch_y = []
            for env in res.environment:
                if math.hypot(env.x - mx, env.y - my) > q:
                    continue
                side = (env.x - mx) * ux + (env.y - my) * uy
                if side < 0.0:
                    patch_x.append(env)
                elif side > 0.0:
                    patch_y.append(env)
            a_loc.append(_local_value(phi, res.x_point, patch_x, float(q)))
            b_loc.append(_local_value(phi, res.y_point, patch_y, float(q)))
        else:
            uncertified += 1
    if uncertified > 0.1 * n_rep:
        raise RuntimeError(
            f"{uncertified}/{n_rep} replicates failed to certify; raise m_max")
    av = np.asarray(a)
    bv = np.asarray(b)
    alv = np.asarray(a_loc)
    blv = np.asarray(b_loc)
    n = len(av)
    da = av - alv
    db = bv - blv
    t = ((da - da.mean()) * (bv - bv.mean())
         + (alv - alv.mean()) * (db - db.mean()))
    cov = float(t.sum() / (n - 1))
    se_cov = float(t.std(ddof=1) / math.sqrt(n))
    hx, se_hx = _mean_se(av - np.asarray(a0))
    hy, se_hy = _mean_se(bv - np.asarray(b0))
    est = cov + (e_hat + hx) * (e_hat + hy) - e_hat * e_hat
    se = math.sqrt(se_cov ** 2 + (e_hat + hy) ** 2 * se_hx ** 2
                   + (e_hat + hx) ** 2 * se_hy ** 2)
    return est, se, 1.0 - uncertified / n_rep


def _trapezoid_weights(radii: Sequence[float]) -> np.ndarray:
    """Trapezoidal weights for nodes ``radii`` on [0, max(radii)], with an
    implicit node at 0 whose integrand vanishes."""
    grid = [0.0] + list(radii)
    w = []
    for i in range(1, len(grid)):
        hi = grid[i + 1] if i + 1 < len(grid) else grid[i]
        w.append((hi - grid[i - 1]) / 2.0)
    return np.asarray(w)


def estimate_V(tau: float, phi: Phi, r_max: float, n_angles: int,
               n_radii: int, n_rep, params: ProcessParams,
               m_max: int = 64, e_report: EstimatorReport | None = None,
               tail: StabTailResult | None = None,
               n_rep_c0: int | None = None,
               n_rep_e: int | None = None,
               radii: Sequence[float] | None = None) -> EstimatorReport:
    """Variance per point via the pair-correlation route: the one-point
    second moment plus intensity times the two-point correlation
    integrated over a disc of radius ``r_max`` (trapezoidal radially,
    uniform in angle).

    The correlation is steep near zero separation (around -2 at a
    sixteenth of the typical spacing for the total length), so accurate
    integrals need a radial grid refined near the origin: pass ``radii``
    to override the uniform grid, and optionally a per-shell sequence as
    ``n_rep``.  Shell replicates are split evenly over the angle nodes.

    Stream blocks from ``stream_index``: ``[0, n_c0)`` one-point moment,
    ``[n_c0, n_c0 + n_e)`` mean (when not supplied), then one block per
    node.  A factor-two radial coarsening must agree within one standard
    error, otherwise a refinement warning is emitted.  With a fitted
    tail, a heuristic envelope for the neglected mass outside ``r_max``
    is reported as ``truncation_bound`` metadata.
    """
    if radii is None:
        if r_max <= 0:
            raise ValueError("r_max must be positive")
        if n_radii < 2:
            raise ValueError("quadrature grid too small")
        h = r_max / n_radii
        radii = [h * i for i in range(1, n_radii + 1)]
    else:
        radii = [float(r) for r in radii]
        if sorted(radii) != radii or radii[0] <= 0:
            raise ValueError("radii must be positive and increasing")
        r_max = radii[-1]
    if n_angles < 1:
        raise ValueError("need at least one angle node")
    counts = _rep_counts(n_rep, len(radii))
    s0 = params.stream_index
    n_c0 = n_rep_c0 if n_rep_c0 is not None else max(max(counts), 1000)
    c0 = estimate_c0(tau, phi, n_c0, params.with_stream(s0), m_max)
    cursor = s0 + n_c0
    if e_report is None:
        n_e = n_rep_e if n_rep_e is not None else max(4 * max(counts), 2000)
        e_report = estimate_E(tau, phi, n_e, params.with_stream(cursor), m_max)
        cursor += n_e
    e_hat = e_report.estimate
    d_theta = 2.0 * math.pi / n_angles
    node_c = np.zeros((len(radii), n_angles))
    node_se = np.zeros((len(radii), n_angles))
    cert = []
    for i, r in enumerate(radii):
        n_node = max(30, counts[i] // n_angles)
        for j in range(n_angles):
            theta = d_theta * j
            disp = (r * math.cos(theta), r * math.sin(theta))
            est, se, cf = _cxy_node(tau, phi, disp, n_node,
                                    params.with_stream(cursor), m_max, e_hat)
            cursor += n_node
            node_c[i, j] = est
            node_se[i, j] = se
            cert.append(cf)
    c_r = node_c.mean(axis=1)
    se_r = np.sqrt((node_se ** 2).sum(axis=1)) / n_angles
    w = _trapezoid_weights(radii) * np.asarray(radii) * 2.0 * math.pi
    integral = float(w @ c_r)
    se_int = float(np.sqrt((w * se_r) @ (w * se_r)))
    v_hat = c0.estimate + tau * integral
    se = math.sqrt(c0.std_error ** 2 + (tau * se_int) ** 2)
    if len(radii) >= 4:
        idx = list(range(1, len(radii), 2))
        if idx[-1] != len(radii) - 1:
            idx.append(len(radii) - 1)
        sub = [radii[i] for i in idx]
        w2 = _trapezoid_weights(sub) * np.asarray(sub) * 2.0 * math.pi
        coarse = c0.estimate + tau * float(w2 @ c_r[idx])
        if abs(coarse - v_hat) > max(se, 1e-12):
            warnings.warn(
                f"radial refinement moved the estimate by "
                f"{abs(coarse - v_hat):.3g} (> 1 se); grid may be too coarse",
                RuntimeWarning, stacklevel=2)
    meta = {"tau": tau, "phi": phi.label(), "r_max": r_max,
            "n_angles": n_angles, "radii": list(radii),
            "n_rep_node": list(counts), "c0": c0.estimate,
            "c0_se": c0.std_error, "e_hat": e_hat,
            "e_se": e_report.std_error, "integral": integral,
            "integral_se": se_int, "node_c": [float(v) for v in c_r],
            "node_se": [float(v) for v in se_r],
            "master_seed": params.master_seed, "stream_base": s0}
    if tail is not None and tail.C_hat > 0:
        # |c| outside r_max bounded by the one-point moment times the
        # fitted dependence envelope at half the separation
        c_half = tail.C_hat / 2.0
        tail_mass = (tau * 2.0 * math.pi * c0.estimate * tail.M_hat
                     * math.exp(-c_half * r_max)
                     * (r_max / c_half + 1.0 / (c_half * c_half)))
        meta["truncation_bound"] = tail_mass
    return EstimatorReport(
        estimate=v_hat, std_error=se,
        n_rep=int(sum(counts)),
        certified_fraction=float(np.mean(cert)) if cert else 1.0,
        metadata=meta)


def _rep_counts(n_rep, k: int) -> list[int]:
    if isinstance(n_rep, int):
        return [n_rep] * k
    counts = [int(n) for n in n_rep]
    if len(counts) != k:
        raise ValueError("one replicate count per lambda required")
    return counts


def lln_experiment(tau: float, phi: Phi, f: TestFunction,
                   lam_list: Sequence[float], n_rep, params: ProcessParams,
                   padding: float | None = None, m_max: int = 64,
                   e_report: EstimatorReport | None = None,
                   n_rep_e: int = 1000,
                   use: str = "inclusive") -> list[ExperimentRow]:
    """Mean of lambda^-1 * integral of f against the empirical measure,
    per window area, against the target tau * E_hat * integral of f.

    ``use`` selects the integral flavour: ``"inclusive"`` counts every
    finite-weight atom (flagged or not), ``"certified"`` counts only
    atoms whose weights are certified whole-plane values.  Inclusive
    integrals carry rare heavy-tailed boundary artifacts (an uncertified
    in-window branch can run far along the window before anything stops
    it), while the certified integral trades them for a clean
    boundary-strip deficit that shrinks like the inverse window side --
    the convergence ladder in its plainest form.

    Streams: ``[0, n_rep_e)`` for the mean estimate (when not supplied),
    then ``n_rep[i]`` per ladder rung, consecutively.
    """
    if use not in ("inclusive", "certified"):
        raise ValueError("use must be 'inclusive' or 'certified'")
    lams = [float(x) for x in lam_list]
    if sorted(lams) != lams:
        raise ValueError("lambda ladder must be increasing")
    counts = _rep_counts(n_rep, len(lams))
    s0 = params.stream_index
    if e_report is None:
        e_report = estimate_E(tau, phi, n_rep_e, params.with_stream(s0), m_max)
        s0 += n_rep_e
    intf = unit_square_integral(f)
    target = tau * e_report.estimate * intf
    base = params.with_intensity(tau)
    rows = []
    for lam, n in zip(lams, counts):
        vals = []
        cert = []
        for r in range(n):
            mu = empirical_measure(lam, base.with_stream(s0 + r), phi, padding)
            res = integrate(mu, f)
            vals.append((res.value if use == "inclusive"
                         else res.certified_value) / lam)
            cert.append(mu.certified_fraction)
        s0 += n
        mean, se = _mean_se(np.asarray(vals))
        rows.append(ExperimentRow(lam, mean, se, target, n,
                                  float(np.mean(cert))))
    return rows


def _jackknife_var_se(x: np.ndarray) -> float:
    """Jackknife standard error of the unbiased sample variance."""
    n = len(x)
    m = x.mean()
    ss = float(((x - m) ** 2).sum())
    loo_ss = ss - (x - m) ** 2 * n / (n - 1)
    loo_var = loo_ss / (n - 2)
    return float(math.sqrt((n - 1) / n * ((loo_var - loo_var.mean()) ** 2).sum()))


def var_experiment(tau: float, phi: Phi, f: TestFunction,
                   lam_list: Sequence[float], n_rep, params: ProcessParams,
                   v_hat: float | None = None,
                   padding: float | None = None) -> list[ExperimentRow]:
    """Normalized replicate variance lambda^-1 * Var[integral of f] per
    rung, with jackknife standard errors; the target column is
    tau * v_hat * integral of f^2 when a variance per point is supplied.
    """
    lams = [float(x) for x in lam_list]
    counts = _rep_counts(n_rep, len(lams))
    if min(counts) < 50:
        raise ValueError("variance-of-variance needs at least 50 replicates")
    intf2 = unit_square_integral(
        TestFunction("f2", lambda x, y, _f=f: _f(x, y) ** 2))
    target = tau * v_hat * intf2 if v_hat is not None else math.nan
    base = params.with_intensity(tau)
    s0 = params.stream_index
    rows = []
    for lam, n in zip(lams, counts):
        vals = []
        cert = []
        for r in range(n):
            mu = empirical_measure(lam, base.with_stream(s0 + r), phi, padding)
            vals.append(integrate(mu, f).value)
            cert.append(mu.certified_fraction)
        s0 += n
        x = np.asarray(vals)
        est = float(x.var(ddof=1) / lam)
        se = _jackknife_var_se(x) / lam
        rows.append(ExperimentRow(lam, est, se, target, n, float(np.mean(cert))))
    return rows


def clt_experiment(tau: float, phi: Phi, f: TestFunction, lam: float,
                   n_rep: int, params: ProcessParams,
                   padding: float | None = None) -> CltReport:
    """Standardized replicate integrals against the standard normal CDF.

    Streams: ``stream_index + [0, n_rep)``.
    """
    if n_rep < 200:
        raise ValueError("need at least 200 replicates for the normality check")
    base = params.with_intensity(tau)
    vals = []
    for r in range(n_rep):
        mu = empirical_measure(lam, base.with_stream(params.stream_index + r),
                               phi, padding)
        vals.append(integrate(mu, f).value)
    x = np.asarray(vals)
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if sd < 1e-12:
        raise RuntimeError("degenerate replicate spread; nothing to standardize")
    z = (x - mean) / sd
    d, p = ks_statistic(z)
    return CltReport(
        samples=tuple(float(v) for v in z),
        ks_statistic=d, p_value=p,
        sample_mean=mean, sample_variance=float(x.var(ddof=1)),
        metadata={"tau": tau, "phi": phi.label(), "f": f.name, "lambda": lam,
                  "n_rep": n_rep, "master_seed": params.master_seed,
                  "stream_base": params.stream_index})


@dataclass(frozen=True)
class ScalingRow:
    tau: float
    e_scaled: float
    e_se: float
    v_scaled: float
    v_se: float


@dataclass(frozen=True)
class ScalingReport:
    k: float
    rows: tuple[ScalingRow, ...]
    e_flags: tuple[tuple[float, float], ...]
    v_flags: tuple[tuple[float, float], ...]


def scaling_check(phi: Phi, tau_list: Sequence[float], n_rep: int,
                  params: ProcessParams, lam_base: float = 400.0,
                  n_rep_e: int | None = None, m_max: int = 64,
                  padding: float | None = None) -> ScalingReport:
    """Constancy of tau^(k/2) * E_hat(tau) and tau^k * V_hat(tau) for a
    homogeneous functional of degree k.

    The per-point mean uses the growing-ball estimator; the variance per
    point uses the replicate route at window area ``lam_base / tau`` so
    every intensity sees the same dimensionless geometry.  Flagged pairs
    differ by more than 3 (mean) / 4 (variance) combined standard errors.
    """
    k = phi.k
    if k is None:
        raise ValueError("scaling check requires a homogeneous functional")
    if n_rep < 50:
        raise ValueError("need at least 50 replicates per intensity")
    n_e = n_rep_e if n_rep_e is not None else max(4 * n_rep, 2000)
    f1 = TestFunction("const1", lambda x, y: np.ones_like(x))
    rows = []
    s0 = params.stream_index
    for tau in tau_list:
        e_rep = estimate_E(tau, phi, n_e, params.with_stream(s0), m_max)
        s0 += n_e
        lam = lam_base / tau
        base = params.with_intensity(tau)
        vals = []
        for r in range(n_rep):
            mu = empirical_measure(lam, base.with_stream(s0 + r), phi,
                                   padding)
            vals.append(integrate(mu, f1).value)
        s0 += n_rep
        x = np.asarray(vals)
        v_hat = float(x.var(ddof=1) / lam) / tau
        v_se = _jackknife_var_se(x) / lam / tau
        rows.append(ScalingRow(
            tau=float(tau),
            e_scaled=tau ** (k / 2.0) * e_rep.estimate,
            e_se=tau ** (k / 2.0) * e_rep.std_error,
            v_scaled=tau ** k * v_hat,
            v_se=tau ** k * v_se))
    e_flags = []
    v_flags = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            a, b = rows[i], rows[j]
            if abs(a.e_scaled - b.e_scaled) > 3.0 * math.hypot(a.e_se, b.e_se):
                e_flags.append((a.tau, b.tau))
            if abs(a.v_scaled - b.v_scaled) > 4.0 * math.hypot(a.v_se, b.v_se):
                v_flags.append((a.tau, b.tau))
    return ScalingReport(k=float(k), rows=tuple(rows),
                         e_flags=tuple(e_flags), v_flags=tuple(v_flags))
