"""Branch-length functionals, the rescaled empirical measure, and
integration of test functions against it.

The functional family is closed by construction: total length, powers of
the total length, and threshold indicators.  All evaluate in extended
arithmetic so unbounded branches are first-class inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import MarkedConfig, Tessellation, build
from .geom import DegenerateConfiguration, Rect, Window
from .pointproc import ProcessParams, sample_poisson
from .stabilize import certify_point

TOTAL_LENGTH = "total-length"
POWER_SUM = "power-sum"
THRESHOLD = "threshold"


@dataclass(frozen=True)
class Phi:
    """Descriptor of a branch-length functional phi(l1, l2).

    ``q`` is the declared polynomial growth exponent and ``k`` the
    homogeneity degree (None for the non-homogeneous threshold kind).
    """

    kind: str
    alpha: float | None = None
    theta: float | None = None

    def __post_init__(self) -> None:
        if self.kind == TOTAL_LENGTH:
            pass
        elif self.kind == POWER_SUM:
            if self.alpha is None or self.alpha < 0:
                raise ValueError("power-sum exponent must be >= 0")
        elif self.kind == THRESHOLD:
            if self.theta is None or self.theta <= 0:
                raise ValueError("threshold must be positive")
        else:
            raise ValueError(f"unknown functional kind {self.kind!r}")

    @classmethod
    def total_length(cls) -> "Phi":
        return cls(TOTAL_LENGTH)

    @classmethod
    def power_sum(cls, alpha: float) -> "Phi":
        return cls(POWER_SUM, alpha=float(alpha))

    @classmethod
    def threshold(cls, theta: float) -> "Phi":
        return cls(THRESHOLD, theta=float(theta))

    @property
    def q(self) -> float:
        if self.kind == TOTAL_LENGTH:
            return 1.0
        if self.kind == POWER_SUM:
            return float(self.alpha)
        return 0.0

    @property
    def k(self) -> float | None:
        if self.kind == TOTAL_LENGTH:
            return 1.0
        if self.kind == POWER_SUM:
            return float(self.alpha)
        return None

    def label(self) -> str:
        if self.kind == TOTAL_LENGTH:
            return TOTAL_LENGTH
        if self.kind == POWER_SUM:
            return f"{POWER_SUM}:{self.alpha:g}"
        return f"{THRESHOLD}:{self.theta:g}"

    @classmethod
    def parse(cls, text: str) -> "Phi":
        kind, _, arg = text.partition(":")
        if kind == TOTAL_LENGTH:
            return cls.total_length()
        if kind == POWER_SUM:
            return cls.power_sum(float(arg))
        if kind == THRESHOLD:
            return cls.threshold(float(arg))
        raise ValueError(f"unknown functional {text!r}")


def phi_eval(phi: Phi, l1: float, l2: float) -> float:
    """Evaluate phi on one pair of (possibly infinite) branch lengths."""
    if l1 < 0 or l2 < 0 or math.isnan(l1) or math.isnan(l2):
        raise ValueError("branch lengths must be nonnegative")
    total = l1 + l2
    if phi.kind == TOTAL_LENGTH:
        return total
    if phi.kind == POWER_SUM:
        return total ** phi.alpha
    return 1.0 if total >= phi.theta else 0.0


def phi_eval_many(phi: Phi, l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    """Vectorized ``phi_eval``; infinities propagate the same way."""
    total = np.asarray(l1, dtype=float) + np.asarray(l2, dtype=float)
    if (total < 0).any() or np.isnan(total).any():
        raise ValueError("branch lengths must be nonnegative")
    if phi.kind == TOTAL_LENGTH:
        return total
    if phi.kind == POWER_SUM:
        return total ** phi.alpha
    return (total >= phi.theta).astype(float)


@dataclass(frozen=True)
class TestFunction:
    """A bounded continuous integrand on the unit square."""

    name: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, x, y):
        return self.fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


TEST_FUNCTIONS: dict[str, TestFunction] = {
    f.name: f for f in (
        TestFunction("const1", lambda x, y: np.ones_like(x)),
        TestFunction("zero", lambda x, y: np.zeros_like(x)),
        TestFunction("x", lambda x, y: x),
        TestFunction("y", lambda x, y: y),
        TestFunction("xy", lambda x, y: x * y),
        TestFunction("cospi", lambda x, y: np.cos(np.pi * x) * np.cos(np.pi * y)),
        TestFunction("sinpi", lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)),
    )
}


def test_function(name: str) -> TestFunction:
    try:
        return TEST_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; "
                         f"choose from {sorted(TEST_FUNCTIONS)}") from None


def unit_square_integral(f: TestFunction, n: int = 96) -> float:
    """Deterministic tensor Gauss-Legendre quadrature of f over [0,1]^2."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    gx, gy = np.meshgrid(x, x, indexing="ij")
    vals = f(gx.ravel(), gy.ravel()).reshape(n, n)
    return float(w @ vals @ w)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted atoms at rescaled seed locations in the unit square.

    Atoms flagged ``excluded`` carry non-finite weights (unbounded
    branches under an unbounded functional) and are left out of
    integrals; uncertified atoms are included but flagged, so integrals
    can be reported both inclusively and certified-only.
    """

    locations: np.ndarray
    weights: np.ndarray
    lam: float
    phi: Phi
    certified: np.ndarray
    excluded: np.ndarray
    certified_fraction: float

    def __post_init__(self) -> None:
        if len(self.locations) and not (
                (self.locations >= -1e-12).all()
                and (self.locations <= 1.0 + 1e-12).all()):
            raise ValueError("atom locations must lie in the unit square")

    @property
    def n_atoms(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights[~self.excluded].sum())


@dataclass(frozen=True)
class IntegralResult:
    value: float
    certified_value: float
    n_excluded: int
    n_atoms: int


def measure_from_tessellation(tess: Tessellation, lam: float, phi: Phi,
                              window: Window | None = None) -> EmpiricalMeasure:
    """Empirical measure of an already-built tessellation.

    Atoms are the seeds inside [0, sqrt(lam)]^2 placed at x / sqrt(lam)
    and weighted by phi of their branch lengths; certification is against
    ``window`` (default: the configuration's own window).
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    window = window if window is not None else tess.config.window
    side = math.sqrt(lam)
    square = Rect(0.0, 0.0, side, side)
    pos = tess.config.positions
    if len(pos) == 0:
        empty = np.empty(0)
        return EmpiricalMeasure(np.empty((0, 2)), empty, lam, phi,
                                empty.astype(bool), empty.astype(bool), 1.0)
    inside = square.contains_many(pos)
    lengths = tess.lengths_array()[inside]
    pos = pos[inside]
    weights = phi_eval_many(phi, lengths[:, 0], lengths[:, 1])
    excluded = ~np.isfinite(weights)
    radius = 2.0 * np.maximum(lengths[:, 0], lengths[:, 1])
    if window is not None and len(pos):
        finite = np.isfinite(radius)
        certified = np.zeros(len(pos), dtype=bool)
        for k in np.flatnonzero(finite):
            certified[k] = window.contains_ball((pos[k, 0], pos[k, 1]),
                                                float(radius[k]))
    else:
        certified = np.zeros(len(pos), dtype=bool)
    frac = float(certified.mean()) if len(pos) else 1.0
    return EmpiricalMeasure(pos / side, weights, lam, phi, certified,
                            excluded, frac)


def default_padding(tau: float) -> float:
    """Window padding of three stabilization scales at intensity tau."""
    return 6.6 / math.sqrt(tau)


def empirical_measure(lam: float, params: ProcessParams, phi: Phi,
                      padding: float | None = None) -> EmpiricalMeasure:
    """Sample one realization on the padded square and weigh its points.

    The padding keeps boundary effects out of [0, sqrt(lam)]^2: atoms
    whose stabilization ball fits inside the padded window carry exact
    whole-plane weights and are marked certified.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if padding is None:
        padding = default_padding(params.intensity)
    if padding < 0:
        raise ValueError("padding must be nonnegative")
    side = math.sqrt(lam)
    window = Rect(-padding, -padding, side + 2 * padding, side + 2 * padding)
    for retry in range(4):
        config = sample_poisson(window, params, path=(retry,))
        try:
            tess = build(config)
        except DegenerateConfiguration:
            continue
        return measure_from_tessellation(tess, lam, phi, window)
    raise RuntimeError("sampled repeatedly degenerate realizations")


def integrate(measure: EmpiricalMeasure, f: TestFunction) -> IntegralResult:
    """Sum of weight * f(location) over atoms, excluded atoms left out."""
    if measure.n_atoms == 0:
        return IntegralResult(0.0, 0.0, 0, 0)
    keep = ~measure.excluded
    fv = f(measure.locations[:, 0], measure.locations[:, 1])
    value = float((measure.weights[keep] * fv[keep]).sum())
    cert = keep & measure.certified
    certified_value = float((measure.weights[cert] * fv[cert]).sum())
    return IntegralResult(value, certified_value,
                          int(measure.excluded.sum()), measure.n_atoms)
