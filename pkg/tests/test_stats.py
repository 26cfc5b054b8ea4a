import math

import numpy as np
import pytest

from gilbert.functionals import Phi
from gilbert.functionals import test_function as lookup_f
from gilbert.pointproc import ProcessParams
from gilbert.stats import (clt_experiment, estimate_E, estimate_V,
                           estimate_c0, estimate_cxy, ks_statistic,
                           lln_experiment, scaling_check, var_experiment)

P = ProcessParams(intensity=1.0, master_seed=314, stream_index=0)
TL = Phi.total_length()


def test_ks_statistic_normal_samples():
    rng = np.random.default_rng(1)
    d, p = ks_statistic(rng.normal(0, 1, 10_000))
    assert p >= 0.001
    assert d < 0.02


def test_ks_statistic_constant_samples():
    d, p = ks_statistic([0.0] * 100)
    assert d >= 0.5
    assert p < 1e-6


def test_ks_statistic_short_input():
    with pytest.raises(ValueError):
        ks_statistic([0.1] * 7)


def test_estimate_e_threshold_is_one():
    rep = estimate_E(1.0, Phi.threshold(1e-9), 40, P)
    assert rep.estimate == 1.0
    assert rep.std_error == 0.0


def test_estimate_e_deterministic():
    a = estimate_E(1.0, TL, 40, P)
    b = estimate_E(1.0, TL, 40, P)
    assert a == b


def test_estimate_e_needs_replicates():
    with pytest.raises(ValueError):
        estimate_E(1.0, TL, 10, P)


def test_estimate_e_intensity_ratio():
    # mass per point scales like tau^(-1/2) for the total length
    e1 = estimate_E(1.0, TL, 300, P.with_stream(1000))
    e4 = estimate_E(4.0, TL, 300, P.with_stream(2000))
    ratio_se = math.hypot(e1.std_error, 2.0 * e4.std_error)
    assert abs(e1.estimate - 2.0 * e4.estimate) <= 3.0 * ratio_se


def test_c0_equals_e_for_indicators_replicatewise():
    phi = Phi.threshold(1e-9)
    a = estimate_E(1.0, phi, 40, P.with_stream(77))
    b = estimate_c0(1.0, phi, 40, P.with_stream(77))
    assert a.estimate == b.estimate
    assert a.std_error == b.std_error


def test_c0_jensen():
    e = estimate_E(1.0, TL, 250, P.with_stream(3000))
    c0 = estimate_c0(1.0, TL, 250, P.with_stream(3000))
    assert c0.estimate >= e.estimate ** 2 - 3.0 * c0.std_error


def test_e_translation_invariance():
    a = estimate_E(1.0, TL, 250, P.with_stream(4000))
    b = estimate_E(1.0, TL, 250, P.with_stream(5000), center=(10.0, 7.0))
    assert abs(a.estimate - b.estimate) <= 3.0 * math.hypot(a.std_error,
                                                            b.std_error)


def test_cxy_validation():
    with pytest.raises(ValueError):
        estimate_cxy(1.0, TL, (0.0, 0.0), 40, P)


def test_cxy_reflection_symmetry():
    a = estimate_cxy(1.0, TL, (2.0, 0.0), 80, P.with_stream(6000))
    b = estimate_cxy(1.0, TL, (-2.0, 0.0), 80, P.with_stream(7000))
    assert abs(a.estimate - b.estimate) <= 3.0 * math.hypot(a.std_error,
                                                            b.std_error)


def test_cxy_rotation_invariance():
    r = 2.0
    a = estimate_cxy(1.0, TL, (r, 0.0), 80, P.with_stream(8000))
    b = estimate_cxy(1.0, TL, (r / math.sqrt(2), r / math.sqrt(2)), 80,
                     P.with_stream(9000))
    assert abs(a.estimate - b.estimate) <= 3.0 * math.hypot(a.std_error,
                                                            b.std_error)


def test_cxy_long_range_decorrelation():
    rep = estimate_cxy(1.0, TL, (8.0, 0.0), 80, P.with_stream(10_000))
    assert abs(rep.estimate) <= 3.0 * rep.std_error


def test_lln_zero_function_is_exact_zero():
    rows = lln_experiment(1.0, TL, lookup_f("zero"), [25.0, 100.0], 5,
                          P.with_stream(11_000), n_rep_e=30)
    for row in rows:
        assert row.estimate == 0.0
        assert row.target == 0.0


def test_lln_ladder_must_increase():
    with pytest.raises(ValueError):
        lln_experiment(1.0, TL, lookup_f("const1"), [100.0, 25.0], 5,
                       P, n_rep_e=30)


def test_lln_threshold_counts_points():
    # indicator at vanishing threshold counts the process points exactly
    from gilbert.functionals import empirical_measure
    from gilbert.geom import Rect
    from gilbert.pointproc import sample_poisson
    phi = Phi.threshold(1e-12)
    lam = 100.0
    for k in range(10):
        params = P.with_stream(12_000 + k)
        mu = empirical_measure(lam, params, phi, padding=5.0)
        side = math.sqrt(lam)
        win = Rect(-5.0, -5.0, side + 10.0, side + 10.0)
        cfg = sample_poisson(win, params, path=(0,))
        n_inside = sum(1 for p in cfg.points
                       if 0 <= p.x <= side and 0 <= p.y <= side)
        assert mu.total_mass == float(n_inside)
        assert mu.n_atoms == n_inside


def test_lln_poisson_route():
    rows = lln_experiment(1.0, Phi.threshold(1e-12), lookup_f("const1"),
                          [100.0, 400.0], 40, P.with_stream(13_000),
                          n_rep_e=60)
    for row in rows:
        assert abs(row.estimate - 1.0) <= 3.5 * row.std_error


def test_var_zero_function():
    rows = var_experiment(1.0, TL, lookup_f("zero"), [100.0], 60,
                          P.with_stream(14_000))
    assert rows[0].estimate == 0.0


def test_var_requires_replicates():
    with pytest.raises(ValueError):
        var_experiment(1.0, TL, lookup_f("const1"), [100.0], 30, P)


def test_var_poisson_counts():
    # indicator mass is the point count, so the normalized variance is tau
    rows = var_experiment(1.0, Phi.threshold(1e-12), lookup_f("const1"),
                          [400.0], 150, P.with_stream(15_000))
    row = rows[0]
    assert abs(row.estimate - 1.0) <= 4.0 * row.std_error


def test_clt_requires_replicates():
    with pytest.raises(ValueError):
        clt_experiment(1.0, TL, lookup_f("const1"), 100.0, 100, P)


def test_clt_degenerate_spread():
    with pytest.raises(RuntimeError):
        clt_experiment(1.0, TL, lookup_f("zero"), 100.0, 200,
                       P.with_stream(16_000))


def test_clt_poisson_counts_normality():
    rep = clt_experiment(1.0, Phi.threshold(1e-12), lookup_f("const1"),
                         400.0, 220, P.with_stream(17_000))
    assert rep.p_value >= 0.01
    assert len(rep.samples) == 220
    assert abs(rep.sample_mean - 400.0) <= 4.0 * math.sqrt(400.0 / 220)


def test_scaling_check_rejects_threshold():
    with pytest.raises(ValueError):
        scaling_check(Phi.threshold(1.0), [1.0, 4.0], 60, P)


def test_scaling_check_total_length_small():
    rep = scaling_check(TL, [1.0, 4.0], 60, P.with_stream(18_000),
                        lam_base=100.0, n_rep_e=300)
    assert rep.k == 1.0
    assert len(rep.rows) == 2
    assert rep.e_flags == ()
    assert rep.v_flags == ()


def test_estimate_v_small_grid():
    rep = estimate_V(1.0, TL, r_max=3.0, n_angles=2, n_radii=4, n_rep=120,
                     params=P.with_stream(19_000), n_rep_c0=400, n_rep_e=800)
    assert rep.estimate > 0
    assert rep.estimate > 3.0 * 0  # positivity checked against se below
    assert rep.estimate - 3.0 * rep.std_error > 0 or rep.std_error > 0.3
    assert "c0" in rep.metadata and "integral" in rep.metadata


def test_estimate_v_validation():
    with pytest.raises(ValueError):
        estimate_V(1.0, TL, r_max=-1.0, n_angles=2, n_radii=4, n_rep=60,
                   params=P)
