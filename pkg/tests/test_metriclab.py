import cmath
from fractions import Fraction

import pytest
from mpmath import mp

from core.errors import HypothesisError, SingularPointError, TheoremSatisfiedError
from core.exactnum import GaussianRational, LaurentPoly
from core.metriclab import (
    LogDensityField,
    build_exponents,
    build_metric,
    choose_epsilon,
    singular_order_check,
    coordinate_invariance_check,
    divergence_probe,
    divisor_inequality_check,
    epsilon_window,
    flatness_check,
    probe_path,
    schwarz_monitor,
    segment_path,
    sigma_tau,
    symmetrize,
    transformation_laws,
    weighted_defect,
)
from core.minsurf import ramification_profile
from core.nochka import NochkaWeights, compute_weights
from core.position import HyperplaneSet
from core.wronskian import CurveRep, is_degenerate, select_psi

F = Fraction
ONE = LaurentPoly.constant(1)


def _metric(curve, hs, annulus, N):
    weights = compute_weights(hs, N, curve.k)
    ms = ramification_profile(curve, hs, annulus).min_order
    pack = build_exponents(weights, ms, curve.k)
    return build_metric(curve, hs, weights, ms, pack, annulus)


@pytest.fixture
def seven_metric(veronese_curve, veronese_seven, annulus):
    return _metric(veronese_curve, veronese_seven, annulus, 2)


@pytest.fixture
def double_point_metric(double_point_curve, double_point_hyperplanes, annulus):
    return _metric(double_point_curve, double_point_hyperplanes, annulus, 1)


def test_sigma_tau():
    assert sigma_tau(1) == ((0, 1, 3), 1, 4)
    assert sigma_tau(2) == ((0, 1, 3, 6), 4, 10)
    with pytest.raises(HypothesisError):
        sigma_tau(0)


def test_choose_epsilon_is_simplest():
    assert choose_epsilon((F(10, 21), F(1, 2))) == F(11, 23)
    assert choose_epsilon((F(7, 71), F(1, 10))) == F(8, 81)
    assert choose_epsilon((F(1, 3), F(1, 2))) == F(2, 5)
    assert choose_epsilon((F(0), F(1))) == F(1, 2)
    assert choose_epsilon((F(1), F(3))) == 2
    with pytest.raises(HypothesisError):
        choose_epsilon((F(1, 2), F(1, 2)))


def test_line_omitting_five_points():
    pack = build_exponents(NochkaWeights((F(1),) * 5, F(1)), [float("inf")] * 5, 1)
    assert pack.s_omega == 5 and pack.A == 2
    assert pack.window == (F(10, 21), F(1, 2))
    assert pack.epsilon == F(11, 23)
    assert pack.h == F(36, 23)
    assert pack.rho == F(17, 18)
    assert pack.rho_star == F(23, 2)
    assert pack.singular_order_bound == F(11, 10)
    assert pack.frame_exponent == 1 / pack.rho_star


def test_seven_omitted_exponents(seven_metric):
    pack = seven_metric.pack
    assert pack.A == 1
    assert pack.window == (F(7, 71), F(1, 10))
    assert pack.epsilon == F(8, 81)
    assert pack.h == F(92, 27)
    assert pack.rho == F(275, 276)
    assert pack.rho_star == 81
    assert pack.singular_order_bound == F(8, 7)
    assert pack.to_json()["eps_rho_star_over_q"] == "8/7"


def test_double_point_exponents(double_point_metric):
    pack = double_point_metric.pack
    assert pack.s_omega == F(9, 2)
    assert pack.window == (F(5, 14), F(3, 8))
    assert pack.epsilon == F(4, 11)
    assert pack.h == F(31, 22)
    assert pack.rho == F(30, 31)
    assert pack.rho_star == 22
    assert pack.singular_order_bound == F(8, 5)


def test_explicit_epsilon_must_lie_in_window():
    w = NochkaWeights((F(1),) * 5, F(1))
    inf5 = [float("inf")] * 5
    assert build_exponents(w, inf5, 1, epsilon=F(12, 25)).epsilon == F(12, 25)
    with pytest.raises(HypothesisError):
        build_exponents(w, inf5, 1, epsilon=F(1, 2))


def test_no_metric_when_inequality_holds():
    w = NochkaWeights((F(1),) * 3, F(1))
    with pytest.raises(TheoremSatisfiedError):
        epsilon_window(w, [float("inf")] * 3, 1)
    with pytest.raises(HypothesisError):
        weighted_defect(w, [1, 2, 3], 1)


def test_singular_orders_at_double_point(double_point_metric):
    [cls] = [d for d in double_point_metric.divisors if d.in_annulus]
    assert cls.singular
    assert cls.order == F(-56, 5)
    assert abs(cls.roots[0] - 1) < 1e-12
    orders = singular_order_check(double_point_metric)
    assert orders.holds
    assert len(orders.checks) == 1
    assert orders.to_json()["bound"] == "-8/5"


def test_singular_orders_at_random_double_points(rng, annulus, z):
    # pairings 1, (z-a)^2 and (z-a)^2 + conj(c) with every root of the last kind outside |z| < 2
    extras = [25, -25, 36, -36, 49, GaussianRational(0, 30)]
    built = 0
    while built < 20:
        a = GaussianRational(F(rng.randint(-15, 15), 10), F(rng.randint(-15, 15), 10))
        if not F(36, 100) <= a.abs2() <= F(225, 100):
            continue
        curve = CurveRep((ONE, (z - a) ** 2))
        hs = HyperplaneSet.from_vectors([(1, 0), (0, 1)] + [(c, 1) for c in rng.sample(extras, 3)])
        spec = _metric(curve, hs, annulus, 1)
        [cls] = [d for d in spec.divisors if d.in_annulus]
        assert cls.singular
        assert cls.order == F(-56, 5)
        assert abs(cls.roots[0] - complex(a)) < 1e-9
        orders = singular_order_check(spec)
        assert orders.holds
        assert [c.order for c in orders.checks] == [F(-56, 5)]
        assert all(c.order <= -spec.pack.singular_order_bound < -1 for c in orders.checks)
        built += 1


def test_seven_omitted_metric_has_no_singularities_inside(seven_metric):
    assert not any(d.in_annulus for d in seven_metric.divisors)
    assert singular_order_check(seven_metric).holds
    assert seven_metric.density(1) > 0
    assert all(abs(p) > 2 for p in seven_metric.singular_points())


def test_divisor_inequalities(double_point_curve, double_point_hyperplanes, annulus, double_point_metric):
    report = divisor_inequality_check(
        double_point_curve,
        double_point_hyperplanes,
        double_point_metric.weights,
        double_point_metric.multiplicities,
        1,
        annulus,
    )
    assert report.holds
    [row] = report.rows
    assert row["nochka_value"] == "0" and row["ramified_value"] == "0"


def test_flatness_of_metric(seven_metric):
    report = flatness_check(seven_metric, 1e-3, (1.0, 0.1), 3)
    assert report.max_residual < 1e-6


def test_flatness_of_catenoid_metric(catenoid_rep, seven_omitted, annulus):
    spec = _metric(catenoid_rep, seven_omitted, annulus, 2)
    assert spec.pack.epsilon == F(8, 81)
    assert flatness_check(spec, 1e-3, (1.0, 0.1), 3).max_residual < 1e-6


def test_flatness_controls():
    harmonic = LogDensityField(lambda z: mp.log(abs(z)), [0j], "log|z|")
    assert flatness_check(harmonic, 1e-3, (1.0, 0.1), 3).max_residual < 1e-8
    bowl = LogDensityField(lambda z: mp.re(z) ** 2 + mp.im(z) ** 2, [], "|z|^2")
    assert flatness_check(bowl, 1e-3, (1.0, 0.1), 3).max_residual == pytest.approx(4.0, rel=1e-6)
    near = LogDensityField(lambda z: mp.log(abs(z - 1)), [1 + 0j])
    with pytest.raises(SingularPointError):
        flatness_check(near, 1e-3, (1.0, 0.1), 3)


def test_symmetrized_metric(seven_metric):
    sym = symmetrize(seven_metric)
    assert float(sym.log_density(1.3)) == pytest.approx(float(sym.log_density(1 / 1.3)))
    a, b = sym.factors(1.3)
    assert a == pytest.approx(float(seven_metric.log_density(1.3)))
    assert b == pytest.approx(float(seven_metric.log_density(1 / 1.3)))
    assert 0j in sym.singular_points()
    with pytest.raises(SingularPointError):
        sym.log_density(0)


def test_transformation_laws(seven_metric, catenoid_rep, seven_omitted, line_curve, five_points):
    assert transformation_laws(seven_metric.curve, seven_metric.hyperplanes, seven_metric.psi).ok
    assert transformation_laws(catenoid_rep, seven_omitted, select_psi(catenoid_rep, seven_omitted)).ok
    assert transformation_laws(line_curve, five_points, select_psi(line_curve, five_points)).ok


def test_transformation_laws_on_random_curves(rng, random_poly):
    checked = 0
    for attempt in range(400):
        k = 1 + attempt % 3
        curve = CurveRep(tuple(random_poly(max_degree=3) for _ in range(k + 1)))
        if is_degenerate(curve):
            continue
        hs = HyperplaneSet.from_vectors([
            (rng.randint(1, 3),) + tuple(GaussianRational(rng.randint(-3, 3), rng.randint(-2, 2)) for _ in range(k))
            for _ in range(2)
        ])
        report = transformation_laws(curve, hs, select_psi(curve, hs))
        assert report.ok, report.failures
        checked += 1
        if checked == 100:
            break
    assert checked == 100


def test_coordinate_invariance(seven_metric, rng):
    for _ in range(20):
        z0 = cmath.rect(rng.uniform(0.6, 1.9), rng.uniform(0, 2 * cmath.pi))
        report = coordinate_invariance_check(seven_metric, z0)
        assert report.laws_ok
        assert report.ok, (z0, report.deviation)
    wrong = coordinate_invariance_check(seven_metric, 1.3, jacobian_power=2)
    assert not wrong.ok
    assert wrong.deviation == pytest.approx(abs(1 / 1.3 ** 2 - 1), rel=1e-6)
    with pytest.raises(SingularPointError):
        coordinate_invariance_check(seven_metric, 0)


def test_divergence_probe_into_double_point(double_point_metric):
    path = probe_path(1, 1, 0.1, 1e-6, 200)
    assert abs(path[0] - 1.1) < 1e-12 and abs(path[-1] - 1) < 1e-5
    report = divergence_probe(double_point_metric, path, 1, F(-56, 5))
    assert report.monotone
    assert report.diverges
    assert report.fitted_exponent == pytest.approx(-11.2, rel=0.05)
    assert report.relative_error < 0.05
    assert report.log_partial_lengths[-1] > report.log_partial_lengths[0]


def test_probe_of_regular_field_stays_finite():
    field = LogDensityField(lambda z: mp.mpf(0))
    report = divergence_probe(field, segment_path(0.5, 1.5, 101))
    assert report.final_length == pytest.approx(1.0)
    assert report.fitted_exponent is None and not report.diverges
    with pytest.raises(HypothesisError):
        probe_path(1, 1, 1e-6, 0.1, 10)
    with pytest.raises(HypothesisError):
        divergence_probe(field, [0.5, 1.0])


def test_schwarz_monitor_is_scale_free(veronese_curve, veronese_seven, seven_metric, z):
    args = (veronese_seven, seven_metric.weights, seven_metric.multiplicities, seven_metric.pack)
    plain = schwarz_monitor(veronese_curve, *args, R=2.0, grid=3)
    scaled = schwarz_monitor(veronese_curve.scaled(z + 3), *args, R=2.0, grid=3)
    assert plain.homogeneity_degree == 0
    assert plain.skipped == 0
    assert scaled.log_sup_coarse == pytest.approx(plain.log_sup_coarse, rel=1e-9, abs=1e-9)
    assert scaled.log_sup_fine == pytest.approx(plain.log_sup_fine, rel=1e-9, abs=1e-9)
    assert plain.grid_fine == 6
