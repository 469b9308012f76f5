from fractions import Fraction

import pytest

from core.errors import DimensionMismatchError, HypothesisError, InvalidIndexError, PositionError
from core.nochka import (
    NochkaWeights,
    compute_weights,
    feasible_with_theta_at_most,
    product_inequality_check,
    product_inequality_sweep,
    theta_window,
    verify_axioms,
)
from core.position import HyperplaneSet, minimal_subgeneral_n

HALF = Fraction(1, 2)


def test_theta_window():
    assert theta_window(2, 1) == (HALF, Fraction(2, 3))
    assert theta_window(2, 2) == (1, 1)


def test_general_position_gives_unit_weights(veronese_seven):
    w = compute_weights(veronese_seven, 2, 2)
    assert w.theta == 1
    assert w.omega == (1,) * 7
    assert verify_axioms(w, veronese_seven, 2, 2).ok


def test_paired_points_get_half_weights(paired_points):
    w = compute_weights(paired_points, 2, 1)
    assert w.theta == HALF
    assert w.omega == (HALF,) * 6
    assert w.provenance["objective"] == "min-theta, max-floor, lex-omega"
    report = verify_axioms(w, paired_points, 2, 1)
    assert report.ok
    assert report.checked_subsets == 41


def test_tampered_weights_are_flagged(paired_points):
    w = NochkaWeights((Fraction(1),) * 6, Fraction(1))
    report = verify_axioms(w, paired_points, 2, 1)
    assert not report.ok
    assert {v.axiom for v in report.violations} == {"ii", "iii", "iv"}
    assert any(v.axiom == "iv" and v.witness == (0, 1) for v in report.violations)

    zero = NochkaWeights((Fraction(0),) + (HALF,) * 5, HALF)
    assert "i" in {v.axiom for v in verify_axioms(zero, paired_points, 2, 1).violations}

    with pytest.raises(DimensionMismatchError):
        verify_axioms(NochkaWeights((HALF,), HALF), paired_points, 2, 1)


def test_hypothesis_is_checked():
    two = HyperplaneSet.from_vectors([(1, 0), (0, 1)])
    with pytest.raises(HypothesisError):
        compute_weights(two, 1, 1)
    with pytest.raises(HypothesisError):
        compute_weights(two, 1, 2)


def test_theta_feasibility(paired_points):
    assert feasible_with_theta_at_most(paired_points, 2, 1, HALF)
    assert not feasible_with_theta_at_most(paired_points, 2, 1, Fraction(1, 3))


def test_weights_json_round_trip(paired_points):
    w = compute_weights(paired_points, 2, 1)
    again = NochkaWeights.from_json(w.to_json())
    assert again == w
    assert w.to_json()["theta"] == "1/2"


def test_product_inequality_on_a_pair(paired_points):
    w = compute_weights(paired_points, 2, 1)
    # (4 * 9)^(1/2) = 6 <= 9
    assert product_inequality_check(w, paired_points, (0, 1), (4, 9), N=2) == (True, (1,))
    assert product_inequality_check(w, paired_points, (0, 2), ("3/2", 7), N=2) == (True, (0, 2))
    with pytest.raises(InvalidIndexError):
        product_inequality_check(w, paired_points, (0, 0), (2, 2))
    with pytest.raises(InvalidIndexError):
        product_inequality_check(w, paired_points, (0, 1), ("1/2", 2))
    with pytest.raises(InvalidIndexError):
        product_inequality_check(w, paired_points, (0, 1, 2, 3), (2, 2, 2, 2), N=2)
    with pytest.raises(DimensionMismatchError):
        product_inequality_check(w, paired_points, (0, 1), (2,))


def test_product_inequality_sweep_is_clean(veronese_seven, paired_points, rng):
    w = compute_weights(veronese_seven, 2, 2)
    assert product_inequality_sweep(w, veronese_seven, 2, 500, rng) == []
    w = compute_weights(paired_points, 2, 1)
    assert product_inequality_sweep(w, paired_points, 2, 500, rng) == []


def test_random_configurations_satisfy_axioms(rng):
    checked = 0
    for attempt in range(400):
        k = 1 + attempt % 3
        q = rng.randint(k + 2, 10)
        vectors = []
        while len(vectors) < q:
            if vectors and rng.random() < 0.25:
                # repeated hyperplanes push the configuration out of general position
                vectors.append(rng.choice(vectors))
                continue
            v = tuple(rng.randint(-3, 3) for _ in range(k + 1))
            if any(v):
                vectors.append(v)
        hs = HyperplaneSet.from_vectors(vectors)
        try:
            N = minimal_subgeneral_n(hs, k)
        except PositionError:
            continue
        if N > 4 or q <= 2 * N - k + 1:
            continue
        w = compute_weights(hs, N, k)
        assert verify_axioms(w, hs, N, k).ok
        lo, hi = theta_window(N, k)
        assert lo <= w.theta <= hi
        if N == k:
            assert w.omega == (1,) * q
        checked += 1
        if checked == 60:
            break
    assert checked >= 50
