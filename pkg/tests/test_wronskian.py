import pytest
import sympy

from core.errors import DegenerateCurveError, DimensionMismatchError, InvalidIndexError
from core.exactnum import GaussianRational, LaurentPoly, coefficient_matrix, matrix_rank
from core.position import Hyperplane, HyperplaneSet
from core.wronskian import (
    CurveRep,
    contact_eval,
    contact_norm,
    contracted,
    is_degenerate,
    ladder,
    ladder_norm,
    norm_at,
    pairing,
    select_psi,
    wronskian,
)

ONE = LaurentPoly.constant(1)


def test_small_wronskians(z):
    assert wronskian([ONE, z]) == ONE
    assert wronskian([z, ONE]) == -ONE
    assert wronskian([ONE, z, z * z]) == LaurentPoly.constant(2)
    assert wronskian([z]) == z


def test_catenoid_wronskian(catenoid_rep):
    assert wronskian(catenoid_rep.components) == LaurentPoly.constant(GaussianRational(0, -8))


def test_wronskian_matches_sympy(random_poly, to_sympy):
    zs = to_sympy.symbol
    for _ in range(10):
        fs = [random_poly(max_degree=3) for _ in range(3)]
        expected = sympy.wronskian([to_sympy(f) for f in fs], zs)
        assert sympy.simplify(to_sympy(wronskian(fs)) - expected) == 0


def test_wronskian_scales_by_power(veronese_curve, z):
    h = z - 1
    scaled = veronese_curve.scaled(h)
    assert wronskian(scaled.components) == h ** 3 * wronskian(veronese_curve.components)


def test_ladder_minor_signs(veronese_curve):
    lad = ladder(veronese_curve)
    assert lad.k == 2
    assert lad.top == LaurentPoly.constant(2)
    assert lad.minor((1, 0)) == -lad.minor((0, 1))
    assert lad.minor((2, 0, 1)) == lad.top
    assert lad.minor((1, 1)).is_zero()


def test_reduced_strips_common_factor(z):
    c = CurveRep((z - 1, (z - 1) * z * z))
    assert not c.is_reduced()
    assert c.reduced().components == (ONE, z * z)
    assert CurveRep((z, z ** 3)).reduced().components == (ONE, z * z)


def test_pairing_uses_conjugate_coefficients(veronese_curve, line_curve, z):
    H = Hyperplane((9, -6, 1))
    assert pairing(veronese_curve, H) == (z - 3) ** 2
    Hi = Hyperplane((GaussianRational(0, 1), 0))
    assert pairing(line_curve, Hi) == LaurentPoly.constant(GaussianRational(0, -1))
    with pytest.raises(DimensionMismatchError):
        pairing(line_curve, H)


def test_contracted_wronskians(veronese_curve, z):
    H = Hyperplane((9, -6, 1))
    assert contracted(veronese_curve, H, 0, ()) == (z - 3) ** 2
    assert contracted(veronese_curve, H, 1, (0,)) == (3 - z).scale(2)
    # sum over l != 1 of c_l W(f_l, z): 9 W(1, z) + W(z^2, z)
    assert contracted(veronese_curve, H, 1, (1,)) == 9 - z * z
    with pytest.raises(InvalidIndexError):
        contracted(veronese_curve, H, 1, (0, 0))
    with pytest.raises(InvalidIndexError):
        contracted(veronese_curve, H, 3, (0, 1, 2))


def test_select_psi_takes_first_nonzero(veronese_curve, veronese_seven, z):
    psi = select_psi(veronese_curve, veronese_seven)
    assert psi.q == 7 and psi.k == 2
    assert psi[(0, 0)].poly == (z - 3) ** 2
    assert psi[(0, 1)].index_set == (0,)
    assert psi[(0, 1)].poly == (3 - z).scale(2)
    assert psi[(0, 2)].poly == LaurentPoly.constant(2)
    assert len(psi.polys(max_level=1)) == 14


def test_select_psi_respects_forced_index_sets(veronese_curve, veronese_seven):
    forced = {(j, p): ((1,) if p == 1 else (0, 1)) for j in range(7) for p in (1, 2)}
    psi = select_psi(veronese_curve, veronese_seven, index_sets=forced)
    assert psi[(0, 1)].index_set == (1,)


def test_degenerate_curve(z):
    flat = CurveRep((ONE, z, z + 1))
    assert is_degenerate(flat)
    assert not is_degenerate(CurveRep((ONE, z, z * z)))
    with pytest.raises(DegenerateCurveError):
        select_psi(flat, HyperplaneSet.from_vectors([(1, 0, 0), (0, 1, 0)]))


def test_degeneracy_agrees_with_rank_on_random_curves(rng, random_poly, z):
    planted = free = 0
    for trial in range(120):
        k = 1 + trial % 3
        comps = [random_poly(max_degree=3) for _ in range(k + 1)]
        dependent = trial % 2 == 0
        if dependent:
            coeffs = [GaussianRational(rng.randint(-3, 3), rng.randint(-2, 2)) for _ in range(k)]
            comps[k] = sum((c.scale(a) for c, a in zip(comps[:k], coeffs)), LaurentPoly.zero())
        else:
            # distinct top exponents above every random support keep the components independent
            comps = [c + z ** (4 + i) for i, c in enumerate(comps)]
        curve = CurveRep(tuple(comps))
        _, rows = coefficient_matrix(curve.components)
        deficient = matrix_rank(rows) < k + 1
        assert deficient == dependent
        assert wronskian(curve.components).is_zero() == deficient
        assert is_degenerate(curve) == deficient
        planted += dependent
        free += not dependent
    assert planted == 60 and free == 60


def test_contact_functions(veronese_curve):
    H = Hyperplane((9, -6, 1))
    lad = ladder(veronese_curve)
    assert float(ladder_norm(lad, 0, 2)) == pytest.approx(float(norm_at(veronese_curve, 2)))
    assert float(norm_at(veronese_curve, 2)) == pytest.approx(21 ** 0.5)
    # |(2 - 3)^2|^2 / (|H|^2 |F|^2)
    assert contact_eval(veronese_curve, H, 0, 2) == pytest.approx(1 / (118 * 21))
    assert contact_eval(veronese_curve, H, 0, 3) == pytest.approx(0.0, abs=1e-30)
    for p in range(3):
        assert 0 <= contact_eval(veronese_curve, H, p, 0.7 + 0.2j) <= 1 + 1e-12
    with pytest.raises(InvalidIndexError):
        contact_norm(veronese_curve, H, 3, 1)
