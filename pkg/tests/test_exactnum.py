import math
from fractions import Fraction

import pytest
import sympy
from mpmath import mp
from sympy.polys.domains import QQ_I

from core.errors import (
    BoundaryAmbiguityError,
    RationalParseError,
    SingularPointError,
    ZeroPolynomialError,
)
from core.exactnum import (
    ONE,
    GaussianRational,
    LaurentPoly,
    all_roots,
    coprime_basis,
    derivative,
    evaluate,
    evaluate_array,
    exact_div,
    format_rational,
    gcd,
    matrix_rank,
    min_zero_multiplicity,
    parse_rational,
    from_sympy_poly,
    row_echelon,
    to_sympy_poly,
    roots_in_annulus,
    squarefree,
    substitute_inverse,
    working_precision,
)


def test_parse_rational_accepts_fractions_and_integers():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("-2") == Fraction(-2)
    assert parse_rational(" 10/4") == Fraction(5, 2)
    assert format_rational(Fraction(-6, 4)) == "-3/2"
    assert format_rational(Fraction(7)) == "7"


def test_parse_rational_reports_position():
    with pytest.raises(RationalParseError) as exc:
        parse_rational("3/x")
    assert exc.value.position == 1
    with pytest.raises(RationalParseError) as exc:
        parse_rational("1/0")
    assert exc.value.position == 2
    with pytest.raises(RationalParseError):
        parse_rational(True)


def test_gaussian_arithmetic():
    a = GaussianRational(1, 2)
    b = GaussianRational(3, -1)
    assert a * b == GaussianRational(5, 5)
    assert (a * b) / b == a
    assert a.conjugate().conjugate() == a
    assert a.abs2() == 5
    assert GaussianRational(0, 1) ** 2 == GaussianRational(-1)
    assert complex(GaussianRational(Fraction(1, 2), -3)) == complex(0.5, -3)


def test_gaussian_is_immutable():
    a = GaussianRational(1, 1)
    with pytest.raises(AttributeError):
        a.re = Fraction(2)


def test_laurent_drops_zero_coefficients(z):
    p = LaurentPoly({0: 1, 1: 0, -2: 3})
    assert p.terms() == ((-2, GaussianRational(3)), (0, ONE))
    assert p.order == -2 and p.degree == 0
    assert LaurentPoly.zero().is_zero()
    with pytest.raises(ZeroPolynomialError):
        LaurentPoly.zero().degree
    assert (z - z).is_zero()


def test_laurent_negative_powers_only_for_monomials(z):
    m = LaurentPoly.monomial(2, 3)
    assert m ** -1 == LaurentPoly.monomial(Fraction(1, 2), -3)
    with pytest.raises(ValueError):
        (z + 1) ** -1


def test_derivative_and_inverse_substitution(z):
    p = LaurentPoly({-2: 1, 3: GaussianRational(0, 1)})
    assert derivative(p) == LaurentPoly({-3: -2, 2: GaussianRational(0, 3)})
    assert substitute_inverse(substitute_inverse(p)) == p
    assert substitute_inverse(z) == LaurentPoly.monomial(1, -1)
    assert derivative(LaurentPoly.constant(5)).is_zero()


def test_gcd_strips_monomial_units(z):
    a = (z - 1) * (z + 2)
    b = (z - 1) * (z - 3)
    assert gcd(a, b) == z - 1
    assert gcd(z, z ** 3).is_constant()
    assert gcd(a, LaurentPoly.zero()) == a.scale(ONE / a.leading_coefficient)
    with pytest.raises(ZeroPolynomialError):
        gcd(LaurentPoly.zero(), LaurentPoly.zero())


def test_exact_div_raises_on_remainder(z):
    assert exact_div((z - 1) * (z + 1), z + 1) == z - 1
    with pytest.raises(ArithmeticError):
        exact_div(z * z + 1, z - 1)


def test_squarefree_reconstructs_input(z):
    i = GaussianRational(0, 1)
    p = LaurentPoly.monomial(3, -2) * (z - 1) ** 2 * (z + i) * z
    dec = squarefree(p)
    assert dec.expand() == p
    assert (z - 1, 2) in dec.parts
    assert (z + i, 1) in dec.parts
    assert dec.min_multiplicity() == 1
    assert squarefree(LaurentPoly.monomial(4, -3)).min_multiplicity() == math.inf


def test_squarefree_matches_sympy(random_poly, to_sympy):
    for _ in range(20):
        base = random_poly(max_degree=2, allow_negative=False)
        extra = random_poly(max_degree=2, allow_negative=False)
        p = base * base * extra
        dec = squarefree(p)
        assert dec.expand() == p
        assert sympy.expand(to_sympy(dec.expand()) - to_sympy(p)) == 0
        for f, _ in dec.parts:
            assert gcd(f, derivative(f)).is_constant()


def test_coprime_basis_reconstructs_every_input(z):
    polys = [(z - 1) ** 2 * (z + 1), (z + 1) * (z - 2), (z - 2) ** 3, LaurentPoly.monomial(5, -1) * (z - 1)]
    cb = coprime_basis(polys)
    for i, p in enumerate(polys):
        assert cb.reconstruct(i) == p
    for a in range(len(cb.basis)):
        for b in range(a + 1, len(cb.basis)):
            assert gcd(cb.basis[a], cb.basis[b]).is_constant()
    with pytest.raises(ZeroPolynomialError):
        coprime_basis([z, LaurentPoly.zero()])


def test_product_matches_sympy(random_poly, to_sympy):
    for _ in range(30):
        p, q = random_poly(), random_poly()
        assert sympy.expand(to_sympy(p * q) - to_sympy(p) * to_sympy(q)) == 0


def test_evaluate_exact_values(z):
    p = z * z + 1
    assert evaluate(p, 2) == 5
    q = LaurentPoly.monomial(1, -1) + z
    with working_precision(128):
        assert abs(evaluate(q, mp.mpc(0, 1))) < mp.mpf(10) ** -30
    with pytest.raises(SingularPointError):
        evaluate(q, 0)
    arr = evaluate_array(p, [0, 1j, 2])
    assert arr[0] == 1 and abs(arr[1]) < 1e-15 and arr[2] == 5


def test_roots_in_annulus_with_multiplicity(z):
    p = (z - 1) ** 2 * (z - 3) * z
    roots = roots_in_annulus(p, 2)
    assert len(roots) == 1
    assert roots[0].multiplicity == 2
    assert roots[0].certified and roots[0].inside
    assert abs(roots[0].value - 1) < 1e-12
    assert min_zero_multiplicity(p, 2) == 2
    assert min_zero_multiplicity(z - 3, 2) == math.inf


def test_roots_in_annulus_quadratic_newton(z):
    # roots 1/2 +- i sqrt(3)/2 on the unit circle, well inside 1/2 < |z| < 2
    roots = roots_in_annulus(z * z - z + 1, 2)
    assert len(roots) == 2
    for ri in roots:
        assert abs(abs(ri.value) - 1) < 1e-12
        assert ri.certified


def test_boundary_root_is_ambiguous(z):
    roots = roots_in_annulus(z - 2, 2)
    assert len(roots) == 1 and not roots[0].certified
    with pytest.raises(BoundaryAmbiguityError) as exc:
        roots_in_annulus(z - 2, 2, strict=True)
    assert len(exc.value.roots) == 1


def test_roots_in_sub_annulus(z):
    p = (z - Fraction(3, 4)) * (z - Fraction(3, 2))
    assert len(roots_in_annulus(p, 2)) == 2
    assert len(roots_in_annulus(p, 2, inner=1)) == 1


def test_all_roots_lists_distinct_roots(z):
    roots = sorted(all_roots((z - 1) ** 3 * (z + 2)), key=lambda r: r.real)
    assert len(roots) == 2
    assert abs(roots[0] + 2) < 1e-12 and abs(roots[1] - 1) < 1e-12


def test_matrix_rank_matches_sympy(rng):
    for _ in range(20):
        rows = [[rng.randint(-2, 2) for _ in range(4)] for _ in range(rng.randint(1, 4))]
        if rng.random() < 0.5 and len(rows) > 1:
            rows.append([a + b for a, b in zip(rows[0], rows[1])])
        assert matrix_rank(rows) == sympy.Matrix(rows).rank()


def test_sympy_poly_bridge(z):
    i = GaussianRational(0, 1)
    p = (z - i) * (z + Fraction(1, 2))
    poly = to_sympy_poly(p)
    assert poly.get_domain() == QQ_I
    assert poly.degree() == 2
    assert from_sympy_poly(poly) == p
    with pytest.raises(ValueError):
        to_sympy_poly(LaurentPoly.monomial(1, -1) + z)


def test_gcd_keeps_planted_common_factor(random_poly, z):
    i = GaussianRational(0, 1)
    common = z * z + z.scale(i) + 3
    for _ in range(20):
        a = random_poly(max_degree=2, allow_negative=False)
        b = random_poly(max_degree=2, allow_negative=False)
        g = gcd(a * common, b * common)
        assert g.leading_coefficient == ONE
        exact_div(g, common)
        assert gcd(exact_div(a * common, g), exact_div(b * common, g)).is_constant()


def test_row_echelon_over_gaussian_rationals():
    i = GaussianRational(0, 1)
    rows, pivots = row_echelon([[1, i], [i, -1]])
    assert pivots == [0]
    assert rows == [[ONE, i]]
    assert matrix_rank([[1, i, 0], [0, 1, i], [1, i + 1, i]]) == 2
    assert row_echelon([]) == ([], [])
