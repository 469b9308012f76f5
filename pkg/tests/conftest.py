import random
from fractions import Fraction

import pytest
import sympy

from core.exactnum import GaussianRational, LaurentPoly
from core.minsurf import AnnularEnd, from_weierstrass
from core.position import HyperplaneSet
from core.wronskian import CurveRep

Z = LaurentPoly.z()
ONE = LaurentPoly.constant(1)

# roots of the pairings (z - a)^2, all outside the annulus of radius 2
SEVEN_POINTS = (3, -3, 4, -4, 5, -5, 6)


@pytest.fixture
def z():
    return Z


@pytest.fixture
def catenoid():
    """Catenoid with f = 2/z^2, g = z; G reduces to (1 - z^2, i(1 + z^2), 2z)."""
    return from_weierstrass(LaurentPoly.monomial(2, -2), Z)


@pytest.fixture
def catenoid_rep():
    i = GaussianRational(0, 1)
    return CurveRep((ONE - Z * Z, (ONE + Z * Z).scale(i), Z.scale(2)))


@pytest.fixture
def coordinate_hyperplanes():
    return HyperplaneSet.from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)], ["x1", "x2", "x3", "diag"])


@pytest.fixture
def seven_omitted():
    """Hyperplanes whose catenoid pairings are 2(z - a)^2."""
    return HyperplaneSet.from_vectors(
        [(a * a - 1, GaussianRational(0, a * a + 1), -2 * a) for a in SEVEN_POINTS]
    )


@pytest.fixture
def veronese_curve():
    return CurveRep((ONE, Z, Z * Z))


@pytest.fixture
def veronese_seven():
    """Hyperplanes whose pairings with (1, z, z^2) are (z - a)^2."""
    return HyperplaneSet.from_vectors([(a * a, -2 * a, 1) for a in SEVEN_POINTS])


@pytest.fixture
def line_curve():
    return CurveRep((ONE, Z))


@pytest.fixture
def five_points():
    """Pairings with (1, z) vanish at 3, -3, 3i, -3i, 4."""
    return HyperplaneSet.from_vectors(
        [(-3, 1), (3, 1), (GaussianRational(0, 3), 1), (GaussianRational(0, -3), 1), (-4, 1)]
    )


@pytest.fixture
def double_point_curve():
    return CurveRep((ONE, (Z - 1) * (Z - 1)))


@pytest.fixture
def double_point_hyperplanes():
    """Pairings 1, (z-1)^2, (z-1)^2 - 16, (z-1)^2 + 16, (z-1)^2 + 9."""
    return HyperplaneSet.from_vectors([(1, 0), (0, 1), (-16, 1), (16, 1), (9, 1)])


@pytest.fixture
def paired_points():
    """Six points of P^1 in three coincident pairs."""
    return HyperplaneSet.from_vectors([(1, 0), (1, 0), (0, 1), (0, 1), (1, 1), (1, 1)])


@pytest.fixture
def annulus():
    return AnnularEnd(Fraction(2))


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def random_poly(rng):
    def _make(max_degree=3, low=-2, high=2, allow_negative=True):
        lo = rng.randint(-2, 0) if allow_negative else 0
        coeffs = {}
        for e in range(lo, lo + rng.randint(0, max_degree) + 1):
            coeffs[e] = GaussianRational(rng.randint(low, high), rng.randint(low, high))
        p = LaurentPoly(coeffs)
        return p if not p.is_zero() else LaurentPoly.monomial(1, lo)
    return _make


@pytest.fixture
def to_sympy():
    zs = sympy.Symbol("z")

    def _convert(p: LaurentPoly):
        return sum(
            (sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator))
            * zs ** e
            for e, c in p.terms()
        ) if not p.is_zero() else sympy.Integer(0)

    _convert.symbol = zs
    return _convert
