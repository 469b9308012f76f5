"""
core/exactnum.py

Exact arithmetic core.

Provides:
- GaussianRational: exact complex numbers with Fraction real/imaginary parts
- LaurentPoly: finitely supported exponent -> GaussianRational maps (holomorphic data on C*)
- derivative, substitute_inverse, and gcd / squarefree / coprime_basis through sympy Poly over QQ_I
- evaluate (mpmath, configurable working precision) and evaluate_array (numpy, float64)
- roots_in_annulus / min_zero_multiplicity: companion-matrix eigenvalues refined by
  Newton iteration, with a boundary certificate against the annulus circles
- row_echelon / matrix_rank: sympy DomainMatrix rref over QQ_I

Conventions:
- Monomials c*z^k are units of the Laurent ring. gcd strips them entirely; squarefree
  and coprime_basis keep a positive power of z as an ordinary factor and only move
  negative powers into the unit, so region filters are responsible for excluding 0.
- Every value is immutable after construction.
"""
import logging
import math
import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from mpmath import mp
from sympy import Poly, Symbol
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from core.errors import (
    BoundaryAmbiguityError,
    RationalParseError,
    SingularPointError,
    ZeroPolynomialError,
)

logger = logging.getLogger(__name__)

# Working precision (bits) for every float evaluation
DEFAULT_PRECISION = 128
# Distance to |z| = r or |z| = 1/r below which a root is not certified
DEFAULT_ROOT_TOLERANCE = 1e-9
# Newton iteration cap during root refinement
_NEWTON_MAX_ITER = 80

_RATIONAL_RE = re.compile(r"([+-]?)(\d+)(?:/(\d+))?")

# mpmath keeps its precision on a process-wide context
_MP_LOCK = threading.RLock()


@contextmanager
def working_precision(bits: int = DEFAULT_PRECISION) -> Iterator[None]:
    """Serialise mpmath work at `bits` of precision across threads."""
    with _MP_LOCK, mp.workprec(bits):
        yield


# --- rationals ---------------------------------------------------------------

def parse_rational(value: Union[str, int, Fraction]) -> Fraction:
    """
    Parse "p/q" (or "p") into a Fraction. Ints and Fractions pass through.
    Raises RationalParseError carrying the index of the first offending character.
    """
    if isinstance(value, bool):
        raise RationalParseError("booleans are not rationals", str(value), 0)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if not isinstance(value, str):
        raise RationalParseError(f"expected a rational string, got {type(value).__name__}", str(value), 0)
    text = value.strip()
    offset = len(value) - len(value.lstrip())
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise RationalParseError(f"malformed rational {value!r} at position {offset}", value, offset)
    if m.end() != len(text):
        pos = offset + m.end()
        raise RationalParseError(f"malformed rational {value!r} at position {pos}", value, pos)
    sign, num, den = m.groups()
    if den is not None and int(den) == 0:
        pos = offset + m.start(3)
        raise RationalParseError(f"zero denominator in {value!r} at position {pos}", value, pos)
    out = Fraction(int(num), int(den) if den is not None else 1)
    return -out if sign == "-" else out


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _mpf(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


# --- Gaussian rationals ------------------------------------------------------

class GaussianRational:
    """Exact element re + i*im of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction] = 0, im: Union[int, Fraction] = 0):
        object.__setattr__(self, "re", re if type(re) is Fraction else Fraction(re))
        object.__setattr__(self, "im", im if type(im) is Fraction else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, value: "GaussianLike") -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return cls(value, 0)
        if isinstance(value, complex):
            # only Gaussian integers survive an exact conversion from complex
            if value.real.is_integer() and value.imag.is_integer():
                return cls(int(value.real), int(value.imag))
        raise TypeError(f"cannot convert {value!r} to an exact Gaussian rational")

    @classmethod
    def from_json(cls, data) -> "GaussianRational":
        if isinstance(data, dict):
            return cls(parse_rational(data.get("re", 0)), parse_rational(data.get("im", 0)))
        return cls(parse_rational(data), 0)

    def to_json(self) -> Dict[str, str]:
        return {"re": format_rational(self.re), "im": format_rational(self.im)}

    # arithmetic
    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ONE / (self ** (-n))
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_mpc(self):
        return mp.mpc(_mpf(self.re), _mpf(self.im))

    def __repr__(self):
        return f"GaussianRational({format_rational(self.re)}, {format_rational(self.im)})"

    def __str__(self):
        if self.im == 0:
            return format_rational(self.re)
        if self.re == 0:
            return f"{format_rational(self.im)}i"
        sign = "+" if self.im > 0 else "-"
        return f"({format_rational(self.re)}{sign}{format_rational(abs(self.im))}i)"


GaussianLike = Union[GaussianRational, int, Fraction]

ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)
I = GaussianRational(0, 1)


# --- Laurent polynomials -----------------------------------------------------

class LaurentPoly:
    """
    Finitely supported map exponent -> GaussianRational, i.e. sum c_e z^e.
    Zero coefficients are never stored; the zero polynomial has empty support.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, coeffs: Optional[Dict[int, GaussianLike]] = None):
        terms = []
        for e, c in (coeffs or {}).items():
            g = GaussianRational.coerce(c)
            if g:
                terms.append((int(e), g))
        terms.sort(key=lambda t: t[0])
        object.__setattr__(self, "_terms", tuple(terms))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentPoly is immutable")

    @classmethod
    def _from_terms(cls, terms: Dict[int, GaussianRational]) -> "LaurentPoly":
        # caller guarantees GaussianRational values; zeros are dropped here
        return cls({e: c for e, c in terms.items() if c})

    # constructors
    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls()

    @classmethod
    def constant(cls, c: GaussianLike) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, c: GaussianLike, exponent: int) -> "LaurentPoly":
        return cls({exponent: c})

    @classmethod
    def z(cls) -> "LaurentPoly":
        return cls({1: 1})

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[GaussianLike], low: int = 0) -> "LaurentPoly":
        """Ascending coefficients starting at exponent `low`."""
        return cls({low + i: c for i, c in enumerate(coeffs)})

    @classmethod
    def from_roots(cls, roots: Sequence[GaussianLike], lead: GaussianLike = 1) -> "LaurentPoly":
        out = cls.constant(lead)
        for r in roots:
            out = out * cls({1: 1, 0: -GaussianRational.coerce(r)})
        return out

    @classmethod
    def from_json(cls, data) -> "LaurentPoly":
        if not isinstance(data, list):
            raise TypeError("a Laurent polynomial is a list of {pow, c} terms")
        acc: Dict[int, GaussianRational] = {}
        for term in data:
            e = term["pow"]
            if isinstance(e, bool) or not isinstance(e, int):
                raise TypeError(f"exponent must be an integer, got {e!r}")
            acc[e] = acc.get(e, ZERO) + GaussianRational.from_json(term["c"])
        return cls(acc)

    def to_json(self) -> List[Dict]:
        return [{"pow": e, "c": c.to_json()} for e, c in self._terms]

    # structure
    @property
    def coeffs(self) -> Dict[int, GaussianRational]:
        return dict(self._terms)

    def terms(self) -> Tuple[Tuple[int, GaussianRational], ...]:
        return self._terms

    def coefficient(self, e: int) -> GaussianRational:
        for ee, c in self._terms:
            if ee == e:
                return c
        return ZERO

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    @property
    def degree(self) -> int:
        if not self._terms:
            raise ZeroPolynomialError("degree of the zero polynomial")
        return self._terms[-1][0]

    @property
    def order(self) -> int:
        if not self._terms:
            raise ZeroPolynomialError("order of the zero polynomial")
        return self._terms[0][0]

    @property
    def leading_coefficient(self) -> GaussianRational:
        if not self._terms:
            raise ZeroPolynomialError("leading coefficient of the zero polynomial")
        return self._terms[-1][1]

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == 0)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_ordinary(self) -> bool:
        """True when no negative exponent occurs."""
        return not self._terms or self._terms[0][0] >= 0

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by z^k."""
        return LaurentPoly({e + k: c for e, c in self._terms})

    def scale(self, c: GaussianLike) -> "LaurentPoly":
        g = GaussianRational.coerce(c)
        return LaurentPoly({e: v * g for e, v in self._terms})

    # arithmetic
    def __add__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        acc = dict(self._terms)
        for e, c in o._terms:
            acc[e] = acc[e] + c if e in acc else c
        return LaurentPoly._from_terms(acc)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self._terms})

    def __sub__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        acc: Dict[int, GaussianRational] = {}
        for e1, c1 in self._terms:
            for e2, c2 in o._terms:
                e = e1 + e2
                v = c1 * c2
                acc[e] = acc[e] + v if e in acc else v
        return LaurentPoly._from_terms(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if not self.is_monomial():
                raise ValueError("only monomials have Laurent inverses")
            (e, c), = self._terms
            return LaurentPoly({-e * (-n): ONE / (c ** (-n))})
        out, base = LaurentPoly.constant(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self._terms))
        return self._hash

    def sort_key(self):
        """Deterministic total order used to sort factor lists."""
        if not self._terms:
            return (-1, ())
        return (self.degree - self.order, self.degree, tuple((e, c.re, c.im) for e, c in self._terms))

    def __repr__(self):
        return f"LaurentPoly({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in reversed(self._terms):
            if e == 0:
                parts.append(str(c))
            elif e == 1:
                parts.append(f"{c}*z")
            else:
                parts.append(f"{c}*z^{e}")
        return " + ".join(parts)


def _as_poly(value) -> Optional[LaurentPoly]:
    if isinstance(value, LaurentPoly):
        return value
    try:
        return LaurentPoly.constant(GaussianRational.coerce(value))
    except TypeError:
        return None


# --- calculus and substitution ----------------------------------------------

def derivative(p: LaurentPoly) -> LaurentPoly:
    """Term-wise exact derivative d/dz."""
    return LaurentPoly({e - 1: c * e for e, c in p.terms() if e != 0})


def substitute_inverse(p: LaurentPoly) -> LaurentPoly:
    """p(1/z): negate every exponent. An involution."""
    return LaurentPoly({-e: c for e, c in p.terms()})


# --- sympy bridge (ordinary polynomials, order >= 0) -------------------------

_Z = Symbol("z")


def _to_qqi(c: GaussianRational):
    return QQ_I(QQ(c.re.numerator, c.re.denominator), QQ(c.im.numerator, c.im.denominator))


def _from_qqi(a) -> GaussianRational:
    return GaussianRational(
        Fraction(int(a.x.numerator), int(a.x.denominator)),
        Fraction(int(a.y.numerator), int(a.y.denominator)),
    )


def to_sympy_poly(p: LaurentPoly) -> Poly:
    """p as a sympy Poly in z over QQ_I; negative exponents are rejected."""
    if not p.is_ordinary():
        raise ValueError(f"{p} has negative exponents; shift it before converting")
    rep = {(e,): _to_qqi(c) for e, c in p.terms()}
    return Poly.from_dict(rep or {(0,): QQ_I.zero}, _Z, domain=QQ_I)


def from_sympy_poly(poly: Poly) -> LaurentPoly:
    return LaurentPoly._from_terms({m[0]: _from_qqi(c) for m, c in poly.as_dict(native=True).items()})


def _split_monomial(p: LaurentPoly) -> Tuple[int, LaurentPoly]:
    """p = z^s * P with P(0) != 0."""
    s = p.order
    return s, p.shift(-s)


def _monic(p: LaurentPoly) -> LaurentPoly:
    lc = p.leading_coefficient
    if lc == ONE:
        return p
    return p.scale(ONE / lc)


def _poly_divmod(a: LaurentPoly, b: LaurentPoly) -> Tuple[LaurentPoly, LaurentPoly]:
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return LaurentPoly(), LaurentPoly()
    q, r = to_sympy_poly(a).div(to_sympy_poly(b))
    return from_sympy_poly(q), from_sympy_poly(r)


def exact_div(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """a / b for ordinary polynomials; raises ArithmeticError on a nonzero remainder."""
    q, r = _poly_divmod(a, b)
    if not r.is_zero():
        raise ArithmeticError(f"{b} does not divide {a}")
    return q


def _poly_gcd(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Monic gcd of ordinary polynomials (z is NOT treated as a unit)."""
    if a.is_zero() and b.is_zero():
        raise ZeroPolynomialError("gcd(0, 0) is undefined")
    if b.is_zero():
        return _monic(a)
    if a.is_zero():
        return _monic(b)
    return _monic(from_sympy_poly(to_sympy_poly(a).gcd(to_sympy_poly(b))))


# --- gcd / square-free / coprime basis ---------------------------------------

def gcd(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """
    Monic gcd in the Laurent ring: monomial units are stripped from both inputs
    first, so gcd(z, z^3) == 1.
    """
    if p.is_zero() and q.is_zero():
        raise ZeroPolynomialError("gcd(0, 0) is undefined")
    pp = _split_monomial(p)[1] if p else p
    qq = _split_monomial(q)[1] if q else q
    return _poly_gcd(pp, qq)


@dataclass(frozen=True)
class SquareFreeDecomposition:
    """
    parts: (monic square-free factor, multiplicity) pairs, pairwise coprime, ascending multiplicity
    unit: c * z^s with s <= 0
    """
    parts: Tuple[Tuple[LaurentPoly, int], ...]
    unit: LaurentPoly

    def expand(self) -> LaurentPoly:
        out = self.unit
        for f, k in self.parts:
            out = out * (f ** k)
        return out

    def min_multiplicity(self) -> Union[int, float]:
        if not self.parts:
            return math.inf
        return min(k for _, k in self.parts)

    def to_json(self) -> Dict:
        return {
            "unit": self.unit.to_json(),
            "parts": [{"factor": f.to_json(), "multiplicity": k} for f, k in self.parts],
        }


def _ordinary_part(p: LaurentPoly) -> Tuple[int, LaurentPoly]:
    """Move only negative powers of z out: p = z^s * A with s = min(order, 0)."""
    s = min(p.order, 0)
    return s, p.shift(-s)


def squarefree(p: LaurentPoly) -> SquareFreeDecomposition:
    """Square-free decomposition over Q(i), via sympy's sqf_list."""
    if p.is_zero():
        raise ZeroPolynomialError("square-free decomposition of zero")
    s, a = _ordinary_part(p)
    unit = LaurentPoly.monomial(a.leading_coefficient, s)
    parts: List[Tuple[LaurentPoly, int]] = []
    if a.degree > 0:
        _, factors = to_sympy_poly(a).sqf_list()
        parts = sorted(
            ((_monic(from_sympy_poly(f)), k) for f, k in factors if f.degree() > 0),
            key=lambda t: (t[1], t[0].sort_key()),
        )
    logger.debug("squarefree(%s): %d part(s)", p, len(parts))
    return SquareFreeDecomposition(tuple(parts), unit)


@dataclass(frozen=True)
class CoprimeBasis:
    """
    basis: pairwise coprime monic square-free polynomials (sorted deterministically)
    exponents[i][b]: multiplicity of basis[b] in input i
    units[i]: monomial c*z^s (s <= 0) completing the reconstruction of input i
    """
    basis: Tuple[LaurentPoly, ...]
    exponents: Tuple[Tuple[int, ...], ...]
    units: Tuple[LaurentPoly, ...]

    def reconstruct(self, i: int) -> LaurentPoly:
        out = self.units[i]
        for b, e in zip(self.basis, self.exponents[i]):
            if e:
                out = out * (b ** e)
        return out


def _refine_into(basis: List[LaurentPoly], f: LaurentPoly) -> None:
    pending = [f]
    while pending:
        g = pending.pop()
        if g.is_constant():
            continue
        for idx, b in enumerate(basis):
            common = _poly_gcd(g, b)
            if not common.is_constant():
                del basis[idx]
                pending.extend([common, exact_div(b, common), exact_div(g, common)])
                break
        else:
            basis.append(_monic(g))


def coprime_basis(ps: Sequence[LaurentPoly]) -> CoprimeBasis:
    """gcd-free basis of the inputs; each input == unit * prod basis^e exactly."""
    if any(p.is_zero() for p in ps):
        raise ZeroPolynomialError("coprime basis of a zero polynomial")
    basis: List[LaurentPoly] = []
    for p in ps:
        for f, _ in squarefree(p).parts:
            _refine_into(basis, f)
    basis.sort(key=lambda b: b.sort_key())

    exponents = []
    units = []
    for p in ps:
        s, rest = _ordinary_part(p)
        sym_rest = to_sympy_poly(rest)
        row = []
        for b in basis:
            sym_b = to_sympy_poly(b)
            e = 0
            while True:
                q, r = sym_rest.div(sym_b)
                if not r.is_zero:
                    break
                sym_rest = q
                e += 1
            row.append(e)
        rest = from_sympy_poly(sym_rest)
        if not rest.is_constant():
            raise ArithmeticError(f"coprime basis does not cover {p}")
        exponents.append(tuple(row))
        units.append(rest.shift(s))
    return CoprimeBasis(tuple(basis), tuple(exponents), tuple(units))


# --- evaluation --------------------------------------------------------------

def evaluate(p: LaurentPoly, z, precision: int = DEFAULT_PRECISION):
    """
    Horner evaluation at `precision` bits; returns an mpmath mpc.
    Relative error is bounded by about 2^(-precision + log2(len(support)) + 2).
    """
    with working_precision(precision):
        zz = mp.mpc(z)
        if p.is_zero():
            return mp.mpc(0)
        if zz == 0 and p.order < 0:
            raise SingularPointError(f"cannot evaluate {p} at 0: negative exponents")
        s = p.order
        acc = mp.mpc(0)
        prev = p.degree
        for e, c in reversed(p.terms()):
            acc = acc * zz ** (prev - e) + c.to_mpc()
            prev = e
        acc = acc * zz ** (prev - s)
        if s:
            acc = acc * zz ** s
        return +acc


def numpy_coefficients(p: LaurentPoly) -> Tuple[np.ndarray, int]:
    """Descending complex128 coefficients of z^-order * p, plus the order."""
    if p.is_zero():
        return np.zeros(1, dtype=np.complex128), 0
    s = p.order
    coeffs = np.zeros(p.degree - s + 1, dtype=np.complex128)
    for e, c in p.terms():
        coeffs[p.degree - e] = complex(c)
    return coeffs, s


def evaluate_array(p: LaurentPoly, zs) -> np.ndarray:
    """Vectorised float64 evaluation for grids and paths."""
    zs = np.asarray(zs, dtype=np.complex128)
    coeffs, s = numpy_coefficients(p)
    out = np.polyval(coeffs, zs)
    if s:
        out = out * zs ** s
    return out


# --- roots on the annulus ----------------------------------------------------

@dataclass(frozen=True)
class RootInfo:
    value: complex
    multiplicity: int
    certified: bool
    inside: bool
    radius: float

    def to_json(self) -> Dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "multiplicity": self.multiplicity,
            "certified": self.certified,
            "inside": self.inside,
        }


def _refined_roots(f: LaurentPoly, precision: int) -> List[Tuple[object, float]]:
    """
    Roots of a square-free ordinary polynomial: companion-matrix eigenvalues, then
    Newton refinement at `precision` bits. Each root carries an inclusion radius
    deg * |f/f'| (a disc of that radius around it contains a true root).
    """
    d = f.degree
    if d == 1:
        return [(-(f.coefficient(0) / f.coefficient(1)), 0.0)]
    coeffs, _ = numpy_coefficients(_monic(f))
    companion = np.zeros((d, d), dtype=np.complex128)
    companion[0, :] = -coeffs[1:]
    companion[1:, :-1] = np.eye(d - 1, dtype=np.complex128)
    guesses = np.linalg.eigvals(companion)
    df = derivative(f)
    out = []
    with working_precision(precision):
        eps = mp.mpf(2) ** (-precision + 8)
        for g in guesses:
            x = mp.mpc(complex(g))
            for _ in range(_NEWTON_MAX_ITER):
                fx = evaluate(f, x, precision)
                dfx = evaluate(df, x, precision)
                if dfx == 0:
                    break
                step = fx / dfx
                x = x - step
                if abs(step) <= eps * max(1, abs(x)):
                    break
            fx = evaluate(f, x, precision)
            dfx = evaluate(df, x, precision)
            radius = float(d * abs(fx / dfx)) if dfx != 0 else math.inf
            out.append((x, radius))
    return out


def _classify(root, radius: float, inner: Fraction, outer: Fraction, tolerance: float) -> Tuple[bool, bool]:
    """(inside, certified) for a root against the open annulus inner < |z| < outer."""
    if isinstance(root, GaussianRational):
        mod2 = root.abs2()
        on_boundary = mod2 in (inner * inner, outer * outer)
        inside = inner * inner < mod2 < outer * outer
        mod = math.sqrt(float(mod2))
        dist = min(abs(mod - float(inner)), abs(mod - float(outer)))
        certified = not on_boundary and dist > tolerance
        return inside, certified
    mod = float(abs(root))
    inside = float(inner) < mod < float(outer)
    dist = min(abs(mod - float(inner)), abs(mod - float(outer)))
    return inside, dist > tolerance + radius


def roots_in_annulus(
    p: LaurentPoly,
    r: Union[Fraction, int, str],
    tolerance: float = DEFAULT_ROOT_TOLERANCE,
    strict: bool = False,
    inner: Optional[Union[Fraction, int, str]] = None,
    precision: int = DEFAULT_PRECISION,
) -> List[RootInfo]:
    """
    Zeros of p in the open annulus {inner < |z| < r} (inner defaults to 1/r), with
    multiplicities from the square-free decomposition. Roots within `tolerance` of
    either circle are returned flagged certified=False; strict mode raises instead.
    """
    if p.is_zero():
        raise ZeroPolynomialError("roots of the zero polynomial")
    r = parse_rational(r)
    if r <= 1:
        raise ValueError(f"annulus radius must exceed 1, got {r}")
    lo = parse_rational(inner) if inner is not None else 1 / r
    if not 0 < lo < r:
        raise ValueError(f"inner radius {lo} must lie in (0, {r})")

    out: List[RootInfo] = []
    for factor, mult in squarefree(p).parts:
        for root, radius in _refined_roots(factor, precision):
            inside, certified = _classify(root, radius, lo, r, tolerance)
            if inside or not certified:
                out.append(RootInfo(complex(root), mult, certified, inside, radius))
    out.sort(key=lambda ri: (ri.multiplicity, round(ri.value.real, 12), round(ri.value.imag, 12)))

    ambiguous = [ri for ri in out if not ri.certified]
    if ambiguous:
        if strict:
            raise BoundaryAmbiguityError(
                f"{len(ambiguous)} root(s) of {p} within {tolerance:g} of the annulus boundary", ambiguous
            )
        logger.warning("%d uncertified root(s) near the annulus boundary for %s", len(ambiguous), p)
    return out


def min_zero_multiplicity(
    p: LaurentPoly,
    r: Union[Fraction, int, str],
    tolerance: float = DEFAULT_ROOT_TOLERANCE,
    strict: bool = False,
    inner: Optional[Union[Fraction, int, str]] = None,
) -> Union[int, float]:
    """
    Least multiplicity among zeros in the annulus, math.inf when there are none.
    Uncertified roots (lenient mode) are counted, which can only lower the result.
    """
    roots = roots_in_annulus(p, r, tolerance=tolerance, strict=strict, inner=inner)
    if not roots:
        return math.inf
    return min(ri.multiplicity for ri in roots)


# --- exact linear algebra ----------------------------------------------------

def row_echelon(rows: Sequence[Sequence[GaussianLike]]) -> Tuple[List[List[GaussianRational]], List[int]]:
    """Reduced row echelon form over Q(i); returns (nonzero rows, pivot columns)."""
    m = [[GaussianRational.coerce(x) for x in row] for row in rows]
    if not m or not m[0]:
        return [], []
    ncols = len(m[0])
    dm = DomainMatrix([[_to_qqi(x) for x in row] for row in m], (len(m), ncols), QQ_I)
    reduced, pivots = dm.rref()
    dense = reduced.to_Matrix()
    out = [[_from_qqi(QQ_I.from_sympy(dense[i, j])) for j in range(ncols)] for i in range(len(pivots))]
    return out, list(pivots)


def matrix_rank(rows: Sequence[Sequence[GaussianLike]]) -> int:
    return len(row_echelon(rows)[1])


def coefficient_matrix(polys: Sequence[LaurentPoly]) -> Tuple[List[int], List[List[GaussianRational]]]:
    """Rows = polynomials, columns = the union of their supports (ascending exponents)."""
    exps = sorted({e for p in polys for e, _ in p.terms()})
    rows = [[p.coefficient(e) for e in exps] for p in polys]
    return exps, rows


def all_roots(p: LaurentPoly, precision: int = DEFAULT_PRECISION) -> List[complex]:
    """Every nonzero-polynomial root of p (one entry per distinct root), as complex floats."""
    out: List[complex] = []
    for factor, _ in squarefree(p).parts:
        out.extend(complex(x) for x, _ in _refined_roots(factor, precision))
    return out
