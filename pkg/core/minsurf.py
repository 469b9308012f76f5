"""
core/minsurf.py

Minimal-surface inputs on an annular end A = {1/r < |z| < r}.

Provides:
- SurfaceData: the derivative data G = dx/dz as a CurveRep (Weierstrass or direct)
- AnnularEnd with the optional sub-annular end {t <= |z| < r}
- check_isotropy, check_immersion, nondegeneracy_rank, project_to_pk
- ramification_profile: m_j per hyperplane, per-hyperplane root census on a thread pool
- induced_metric_eval / InducedMetric: ds = sqrt(2)|G||dz|
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from mpmath import mp

from core.errors import (
    DegenerateCurveError,
    HypothesisError,
    InternalConsistencyError,
    ZeroPolynomialError,
)
from core.exactnum import (
    DEFAULT_PRECISION,
    DEFAULT_ROOT_TOLERANCE,
    I,
    GaussianRational,
    LaurentPoly,
    RootInfo,
    coefficient_matrix,
    evaluate,
    format_rational,
    gcd,
    parse_rational,
    roots_in_annulus,
    row_echelon,
    working_precision,
)
from core.position import DEFAULT_MAX_WORKERS, Hyperplane, HyperplaneSet
from core.wronskian import CurveRep, pairing

logger = logging.getLogger(__name__)

MIN_ORDER = "min-order"
LIMINF = "liminf"
MODES = (MIN_ORDER, LIMINF)

Multiplicity = Union[int, float]


@dataclass(frozen=True)
class SurfaceData:
    G: CurveRep
    m: int
    source: str = "components"

    @classmethod
    def from_components(cls, components: Sequence[LaurentPoly], source: str = "components") -> "SurfaceData":
        curve = CurveRep(tuple(components)).reduced()
        return cls(curve, len(curve), source)

    def to_json(self) -> Dict:
        return {"m": self.m, "source": self.source, "components": self.G.to_json()}


def from_weierstrass(f: LaurentPoly, g: LaurentPoly) -> SurfaceData:
    """G = (f(1-g^2)/2, i f(1+g^2)/2, f g), reduced."""
    if f.is_zero():
        raise ZeroPolynomialError("Weierstrass data needs f != 0")
    half = Fraction(1, 2)
    g2 = g * g
    comps = (
        (f * (1 - g2)).scale(half),
        (f * (1 + g2)).scale(I * half),
        f * g,
    )
    s = SurfaceData.from_components(comps, source="weierstrass")
    if not check_isotropy(s):
        raise InternalConsistencyError("Weierstrass data produced a non-isotropic curve")
    return s


def check_isotropy(s: SurfaceData) -> bool:
    total = LaurentPoly.zero()
    for gi in s.G.components:
        total = total + gi * gi
    return total.is_zero()


@dataclass(frozen=True)
class AnnularEnd:
    r: Fraction
    t: Optional[Fraction] = None

    def __post_init__(self):
        r = parse_rational(self.r)
        if r <= 1:
            raise HypothesisError(f"annulus radius must exceed 1, got {r}")
        object.__setattr__(self, "r", r)
        if self.t is not None:
            t = parse_rational(self.t)
            if not 1 / r < t < r:
                raise HypothesisError(f"sub-annulus parameter t={t} must lie in (1/r, r) = ({1 / r}, {r})")
            object.__setattr__(self, "t", t)

    @property
    def inner(self) -> Fraction:
        """Inner radius of the working region: t when a sub-annular end is chosen, else 1/r."""
        return self.t if self.t is not None else 1 / self.r

    def rescaling(self) -> Tuple[Fraction, Fraction]:
        """
        (c, s^2) with c = t*r and s^2 = r/t: xi = z / sqrt(c) maps the sub-annular
        end onto {1/s <= |xi| < s}.
        """
        if self.t is None:
            return Fraction(1), self.r * self.r
        return self.t * self.r, self.r / self.t

    def contains(self, z: complex) -> bool:
        return float(self.inner) < abs(z) < float(self.r)

    @classmethod
    def from_json(cls, data) -> "AnnularEnd":
        t = data.get("t")
        return cls(parse_rational(data["r"]), parse_rational(t) if t is not None else None)

    def to_json(self) -> Dict:
        out = {"r": format_rational(self.r)}
        if self.t is not None:
            out["t"] = format_rational(self.t)
        return out


def check_immersion(
    s: SurfaceData,
    a: AnnularEnd,
    strict: bool = False,
    tolerance: float = DEFAULT_ROOT_TOLERANCE,
) -> bool:
    """No common zero of the components on the closed working annulus."""
    g = None
    for c in s.G.components:
        if not c.is_zero():
            g = c if g is None else gcd(g, c)
    g = gcd(g, LaurentPoly.zero())
    if g.is_constant():
        return True
    roots = roots_in_annulus(g, a.r, tolerance=tolerance, strict=strict, inner=a.inner)
    # uncertified roots sit on a boundary circle, which belongs to the closed annulus
    if roots:
        logger.info("common zero(s) of G at %s", [r.value for r in roots])
    return not roots


def nondegeneracy_rank(s: SurfaceData) -> int:
    _, rows = coefficient_matrix(s.G.components)
    rank = len(row_echelon(rows)[1])
    if rank == 0:
        raise ZeroPolynomialError("zero map")
    return rank - 1


def project_to_pk(s: SurfaceData, hs: HyperplaneSet) -> Tuple[CurveRep, HyperplaneSet]:
    """
    Rewrite G in an echelon basis b_0..b_k of its span and transform the hyperplanes
    so that every pairing G(H_j) is unchanged:
      g_i = sum_a T[i][a] b_a,  c'_a = sum_i c_i conj(T[i][a]).
    """
    if hs.m != s.m:
        raise HypothesisError(f"hyperplanes live in P^{hs.m - 1}, the surface in P^{s.m - 1}")
    exps, rows = coefficient_matrix(s.G.components)
    basis_rows, pivots = row_echelon(rows)
    k = len(pivots) - 1
    if k < 1:
        raise HypothesisError(f"the Gauss map spans P^{k}; the theorem needs 1 <= k")
    basis = [LaurentPoly({e: c for e, c in zip(exps, row)}) for row in basis_rows]
    T = [[rows[i][col] for col in pivots] for i in range(s.m)]

    curve = CurveRep(tuple(basis))
    projected = []
    for H in hs:
        coeffs = []
        for a in range(k + 1):
            acc = GaussianRational(0)
            for i in range(s.m):
                acc = acc + H.coeffs[i] * T[i][a].conjugate()
            coeffs.append(acc)
        if not any(coeffs):
            raise DegenerateCurveError(f"hyperplane {H.label} contains the Gauss map")
        H2 = Hyperplane(tuple(coeffs), H.label)
        if pairing(curve, H2) != pairing(s.G, H):
            raise InternalConsistencyError(f"projection changed the pairing with {H.label}")
        projected.append(H2)
    logger.info("projected the Gauss map to P^%d (basis exponents %s)", k, exps)
    return curve, HyperplaneSet(projected)


@dataclass(frozen=True)
class RamificationProfile:
    """
    min_order[j]: least zero multiplicity of G(H_j) on the working annulus (math.inf if none)
    census[j]: located roots (certified flag included)
    finitely_many[j]: whether G(H_j) has finitely many zeros there (always, for polynomial data)
    """
    min_order: Tuple[Multiplicity, ...]
    census: Tuple[Tuple[RootInfo, ...], ...]
    finitely_many: Tuple[bool, ...]
    annulus: Optional[AnnularEnd] = None
    ambient_m: Optional[int] = None

    @property
    def q(self) -> int:
        return len(self.min_order)

    def multiplicities(self, mode: str = MIN_ORDER) -> Tuple[Multiplicity, ...]:
        if mode == MIN_ORDER:
            return self.min_order
        if mode == LIMINF:
            # a hyperplane hit finitely often counts as never hit
            return tuple(math.inf if fin else m for m, fin in zip(self.min_order, self.finitely_many))
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")

    def restrict(self, kept: Sequence[int]) -> "RamificationProfile":
        return RamificationProfile(
            tuple(self.min_order[j] for j in kept),
            tuple(self.census[j] for j in kept),
            tuple(self.finitely_many[j] for j in kept),
            self.annulus,
            self.ambient_m,
        )

    @classmethod
    def from_multiplicities(cls, ms: Sequence[Multiplicity], ambient_m: Optional[int] = None) -> "RamificationProfile":
        ms = tuple(m if m == math.inf else int(m) for m in ms)
        return cls(ms, tuple(() for _ in ms), tuple(True for _ in ms), None, ambient_m)

    def to_json(self) -> Dict:
        return {
            "min_order": [format_multiplicity(m) for m in self.min_order],
            "finitely_many": list(self.finitely_many),
            "census": [[r.to_json() for r in roots] for roots in self.census],
        }


def format_multiplicity(m: Multiplicity) -> Union[int, str]:
    return "inf" if m == math.inf else int(m)


def ramification_profile(
    s: Union[SurfaceData, CurveRep],
    hs: HyperplaneSet,
    a: AnnularEnd,
    strict: bool = False,
    tolerance: float = DEFAULT_ROOT_TOLERANCE,
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> RamificationProfile:
    curve = s.G if isinstance(s, SurfaceData) else s
    pairings = [pairing(curve, H) for H in hs]
    for H, p in zip(hs, pairings):
        if p.is_zero():
            raise DegenerateCurveError(f"hyperplane {H.label} contains the curve")

    def _census(p: LaurentPoly) -> List[RootInfo]:
        return roots_in_annulus(p, a.r, tolerance=tolerance, strict=strict, inner=a.inner)

    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        censuses = list(ex.map(_census, pairings))

    mins = []
    for H, roots in zip(hs, censuses):
        m = min((ri.multiplicity for ri in roots), default=math.inf)
        logger.debug("hyperplane %s: %d root(s) in the annulus, m=%s", H.label, len(roots), m)
        mins.append(m)
    return RamificationProfile(
        tuple(mins),
        tuple(tuple(c) for c in censuses),
        tuple(True for _ in pairings),
        a,
        len(curve),
    )


def induced_metric_eval(s: SurfaceData, z, precision: int = DEFAULT_PRECISION) -> float:
    """2 * sum |g_i(z)|^2, the coefficient of |dz|^2 in ds^2."""
    with working_precision(precision):
        total = sum(abs(evaluate(g, z, precision)) ** 2 for g in s.G.components)
        return float(2 * total)


class InducedMetric:
    """ds = sqrt(2)|G||dz| as a log-density field for path-length probes."""

    def __init__(self, s: SurfaceData, precision: int = DEFAULT_PRECISION):
        self.surface = s
        self.precision = precision

    def log_density(self, z):
        with working_precision(self.precision):
            total = sum(abs(evaluate(g, z, self.precision)) ** 2 for g in self.surface.G.components)
            return mp.log(2 * total) / 2

    def singular_points(self) -> List[complex]:
        return []
