"""
core/metriclab.py

Singular flat metric laboratory.

Given a nondegenerate curve G in P^k, kept hyperplanes H_1..H_q with weights omega
and ramification m_j, the exponent pipeline fixes rationals

    sigma_p = p(p+1)/2,   tau_k = sum_{p<=k} sigma_p
    S       = sum omega(j)(1 - k/m_j),   gamma = S - (k+1),   A = gamma - sigma_k
    A/(1/q + tau_{k+1}) < eps < A/tau_{k+1}
    h       = S - (k+1) - eps*sigma_{k+1}
    rho     = (sigma_k + eps*tau_k)/h,    rho* = 1/((1-rho)h)

and the pseudo-metric d(tau) = lambda |dz| with lambda = D^rho*,

    D = prod_j |G(H_j)|^{omega(j)(1-k/m_j)} / (|F_k|^{1+eps} prod_{j, p<k} |psi_jp|^{eps/q}).

Exact parts (exponents, divisor orders over a coprime basis) are Fractions.
Numeric parts (flatness, frame comparison, probes, Schwarz monitor) use mpmath at
DEFAULT_PRECISION with numpy/scipy on the resulting float arrays.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp
from scipy.integrate import cumulative_trapezoid
from scipy.stats import linregress

from core.errors import (
    DegenerateCurveError,
    DimensionMismatchError,
    HypothesisError,
    InternalConsistencyError,
    SingularPointError,
    TheoremSatisfiedError,
)
from core.exactnum import (
    DEFAULT_PRECISION,
    LaurentPoly,
    all_roots,
    coprime_basis,
    evaluate,
    format_rational,
    roots_in_annulus,
    substitute_inverse,
    working_precision,
)
from core.minsurf import AnnularEnd, Multiplicity
from core.nochka import NochkaWeights
from core.position import HyperplaneSet
from core.wronskian import (
    CurveRep,
    PsiSelection,
    contact_norm,
    is_degenerate,
    ladder,
    ladder_norm,
    norm_at,
    pairing,
    select_psi,
    wronskian,
)

logger = logging.getLogger(__name__)

# Grid step for the discrete Laplacian
DEFAULT_FLATNESS_STEP = 1e-3
# Singular points must stay this many grid steps away from a flatness region
FLATNESS_MARGIN_STEPS = 10
# Relative tolerance for the two-frame density comparison
DEFAULT_INVARIANCE_TOLERANCE = 1e-9


# --- exponent pipeline -------------------------------------------------------

def sigma_tau(k: int) -> Tuple[Tuple[int, ...], int, int]:
    """((sigma_0, ..., sigma_{k+1}), tau_k, tau_{k+1})."""
    if k < 1:
        raise HypothesisError(f"need k >= 1, got k={k}")
    sigma = tuple(p * (p + 1) // 2 for p in range(k + 2))
    tau_k = sum(sigma[: k + 1])
    return sigma, tau_k, tau_k + sigma[k + 1]


def _check_lengths(weights: NochkaWeights, multiplicities: Sequence[Multiplicity]) -> None:
    if weights.q != len(multiplicities):
        raise DimensionMismatchError(f"{weights.q} weights for {len(multiplicities)} multiplicities")


def weighted_defect(weights: NochkaWeights, multiplicities: Sequence[Multiplicity], k: int) -> Fraction:
    """S = sum omega(j)(1 - k/m_j) with (1 - k/inf) = 1."""
    _check_lengths(weights, multiplicities)
    total = Fraction(0)
    for om, m in zip(weights.omega, multiplicities):
        if m != math.inf and m <= k:
            raise HypothesisError(f"multiplicity {m} <= k={k}; drop the hyperplane first")
        total += om if m == math.inf else om * (1 - Fraction(k, int(m)))
    return total


def gamma(weights: NochkaWeights, multiplicities: Sequence[Multiplicity], k: int) -> Fraction:
    value = weighted_defect(weights, multiplicities, k) - (k + 1)
    if value <= 0:
        logger.warning("gamma = %s <= 0: the Schwarz-type estimate does not apply", value)
    return value


def epsilon_window(
    weights: NochkaWeights,
    multiplicities: Sequence[Multiplicity],
    k: int,
    q: Optional[int] = None,
) -> Tuple[Fraction, Fraction]:
    """Open interval (A/(1/q + tau_{k+1}), A/tau_{k+1}) with A = gamma - sigma_k."""
    q = q if q is not None else weights.q
    sigma, _, tau_k1 = sigma_tau(k)
    A = gamma(weights, multiplicities, k) - sigma[k]
    if A <= 0:
        raise TheoremSatisfiedError(f"A = {A} <= 0: the inequality is not exceeded, nothing to construct")
    return A / (Fraction(1, q) + tau_k1), A / Fraction(tau_k1)


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    # Stern-Brocot descent on the open interval (lo, hi), 0 <= lo < hi
    n = math.floor(lo) + 1
    if n < hi:
        return Fraction(n)
    fl = math.floor(lo)
    if lo == fl:
        return fl + Fraction(1, math.floor(1 / (hi - fl)) + 1)
    return fl + 1 / _simplest_between(1 / (hi - fl), 1 / (lo - fl))


def choose_epsilon(window: Tuple[Fraction, Fraction]) -> Fraction:
    """Rational of smallest denominator (then numerator) in the open window."""
    lo, hi = Fraction(window[0]), Fraction(window[1])
    if not lo < hi:
        raise HypothesisError(f"empty window ({lo}, {hi})")
    if lo < 0:
        raise HypothesisError(f"window ({lo}, {hi}) must lie in [0, inf)")
    return _simplest_between(lo, hi)


@dataclass(frozen=True)
class ExponentPack:
    k: int
    q: int
    sigma: Tuple[int, ...]
    tau_k: int
    tau_k1: int
    s_omega: Fraction
    gamma: Fraction
    A: Fraction
    window: Tuple[Fraction, Fraction]
    epsilon: Fraction
    h: Fraction
    rho: Fraction
    rho_star: Fraction

    @property
    def singular_order_bound(self) -> Fraction:
        """eps * rho* / q; every singular point has order <= -singular_order_bound < -1."""
        return self.epsilon * self.rho_star / self.q

    @property
    def frame_exponent(self) -> Fraction:
        """Total Jacobian exponent of D under a coordinate change; equals 1/rho*."""
        return self.A - self.epsilon * self.tau_k1

    def to_json(self) -> Dict:
        f = format_rational
        return {
            "k": self.k,
            "q": self.q,
            "sigma": list(self.sigma),
            "tau_k": self.tau_k,
            "tau_k1": self.tau_k1,
            "S": f(self.s_omega),
            "gamma": f(self.gamma),
            "A": f(self.A),
            "window": [f(self.window[0]), f(self.window[1])],
            "epsilon": f(self.epsilon),
            "h": f(self.h),
            "rho": f(self.rho),
            "rho_star": f(self.rho_star),
            "eps_rho_star_over_q": f(self.singular_order_bound),
        }


def build_exponents(
    weights: NochkaWeights,
    multiplicities: Sequence[Multiplicity],
    k: int,
    q: Optional[int] = None,
    epsilon: Optional[Fraction] = None,
) -> ExponentPack:
    q = q if q is not None else weights.q
    sigma, tau_k, tau_k1 = sigma_tau(k)
    S = weighted_defect(weights, multiplicities, k)
    g = S - (k + 1)
    A = g - sigma[k]
    window = epsilon_window(weights, multiplicities, k, q)
    eps = choose_epsilon(window) if epsilon is None else Fraction(epsilon)
    if not window[0] < eps < window[1]:
        raise HypothesisError(f"epsilon {eps} outside the window ({window[0]}, {window[1]})")
    h = S - (k + 1) - eps * sigma[k + 1]
    if h <= 0:
        raise InternalConsistencyError(f"h = {h} <= 0")
    rho = (sigma[k] + eps * tau_k) / h
    if not 0 < rho < 1:
        raise InternalConsistencyError(f"rho = {rho} outside (0, 1)")
    if not h > sigma[k] + eps * tau_k:
        raise InternalConsistencyError(f"h = {h} does not exceed sigma_k + eps tau_k")
    rho_star = 1 / ((1 - rho) * h)
    pack = ExponentPack(k, q, sigma, tau_k, tau_k1, S, g, A, window, eps, h, rho, rho_star)
    if not pack.singular_order_bound > 1:
        raise InternalConsistencyError(f"eps rho*/q = {pack.singular_order_bound} <= 1")
    if pack.frame_exponent * rho_star != 1:
        raise InternalConsistencyError("frame exponent is not 1/rho*")
    logger.info("exponents: eps=%s h=%s rho=%s rho*=%s", eps, h, rho, rho_star)
    return pack


# --- density -----------------------------------------------------------------

@dataclass(frozen=True)
class DensityTerm:
    """exponent * log|poly / scale| contributes to log D."""
    poly: LaurentPoly
    exponent: Fraction
    scale: float
    labels: Tuple[str, ...]
    singular: bool


def density_terms(
    curve: CurveRep,
    hs: HyperplaneSet,
    psi: PsiSelection,
    weights: NochkaWeights,
    multiplicities: Sequence[Multiplicity],
    pack: ExponentPack,
) -> List[DensityTerm]:
    """Factors of D with their exponents; equal (poly, scale) pairs are merged."""
    k, q, eps = pack.k, pack.q, pack.epsilon
    acc: Dict[Tuple[LaurentPoly, float], List] = {}

    def _add(poly, exponent, scale, label, singular):
        key = (poly, scale)
        if key not in acc:
            acc[key] = [Fraction(0), [], False]
        acc[key][0] += exponent
        acc[key][1].append(label)
        acc[key][2] = acc[key][2] or singular

    for j, (H, om, m) in enumerate(zip(hs, weights.omega, multiplicities)):
        a = om if m == math.inf else om * (1 - Fraction(k, int(m)))
        _add(psi[(j, 0)].poly, a, H.norm(), f"G(H{j})", False)
        for p in range(k):
            _add(psi[(j, p)].poly, -eps / q, H.norm(), f"psi({j},{p})", True)
    _add(wronskian(curve.components), -(1 + eps), 1.0, "F_k", True)
    return [DensityTerm(poly, e, scale, tuple(labels), sing) for (poly, scale), (e, labels, sing) in acc.items()]


def _log_density(terms: Sequence[DensityTerm], rho_star: Fraction, z, precision: int):
    with working_precision(precision):
        total = mp.mpf(0)
        for t in terms:
            if t.exponent == 0:
                continue
            v = abs(evaluate(t.poly, z, precision))
            if v == 0:
                raise SingularPointError(f"{'/'.join(t.labels)} vanishes at z={complex(z)}")
            total += (mp.mpf(t.exponent.numerator) / t.exponent.denominator) * (mp.log(v) - mp.log(t.scale))
        return total * mp.mpf(rho_star.numerator) / rho_star.denominator


@dataclass(frozen=True)
class DivisorClass:
    factor: LaurentPoly
    order: Fraction
    singular: bool
    roots: Tuple[complex, ...]
    in_annulus: bool

    def to_json(self) -> Dict:
        return {
            "factor": self.factor.to_json(),
            "order": format_rational(self.order),
            "singular": self.singular,
            "in_annulus": self.in_annulus,
            "roots": [[r.real, r.imag] for r in self.roots],
        }


def _divisor_table(
    polys: Sequence[LaurentPoly],
    weights_per_poly: Sequence[Fraction],
    singular_per_poly: Sequence[bool],
    rho_star: Fraction,
    annulus: Optional[AnnularEnd],
    precision: int,
) -> List[DivisorClass]:
    cb = coprime_basis(polys)
    table = []
    for b_idx, b in enumerate(cb.basis):
        order = Fraction(0)
        singular = False
        for i, row in enumerate(cb.exponents):
            e = row[b_idx]
            if e:
                order += weights_per_poly[i] * e
                singular = singular or singular_per_poly[i]
        roots = tuple(all_roots(b, precision))
        inside = False
        if annulus is not None:
            inside = bool(roots_in_annulus(b, annulus.r, inner=annulus.inner, precision=precision))
        table.append(DivisorClass(b, order * rho_star, singular, roots, inside))
    return table


@dataclass
class MetricSpec:
    curve: CurveRep
    hyperplanes: HyperplaneSet
    psi: PsiSelection
    weights: NochkaWeights
    multiplicities: Tuple[Multiplicity, ...]
    pack: ExponentPack
    annulus: Optional[AnnularEnd]
    terms: List[DensityTerm]
    divisors: List[DivisorClass]
    precision: int = DEFAULT_PRECISION
    frame: Optional["_FrameCache"] = field(default=None, repr=False, compare=False)

    def log_density(self, z):
        """log lambda(z) for d(tau) = lambda |dz|."""
        return _log_density(self.terms, self.pack.rho_star, z, self.precision)

    def density(self, z) -> float:
        return float(mp.exp(self.log_density(z)))

    def singular_points(self) -> List[complex]:
        pts = [r for d in self.divisors for r in d.roots]
        if any(t.poly.order < 0 for t in self.terms) or any(d.factor.order > 0 for d in self.divisors):
            pts.append(0j)
        return pts

    def to_json(self) -> Dict:
        return {
            "exponents": self.pack.to_json(),
            "psi": self.psi.to_json(),
            "terms": [
                {"labels": list(t.labels), "poly": t.poly.to_json(), "exponent": format_rational(t.exponent)}
                for t in self.terms
            ],
            "divisors": [d.to_json() for d in self.divisors],
        }


def build_metric(
    curve: CurveRep,
    hs: HyperplaneSet,
    weights: NochkaWeights,
    multiplicities: Sequence[Multiplicity],
    pack: ExponentPack,
    annulus: Optional[AnnularEnd] = None,
    psi: Optional[PsiSelection] = None,
    precision: int = DEFAULT_PRECISION,
) -> MetricSpec:
    _check_lengths(weights, multiplicities)
    if hs.q != weights.q:
        raise DimensionMismatchError(f"{hs.q} hyperplanes for {weights.q} weights")
    if curve.k != pack.k:
        raise DimensionMismatchError(f"curve in P^{curve.k} for exponents built with k={pack.k}")
    psi = psi or select_psi(curve, hs)
    terms = density_terms(curve, hs, psi, weights, multiplicities, pack)
    divisors = _divisor_table(
        [t.poly for t in terms],
        [t.exponent for t in terms],
        [t.singular for t in terms],
        pack.rho_star,
        annulus,
        precision,
    )
    logger.info("metric built: %d density factors, %d divisor classes", len(terms), len(divisors))
    return MetricSpec(curve, hs, psi, weights, tuple(multiplicities), pack, annulus, terms, divisors, precision)


# --- exact checks ------------------------------------------------------------

@dataclass(frozen=True)
class OrderCheck:
    factor: LaurentPoly
    order: Fraction
    bound: Fraction
    ok: bool


@dataclass(frozen=True)
class SingularOrderReport:
    bound: Fraction
    checks: Tuple[OrderCheck, ...]

    @property
    def holds(self) -> bool:
        return self.bound > 1 and all(c.ok for c in self.checks)

    def to_json(self) -> Dict:
        return {
            "bound": format_rational(-self.bound),
            "holds": self.holds,
            "checks": [
                {"factor": c.factor.to_json(), "order": format_rational(c.order), "ok": c.ok} for c in self.checks
            ],
        }


def singular_order_check(spec: MetricSpec) -> SingularOrderReport:
    """Every singular class with a root in the annulus has order <= -eps rho*/q."""
    bound = spec.pack.singular_order_bound
    checks = []
    for d in spec.divisors:
        if not (d.singular and d.in_annulus):
            continue
        ok = d.order <= -bound
        if not ok:
            logger.error("singular order %s at %s exceeds -%s", d.order, d.factor, bound)
        checks.append(OrderCheck(d.factor, d.order, bound, ok))
    return SingularOrderReport(bound, tuple(checks))


@dataclass(frozen=True)
class DivisorInequalityReport:
    rows: Tuple[Dict, ...]

    @property
    def holds(self) -> bool:
        return all(r["nochka_ok"] and r["ramified_ok"] for r in self.rows)

    def to_json(self) -> Dict:
        return {"holds": self.holds, "rows": list(self.rows)}


def divisor_inequality_check(
    curve: CurveRep,
    hs: HyperplaneSet,
    weights: NochkaWeights,
    multiplicities: Sequence[Multiplicity],
    k: int,
    annulus: AnnularEnd,
) -> DivisorInequalityReport:
    """
    At each class with a root in the annulus:
      nu(F_k) - sum omega nu_j + sum omega min(nu_j, k) >= 0
      nu(F_k) - sum omega nu_j (1 - k/m_j) >= 0
    """
    _check_lengths(weights, multiplicities)
    pairs = [pairing(curve, H) for H in hs]
    Fk = wronskian(curve.components)
    cb = coprime_basis([Fk] + pairs)
    rows = []
    for b_idx, b in enumerate(cb.basis):
        if not roots_in_annulus(b, annulus.r, inner=annulus.inner):
            continue
        nu_fk = cb.exponents[0][b_idx]
        first = Fraction(nu_fk)
        second = Fraction(nu_fk)
        for j, (om, m) in enumerate(zip(weights.omega, multiplicities)):
            nu = cb.exponents[j + 1][b_idx]
            first += -om * nu + om * min(nu, k)
            if nu:
                second -= om * nu * (1 if m == math.inf else 1 - Fraction(k, int(m)))
        rows.append({
            "factor": b.to_json(),
            "nochka_value": format_rational(first),
            "nochka_ok": first >= 0,
            "ramified_value": format_rational(second),
            "ramified_ok": second >= 0,
        })
    return DivisorInequalityReport(tuple(rows))


# --- generic fields, flatness ------------------------------------------------

@dataclass
class LogDensityField:
    """A log-density callable with its known singular points."""
    func: Callable
    singular: Sequence[complex] = field(default_factory=list)
    label: str = ""

    def log_density(self, z):
        return self.func(z)

    def singular_points(self) -> List[complex]:
        return list(self.singular)


@dataclass(frozen=True)
class FlatnessReport:
    max_residual: float
    max_plain: float
    step: float
    samples: int
    center: complex
    half_width: float

    def to_json(self) -> Dict:
        return {
            "max_residual": self.max_residual,
            "max_plain_laplacian": self.max_plain,
            "step": self.step,
            "samples": self.samples,
            "center": [self.center.real, self.center.imag],
            "half_width": self.half_width,
        }


def _laplacian(field, z, h, precision):
    with working_precision(precision):
        hh = mp.mpf(h)
        c = field.log_density(z)
        s = (
            field.log_density(z + hh)
            + field.log_density(z - hh)
            + field.log_density(z + mp.mpc(0, hh))
            + field.log_density(z - mp.mpc(0, hh))
        )
        return (s - 4 * c) / (hh * hh)


def flatness_check(
    field,
    hgrid: float = DEFAULT_FLATNESS_STEP,
    region: Tuple[complex, float] = (1.0, 0.1),
    samples: int = 5,
    precision: int = DEFAULT_PRECISION,
) -> FlatnessReport:
    """
    Max |discrete Laplacian of log density| over a samples x samples grid in the
    square region (center, half_width). The five-point Laplacian is combined at
    steps h and 2h as (4 L_h - L_2h)/3.
    """
    center, half = complex(region[0]), float(region[1])
    margin = FLATNESS_MARGIN_STEPS * hgrid
    for s in field.singular_points():
        dx = max(abs(s.real - center.real) - half, 0.0)
        dy = max(abs(s.imag - center.imag) - half, 0.0)
        if math.hypot(dx, dy) < margin + 2 * hgrid:
            raise SingularPointError(f"singular point {s} within {margin} of the flatness region")
    offsets = np.linspace(-half, half, samples) if samples > 1 else np.zeros(1)
    worst, worst_plain = 0.0, 0.0
    with working_precision(precision):
        for dx in offsets:
            for dy in offsets:
                z = mp.mpc(center.real + float(dx), center.imag + float(dy))
                l1 = _laplacian(field, z, hgrid, precision)
                l2 = _laplacian(field, z, 2 * hgrid, precision)
                rich = (4 * l1 - l2) / 3
                worst = max(worst, float(abs(rich)))
                worst_plain = max(worst_plain, float(abs(l1)))
    logger.info("flatness: max residual %.3e (plain %.3e) at step %g", worst, worst_plain, hgrid)
    return FlatnessReport(worst, worst_plain, hgrid, samples, center, half)


# --- symmetrization ----------------------------------------------------------

@dataclass
class SymmetrizedMetric:
    """lambda~(z) = (D(z) D(1/z))^rho*."""
    base: MetricSpec
    divisors: List[DivisorClass]

    def log_density(self, z):
        with working_precision(self.base.precision):
            zz = mp.mpc(z)
            if zz == 0:
                raise SingularPointError("the symmetrized metric is singular at 0")
            return self.base.log_density(zz) + self.base.log_density(1 / zz)

    def density(self, z) -> float:
        return float(mp.exp(self.log_density(z)))

    def factors(self, z) -> Tuple[float, float]:
        """(log D(z) rho*, log D(1/z) rho*) at z."""
        with working_precision(self.base.precision):
            zz = mp.mpc(z)
            return float(self.base.log_density(zz)), float(self.base.log_density(1 / zz))

    def singular_points(self) -> List[complex]:
        pts = [r for d in self.divisors for r in d.roots]
        pts.append(0j)
        return pts

    def to_json(self) -> Dict:
        return {"divisors": [d.to_json() for d in self.divisors]}


def symmetrize(spec: MetricSpec) -> SymmetrizedMetric:
    polys = [t.poly for t in spec.terms] + [substitute_inverse(t.poly) for t in spec.terms]
    exps = [t.exponent for t in spec.terms] * 2
    sing = [t.singular for t in spec.terms] * 2
    table = _divisor_table(polys, exps, sing, spec.pack.rho_star, spec.annulus, spec.precision)
    return SymmetrizedMetric(spec, table)


# --- coordinate change xi = 1/z ----------------------------------------------

def _jacobian() -> LaurentPoly:
    # dz/dxi for z = 1/xi
    return LaurentPoly.monomial(-1, -2)


def inverted_curve(curve: CurveRep) -> CurveRep:
    """G in the xi = 1/z frame: (dz/dxi) * G(1/xi)."""
    J = _jacobian()
    return CurveRep(tuple(J * substitute_inverse(g) for g in curve.components), "xi")


@dataclass(frozen=True)
class TransformationReport:
    failures: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def transformation_laws(curve: CurveRep, hs: HyperplaneSet, psi: PsiSelection) -> TransformationReport:
    """
    Exact frame-change laws under xi = 1/z with J = dz/dxi:
      G(H)_xi = J * G(H)(1/xi),  F_k,xi = J^sigma_{k+1} F_k(1/xi),
      psi_xi(j, p) = J^sigma_{p+1} psi(j, p)(1/xi).
    """
    J = _jacobian()
    cx = inverted_curve(curve)
    k = curve.k
    sigma = [p * (p + 1) // 2 for p in range(k + 2)]
    failures = []
    index_sets = {key: e.index_set for key, e in psi.entries.items()}
    psi_x = select_psi(cx, hs, index_sets=index_sets)
    if wronskian(cx.components) != (J ** sigma[k + 1]) * substitute_inverse(wronskian(curve.components)):
        failures.append("F_k")
    for (j, p), entry in psi.entries.items():
        expected = (J ** sigma[p + 1]) * substitute_inverse(entry.poly)
        if psi_x[(j, p)].poly != expected:
            failures.append(f"psi({j},{p})")
    for j, H in enumerate(hs):
        if pairing(cx, H) != J * substitute_inverse(pairing(curve, H)):
            failures.append(f"G(H{j})")
    if failures:
        logger.error("transformation laws fail for %s", failures)
    return TransformationReport(tuple(failures))


@dataclass(frozen=True)
class InvarianceReport:
    z0: complex
    deviation: float
    tolerance: float
    jacobian_power: Fraction
    laws_ok: bool

    @property
    def ok(self) -> bool:
        return self.laws_ok and self.deviation < self.tolerance

    def to_json(self) -> Dict:
        return {
            "z0": [self.z0.real, self.z0.imag],
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "jacobian_power": format_rational(self.jacobian_power),
            "laws_ok": self.laws_ok,
            "ok": self.ok,
        }


class _FrameCache:
    """xi-frame terms for one MetricSpec, built once."""

    def __init__(self, spec: MetricSpec):
        index_sets = {key: e.index_set for key, e in spec.psi.entries.items()}
        self.curve = inverted_curve(spec.curve)
        self.psi = select_psi(self.curve, spec.hyperplanes, index_sets=index_sets)
        self.terms = density_terms(self.curve, spec.hyperplanes, self.psi, spec.weights, spec.multiplicities, spec.pack)
        self.laws_ok = transformation_laws(spec.curve, spec.hyperplanes, spec.psi).ok


def coordinate_invariance_check(
    spec: MetricSpec,
    z0,
    jacobian_power=1,
    tolerance: float = DEFAULT_INVARIANCE_TOLERANCE,
) -> InvarianceReport:
    """
    Compare lambda_xi(1/z0) against lambda_z(z0) |dz/dxi|^jacobian_power. The metric
    is frame independent exactly when the power is 1.
    """
    if spec.frame is None:
        spec.frame = _FrameCache(spec)
    frame = spec.frame
    p = Fraction(jacobian_power)
    with working_precision(spec.precision):
        z = mp.mpc(z0)
        if z == 0:
            raise SingularPointError("z0 = 0 has no image in the xi frame")
        xi = 1 / z
        log_z = spec.log_density(z)
        log_xi = _log_density(frame.terms, spec.pack.rho_star, xi, spec.precision)
        log_jac = -2 * mp.log(abs(xi))
        diff = log_xi - log_z - (mp.mpf(p.numerator) / p.denominator) * log_jac
        deviation = float(abs(mp.expm1(diff)))
    return InvarianceReport(complex(z0), deviation, tolerance, p, frame.laws_ok)


# --- divergence probes -------------------------------------------------------

def probe_path(target: complex, direction: complex, t_max: float, t_min: float, points: int) -> np.ndarray:
    """Points target + t * u, t geometric from t_max down to t_min, u = direction/|direction|."""
    if not 0 < t_min < t_max:
        raise HypothesisError(f"need 0 < t_min < t_max, got {t_min}, {t_max}")
    u = complex(direction) / abs(complex(direction))
    ts = np.geomspace(t_max, t_min, points)
    return complex(target) + ts * u


def segment_path(a: complex, b: complex, points: int) -> np.ndarray:
    return np.linspace(complex(a), complex(b), points)


@dataclass(frozen=True)
class ProbeReport:
    log_lambda: Tuple[float, ...]
    log_partial_lengths: Tuple[float, ...]
    monotone: bool
    fitted_exponent: Optional[float]
    predicted: Optional[Fraction]
    relative_error: Optional[float]

    @property
    def diverges(self) -> bool:
        return self.fitted_exponent is not None and self.fitted_exponent <= -1

    @property
    def final_length(self) -> float:
        return math.exp(self.log_partial_lengths[-1]) if self.log_partial_lengths else 0.0

    def to_json(self) -> Dict:
        return {
            "log_lambda": list(self.log_lambda),
            "log_partial_lengths": list(self.log_partial_lengths),
            "monotone": self.monotone,
            "fitted_exponent": self.fitted_exponent,
            "predicted": format_rational(self.predicted) if self.predicted is not None else None,
            "relative_error": self.relative_error,
            "diverges": self.diverges,
        }


def divergence_probe(
    field,
    path: Sequence[complex],
    target: Optional[complex] = None,
    predicted_order: Optional[Fraction] = None,
    fit_fraction: float = 0.5,
) -> ProbeReport:
    """
    Trapezoidal partial lengths of lambda |dz| along the path (computed with a
    common log scale so large densities do not overflow), and, when a target is
    given, the slope of log lambda against log|z - target| over the closest
    `fit_fraction` of the points.
    """
    pts = np.asarray(path, dtype=np.complex128)
    if len(pts) < 3:
        raise HypothesisError("a probe path needs at least 3 points")
    loglam = np.array([float(field.log_density(complex(z))) for z in pts])
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
    M = float(loglam.max())
    scaled = cumulative_trapezoid(np.exp(loglam - M), s, initial=0.0)
    monotone = bool(np.all(np.diff(scaled) >= 0))
    with np.errstate(divide="ignore"):
        log_lengths = np.log(scaled[1:]) + M

    fitted = rel = None
    if target is not None:
        dist = np.abs(pts - complex(target))
        n_fit = max(3, int(len(pts) * fit_fraction))
        order = np.argsort(dist)[:n_fit]
        fit = linregress(np.log(dist[order]), loglam[order])
        fitted = float(fit.slope)
        if predicted_order is not None and predicted_order != 0:
            rel = abs(fitted - float(predicted_order)) / abs(float(predicted_order))
    logger.debug("probe: %d points, fitted exponent %s", len(pts), fitted)
    return ProbeReport(
        tuple(float(x) for x in loglam),
        tuple(float(x) for x in log_lengths),
        monotone,
        fitted,
        Fraction(predicted_order) if predicted_order is not None else None,
        rel,
    )


# --- Schwarz-type monitor ----------------------------------------------------

@dataclass(frozen=True)
class SchwarzReport:
    radius: float
    log_sup_coarse: float
    log_sup_fine: float
    grid_coarse: int
    grid_fine: int
    homogeneity_degree: Fraction
    skipped: int

    @property
    def sup_ratio(self) -> float:
        return math.exp(self.log_sup_fine - self.log_sup_coarse)

    def to_json(self) -> Dict:
        return {
            "radius": self.radius,
            "log_sup_coarse": self.log_sup_coarse,
            "log_sup_fine": self.log_sup_fine,
            "sup_ratio": self.sup_ratio,
            "grid_coarse": self.grid_coarse,
            "grid_fine": self.grid_fine,
            "homogeneity_degree": format_rational(self.homogeneity_degree),
            "skipped": self.skipped,
        }


def schwarz_monitor(
    curve: CurveRep,
    hs: HyperplaneSet,
    weights: NochkaWeights,
    multiplicities: Sequence[Multiplicity],
    pack: ExponentPack,
    R: float = 2.0,
    grid: int = 12,
    precision: int = DEFAULT_PRECISION,
) -> SchwarzReport:
    """
    sup over the disk |z| < R of
      |F|^{gamma - eps sigma_{k+1}} |F_k|^{1+eps} prod |F_p(H_j)|^{eps/q}
      / prod |F(H_j)|^{omega(j)(1-k/m_j)}  /  (2R/(R^2-|z|^2))^{sigma_k + eps tau_k}
    on a polar grid and on its refinement. Diagnostic only.
    """
    if is_degenerate(curve):
        raise DegenerateCurveError("the Schwarz monitor needs a nondegenerate curve")
    _check_lengths(weights, multiplicities)
    k, q, eps = pack.k, pack.q, pack.epsilon
    lad = ladder(curve)
    a_j = [om if m == math.inf else om * (1 - Fraction(k, int(m))) for om, m in zip(weights.omega, multiplicities)]
    e_F = pack.gamma - eps * pack.sigma[k + 1]
    e_target = pack.sigma[k] + eps * pack.tau_k
    degree = e_F + (k + 1) * (1 + eps) + eps * sum(p + 1 for p in range(k)) - sum(a_j, Fraction(0))

    def _f(x: Fraction):
        return mp.mpf(x.numerator) / x.denominator

    def _sweep(n: int) -> Tuple[float, int]:
        best = -math.inf
        skipped = 0
        with working_precision(precision):
            for i in range(n):
                rad = (i + mp.mpf(1) / 2) / n * R
                for t in range(2 * n):
                    z = rad * mp.expjpi(mp.mpf(t) / n)
                    try:
                        val = _f(e_F) * mp.log(norm_at(curve, z, precision))
                        top = ladder_norm(lad, k, z, precision)
                        pair_norms = [contact_norm(curve, H, 0, z, precision, lad) for H in hs]
                        if top == 0 or any(v == 0 for v in pair_norms):
                            raise SingularPointError("zero factor")
                        val += _f(1 + eps) * mp.log(top)
                        for H in hs:
                            for p in range(k):
                                val += _f(eps / q) * mp.log(contact_norm(curve, H, p, z, precision, lad))
                        for a, v in zip(a_j, pair_norms):
                            val -= _f(a) * mp.log(v)
                        val -= _f(e_target) * mp.log(2 * R / (R * R - abs(z) ** 2))
                    except (SingularPointError, ValueError):
                        skipped += 1
                        continue
                    best = max(best, float(val))
        return best, skipped

    coarse, s1 = _sweep(grid)
    fine, s2 = _sweep(2 * grid)
    logger.info("Schwarz monitor: log sup %.6g (grid %d) vs %.6g (grid %d)", coarse, grid, fine, 2 * grid)
    return SchwarzReport(float(R), coarse, fine, grid, 2 * grid, degree, s1 + s2)
