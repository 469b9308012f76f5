"""
core/wronskian.py

Wronskian ladders of a holomorphic curve f = (f_0 : ... : f_k) given by Laurent
polynomials, hyperplane pairings, contracted Wronskians, the selected nonvanishing
contractions psi_{jp} and contact functions.

Conventions:
- W(h_0, ..., h_p) = det[h_c^{(r)}] with rows r = derivative order and columns
  c = functions, so W(1, z) = 1 and W(z, 1) = -1.
- F(H) = sum_l conj(c_l) f_l.
- contracted(c, H, p, I) = sum_{l not in I} conj(c_l) W(f_l, f_I), f_l first.
- Hyperplanes stay unnormalised in exact work; float evaluations divide by |c|.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from mpmath import mp

from core.errors import (
    DegenerateCurveError,
    DimensionMismatchError,
    InternalConsistencyError,
    InvalidIndexError,
    SingularPointError,
    ZeroPolynomialError,
)
from core.exactnum import (
    DEFAULT_PRECISION,
    LaurentPoly,
    coefficient_matrix,
    derivative,
    evaluate,
    exact_div,
    gcd,
    matrix_rank,
    working_precision,
)
from core.position import Hyperplane, HyperplaneSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CurveRep:
    components: Tuple[LaurentPoly, ...]
    variable: str = "z"

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DimensionMismatchError("a curve needs at least one component")
        if all(c.is_zero() for c in comps):
            raise ZeroPolynomialError("all curve components are zero")
        object.__setattr__(self, "components", comps)

    @property
    def k(self) -> int:
        """Projective dimension of the target, i.e. number of components minus one."""
        return len(self.components) - 1

    def __len__(self):
        return len(self.components)

    def common_factor(self) -> LaurentPoly:
        g = None
        for c in self.components:
            if c.is_zero():
                continue
            g = c if g is None else gcd(g, c)
        return gcd(g, LaurentPoly.zero())

    def is_reduced(self) -> bool:
        return self.common_factor().is_constant()

    def reduced(self) -> "CurveRep":
        """Divide out the component gcd and shift so the lowest exponent is 0."""
        g = self.common_factor()
        low = min(c.order for c in self.components if not c.is_zero())
        comps = [c.shift(-low) for c in self.components]
        if not g.is_constant():
            comps = [exact_div(c, g) if not c.is_zero() else c for c in comps]
        return CurveRep(tuple(comps), self.variable)

    def scaled(self, h: LaurentPoly) -> "CurveRep":
        return CurveRep(tuple(h * c for c in self.components), self.variable)

    @classmethod
    def from_json(cls, data) -> "CurveRep":
        return cls(tuple(LaurentPoly.from_json(c) for c in data))

    def to_json(self) -> List:
        return [c.to_json() for c in self.components]


def _minors(fs: Sequence[LaurentPoly]) -> Dict[Tuple[int, ...], LaurentPoly]:
    """
    W(f_I) for every nonempty index tuple I (ascending), by Laplace expansion along
    the last derivative row. The memo is the ladder itself.
    """
    n = len(fs)
    derivs: List[List[LaurentPoly]] = [list(fs)]
    for _ in range(1, n):
        derivs.append([derivative(p) for p in derivs[-1]])
    memo: Dict[Tuple[int, ...], LaurentPoly] = {(i,): fs[i] for i in range(n)}
    for size in range(2, n + 1):
        r = size - 1
        for I in combinations(range(n), size):
            acc = LaurentPoly.zero()
            for pos, col in enumerate(I):
                entry = derivs[r][col]
                if entry.is_zero():
                    continue
                rest = memo[I[:pos] + I[pos + 1:]]
                if rest.is_zero():
                    continue
                term = entry * rest
                acc = acc + term if (r + pos) % 2 == 0 else acc - term
            memo[I] = acc
    return memo


def wronskian(fs: Sequence[LaurentPoly]) -> LaurentPoly:
    """Exact Wronskian determinant of 1..k+1 Laurent polynomials."""
    fs = list(fs)
    if not fs:
        raise InvalidIndexError("Wronskian of an empty sequence")
    return _minors(fs)[tuple(range(len(fs)))]


@dataclass(frozen=True)
class WronskianLadder:
    """levels[p][(i_0, ..., i_p)] = W(f_{i_0}, ..., f_{i_p})."""
    levels: Tuple[Dict[Tuple[int, ...], LaurentPoly], ...]

    @property
    def k(self) -> int:
        return len(self.levels) - 1

    @property
    def top(self) -> LaurentPoly:
        return self.levels[-1][tuple(range(self.k + 1))]

    def minor(self, indices: Sequence[int]) -> LaurentPoly:
        """W of the given components in the given order (sign follows the permutation)."""
        idx = tuple(indices)
        if len(set(idx)) != len(idx):
            return LaurentPoly.zero()
        ordered = tuple(sorted(idx))
        # parity of the sorting permutation
        inversions = sum(1 for a, b in combinations(idx, 2) if a > b)
        base = self.levels[len(idx) - 1][ordered]
        return -base if inversions % 2 else base

    def to_json(self) -> List[List[Dict]]:
        return [
            [{"indices": list(I), "minor": W.to_json()} for I, W in sorted(level.items())]
            for level in self.levels
        ]


def ladder(c: CurveRep) -> WronskianLadder:
    memo = _minors(c.components)
    n = len(c)
    levels = tuple({I: memo[I] for I in combinations(range(n), p + 1)} for p in range(n))
    return WronskianLadder(levels)


def _check_dimension(c: CurveRep, H: Hyperplane) -> None:
    if H.dimension != len(c):
        raise DimensionMismatchError(
            f"hyperplane {H.label or '?'} has {H.dimension} coefficients for a curve with {len(c)} components"
        )


def pairing(c: CurveRep, H: Hyperplane) -> LaurentPoly:
    """F(H) = sum conj(c_l) f_l."""
    _check_dimension(c, H)
    acc = LaurentPoly.zero()
    for cl, fl in zip(H.coeffs, c.components):
        if cl:
            acc = acc + fl.scale(cl.conjugate())
    return acc


def _check_index_set(c: CurveRep, p: int, I: Sequence[int]) -> Tuple[int, ...]:
    idx = tuple(I)
    if not 0 <= p <= c.k:
        raise InvalidIndexError(f"level p={p} outside [0, {c.k}]")
    if len(idx) != p or len(set(idx)) != p or any(not 0 <= i <= c.k for i in idx):
        raise InvalidIndexError(f"index set {idx} is not {p} distinct indices in [0, {c.k}]")
    return idx


def _contract(lad: WronskianLadder, H: Hyperplane, I: Tuple[int, ...]) -> LaurentPoly:
    acc = LaurentPoly.zero()
    for l, cl in enumerate(H.coeffs):
        if l in I or not cl:
            continue
        W = lad.minor((l,) + I)
        if not W.is_zero():
            acc = acc + W.scale(cl.conjugate())
    return acc


def contracted(c: CurveRep, H: Hyperplane, p: int, I: Sequence[int], lad: Optional[WronskianLadder] = None) -> LaurentPoly:
    """sum_{l not in I} conj(c_l) W(f_l, f_{i_1}, ..., f_{i_p}); p = 0 gives the pairing."""
    _check_dimension(c, H)
    idx = _check_index_set(c, p, I)
    if p == 0:
        return pairing(c, H)
    return _contract(lad or ladder(c), H, idx)


@dataclass(frozen=True)
class PsiEntry:
    index_set: Tuple[int, ...]
    poly: LaurentPoly


@dataclass(frozen=True)
class PsiSelection:
    """entries[(j, p)] for 0 <= j < q, 0 <= p <= k."""
    entries: Dict[Tuple[int, int], PsiEntry]
    q: int
    k: int

    def __getitem__(self, key: Tuple[int, int]) -> PsiEntry:
        return self.entries[key]

    def polys(self, max_level: Optional[int] = None) -> List[Tuple[Tuple[int, int], LaurentPoly]]:
        top = self.k if max_level is None else max_level
        return [((j, p), self.entries[(j, p)].poly) for j in range(self.q) for p in range(top + 1)]

    def to_json(self) -> List[Dict]:
        return [
            {"j": j, "p": p, "index_set": list(e.index_set), "psi": e.poly.to_json()}
            for (j, p), e in sorted(self.entries.items())
        ]


def select_psi(
    c: CurveRep,
    hs: HyperplaneSet,
    index_sets: Optional[Dict[Tuple[int, int], Tuple[int, ...]]] = None,
) -> PsiSelection:
    """
    For every hyperplane j and level p pick the lexicographically first index set
    with a nonzero contracted Wronskian. `index_sets` forces given choices instead
    (used to rebuild the same selection in another coordinate frame).
    """
    if is_degenerate(c):
        raise DegenerateCurveError("curve is linearly degenerate; psi selection needs a nondegenerate curve")
    lad = ladder(c)
    entries: Dict[Tuple[int, int], PsiEntry] = {}
    for j, H in enumerate(hs):
        _check_dimension(c, H)
        entries[(j, 0)] = PsiEntry((), pairing(c, H))
        if entries[(j, 0)].poly.is_zero():
            raise DegenerateCurveError(f"hyperplane {H.label or j} contains the curve")
        for p in range(1, c.k + 1):
            if index_sets is not None:
                I = tuple(index_sets[(j, p)])
                poly = _contract(lad, H, I)
                if poly.is_zero():
                    raise DegenerateCurveError(f"forced index set {I} for ({j}, {p}) gives zero")
                entries[(j, p)] = PsiEntry(I, poly)
                continue
            for I in combinations(range(c.k + 1), p):
                poly = _contract(lad, H, I)
                if not poly.is_zero():
                    entries[(j, p)] = PsiEntry(I, poly)
                    break
            else:
                raise DegenerateCurveError(f"no nonzero contraction for hyperplane {H.label or j} at level {p}")
            logger.debug("psi(%d, %d) uses index set %s", j, p, entries[(j, p)].index_set)
    return PsiSelection(entries, hs.q, c.k)


# --- float norms -------------------------------------------------------------

def ladder_norm(lad: WronskianLadder, p: int, z, precision: int = DEFAULT_PRECISION):
    """|F_p(z)| = sqrt(sum over (p+1)-subsets |W|^2), as an mpmath number."""
    with working_precision(precision):
        total = mp.mpf(0)
        for W in lad.levels[p].values():
            total += abs(evaluate(W, z, precision)) ** 2
        return mp.sqrt(total)


def contact_norm(
    c: CurveRep,
    H: Hyperplane,
    p: int,
    z,
    precision: int = DEFAULT_PRECISION,
    lad: Optional[WronskianLadder] = None,
):
    """|F_p(H)(z)| for the normalised hyperplane H/|H|."""
    _check_dimension(c, H)
    if not 0 <= p <= c.k:
        raise InvalidIndexError(f"level p={p} outside [0, {c.k}]")
    lad = lad or ladder(c)
    norm = H.norm()
    with working_precision(precision):
        if p == 0:
            return abs(evaluate(pairing(c, H), z, precision)) / norm
        total = mp.mpf(0)
        for I in combinations(range(c.k + 1), p):
            poly = _contract(lad, H, I)
            if not poly.is_zero():
                total += abs(evaluate(poly, z, precision)) ** 2
        return mp.sqrt(total) / norm


def contact_eval(
    c: CurveRep,
    H: Hyperplane,
    p: int,
    z,
    precision: int = DEFAULT_PRECISION,
    lad: Optional[WronskianLadder] = None,
) -> float:
    """phi_p(H)(z) = |F_p(H)|^2 / |F_p|^2, in [0, 1]."""
    lad = lad or ladder(c)
    den = ladder_norm(lad, p, z, precision)
    if den == 0:
        raise SingularPointError(f"|F_{p}| vanishes at z={complex(z)}")
    num = contact_norm(c, H, p, z, precision, lad)
    return float((num / den) ** 2)


# --- degeneracy ----------------------------------------------------------------

def rank_deficient(c: CurveRep) -> bool:
    _, rows = coefficient_matrix(c.components)
    return matrix_rank(rows) < len(c)


def is_degenerate(c: CurveRep) -> bool:
    """Top Wronskian identically zero, cross-checked against the coefficient rank."""
    by_wronskian = wronskian(c.components).is_zero()
    by_rank = rank_deficient(c)
    if by_wronskian != by_rank:
        raise InternalConsistencyError(
            f"Wronskian test ({by_wronskian}) disagrees with rank test ({by_rank}) for {c.components}"
        )
    return by_wronskian


def norm_at(c: CurveRep, z, precision: int = DEFAULT_PRECISION):
    """|F(z)| = sqrt(sum |f_i(z)|^2)."""
    with working_precision(precision):
        return mp.sqrt(sum(abs(evaluate(f, z, precision)) ** 2 for f in c.components))
