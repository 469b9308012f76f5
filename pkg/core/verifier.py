"""
core/verifier.py

Main inequality for the generalized Gauss map of an annular end:

    sum_{j kept} (1 - k/m_j) <= (k+1)(N - k/2) + (N+1)

where only hyperplanes with m_j > k are kept and (1 - k/inf) = 1. Also the two
bounds for m-1 (general position, one extra ramified hyperplane) and the l(k) reduction used
to pass from k to m-1.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from core.errors import HypothesisError
from core.exactnum import format_rational
from core.minsurf import MIN_ORDER, Multiplicity, RamificationProfile, format_multiplicity

logger = logging.getLogger(__name__)

ProfileLike = Union[RamificationProfile, Sequence[Multiplicity]]


@dataclass(frozen=True)
class TheoremReport:
    k: int
    N: int
    q_total: int
    q_kept: int
    lhs: Fraction
    rhs: Fraction
    holds: bool
    slack: Fraction
    dropped: Tuple[int, ...]
    kept: Tuple[int, ...]
    mode: str
    multiplicities: Tuple[Multiplicity, ...] = ()

    def to_json(self) -> Dict:
        return {
            "k": self.k,
            "N": self.N,
            "q_total": self.q_total,
            "q_kept": self.q_kept,
            "lhs": format_rational(self.lhs),
            "rhs": format_rational(self.rhs),
            "holds": self.holds,
            "slack": format_rational(self.slack),
            "dropped": list(self.dropped),
            "kept": list(self.kept),
            "mode": self.mode,
            "multiplicities": [format_multiplicity(m) for m in self.multiplicities],
        }


def _multiplicities(profile: ProfileLike, mode: str) -> Tuple[Multiplicity, ...]:
    if isinstance(profile, RamificationProfile):
        return profile.multiplicities(mode)
    return tuple(profile)


def _term(k: int, m: Multiplicity) -> Fraction:
    if m == math.inf:
        return Fraction(1)
    return 1 - Fraction(k, int(m))


def _reciprocal(m: Multiplicity) -> Fraction:
    return Fraction(0) if m == math.inf else Fraction(1, int(m))


def drop_low_ramification(profile: ProfileLike, k: int, mode: str = MIN_ORDER) -> List[int]:
    """Indices j with m_j > k (infinity kept)."""
    return [j for j, m in enumerate(_multiplicities(profile, mode)) if m > k]


def rhs_bound(k: int, N: int) -> Fraction:
    return (k + 1) * (N - Fraction(k, 2)) + (N + 1)


def main_inequality(
    k: int,
    N: int,
    profile: ProfileLike,
    mode: str = MIN_ORDER,
    m: Optional[int] = None,
) -> TheoremReport:
    if k < 1:
        raise HypothesisError(f"the inequality needs 1 <= k, got k={k}")
    if N < k:
        raise HypothesisError(f"need N >= k, got N={N}, k={k}")
    if m is None and isinstance(profile, RamificationProfile):
        m = profile.ambient_m
    if m is not None and not k <= m - 1 <= N:
        raise HypothesisError(f"need k <= m-1 <= N, got k={k}, m={m}, N={N}")

    ms = _multiplicities(profile, mode)
    kept = tuple(drop_low_ramification(ms, k))
    dropped = tuple(j for j in range(len(ms)) if j not in kept)
    lhs = sum((_term(k, ms[j]) for j in kept), Fraction(0))
    rhs = rhs_bound(k, N)
    report = TheoremReport(k, N, len(ms), len(kept), lhs, rhs, lhs <= rhs, rhs - lhs, dropped, kept, mode, ms)
    logger.info("main inequality: lhs=%s rhs=%s holds=%s (kept %d of %d)", lhs, rhs, report.holds, len(kept), len(ms))
    return report


def classical_bound(k: int, m: int) -> Fraction:
    """(k+1)(m - k/2 - 1) + m, the general-position bound for complete surfaces."""
    return (k + 1) * (m - Fraction(k, 2) - 1) + m


def omission_bound(m: int) -> int:
    """Most hyperplanes in general position the Gauss map of an annular end can omit."""
    return m * (m + 1) // 2


def ambient_inequality(m: int, N: int, profile: ProfileLike, general_position: bool = False, mode: str = MIN_ORDER) -> TheoremReport:
    if N < m - 1:
        raise HypothesisError(f"need N >= m-1, got N={N}, m={m}")
    if general_position and N != m - 1:
        raise HypothesisError(f"general position means N = m-1 = {m - 1}, got N={N}")
    report = main_inequality(m - 1, N, profile, mode, m)
    if general_position and report.rhs != omission_bound(m):
        raise HypothesisError(f"general-position bound {report.rhs} != m(m+1)/2")
    return report


def max_extra_ramification(m: int) -> int:
    """
    With m(m+1)/2 hyperplanes in general position met finitely often, the largest
    ramification a further hyperplane can carry without breaking the inequality.
    """
    if m < 3:
        raise HypothesisError(f"the bound needs m >= 3, got m={m}")
    return m - 1


def ell(k: int, N: int, multiplicities: Sequence[Multiplicity]) -> Fraction:
    """l(k) = k^2/2 - k (sum 1/m_j + N - 1/2)."""
    s = sum((_reciprocal(x) for x in multiplicities), Fraction(0))
    return Fraction(k * k, 2) - k * (s + N - Fraction(1, 2))


def ell_reduction(
    k: int,
    N: int,
    q: int,
    profile: ProfileLike,
    m: int,
    mode: str = MIN_ORDER,
) -> Tuple[Fraction, bool]:
    """
    (l(k), integer-step monotonicity of l on [1, m-1]) for the kept multiplicities.
    The main inequality is equivalent to l(k) <= 2N - q + 1 with q the kept count.
    """
    if not 1 <= k <= m - 1 <= N:
        raise HypothesisError(f"need 1 <= k <= m-1 <= N, got k={k}, m={m}, N={N}")
    ms = _multiplicities(profile, mode)
    kept = [ms[j] for j in drop_low_ramification(ms, k)]
    if len(kept) != q:
        raise HypothesisError(f"q={q} does not match the {len(kept)} kept hyperplanes")
    value = ell(k, N, kept)
    monotone = all(ell(x + 1, N, kept) <= ell(x, N, kept) for x in range(1, m - 1))
    return value, monotone
