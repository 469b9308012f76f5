"""
core/position.py

Hyperplane configurations in projective space and their subset ranks.

Provides:
- Hyperplane / HyperplaneSet (exact, unnormalised coefficient vectors)
- span_dimension(hs, R): d(R), the rank of {A_j : j in R} over Q(i)
- is_n_subgeneral, is_general_position, minimal_subgeneral_n
- subset_ranks: d(R) for every small subset, fanned out over a thread pool

Indices are 0-based throughout.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from core.errors import (
    DimensionMismatchError,
    EnumerationCapError,
    InvalidIndexError,
    PositionError,
)
from core.exactnum import GaussianLike, GaussianRational, matrix_rank

logger = logging.getLogger(__name__)

# Refuse subset enumerations larger than this
DEFAULT_SUBSET_CAP = 10 ** 6
# Default thread pool size
DEFAULT_MAX_WORKERS = max(1, (os.cpu_count() or 2) - 1)


@dataclass(frozen=True)
class Hyperplane:
    coeffs: Tuple[GaussianRational, ...]
    label: str = ""

    def __post_init__(self):
        coeffs = tuple(GaussianRational.coerce(c) for c in self.coeffs)
        if not coeffs:
            raise DimensionMismatchError("a hyperplane needs at least one coefficient")
        if not any(coeffs):
            raise PositionError(f"hyperplane {self.label or '?'} has all coefficients zero")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector, in floating point."""
        return math.sqrt(float(sum(c.abs2() for c in self.coeffs)))

    @classmethod
    def from_json(cls, data) -> "Hyperplane":
        return cls(tuple(GaussianRational.from_json(c) for c in data["coeffs"]), str(data.get("label", "")))

    def to_json(self) -> Dict:
        return {"label": self.label, "coeffs": [c.to_json() for c in self.coeffs]}


class HyperplaneSet:
    """Ordered collection of hyperplanes sharing one coefficient length m."""

    def __init__(self, hyperplanes: Iterable[Hyperplane]):
        hs = tuple(hyperplanes)
        if not hs:
            raise PositionError("a hyperplane set needs at least one hyperplane")
        m = hs[0].dimension
        for h in hs:
            if h.dimension != m:
                raise DimensionMismatchError(
                    f"hyperplane {h.label or '?'} has {h.dimension} coefficients, expected {m}"
                )
        self._hyperplanes = hs
        self._m = m

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[GaussianLike]], labels: Optional[Sequence[str]] = None):
        labels = list(labels) if labels is not None else [f"H{j + 1}" for j in range(len(vectors))]
        return cls(Hyperplane(tuple(v), lab) for v, lab in zip(vectors, labels))

    @classmethod
    def from_json(cls, data) -> "HyperplaneSet":
        items = []
        for j, item in enumerate(data):
            h = Hyperplane.from_json(item)
            if not h.label:
                h = Hyperplane(h.coeffs, f"H{j + 1}")
            items.append(h)
        return cls(items)

    def to_json(self) -> List[Dict]:
        return [h.to_json() for h in self._hyperplanes]

    @property
    def m(self) -> int:
        """Coefficient length; the ambient space is P^(m-1)."""
        return self._m

    @property
    def q(self) -> int:
        return len(self._hyperplanes)

    def __len__(self):
        return len(self._hyperplanes)

    def __iter__(self):
        return iter(self._hyperplanes)

    def __getitem__(self, j: int) -> Hyperplane:
        return self._hyperplanes[j]

    def subset(self, indices: Sequence[int]) -> "HyperplaneSet":
        return HyperplaneSet(self[j] for j in _check_indices(self, indices))

    def labels(self) -> List[str]:
        return [h.label for h in self._hyperplanes]


def _check_indices(hs: HyperplaneSet, R: Iterable[int]) -> Tuple[int, ...]:
    idx = tuple(sorted(set(R)))
    if not idx:
        raise InvalidIndexError("empty index subset")
    if idx[0] < 0 or idx[-1] >= hs.q:
        raise InvalidIndexError(f"index out of range in {idx} for q={hs.q}")
    return idx


def span_dimension(hs: HyperplaneSet, R: Iterable[int]) -> int:
    """d(R): exact rank of the coefficient vectors indexed by R."""
    idx = _check_indices(hs, R)
    return matrix_rank([hs[j].coeffs for j in idx])


def _check_cap(q: int, size: int, cap: int) -> None:
    count = math.comb(q, size)
    if count > cap:
        raise EnumerationCapError(f"C({q}, {size}) = {count} subsets exceeds the cap {cap}")


def subset_ranks(
    hs: HyperplaneSet,
    max_size: int,
    cap: int = DEFAULT_SUBSET_CAP,
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> Dict[Tuple[int, ...], int]:
    """d(R) for every R with 1 <= |R| <= max_size, in lexicographic order."""
    max_size = min(max_size, hs.q)
    total = sum(math.comb(hs.q, s) for s in range(1, max_size + 1))
    if total > cap:
        raise EnumerationCapError(f"{total} subsets of size <= {max_size} exceeds the cap {cap}")
    subsets = [R for s in range(1, max_size + 1) for R in combinations(range(hs.q), s)]
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        ranks = list(ex.map(lambda R: span_dimension(hs, R), subsets))
    logger.debug("computed %d subset ranks (|R| <= %d)", len(subsets), max_size)
    return dict(zip(subsets, ranks))


def is_n_subgeneral(hs: HyperplaneSet, N: int, k: int, cap: int = DEFAULT_SUBSET_CAP) -> bool:
    """True iff every (N+1)-subset spans a (k+1)-dimensional space."""
    if not 1 <= k <= N:
        raise PositionError(f"N-subgeneral position needs N >= k >= 1, got N={N}, k={k}")
    if hs.q < N + 1:
        raise PositionError(f"need q >= N+1 hyperplanes, got q={hs.q}, N={N}")
    if k + 1 > hs.m:
        raise DimensionMismatchError(f"rank k+1={k + 1} exceeds the coefficient length {hs.m}")
    _check_cap(hs.q, N + 1, cap)
    for R in combinations(range(hs.q), N + 1):
        if span_dimension(hs, R) != k + 1:
            logger.debug("subset %s spans dimension %d != %d", R, span_dimension(hs, R), k + 1)
            return False
    return True


def is_general_position(hs: HyperplaneSet, k: int, cap: int = DEFAULT_SUBSET_CAP) -> bool:
    return is_n_subgeneral(hs, k, k, cap)


def minimal_subgeneral_n(hs: HyperplaneSet, k: int, cap: int = DEFAULT_SUBSET_CAP) -> int:
    """Least N >= k with hs in N-subgeneral position."""
    full = span_dimension(hs, range(hs.q))
    if full != k + 1:
        raise PositionError(
            f"the {hs.q} hyperplanes span dimension {full}, not k+1={k + 1}; reduce k"
        )
    for N in range(k, hs.q):
        if is_n_subgeneral(hs, N, k, cap):
            logger.debug("minimal subgeneral N = %d (k=%d, q=%d)", N, k, hs.q)
            return N
    # unreachable: N = q-1 uses the full set, which spans k+1
    raise PositionError("no subgeneral N found")
