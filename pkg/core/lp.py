"""
core/lp.py

Exact linear programming over Fraction.

Dense-tableau two-phase simplex with Bland's rule (no cycling, no tolerances).
Variables are nonnegative; rows are "<=", ">=" or "=" constraints.
Sized for the Nochka weight programs: a dozen variables, a few hundred rows.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = ("<=", ">=", "=")


@dataclass
class LinearProgram:
    n_vars: int
    rows: List[Tuple[Tuple[Fraction, ...], str, Fraction]] = field(default_factory=list)

    def add(self, coeffs: Sequence, sense: str, rhs) -> None:
        if sense not in _SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        if len(coeffs) != self.n_vars:
            raise ValueError(f"expected {self.n_vars} coefficients, got {len(coeffs)}")
        self.rows.append((tuple(Fraction(c) for c in coeffs), sense, Fraction(rhs)))

    def copy(self) -> "LinearProgram":
        return LinearProgram(self.n_vars, list(self.rows))


@dataclass(frozen=True)
class LPResult:
    status: str
    x: Optional[Tuple[Fraction, ...]]
    value: Optional[Fraction]
    iterations: int


def _pivot(T: List[List[Fraction]], cost: List[Fraction], r: int, c: int) -> None:
    inv = 1 / T[r][c]
    T[r] = [v * inv for v in T[r]]
    pr = T[r]
    for i, row in enumerate(T):
        if i != r and row[c]:
            f = row[c]
            T[i] = [a - f * b for a, b in zip(row, pr)]
    if cost[c]:
        f = cost[c]
        cost[:] = [a - f * b for a, b in zip(cost, pr)]


def _run(T, basis, cost, allowed: List[bool]) -> Tuple[str, int]:
    """Minimise the reduced-cost row `cost` (last entry holds -objective)."""
    it = 0
    ncols = len(cost) - 1
    while True:
        enter = next((j for j in range(ncols) if allowed[j] and cost[j] < 0), None)
        if enter is None:
            return OPTIMAL, it
        best = None
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return UNBOUNDED, it
        r = best[1]
        _pivot(T, cost, r, enter)
        basis[r] = enter
        it += 1


def minimize(lp: LinearProgram, objective: Sequence) -> LPResult:
    """Minimise objective . x subject to lp.rows and x >= 0."""
    n = lp.n_vars
    c = [Fraction(v) for v in objective]
    if len(c) != n:
        raise ValueError("objective length does not match the program")

    # normalise rhs >= 0, then count slacks and artificials
    rows = []
    for coeffs, sense, rhs in lp.rows:
        if rhs < 0:
            coeffs = tuple(-a for a in coeffs)
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        rows.append((coeffs, sense, rhs))
    n_slack = sum(1 for _, s, _ in rows if s != "=")
    n_art = sum(1 for _, s, _ in rows if s != "<=")
    ncols = n + n_slack + n_art

    T: List[List[Fraction]] = []
    basis: List[int] = []
    si, ai = n, n + n_slack
    for coeffs, sense, rhs in rows:
        row = list(coeffs) + [Fraction(0)] * (n_slack + n_art) + [rhs]
        if sense == "<=":
            row[si] = Fraction(1)
            basis.append(si)
            si += 1
        elif sense == ">=":
            row[si] = Fraction(-1)
            si += 1
            row[ai] = Fraction(1)
            basis.append(ai)
            ai += 1
        else:
            row[ai] = Fraction(1)
            basis.append(ai)
            ai += 1
        T.append(row)

    iterations = 0
    art = [False] * n + [False] * n_slack + [True] * n_art
    if n_art:
        cost = [Fraction(1) if a else Fraction(0) for a in art] + [Fraction(0)]
        for i, b in enumerate(basis):
            if art[b]:
                cost = [x - y for x, y in zip(cost, T[i])]
        status, it = _run(T, basis, cost, [True] * ncols)
        iterations += it
        if -cost[-1] > 0:
            logger.debug("phase 1 ended with infeasibility %s after %d pivots", -cost[-1], iterations)
            return LPResult(INFEASIBLE, None, None, iterations)
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(T):
            if art[basis[i]]:
                j = next((j for j in range(n + n_slack) if T[i][j]), None)
                if j is None:
                    del T[i]
                    del basis[i]
                    continue
                _pivot(T, cost, i, j)
                basis[i] = j
            i += 1

    allowed = [not a for a in art]
    cost = c + [Fraction(0)] * (n_slack + n_art) + [Fraction(0)]
    for i, b in enumerate(basis):
        if cost[b]:
            f = cost[b]
            cost = [x - f * y for x, y in zip(cost, T[i])]
    status, it = _run(T, basis, cost, allowed)
    iterations += it
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None, iterations)

    x = [Fraction(0)] * ncols
    for i, b in enumerate(basis):
        x[b] = T[i][-1]
    xs = tuple(x[:n])
    value = sum((ci * xi for ci, xi in zip(c, xs)), Fraction(0))
    return LPResult(OPTIMAL, xs, value, iterations)


def maximize(lp: LinearProgram, objective: Sequence) -> LPResult:
    res = minimize(lp, [-Fraction(v) for v in objective])
    if res.status != OPTIMAL:
        return res
    return LPResult(OPTIMAL, res.x, -res.value, res.iterations)
