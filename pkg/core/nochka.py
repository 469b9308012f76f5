"""
core/nochka.py

Rational Nochka weights by exact linear programming.

Axioms checked for weights omega(1..q) and constant theta, hyperplanes in
N-subgeneral position in P^k:
  (i)   0 < omega(j) <= theta <= 1
  (ii)  sum omega(j) = k + 1 + theta * (q - 2N + k - 1)
  (iii) (k+1)/(2N-k+1) <= theta <= (k+1)/(N+1)
  (iv)  sum_{j in R} omega(j) <= d(R) for 0 < |R| <= N+1

compute_weights solves the program with core.lp and canonicalises the answer:
minimal theta, then the largest common floor for the omegas, then
lexicographically smallest omega. Subset constraints (iv) enter lazily, most
violated first.
"""
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

from core import lp
from core.errors import (
    DimensionMismatchError,
    HypothesisError,
    InfeasibleError,
    InvalidIndexError,
)
from core.exactnum import format_rational, parse_rational
from core.position import DEFAULT_SUBSET_CAP, HyperplaneSet, span_dimension, subset_ranks

logger = logging.getLogger(__name__)

# Safety net for the cut loop; each round adds at least one new subset constraint
_MAX_CUT_ROUNDS = 10_000


@dataclass(frozen=True)
class NochkaWeights:
    omega: Tuple[Fraction, ...]
    theta: Fraction
    provenance: Dict = field(default_factory=dict, compare=False)

    @property
    def q(self) -> int:
        return len(self.omega)

    def to_json(self) -> Dict:
        return {
            "omega": [format_rational(w) for w in self.omega],
            "theta": format_rational(self.theta),
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_json(cls, data) -> "NochkaWeights":
        return cls(
            tuple(parse_rational(w) for w in data["omega"]),
            parse_rational(data["theta"]),
            dict(data.get("provenance", {})),
        )


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    message: str
    witness: Tuple = ()


@dataclass(frozen=True)
class AxiomReport:
    violations: Tuple[AxiomViolation, ...]
    checked_subsets: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> Dict:
        return {
            "ok": self.ok,
            "checked_subsets": self.checked_subsets,
            "violations": [
                {"axiom": v.axiom, "message": v.message, "witness": list(v.witness)} for v in self.violations
            ],
        }


def theta_window(N: int, k: int) -> Tuple[Fraction, Fraction]:
    return Fraction(k + 1, 2 * N - k + 1), Fraction(k + 1, N + 1)


def _check_hypothesis(q: int, N: int, k: int) -> None:
    if not 1 <= k <= N:
        raise HypothesisError(f"need 1 <= k <= N, got k={k}, N={N}")
    if q <= 2 * N - k + 1:
        raise HypothesisError(f"Nochka weights need q > 2N-k+1: q={q}, 2N-k+1={2 * N - k + 1}")


class _WeightProgram:
    """
    Variables: omega_1..omega_q, theta, t (common floor). All nonnegative.
    Holds the accumulated subset cuts across canonicalisation stages.
    """

    def __init__(self, q: int, N: int, k: int, ranks: Dict[Tuple[int, ...], int]):
        self.q, self.N, self.k = q, N, k
        self.n = q + 2
        self.theta_idx = q
        self.t_idx = q + 1
        # only subsets with d(R) < |R| can ever bind, since omega <= 1
        self.candidates = [(R, d) for R, d in ranks.items() if d < len(R)]
        self.cuts: Dict[Tuple[int, ...], int] = {}
        self.fixed: List[Tuple[Tuple[Fraction, ...], Fraction]] = []
        self.solves = 0
        self.pivots = 0

    def _base(self) -> lp.LinearProgram:
        q, n = self.q, self.n
        prog = lp.LinearProgram(n)
        lo, hi = theta_window(self.N, self.k)
        for j in range(q):
            row = [0] * n
            row[j], row[self.theta_idx] = 1, -1
            prog.add(row, "<=", 0)
            row = [0] * n
            row[j], row[self.t_idx] = 1, -1
            prog.add(row, ">=", 0)
        row = [1] * q + [-(q - 2 * self.N + self.k - 1), 0]
        prog.add(row, "=", self.k + 1)
        row = [0] * n
        row[self.theta_idx] = 1
        prog.add(row, ">=", lo)
        prog.add(row, "<=", min(hi, Fraction(1)))
        for R, d in self.cuts.items():
            row = [0] * n
            for j in R:
                row[j] = 1
            prog.add(row, "<=", d)
        for coeffs, value in self.fixed:
            prog.add(coeffs, "=", value)
        return prog

    def _most_violated(self, x: Sequence[Fraction]) -> Optional[Tuple[Tuple[int, ...], int]]:
        worst, worst_excess = None, Fraction(0)
        for R, d in self.candidates:
            if R in self.cuts:
                continue
            excess = sum(x[j] for j in R) - d
            if excess > worst_excess:
                worst, worst_excess = (R, d), excess
        return worst

    def optimise(self, objective: Sequence, sense: str) -> lp.LPResult:
        for _ in range(_MAX_CUT_ROUNDS):
            prog = self._base()
            solve = lp.minimize if sense == "min" else lp.maximize
            res = solve(prog, objective)
            self.solves += 1
            self.pivots += res.iterations
            if res.status != lp.OPTIMAL:
                return res
            cut = self._most_violated(res.x)
            if cut is None:
                return res
            self.cuts[cut[0]] = cut[1]
            logger.debug("added subset cut %s <= %d", cut[0], cut[1])
        raise InfeasibleError("subset cut loop did not converge")

    def unit(self, idx: int) -> List[int]:
        row = [0] * self.n
        row[idx] = 1
        return row

    def fix(self, idx: int, value: Fraction) -> None:
        self.fixed.append((tuple(Fraction(v) for v in self.unit(idx)), value))


def compute_weights(
    hs: HyperplaneSet,
    N: int,
    k: int,
    cap: int = DEFAULT_SUBSET_CAP,
) -> NochkaWeights:
    """
    Exact canonical feasible point of axioms (i)-(iv). Raises HypothesisError when
    q <= 2N-k+1 and InfeasibleError when the program has no solution.
    """
    q = hs.q
    _check_hypothesis(q, N, k)
    ranks = subset_ranks(hs, N + 1, cap=cap)
    prog = _WeightProgram(q, N, k, ranks)

    def _need(res: lp.LPResult, what: str) -> lp.LPResult:
        if res.status != lp.OPTIMAL:
            raise InfeasibleError(f"weight program {res.status} while {what} (q={q}, N={N}, k={k})")
        return res

    theta_min = _need(prog.optimise(prog.unit(prog.theta_idx), "min"), "minimising theta").x[prog.theta_idx]
    prog.fix(prog.theta_idx, theta_min)
    floor = _need(prog.optimise(prog.unit(prog.t_idx), "max"), "maximising the floor").x[prog.t_idx]
    order = "min-theta, max-floor, lex-omega"
    if floor == 0:
        # theta-minimal points all touch omega = 0; trade theta for positivity
        prog.fixed.clear()
        floor = _need(prog.optimise(prog.unit(prog.t_idx), "max"), "maximising the floor").x[prog.t_idx]
        if floor == 0:
            raise InfeasibleError(f"no strictly positive weights exist (q={q}, N={N}, k={k})")
        prog.fix(prog.t_idx, floor)
        theta_min = _need(prog.optimise(prog.unit(prog.theta_idx), "min"), "minimising theta").x[prog.theta_idx]
        prog.fix(prog.theta_idx, theta_min)
        order = "max-floor, min-theta, lex-omega"
    else:
        prog.fix(prog.t_idx, floor)

    x = None
    for j in range(q):
        res = _need(prog.optimise(prog.unit(j), "min"), f"minimising omega({j + 1})")
        x = res.x
        prog.fix(j, x[j])
    omega = tuple(x[:q])
    theta = x[prog.theta_idx]

    weights = NochkaWeights(
        omega,
        theta,
        {
            "objective": order,
            "variables": prog.n,
            "base_constraints": 2 * q + 3,
            "subset_constraints": len(prog.cuts),
            "candidate_subsets": len(prog.candidates),
            "solves": prog.solves,
            "pivots": prog.pivots,
        },
    )
    report = verify_axioms(weights, hs, N, k, ranks=ranks)
    if not report.ok:
        raise InfeasibleError(f"computed weights fail verification: {report.violations[0].message}")
    logger.info("Nochka weights: theta=%s, omega=%s", theta, [format_rational(w) for w in omega])
    return weights


def feasible_with_theta_at_most(
    hs: HyperplaneSet,
    N: int,
    k: int,
    bound: Fraction,
    cap: int = DEFAULT_SUBSET_CAP,
) -> bool:
    """Whether axioms (ii)-(iv) with 0 <= omega <= theta admit a point with theta <= bound."""
    _check_hypothesis(hs.q, N, k)
    prog = _WeightProgram(hs.q, N, k, subset_ranks(hs, N + 1, cap=cap))
    res = prog.optimise(prog.unit(prog.theta_idx), "min")
    return res.status == lp.OPTIMAL and res.x[prog.theta_idx] <= Fraction(bound)


def verify_axioms(
    w: NochkaWeights,
    hs: HyperplaneSet,
    N: int,
    k: int,
    ranks: Optional[Dict[Tuple[int, ...], int]] = None,
    cap: int = DEFAULT_SUBSET_CAP,
) -> AxiomReport:
    if w.q != hs.q:
        raise DimensionMismatchError(f"{w.q} weights for {hs.q} hyperplanes")
    q, theta = w.q, w.theta
    out: List[AxiomViolation] = []

    for j, om in enumerate(w.omega):
        if not 0 < om <= theta:
            out.append(AxiomViolation("i", f"omega({j + 1}) = {om} not in (0, theta={theta}]", (j,)))
    if theta > 1:
        out.append(AxiomViolation("i", f"theta = {theta} exceeds 1"))

    target = k + 1 + theta * (q - 2 * N + k - 1)
    total = sum(w.omega, Fraction(0))
    if total != target:
        out.append(AxiomViolation("ii", f"sum omega = {total} != k+1+theta(q-2N+k-1) = {target}"))

    lo, hi = theta_window(N, k)
    if not lo <= theta <= hi:
        out.append(AxiomViolation("iii", f"theta = {theta} outside [{lo}, {hi}]", (lo, hi)))

    if ranks is None:
        ranks = subset_ranks(hs, N + 1, cap=cap)
    for R, d in ranks.items():
        s = sum((w.omega[j] for j in R), Fraction(0))
        if s > d:
            out.append(AxiomViolation("iv", f"sum over {R} = {s} exceeds d(R) = {d}", R))

    return AxiomReport(tuple(out), len(ranks))


def _raised_product(E: Dict[int, Fraction], exps: Dict[int, int]) -> Fraction:
    out = Fraction(1)
    for j, e in exps.items():
        out *= E[j] ** e
    return out


def product_inequality_check(
    w: NochkaWeights,
    hs: HyperplaneSet,
    R: Sequence[int],
    E: Sequence,
    N: Optional[int] = None,
) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    """
    Search R' subset of R with |R'| = d(R) = d(R') and
    prod_{j in R} E_j^omega(j) <= prod_{j in R'} E_j, returning the first such R'
    in lexicographic order. E is aligned with R; both sides are compared exactly
    after raising to the common denominator of the omegas.
    """
    idx = tuple(R)
    if not idx or len(set(idx)) != len(idx):
        raise InvalidIndexError(f"R must be a nonempty set of distinct indices, got {idx}")
    if N is not None and len(idx) > N + 1:
        raise InvalidIndexError(f"|R| = {len(idx)} exceeds N+1 = {N + 1}")
    if len(E) != len(idx):
        raise DimensionMismatchError(f"{len(E)} values of E for |R| = {len(idx)}")
    values = {j: parse_rational(e) for j, e in zip(idx, E)}
    if any(v < 1 for v in values.values()):
        raise InvalidIndexError("every E_j must be >= 1")

    d = span_dimension(hs, idx)
    den = lcm(*(w.omega[j].denominator for j in idx))
    lhs = _raised_product(values, {j: w.omega[j].numerator * (den // w.omega[j].denominator) for j in idx})
    for Rp in combinations(sorted(idx), d):
        if span_dimension(hs, Rp) != d:
            continue
        rhs = _raised_product(values, {j: den for j in Rp})
        if lhs <= rhs:
            return True, Rp
    logger.warning("product inequality fails for R=%s, E=%s (finding)", idx, [format_rational(v) for v in values.values()])
    return False, None


def product_inequality_sweep(
    w: NochkaWeights,
    hs: HyperplaneSet,
    N: int,
    draws: int,
    rng: random.Random,
    e_max: int = 100,
) -> List[Dict]:
    """Random (R, E) draws; returns the failing draws as findings."""
    findings = []
    for _ in range(draws):
        size = rng.randint(1, min(N + 1, hs.q))
        R = tuple(sorted(rng.sample(range(hs.q), size)))
        E = [Fraction(rng.randint(1, e_max * 8), 8) for _ in R]
        E = [max(e, Fraction(1)) for e in E]
        holds, _ = product_inequality_check(w, hs, R, E, N)
        if not holds:
            findings.append({"R": list(R), "E": [format_rational(e) for e in E]})
    if findings:
        logger.warning("%d of %d product-inequality draws failed", len(findings), draws)
    return findings
