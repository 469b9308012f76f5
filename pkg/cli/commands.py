"""
cli/commands.py

Command-line front end: `analyze`, `nochka`, `position`, `metric`.

Exit codes:
  0  every internal check passed
  1  configuration or computation error
  2  the main inequality is violated (impossible configuration)
  3  `metric` only: A <= 0, the inequality is not exceeded and no metric exists
"""
import argparse
import logging
import random
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from cli.config import AnalysisConfig, load_config
from cli.report import new_report, render_summary, write_report
from core.errors import GaussVDError, TheoremSatisfiedError
from core.exactnum import format_rational
from core.metriclab import (
    build_exponents,
    build_metric,
    singular_order_check,
    coordinate_invariance_check,
    divergence_probe,
    divisor_inequality_check,
    flatness_check,
    probe_path,
    schwarz_monitor,
    symmetrize,
    transformation_laws,
)
from core.minsurf import (
    MODES,
    RamificationProfile,
    SurfaceData,
    check_immersion,
    check_isotropy,
    project_to_pk,
    ramification_profile,
)
from core.nochka import compute_weights, product_inequality_sweep, verify_axioms
from core.position import (
    HyperplaneSet,
    is_general_position,
    is_n_subgeneral,
    minimal_subgeneral_n,
    span_dimension,
)
from core.verifier import TheoremReport, classical_bound, main_inequality, omission_bound
from core.wronskian import CurveRep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2
EXIT_SATISFIED = 3

# Seeded draws for the product-inequality sweep in `nochka`
SWEEP_DRAWS = 200
SWEEP_SEED = 0


@dataclass
class Analysis:
    """State shared by `analyze` and `metric` once the map is reduced to P^k."""
    cfg: AnalysisConfig
    surface: SurfaceData
    curve: CurveRep
    projected: HyperplaneSet
    k: int
    m: int
    N: int
    profile: RamificationProfile
    theorem: TheoremReport
    checks: Dict = field(default_factory=dict)
    findings: List[str] = field(default_factory=list)

    def kept_multiplicities(self):
        ms = self.profile.multiplicities(self.cfg.mode)
        return tuple(ms[j] for j in self.theorem.kept)


def _surface_of(cfg: AnalysisConfig) -> SurfaceData:
    if cfg.surface is not None:
        return cfg.surface
    curve = cfg.curve.reduced()
    return SurfaceData(curve, len(curve), "curve")


def _analyse(cfg: AnalysisConfig) -> Analysis:
    surface = _surface_of(cfg)
    checks: Dict = {}
    findings: List[str] = []
    if cfg.surface is not None:
        checks["isotropic"] = check_isotropy(surface)
        if not checks["isotropic"]:
            findings.append("the map is not isotropic; it is not the Gauss map of a minimal surface")
            logger.warning("sum of squares of the components is not zero")
    checks["immersion"] = check_immersion(surface, cfg.annulus, strict=cfg.strict, tolerance=cfg.tolerance)

    curve, projected = project_to_pk(surface, cfg.hyperplanes)
    k, m = curve.k, surface.m
    logger.info("the map spans P^%d inside P^%d", k, m - 1)
    N = cfg.N if cfg.N is not None else minimal_subgeneral_n(cfg.hyperplanes, m - 1)
    if cfg.N is not None and not is_n_subgeneral(cfg.hyperplanes, N, m - 1):
        findings.append(f"the hyperplanes are not in {N}-subgeneral position")
    logger.info("using N = %d", N)

    profile = ramification_profile(surface, cfg.hyperplanes, cfg.annulus, strict=cfg.strict, tolerance=cfg.tolerance)
    theorem = main_inequality(k, N, profile, cfg.mode, m)
    return Analysis(cfg, surface, curve, projected, k, m, N, profile, theorem, checks, findings)


def _weights(a: Analysis):
    kept = a.projected.subset(a.theorem.kept)
    return kept, compute_weights(kept, a.N, a.k)


def _metric_section(a: Analysis) -> Dict:
    opts = a.cfg.metric
    kept_hs, weights = _weights(a)
    ms = a.kept_multiplicities()
    pack = build_exponents(weights, ms, a.k, epsilon=opts.epsilon)
    spec = build_metric(a.curve, kept_hs, weights, ms, pack, a.cfg.annulus, precision=a.cfg.precision)
    orders = singular_order_check(spec)
    section = {
        "weights": weights.to_json(),
        **spec.to_json(),
        "singular_orders": orders.to_json(),
        "divisor_inequalities": divisor_inequality_check(a.curve, kept_hs, weights, ms, a.k, a.cfg.annulus).to_json(),
        "transformation_laws": transformation_laws(a.curve, kept_hs, spec.psi).ok,
        "symmetrized": symmetrize(spec).to_json(),
    }
    if opts.flatness is not None:
        f = opts.flatness
        section["flatness"] = flatness_check(spec, f.step, (f.center, f.half_width), f.samples, a.cfg.precision).to_json()
    if opts.invariance_points:
        section["invariance"] = [coordinate_invariance_check(spec, z0).to_json() for z0 in opts.invariance_points]
    probes = []
    for p in opts.probes:
        predicted = None
        for d in spec.divisors:
            if any(abs(r - p.target) < 1e-6 for r in d.roots):
                predicted = d.order
        path = probe_path(p.target, p.direction, p.t_max, p.t_min, p.points)
        probes.append(divergence_probe(spec, path, p.target, predicted).to_json())
    if probes:
        section["probes"] = probes
    if opts.schwarz is not None:
        s = opts.schwarz
        section["schwarz"] = schwarz_monitor(
            a.curve, kept_hs, weights, ms, pack, s.radius, s.grid, a.cfg.precision
        ).to_json()
    if not orders.holds:
        section["error"] = "singular orders exceed the bound"
    return section


def _config_from(args) -> AnalysisConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        mode=args.mode,
        strict=True if args.strict else None,
        precision=args.precision,
    )


def _finish(report: Dict, args, code: int) -> int:
    report["status"] = {EXIT_OK: "ok", EXIT_ERROR: "error", EXIT_VIOLATED: "violated", EXIT_SATISFIED: "satisfied"}[code]
    report["exit_code"] = code
    if args.out:
        write_report(report, args.out)
    sys.stdout.write(render_summary(report))
    return code


# --- commands --------------------------------------------------------------------

def cmd_analyze(args) -> int:
    """Check the main inequality for a surface or curve and its hyperplanes."""
    cfg = _config_from(args)
    report = new_report("analyze", cfg.source)
    a = _analyse(cfg)
    report.update({
        "k": a.k,
        "m": a.m,
        "N": a.N,
        "mode": cfg.mode,
        "checks": a.checks,
        "profile": a.profile.to_json(),
        "theorem": a.theorem.to_json(),
        "classical_bound": format_rational(classical_bound(a.k, a.m)) if a.k == a.m - 1 else None,
        "omission_bound": omission_bound(a.m),
    })
    try:
        _, weights = _weights(a)
        report["weights"] = weights.to_json()
    except GaussVDError as e:
        report["weights"] = None
        a.findings.append(f"Nochka weights skipped: {e}")
        logger.warning("Nochka weights skipped: %s", e)

    code = EXIT_OK if a.theorem.holds else EXIT_VIOLATED
    if cfg.metric.requested:
        try:
            report["metric"] = _metric_section(a)
        except TheoremSatisfiedError as e:
            report["metric"] = {"skipped": str(e)}
        except GaussVDError as e:
            report["metric"] = {"error": str(e), "error_type": type(e).__name__}
            logger.error("metric pipeline failed: %s", e)
        if "error" in report.get("metric", {}):
            code = EXIT_ERROR
    report["findings"] = a.findings
    return _finish(report, args, code)


def cmd_nochka(args) -> int:
    """Compute and verify Nochka weights for the hyperplanes."""
    cfg = _config_from(args)
    hs = cfg.hyperplanes
    k = cfg.k if cfg.k is not None else hs.m - 1
    N = cfg.N if cfg.N is not None else minimal_subgeneral_n(hs, k)
    report = new_report("nochka", cfg.source)
    weights = compute_weights(hs, N, k)
    axioms = verify_axioms(weights, hs, N, k)
    findings = product_inequality_sweep(weights, hs, N, SWEEP_DRAWS, random.Random(SWEEP_SEED))
    report.update({
        "k": k,
        "N": N,
        "weights": weights.to_json(),
        "axioms": axioms.to_json(),
        "product_inequality": {"draws": SWEEP_DRAWS, "seed": SWEEP_SEED, "failures": findings},
        "findings": [f"product inequality fails for R={f['R']}, E={f['E']}" for f in findings],
    })
    return _finish(report, args, EXIT_OK if axioms.ok else EXIT_ERROR)


def cmd_position(args) -> int:
    """Report subgeneral position of the hyperplanes."""
    cfg = _config_from(args)
    hs = cfg.hyperplanes
    k = cfg.k if cfg.k is not None else hs.m - 1
    report = new_report("position", cfg.source)
    section = {
        "q": hs.q,
        "m": hs.m,
        "rank": span_dimension(hs, range(hs.q)),
        "general_position": is_general_position(hs, k) if hs.q >= k + 1 else None,
        "minimal_N": minimal_subgeneral_n(hs, k),
    }
    if cfg.N is not None:
        section["N"] = cfg.N
        section["N_subgeneral"] = is_n_subgeneral(hs, cfg.N, k)
    report.update({"k": k, "N": section["minimal_N"], "position": section})
    return _finish(report, args, EXIT_OK)


def cmd_metric(args) -> int:
    """Build the singular flat metric and run its checks."""
    cfg = _config_from(args)
    report = new_report("metric", cfg.source)
    a = _analyse(cfg)
    report.update({"k": a.k, "m": a.m, "N": a.N, "mode": cfg.mode, "theorem": a.theorem.to_json()})
    try:
        report["metric"] = _metric_section(a)
    except TheoremSatisfiedError as e:
        logger.info("%s", e)
        report["metric"] = {"skipped": str(e)}
        report["findings"] = a.findings
        return _finish(report, args, EXIT_SATISFIED)
    report["findings"] = a.findings
    return _finish(report, args, EXIT_ERROR if "error" in report["metric"] else EXIT_OK)


COMMANDS = {
    "analyze": cmd_analyze,
    "nochka": cmd_nochka,
    "position": cmd_position,
    "metric": cmd_metric,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussvd",
        description="Value distribution of generalized Gauss maps on annular ends.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=(func.__doc__ or name).strip().splitlines()[0])
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--mode", choices=MODES, default=None, help="ramification convention")
        p.add_argument("--strict", action="store_true", help="fail on roots too close to the annulus boundary")
        p.add_argument("--precision", type=int, default=None, help="mpmath working precision in bits")
        p.add_argument("--out", default=None, help="directory for report.json and summary.txt")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except GaussVDError as e:
        logger.error("%s failed: %s", args.command, e)
        sys.stderr.write(f"error: {e}\n")
        report = new_report(args.command)
        report["error"] = str(e)
        report["error_type"] = type(e).__name__
        return _finish(report, args, EXIT_ERROR)
