"""
cli/report.py

Report rendering and output. Reports are plain dicts, dumped with sorted keys and
no timestamps so identical configurations give byte-identical files. Writes go
through a temporary file in the target directory followed by os.replace.
"""
import json
import logging
import os
import tempfile
from typing import Dict, Iterable, List

logger = logging.getLogger(__name__)

SCHEMA = "gaussvd/1"
REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.txt"


def new_report(command: str, source: str = "") -> Dict:
    return {"schema": SCHEMA, "command": command, "config": source}


def dumps(report: Dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except Exception:
        try:
            os.remove(tmp)
        except OSError:
            pass
        raise


def _lines(report: Dict) -> Iterable[str]:
    yield f"gaussvd {report['command']} ({report.get('config') or 'inline'})"
    yield f"status: {report.get('status', '?')}"
    if "error" in report:
        yield f"error: {report['error']}"
    if "k" in report:
        yield f"k = {report['k']}, N = {report.get('N')}"
    thm = report.get("theorem")
    if thm:
        yield f"inequality: {thm['lhs']} <= {thm['rhs']} -> {'holds' if thm['holds'] else 'VIOLATED'}"
        yield f"kept {thm['q_kept']} of {thm['q_total']} hyperplanes (dropped {thm['dropped']})"
    weights = report.get("weights")
    if weights:
        yield f"Nochka theta = {weights['theta']}, omega = {', '.join(weights['omega'])}"
    position = report.get("position")
    if position:
        yield f"general position: {position.get('general_position')}, minimal N: {position.get('minimal_N')}"
    metric = report.get("metric")
    if metric and "exponents" in metric:
        e = metric["exponents"]
        yield f"epsilon = {e['epsilon']}, h = {e['h']}, rho = {e['rho']}, rho* = {e['rho_star']}"
        orders = metric.get("singular_orders")
        if orders:
            yield f"singular orders <= {orders['bound']}: {orders['holds']}"
        flat = metric.get("flatness")
        if flat:
            yield f"flatness residual: {flat['max_residual']:.3e}"
        for i, probe in enumerate(metric.get("probes", [])):
            yield f"probe {i}: fitted exponent {probe['fitted_exponent']}, diverges: {probe['diverges']}"
    elif metric and "skipped" in metric:
        yield f"metric: skipped ({metric['skipped']})"
    for finding in report.get("findings", []):
        yield f"finding: {finding}"


def render_summary(report: Dict) -> str:
    return "\n".join(_lines(report)) + "\n"


def write_report(report: Dict, out_dir: str) -> List[str]:
    paths = [os.path.join(out_dir, REPORT_FILE), os.path.join(out_dir, SUMMARY_FILE)]
    atomic_write(paths[0], dumps(report))
    atomic_write(paths[1], render_summary(report))
    logger.info("report written to %s", out_dir)
    return paths
