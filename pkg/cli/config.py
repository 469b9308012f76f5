"""
cli/config.py

JSON configuration -> AnalysisConfig.

Every parse failure becomes a ConfigError whose message starts with the JSON path
of the offending value ("$.hyperplanes[2].coeffs[0].re: ..."); malformed rationals
keep their character position.
"""
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from core.errors import ConfigError, GaussVDError, RationalParseError
from core.exactnum import (
    DEFAULT_PRECISION,
    DEFAULT_ROOT_TOLERANCE,
    GaussianRational,
    LaurentPoly,
    parse_rational,
)
from core.metriclab import DEFAULT_FLATNESS_STEP
from core.minsurf import MIN_ORDER, MODES, AnnularEnd, SurfaceData, from_weierstrass
from core.position import Hyperplane, HyperplaneSet
from core.wronskian import CurveRep

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlatnessOptions:
    center: complex = 1 + 0j
    half_width: float = 0.1
    step: float = DEFAULT_FLATNESS_STEP
    samples: int = 5


@dataclass(frozen=True)
class ProbeOptions:
    target: complex
    direction: complex
    t_max: float = 0.1
    t_min: float = 1e-6
    points: int = 200


@dataclass(frozen=True)
class SchwarzOptions:
    radius: float = 2.0
    grid: int = 8


@dataclass(frozen=True)
class MetricOptions:
    flatness: Optional[FlatnessOptions] = None
    probes: Tuple[ProbeOptions, ...] = ()
    invariance_points: Tuple[complex, ...] = ()
    epsilon: Optional[Any] = None
    schwarz: Optional[SchwarzOptions] = None
    requested: bool = False


@dataclass(frozen=True)
class AnalysisConfig:
    hyperplanes: HyperplaneSet
    annulus: AnnularEnd
    surface: Optional[SurfaceData] = None
    curve: Optional[CurveRep] = None
    N: Optional[int] = None
    k: Optional[int] = None
    mode: str = MIN_ORDER
    strict: bool = False
    precision: int = DEFAULT_PRECISION
    tolerance: float = DEFAULT_ROOT_TOLERANCE
    metric: MetricOptions = field(default_factory=MetricOptions)
    source: str = ""

    @property
    def components(self) -> CurveRep:
        return self.surface.G if self.surface is not None else self.curve

    def with_overrides(self, **overrides) -> "AnalysisConfig":
        """CLI flags win over file values; None means "not given"."""
        given = {k: v for k, v in overrides.items() if v is not None}
        if "mode" in given and given["mode"] not in MODES:
            raise ConfigError(f"--mode: expected one of {MODES}, got {given['mode']!r}")
        return replace(self, **given)


# --- helpers -------------------------------------------------------------------

def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(f"{path}: {message}")


def _require(data: Dict, key: str, path: str):
    if not isinstance(data, dict):
        raise _fail(path, "expected an object")
    if key not in data:
        raise _fail(f"{path}.{key}", "missing required field")
    return data[key]


def _rational(value, path: str):
    try:
        return parse_rational(value)
    except RationalParseError as e:
        err = RationalParseError(f"{path}: {e}", e.text, e.position)
        raise err from e


def _gaussian(value, path: str) -> GaussianRational:
    if isinstance(value, dict):
        unknown = set(value) - {"re", "im"}
        if unknown:
            raise _fail(path, f"unknown keys {sorted(unknown)}")
        return GaussianRational(_rational(value.get("re", 0), f"{path}.re"), _rational(value.get("im", 0), f"{path}.im"))
    return GaussianRational(_rational(value, path), 0)


def _poly(value, path: str) -> LaurentPoly:
    if not isinstance(value, list):
        raise _fail(path, "a Laurent polynomial is a list of {pow, c} terms")
    acc: Dict[int, GaussianRational] = {}
    for i, term in enumerate(value):
        tp = f"{path}[{i}]"
        e = _require(term, "pow", tp)
        if isinstance(e, bool) or not isinstance(e, int):
            raise _fail(f"{tp}.pow", f"exponent must be an integer, got {e!r}")
        acc[e] = acc.get(e, GaussianRational(0)) + _gaussian(_require(term, "c", tp), f"{tp}.c")
    return LaurentPoly(acc)


def _int(value, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise _fail(path, f"must be >= {minimum}, got {value}")
    return value


def _float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _point(value, path: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise _fail(path, "a point is [re, im]")
    return complex(_float(value[0], f"{path}[0]"), _float(value[1], f"{path}[1]"))


# --- sections ------------------------------------------------------------------

def _surface(data, path: str) -> SurfaceData:
    m = _int(_require(data, "m", path), f"{path}.m", minimum=2)
    if "weierstrass" in data:
        w = data["weierstrass"]
        f = _poly(_require(w, "f", f"{path}.weierstrass"), f"{path}.weierstrass.f")
        g = _poly(_require(w, "g", f"{path}.weierstrass"), f"{path}.weierstrass.g")
        if m != 3:
            raise _fail(f"{path}.m", f"Weierstrass data describes m = 3, got {m}")
        s = from_weierstrass(f, g)
    elif "components" in data:
        comps = data["components"]
        if not isinstance(comps, list):
            raise _fail(f"{path}.components", "expected a list")
        if len(comps) != m:
            raise _fail(f"{path}.components", f"expected {m} components, got {len(comps)}")
        s = SurfaceData.from_components([_poly(c, f"{path}.components[{i}]") for i, c in enumerate(comps)])
    else:
        raise _fail(path, "needs either 'weierstrass' or 'components'")
    return s


def _curve(data, path: str) -> CurveRep:
    comps = _require(data, "components", path)
    if not isinstance(comps, list) or len(comps) < 2:
        raise _fail(f"{path}.components", "a curve needs at least two components")
    return CurveRep(tuple(_poly(c, f"{path}.components[{i}]") for i, c in enumerate(comps)))


def _hyperplanes(data, path: str) -> HyperplaneSet:
    if not isinstance(data, list) or not data:
        raise _fail(path, "expected a nonempty list of hyperplanes")
    items = []
    for j, item in enumerate(data):
        hp = f"{path}[{j}]"
        coeffs = _require(item, "coeffs", hp)
        if not isinstance(coeffs, list):
            raise _fail(f"{hp}.coeffs", "expected a list")
        label = str(item.get("label", "") or f"H{j + 1}")
        items.append(Hyperplane(tuple(_gaussian(c, f"{hp}.coeffs[{i}]") for i, c in enumerate(coeffs)), label))
    return HyperplaneSet(items)


def _annulus(data, path: str) -> AnnularEnd:
    r = _rational(_require(data, "r", path), f"{path}.r")
    t = data.get("t")
    return AnnularEnd(r, _rational(t, f"{path}.t") if t is not None else None)


def _metric(data, path: str) -> MetricOptions:
    if not isinstance(data, dict):
        raise _fail(path, "expected an object")
    flat = None
    if "flatness" in data:
        fp = f"{path}.flatness"
        fd = data["flatness"]
        flat = FlatnessOptions(
            center=_point(fd.get("center", [1, 0]), f"{fp}.center"),
            half_width=_float(fd.get("half_width", 0.1), f"{fp}.half_width"),
            step=_float(fd.get("step", DEFAULT_FLATNESS_STEP), f"{fp}.step"),
            samples=_int(fd.get("samples", 5), f"{fp}.samples", minimum=1),
        )
    probes: List[ProbeOptions] = []
    for i, pd in enumerate(data.get("probes", [])):
        pp = f"{path}.probes[{i}]"
        probes.append(ProbeOptions(
            target=_point(_require(pd, "target", pp), f"{pp}.target"),
            direction=_point(pd.get("direction", [1, 0]), f"{pp}.direction"),
            t_max=_float(pd.get("t_max", 0.1), f"{pp}.t_max"),
            t_min=_float(pd.get("t_min", 1e-6), f"{pp}.t_min"),
            points=_int(pd.get("points", 200), f"{pp}.points", minimum=3),
        ))
    points = tuple(_point(p, f"{path}.invariance_points[{i}]") for i, p in enumerate(data.get("invariance_points", [])))
    eps = data.get("epsilon")
    schwarz = None
    if "schwarz" in data:
        sp = f"{path}.schwarz"
        sd = data["schwarz"]
        schwarz = SchwarzOptions(
            radius=_float(sd.get("R", 2.0), f"{sp}.R"),
            grid=_int(sd.get("grid", 8), f"{sp}.grid", minimum=2),
        )
    return MetricOptions(
        flat,
        tuple(probes),
        points,
        _rational(eps, f"{path}.epsilon") if eps is not None else None,
        schwarz,
        requested=True,
    )


_KNOWN_KEYS = {
    "surface", "curve", "annulus", "hyperplanes", "N", "k", "mode", "strict", "precision", "tolerance", "metric",
}


def parse_config(data: Dict, source: str = "") -> AnalysisConfig:
    if not isinstance(data, dict):
        raise _fail("$", "the configuration must be a JSON object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise _fail("$", f"unknown keys {sorted(unknown)}")
    if ("surface" in data) == ("curve" in data):
        raise _fail("$", "give exactly one of 'surface' or 'curve'")
    try:
        surface = _surface(data["surface"], "$.surface") if "surface" in data else None
        curve = _curve(data["curve"], "$.curve") if "curve" in data else None
        hs = _hyperplanes(_require(data, "hyperplanes", "$"), "$.hyperplanes")
        annulus = _annulus(_require(data, "annulus", "$"), "$.annulus")
    except ConfigError:
        raise
    except GaussVDError as e:
        raise ConfigError(f"$: {e}") from e

    m = surface.m if surface is not None else len(curve)
    if hs.m != m:
        raise _fail("$.hyperplanes", f"hyperplanes have {hs.m} coefficients, the map has {m} components")
    mode = data.get("mode", MIN_ORDER)
    if mode not in MODES:
        raise _fail("$.mode", f"expected one of {MODES}, got {mode!r}")
    strict = data.get("strict", False)
    if not isinstance(strict, bool):
        raise _fail("$.strict", "expected true or false")

    return AnalysisConfig(
        hyperplanes=hs,
        annulus=annulus,
        surface=surface,
        curve=curve,
        N=_int(data["N"], "$.N", minimum=1) if data.get("N") is not None else None,
        k=_int(data["k"], "$.k", minimum=1) if data.get("k") is not None else None,
        mode=mode,
        strict=strict,
        precision=_int(data.get("precision", DEFAULT_PRECISION), "$.precision", minimum=53),
        tolerance=_float(data.get("tolerance", DEFAULT_ROOT_TOLERANCE), "$.tolerance"),
        metric=_metric(data["metric"], "$.metric") if "metric" in data else MetricOptions(),
        source=source,
    )


def load_config(path: str) -> AnalysisConfig:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    cfg = parse_config(data, source=os.path.basename(path))
    logger.info("loaded config %s (%d hyperplanes)", path, cfg.hyperplanes.q)
    return cfg
