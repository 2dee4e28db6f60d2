"""Strict line-oriented run configuration.

Grammar: UTF-8 text; `#` starts a comment; blank lines ignored. A line may
open a `[section]` and may carry `key = value` pairs after it; pairs on one
line are separated by runs of two or more spaces. Sections: geometry,
experiment, numeric, output. Unknown sections or keys are rejected with
line numbers, as are values that fail the target constructor's checks.

Check thresholds live here as documented defaults (one table per
experiment) and can be overridden by keys in the [experiment] section:

    tol        ceiling for a quantity expected to vanish
    threshold  floor for a counterexample quantity expected to stay positive
    rate_min   minimum acceptable convergence rate
"""

import math
import re
from dataclasses import dataclass, field
from typing import Optional

EXPERIMENTS = ("heat-flow", "exit-time", "spectrum", "commute",
               "level-identity", "focal-order", "soul-minimality",
               "free-boundary")

GEOMETRY_KINDS = ("ball", "cap", "clifford", "interval", "annulus",
                  "cap-chart", "flat-annulus", "disk", "catenoid",
                  "cap-control")

_GEOMETRY_KEYS = {
    "ball": {"n", "R"},
    "cap": {"n", "R0"},
    "clifford": {"R"},
    "interval": {"R"},
    "annulus": {"r0", "r1"},
    "cap-chart": {"eps", "mode"},
    "flat-annulus": {"r0", "r1", "eps", "mode"},
    "disk": set(),
    "catenoid": set(),
    "cap-control": {"rho", "height"},
}

_INT_GEOMETRY_KEYS = {"n", "mode"}

_NUMERIC_KEYS = {"N": int, "Nr": int, "Nphi": int, "k": int,
                 "dt": float, "T": float}

_EXPECT_VALUES = ("nonconstant", "nonminimal", "nonharmonic")

# Documented default thresholds per experiment. "threshold" floors for the
# engineered counterexamples are derived from fine-grid reference runs
# (half the converged value); see README for the derivation runs.
DEFAULT_THRESHOLDS = {
    "heat-flow": {"tol": 1e-10, "threshold": 0.043},
    "exit-time": {"tol": 1e-8, "threshold": 0.0416},
    "spectrum": {"tol": 1e-6},
    "commute": {"tol": 1e-10, "threshold": 0.31},
    "level-identity": {"tol": 1e-12, "rate_min": 1.8},
    "focal-order": {"tol": 0.05},
    "soul-minimality": {"tol": 1e-6, "threshold": 0.1},
    "free-boundary": {"tol": 1e-9, "threshold": 0.63, "rate_min": 1.8,
                      "angle_tol": 1e-6},
}


class ConfigError(ValueError):
    """Parse or validation failure; .errors lists line-located messages."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    """Validated run request assembled from a config file."""

    geometry_kind: str
    geometry_params: dict
    experiment: str
    expect: Optional[str] = None
    thresholds: dict = field(default_factory=dict)
    numeric: dict = field(default_factory=dict)
    out_dir: str = "isoflow-out"
    scale: int = 1

    def refine(self, k: int) -> "RunConfig":
        """Return a copy whose grid resolutions are doubled k times (applied
        by the runners on top of configured or default N / Nr / Nphi)."""
        return RunConfig(geometry_kind=self.geometry_kind,
                         geometry_params=dict(self.geometry_params),
                         experiment=self.experiment, expect=self.expect,
                         thresholds=dict(self.thresholds),
                         numeric=dict(self.numeric),
                         out_dir=self.out_dir, scale=self.scale * 2 ** k)

    def grid(self, key: str, default: int) -> int:
        """Effective grid resolution: configured or default, times scale."""
        return self.numeric.get(key, default) * self.scale


_PAIR_RE = re.compile(r"\s{2,}")


def _split_pairs(text: str):
    """Split a line remainder into key = value chunks (>= 2 spaces apart)."""
    for chunk in _PAIR_RE.split(text.strip()):
        if chunk:
            yield chunk


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate config text; raises ConfigError on failure."""
    errors = []
    sections = {"geometry": {}, "experiment": {}, "numeric": {}, "output": {}}
    lines_of = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        rest = line.strip()
        if rest.startswith("["):
            close = rest.find("]")
            if close < 0:
                errors.append(f"line {lineno}: unterminated section header")
                continue
            name = rest[1:close].strip()
            if name not in sections:
                errors.append(f"line {lineno}: unknown section [{name}]")
                current = None
                rest = ""
            else:
                current = name
                rest = rest[close + 1:].strip()
            if not rest:
                continue
        if current is None:
            errors.append(f"line {lineno}: key outside any known section")
            continue
        for chunk in _split_pairs(rest):
            if "=" not in chunk:
                errors.append(f"line {lineno}: expected key = value, got {chunk!r}")
                continue
            key, _, value = chunk.partition("=")
            key, value = key.strip(), value.strip()
            if not key or not value:
                errors.append(f"line {lineno}: empty key or value in {chunk!r}")
                continue
            if key in sections[current]:
                errors.append(f"line {lineno}: duplicate key {key!r}")
                continue
            sections[current][key] = value
            lines_of[(current, key)] = lineno
    if errors:
        raise ConfigError(errors)
    return _validate(sections, lines_of)


def _loc(lines_of, section, key):
    line = lines_of.get((section, key))
    return f"line {line}" if line else f"section [{section}]"


def _validate(sections, lines_of) -> RunConfig:
    errors = []

    geo = sections["geometry"]
    kind = geo.pop("kind", None)
    if kind is None:
        errors.append("section [geometry]: missing required key 'kind'")
    elif kind not in GEOMETRY_KINDS:
        errors.append(f"{_loc(lines_of, 'geometry', 'kind')}: unknown geometry "
                      f"kind {kind!r} (choose from {', '.join(GEOMETRY_KINDS)})")
    params = {}
    if kind in _GEOMETRY_KEYS:
        allowed = _GEOMETRY_KEYS[kind]
        for key, value in geo.items():
            where = _loc(lines_of, "geometry", key)
            if key not in allowed:
                errors.append(f"{where}: key {key!r} not valid for kind {kind!r}")
                continue
            caster = int if key in _INT_GEOMETRY_KEYS else float
            try:
                params[key] = caster(value)
            except ValueError:
                errors.append(f"{where}: {key} must be {caster.__name__}, got {value!r}")

    exp = sections["experiment"]
    name = exp.pop("name", None)
    if name is None:
        errors.append("section [experiment]: missing required key 'name'")
    elif name not in EXPERIMENTS:
        errors.append(f"{_loc(lines_of, 'experiment', 'name')}: unknown experiment "
                      f"{name!r} (choose from {', '.join(EXPERIMENTS)})")
    expect = exp.pop("expect", None)
    if expect is not None and expect not in _EXPECT_VALUES:
        errors.append(f"{_loc(lines_of, 'experiment', 'expect')}: expect must be "
                      f"one of {', '.join(_EXPECT_VALUES)}")
    thresholds = dict(DEFAULT_THRESHOLDS.get(name, {}))
    for key, value in exp.items():
        where = _loc(lines_of, "experiment", key)
        if name in DEFAULT_THRESHOLDS and key not in DEFAULT_THRESHOLDS[name]:
            errors.append(f"{where}: key {key!r} not valid for experiment {name!r}")
            continue
        try:
            thresholds[key] = float(value)
        except ValueError:
            errors.append(f"{where}: {key} must be a number, got {value!r}")

    numeric = {}
    for key, value in sections["numeric"].items():
        where = _loc(lines_of, "numeric", key)
        if key not in _NUMERIC_KEYS:
            errors.append(f"{where}: unknown numeric key {key!r}")
            continue
        caster = _NUMERIC_KEYS[key]
        try:
            numeric[key] = caster(value)
        except ValueError:
            errors.append(f"{where}: {key} must be {caster.__name__}, got {value!r}")
            continue
        if numeric[key] <= 0:
            errors.append(f"{where}: {key} must be positive")

    out_dir = "isoflow-out"
    for key, value in sections["output"].items():
        if key != "dir":
            errors.append(f"{_loc(lines_of, 'output', key)}: unknown output key {key!r}")
        else:
            out_dir = value

    if not errors and kind and name:
        errors.extend(_check_compatibility(kind, name, expect, params, lines_of))
    if errors:
        raise ConfigError(errors)
    return RunConfig(geometry_kind=kind, geometry_params=params,
                     experiment=name, expect=expect, thresholds=thresholds,
                     numeric=numeric, out_dir=out_dir)


_EXPERIMENT_KINDS = {
    "heat-flow": {"ball", "cap", "clifford", "interval", "annulus",
                  "cap-chart", "flat-annulus"},
    "exit-time": {"ball", "cap", "clifford", "interval", "annulus",
                  "cap-chart", "flat-annulus"},
    "spectrum": {"ball", "cap", "clifford", "interval", "annulus"},
    "commute": {"cap-chart", "flat-annulus"},
    "level-identity": {"cap-chart", "flat-annulus"},
    "focal-order": {"ball", "cap", "clifford", "annulus"},
    "soul-minimality": {"ball", "cap", "clifford", "annulus"},
    "free-boundary": {"disk", "catenoid", "cap-control"},
}


def _check_compatibility(kind, name, expect, params, lines_of):
    """Cross-field checks plus an early dry construction of the geometry."""
    errors = []
    if kind not in _EXPERIMENT_KINDS[name]:
        errors.append(f"{_loc(lines_of, 'geometry', 'kind')}: kind {kind!r} is "
                      f"not usable with experiment {name!r}")
        return errors
    try:
        build_geometry(kind, params)
    except ValueError as exc:
        errors.append(f"{_loc(lines_of, 'geometry', 'kind')}: invalid geometry: {exc}")
    if name == "level-identity" and params.get("eps"):
        errors.append(f"{_loc(lines_of, 'geometry', 'eps')}: level-identity "
                      "requires a radial metric (eps = 0)")
    return errors


def build_geometry(kind: str, params: dict):
    """Construct the catalog object named by a config geometry section."""
    from . import geometry, minimal_surface

    if kind == "ball":
        return geometry.euclidean_ball(params.get("n", 3), params.get("R", 1.0))
    if kind == "cap":
        return geometry.spherical_cap(params.get("n", 3), params.get("R0", math.pi / 3))
    if kind == "clifford":
        return geometry.clifford_tube(params.get("R", 0.6))
    if kind == "interval":
        return geometry.euclidean_ball(1, params.get("R", 1.0))
    if kind == "annulus":
        return geometry.annulus_outward_profile(params.get("r0", 1.0), params.get("r1", 2.0))
    if kind == "cap-chart":
        metric = geometry.cap_chart_metric()
        if params.get("eps"):
            metric = geometry.perturbed_metric(metric, params["eps"], params.get("mode", 1))
        return metric
    if kind == "flat-annulus":
        metric = geometry.flat_annulus_metric(params.get("r0", 1.0), params.get("r1", 2.0))
        if params.get("eps"):
            metric = geometry.perturbed_metric(metric, params["eps"], params.get("mode", 1))
        return metric
    if kind == "disk":
        return minimal_surface.make_flat_disk()
    if kind == "catenoid":
        return minimal_surface.make_critical_catenoid()
    if kind == "cap-control":
        return minimal_surface.make_spherical_cap_control(
            params.get("rho", 0.7), params.get("height", 0.5))
    raise ValueError(f"unknown geometry kind {kind!r}")
