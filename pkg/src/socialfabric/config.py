"""Scenario configuration: YAML file to validated dataclasses."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any

import yaml

from .defaults import (
    DEFAULT_DEMOCRACY_INDEX,
    NIGERIA_BBOX,
    default_combinations,
    default_event_params,
    default_indicators,
)
from .geo import degrees_to_metres
from .events import DEFAULT_CIVILIAN_GAMMA, EventError, EventTypeParams
from .mesh import BOUNDARY_CONDITIONS
from .translate import (
    RESPONSE_PARAMS,
    Branch,
    CombinationSpec,
    DependencySpec,
    IndicatorSpec,
    ResponseSpec,
    TranslationError,
    check_specs,
)
from .types import DISTRIBUTIONS, GeoPoint

MIN_BUFFER_M = 300_000.0
OUTPUT_FORMATS = ("geotiff", "csv", "json", "png")


class ConfigError(ValueError):
    """Validation failure tied to a location in the config tree."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class MeshConfig:
    resolution_m: float = 10_000.0
    buffer_m: float = 350_000.0
    boundary_condition: str = "clamped_all"


@dataclass(frozen=True)
class IndicatorInput:
    spec: IndicatorSpec
    raster: Path


@dataclass(frozen=True)
class FabricConfig:
    baselines: tuple[float, float, float] = (2500.0, 5.0e9, 0.3)
    indicators: tuple[IndicatorInput, ...] = ()
    combinations: dict = field(default_factory=dict)

    @property
    def specs(self) -> list[IndicatorSpec]:
        return [i.spec for i in self.indicators]


@dataclass(frozen=True)
class EventsConfig:
    csv: Path | None = None
    analysis_date: date | None = None
    democracy_index: float = DEFAULT_DEMOCRACY_INDEX
    civilian_gamma: float = DEFAULT_CIVILIAN_GAMMA
    type_params: dict = field(default_factory=default_event_params)


@dataclass(frozen=True)
class LoadConfig:
    """A load given directly in the config rather than from an event."""

    lon: float
    lat: float
    magnitude: float
    distribution: str = "point"
    radius_m: float = 0.0


@dataclass(frozen=True)
class OutputConfig:
    directory: Path = Path("output")
    formats: tuple[str, ...] = OUTPUT_FORMATS
    threshold_frac: float = 0.10
    boundary_file: Path | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    bbox: tuple[GeoPoint, GeoPoint]
    mesh: MeshConfig
    fabric: FabricConfig
    events: EventsConfig
    loads: tuple[LoadConfig, ...]
    tolerance: float
    output: OutputConfig
    source: Path | None
    raw: dict

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------- #
# helpers
# --------------------------------------------------------------------------- #


def _section(tree: dict, key: str, path: str) -> dict:
    value = tree.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{path}{key}", "must be a mapping")
    return value


def _unknown_keys(tree: dict, allowed: set[str], path: str) -> None:
    extra = set(tree) - allowed
    if extra:
        raise ConfigError(path or "<root>", f"unknown key(s) {sorted(extra)}; allowed: {sorted(allowed)}")


def _number(tree: dict, key: str, path: str, default=None, *, required=False) -> float | None:
    if key not in tree or tree[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}", "is required")
        return default
    value = tree[key]
    if isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", f"must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", f"must be a number, got {value!r}") from None


def _date(value, path: str) -> date:
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(path, f"must be an ISO date (YYYY-MM-DD), got {value!r}") from None


def _path(value, base: Path, path: str, *, must_exist: bool) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(path, f"must be a file path, got {value!r}")
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    if must_exist and not p.exists():
        raise ConfigError(path, f"file not found: {p}")
    return p


# --------------------------------------------------------------------------- #
# sections
# --------------------------------------------------------------------------- #


def _parse_mesh(tree: dict, override_buffer: bool) -> MeshConfig:
    path = "mesh"
    _unknown_keys(tree, {"resolution_m", "buffer_m", "boundary_condition"}, path)
    res = _number(tree, "resolution_m", path, 10_000.0)
    buf = _number(tree, "buffer_m", path, 350_000.0)
    bc = tree.get("boundary_condition", "clamped_all")
    if not res > 0:
        raise ConfigError(f"{path}.resolution_m", f"must be > 0, got {res}")
    if buf < 0:
        raise ConfigError(f"{path}.buffer_m", f"must be >= 0, got {buf}")
    if buf < MIN_BUFFER_M and not override_buffer:
        raise ConfigError(
            f"{path}.buffer_m",
            f"{buf:g} m is below the {MIN_BUFFER_M:g} m minimum buffer (pass --override-buffer-check to allow)",
        )
    if bc not in BOUNDARY_CONDITIONS:
        raise ConfigError(f"{path}.boundary_condition", f"must be one of {BOUNDARY_CONDITIONS}, got {bc!r}")
    return MeshConfig(res, buf, bc)


def _parse_response(tree, path: str) -> ResponseSpec:
    if not isinstance(tree, dict):
        raise ConfigError(path, "must be a mapping")
    try:
        if "vulnerability" in tree or "resilience" in tree:
            _unknown_keys(tree, {"vulnerability", "resilience"}, path)
            sides = {}
            for side in ("vulnerability", "resilience"):
                sub = tree.get(side)
                if not isinstance(sub, dict) or "kind" not in sub:
                    raise ConfigError(f"{path}.{side}", "must be a mapping with a 'kind'")
                sides[side] = Branch(sub["kind"], {k: v for k, v in sub.items() if k != "kind"})
            return ResponseSpec(**sides)
        kind = tree.get("kind")
        if kind not in RESPONSE_PARAMS:
            raise ConfigError(f"{path}.kind", f"must be one of {sorted(RESPONSE_PARAMS)}, got {kind!r}")
        params = {k: v for k, v in tree.items() if k != "kind"}
        return ResponseSpec.single(kind, **params)
    except TranslationError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_dependency(tree, path: str) -> DependencySpec:
    if not isinstance(tree, dict):
        raise ConfigError(path, "must be a mapping")
    allowed = {"kind", "prerequisite", "threshold", "base", "inverted", "coupling", "piecewise"}
    _unknown_keys(tree, allowed, path)
    piecewise = tree.get("piecewise")
    if piecewise is not None:
        if not isinstance(piecewise, dict):
            raise ConfigError(f"{path}.piecewise", "must be a mapping with t1, t2, c_low, c_high")
        piecewise = tuple(_number(piecewise, k, f"{path}.piecewise", required=True) for k in ("t1", "t2", "c_low", "c_high"))
    try:
        return DependencySpec(
            kind=tree.get("kind", "threshold"),
            prerequisite=str(tree.get("prerequisite", "")),
            threshold=_number(tree, "threshold", path, 0.0),
            base=_number(tree, "base", path, 1.0),
            inverted=bool(tree.get("inverted", False)),
            coupling=_number(tree, "coupling", path, 0.0),
            piecewise=piecewise,
        )
    except TranslationError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_indicator(tree, path: str, base: Path, check_files: bool) -> IndicatorInput:
    if not isinstance(tree, dict):
        raise ConfigError(path, "must be a mapping")
    allowed = {"name", "raster", "role", "normalization", "response", "weight", "target", "dependency"}
    _unknown_keys(tree, allowed, path)
    name = tree.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{path}.name", "is required")
    norm = _section(tree, "normalization", f"{path}.")
    dep = tree.get("dependency")
    try:
        spec = IndicatorSpec(
            name=name,
            role=tree.get("role", ""),
            x_min=_number(norm, "x_min", f"{path}.normalization", required=True),
            x_mid=_number(norm, "x_mid", f"{path}.normalization", required=True),
            x_max=_number(norm, "x_max", f"{path}.normalization", required=True),
            response=_parse_response(tree.get("response"), f"{path}.response"),
            weight=_number(tree, "weight", path, 0.0),
            target=tree.get("target"),
            dependency=_parse_dependency(dep, f"{path}.dependency") if dep is not None else None,
        )
    except TranslationError as exc:
        raise ConfigError(path, str(exc)) from None
    raster = _path(tree.get("raster"), base, f"{path}.raster", must_exist=check_files)
    return IndicatorInput(spec, raster)


def _parse_fabric(tree: dict, base: Path, check_files: bool) -> FabricConfig:
    path = "fabric"
    _unknown_keys(tree, {"baselines", "indicators", "combinations", "preset", "rasters"}, path)
    bl = _section(tree, "baselines", f"{path}.")
    baselines = (
        _number(bl, "thickness", f"{path}.baselines", 2500.0),
        _number(bl, "youngs_modulus", f"{path}.baselines", 5.0e9),
        _number(bl, "poissons_ratio", f"{path}.baselines", 0.3),
    )
    if not (baselines[0] > 0 and baselines[1] > 0 and 0 <= baselines[2] < 0.5):
        raise ConfigError(f"{path}.baselines", f"need thickness > 0, modulus > 0, 0 <= ratio < 0.5, got {baselines}")

    preset = tree.get("preset")
    indicators: list[IndicatorInput] = []
    combos = {}
    if preset is not None:
        if preset != "reference":
            raise ConfigError(f"{path}.preset", f"only 'reference' is available, got {preset!r}")
        rasters = _section(tree, "rasters", f"{path}.")
        for spec in default_indicators():
            if spec.name not in rasters:
                raise ConfigError(f"{path}.rasters.{spec.name}", "raster path required by the reference preset")
            r = _path(rasters[spec.name], base, f"{path}.rasters.{spec.name}", must_exist=check_files)
            indicators.append(IndicatorInput(spec, r))
        combos.update(default_combinations())
    items = tree.get("indicators") or []
    if not isinstance(items, list):
        raise ConfigError(f"{path}.indicators", "must be a list")
    for i, item in enumerate(items):
        indicators.append(_parse_indicator(item, f"{path}.indicators[{i}]", base, check_files))

    ctree = _section(tree, "combinations", f"{path}.")
    _unknown_keys(ctree, {"thickness", "youngs_modulus", "poissons_ratio"}, f"{path}.combinations")
    for target, sub in ctree.items():
        cpath = f"{path}.combinations.{target}"
        sub = sub or {}
        if not isinstance(sub, dict):
            raise ConfigError(cpath, "must be a mapping")
        try:
            if target == "poissons_ratio":
                _unknown_keys(sub, {"k"}, cpath)
                combos[target] = CombinationSpec(target, k=_number(sub, "k", cpath, 2.5), k_explicit="k" in sub)
            else:
                _unknown_keys(sub, {"p_base"}, cpath)
                combos[target] = CombinationSpec(target, p_base=_number(sub, "p_base", cpath, required=True))
        except TranslationError as exc:
            raise ConfigError(cpath, str(exc)) from None
    for target, bl_value in (("thickness", baselines[0]), ("youngs_modulus", baselines[1])):
        combos.setdefault(target, CombinationSpec(target, p_base=bl_value))
    combos.setdefault("poissons_ratio", CombinationSpec("poissons_ratio"))
    try:
        check_specs([i.spec for i in indicators], combos)
    except TranslationError as exc:
        raise ConfigError(f"{path}.combinations", str(exc)) from None
    return FabricConfig(baselines, tuple(indicators), combos)


def _parse_type_params(tree: dict, path: str) -> dict:
    params = default_event_params()
    fields = {
        "f_base", "alpha", "decay_rate", "r_base", "beta", "expansion_rate",
        "default_distribution", "distributions", "democracy_adjust",
    }
    for etype, sub in tree.items():
        ppath = f"{path}.{etype}"
        if not isinstance(sub, dict):
            raise ConfigError(ppath, "must be a mapping")
        _unknown_keys(sub, fields, ppath)
        current = params.get(etype)
        merged = dict(current.__dict__) if current is not None else {"event_type": etype}
        merged.update(sub)
        merged["event_type"] = etype
        if current is None:
            for key in ("f_base", "alpha", "decay_rate"):
                if key not in sub:
                    raise ConfigError(f"{ppath}.{key}", "is required for a new event type")
        try:
            params[etype] = EventTypeParams(**merged)
        except (EventError, TypeError) as exc:
            raise ConfigError(ppath, str(exc)) from None
    return params


def _parse_events(tree: dict, base: Path, check_files: bool) -> EventsConfig:
    path = "events"
    _unknown_keys(tree, {"csv", "analysis_date", "democracy_index", "civilian_gamma", "type_params"}, path)
    csv = _path(tree["csv"], base, f"{path}.csv", must_exist=check_files) if tree.get("csv") else None
    adate = _date(tree["analysis_date"], f"{path}.analysis_date") if tree.get("analysis_date") else None
    if csv is not None and adate is None:
        raise ConfigError(f"{path}.analysis_date", "is required when an event file is given")
    vdem = _number(tree, "democracy_index", path, DEFAULT_DEMOCRACY_INDEX)
    if not 0 <= vdem <= 1:
        raise ConfigError(f"{path}.democracy_index", f"must lie in [0, 1], got {vdem}")
    gamma = _number(tree, "civilian_gamma", path, DEFAULT_CIVILIAN_GAMMA)
    if gamma < 0:
        raise ConfigError(f"{path}.civilian_gamma", f"must be >= 0, got {gamma}")
    params = _parse_type_params(_section(tree, "type_params", f"{path}."), f"{path}.type_params")
    return EventsConfig(csv, adate, vdem, gamma, params)


def _parse_loads(items, path: str = "loads") -> tuple[LoadConfig, ...]:
    if items is None:
        return ()
    if not isinstance(items, list):
        raise ConfigError(path, "must be a list")
    out = []
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(p, "must be a mapping")
        _unknown_keys(item, {"lon", "lat", "magnitude", "distribution", "radius_m", "radius_deg"}, p)
        dist = item.get("distribution", "point")
        if dist not in DISTRIBUTIONS:
            raise ConfigError(f"{p}.distribution", f"must be one of {DISTRIBUTIONS}, got {dist!r}")
        radius = _number(item, "radius_m", p, 0.0)
        if "radius_deg" in item:
            radius = degrees_to_metres(_number(item, "radius_deg", p))
        mag = _number(item, "magnitude", p, required=True)
        if mag < 0:
            raise ConfigError(f"{p}.magnitude", "must be >= 0")
        if dist != "point" and not radius > 0:
            raise ConfigError(f"{p}.radius_m", f"{dist} loads need a positive radius")
        out.append(LoadConfig(
            lon=_number(item, "lon", p, required=True), lat=_number(item, "lat", p, required=True),
            magnitude=mag, distribution=dist, radius_m=radius,
        ))
    return tuple(out)


def _parse_output(tree: dict, base: Path, check_files: bool) -> OutputConfig:
    path = "output"
    _unknown_keys(tree, {"directory", "formats", "threshold_frac", "boundary_file"}, path)
    directory = Path(tree.get("directory", "output"))
    if not directory.is_absolute():
        directory = base / directory
    formats = tuple(tree.get("formats", OUTPUT_FORMATS))
    bad = set(formats) - set(OUTPUT_FORMATS)
    if bad:
        raise ConfigError(f"{path}.formats", f"unknown format(s) {sorted(bad)}; allowed: {OUTPUT_FORMATS}")
    frac = _number(tree, "threshold_frac", path, 0.10)
    if not 0 < frac < 1:
        raise ConfigError(f"{path}.threshold_frac", f"must lie in (0, 1), got {frac}")
    boundary = tree.get("boundary_file")
    boundary = _path(boundary, base, f"{path}.boundary_file", must_exist=check_files) if boundary else None
    return OutputConfig(directory, formats, frac, boundary)


def _parse_bbox(tree: dict) -> tuple[GeoPoint, GeoPoint]:
    path = "domain"
    _unknown_keys(tree, {"bbox", "name"}, path)
    bbox = tree.get("bbox", NIGERIA_BBOX)
    try:
        lo, hi = (GeoPoint(float(p[0]), float(p[1])).validate() for p in bbox)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{path}.bbox", f"must be [[lon_min, lat_min], [lon_max, lat_max]] ({exc})") from None
    if not (lo.lon < hi.lon and lo.lat < hi.lat):
        raise ConfigError(f"{path}.bbox", "minimum corner must be below and left of the maximum corner")
    return lo, hi


def parse_config(
    raw: dict, base: Path = Path("."), *, override_buffer_check: bool = False,
    check_files: bool = True, source: Path | None = None,
) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    raw = copy.deepcopy(raw)
    allowed = {"name", "domain", "mesh", "fabric", "events", "loads", "solver", "output"}
    _unknown_keys(raw, allowed, "")
    solver = _section(raw, "solver", "")
    _unknown_keys(solver, {"tolerance"}, "solver")
    tol = _number(solver, "tolerance", "solver", 1e-10)
    if not 0 < tol < 1:
        raise ConfigError("solver.tolerance", f"must lie in (0, 1), got {tol}")
    return ScenarioConfig(
        name=str(raw.get("name", "scenario")),
        bbox=_parse_bbox(_section(raw, "domain", "")),
        mesh=_parse_mesh(_section(raw, "mesh", ""), override_buffer_check),
        fabric=_parse_fabric(_section(raw, "fabric", ""), base, check_files),
        events=_parse_events(_section(raw, "events", ""), base, check_files),
        loads=_parse_loads(raw.get("loads")),
        tolerance=tol,
        output=_parse_output(_section(raw, "output", ""), base, check_files),
        source=source,
        raw=raw,
    )


def load_config(path, *, override_buffer_check: bool = False) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config ({exc.strerror})") from None
    try:
        raw: Any = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML ({exc})") from None
    return parse_config(
        raw or {}, path.parent.resolve(), override_buffer_check=override_buffer_check, source=path,
    )
