"""Indicator rasters to per-element plate parameters.

Pipeline per element: normalise, apply the branch response, apply any
dependency on a prerequisite indicator, then combine the weighted effects for
each target parameter.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .types import MaterialField

logger = logging.getLogger(__name__)

ROLES = ("resilience", "vulnerability", "bidirectional", "prerequisite")
TARGETS = ("thickness", "youngs_modulus", "poissons_ratio")
RESPONSE_PARAMS = {
    "linear": ("m",),
    "logarithmic": ("alpha",),
    "exponential": ("beta",),
    "power": ("gamma",),
    "sigmoid": ("k", "x0"),
}
DEFAULT_POISSON_K = 2.5
WEIGHT_TOL = 1e-9


class TranslationError(ValueError):
    pass


@dataclass(frozen=True)
class Branch:
    """One side of a response function: its kind and parameters."""

    kind: str
    params: Mapping[str, float]

    def __post_init__(self):
        if self.kind not in RESPONSE_PARAMS:
            raise TranslationError(f"unknown response kind {self.kind!r}; expected one of {sorted(RESPONSE_PARAMS)}")
        needed = RESPONSE_PARAMS[self.kind]
        missing = [p for p in needed if p not in self.params]
        if missing:
            raise TranslationError(f"{self.kind} response needs parameter(s) {missing}")
        params = {p: float(self.params[p]) for p in needed}
        for p in needed:
            if p == "x0":
                if not 0.0 <= params[p] <= 1.0:
                    raise TranslationError(f"sigmoid x0 must lie in [0, 1], got {params[p]}")
            elif not params[p] > 0.0:
                raise TranslationError(f"{self.kind} parameter {p} must be > 0, got {params[p]}")
        object.__setattr__(self, "params", params)

    def __call__(self, a):
        """Magnitude of the effect for ``a = |x_n|``."""
        p = self.params
        if self.kind == "linear":
            return p["m"] * a
        if self.kind == "logarithmic":
            return np.log1p(p["alpha"] * a)
        if self.kind == "exponential":
            return np.expm1(p["beta"] * a)
        if self.kind == "power":
            return np.power(a, p["gamma"])
        return expit(p["k"] * (a - p["x0"]))


@dataclass(frozen=True)
class ResponseSpec:
    vulnerability: Branch
    resilience: Branch

    @classmethod
    def single(cls, kind: str, **params) -> "ResponseSpec":
        """Same kind and parameters on both sides."""
        b = Branch(kind, params)
        return cls(vulnerability=b, resilience=b)

    @property
    def kinds(self) -> set[str]:
        return {self.vulnerability.kind, self.resilience.kind}


@dataclass(frozen=True)
class DependencySpec:
    """Modifies a dependent indicator's effect using a prerequisite's effect."""

    kind: str
    prerequisite: str
    threshold: float = 0.0
    base: float = 1.0
    inverted: bool = False
    coupling: float = 0.0
    # (T1, T2, c_low, c_high); the mid-range coupling is ``coupling``
    piecewise: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("threshold", "modulation"):
            raise TranslationError(f"dependency kind must be 'threshold' or 'modulation', got {self.kind!r}")
        if not math.isfinite(self.threshold):
            raise TranslationError("dependency threshold must be finite")
        if not 0.0 <= self.base <= 1.0:
            raise TranslationError(f"dependency base must lie in [0, 1], got {self.base}")
        if self.piecewise is not None:
            t1, t2, _, _ = self.piecewise
            if not t1 < t2:
                raise TranslationError(f"piecewise coupling needs T1 < T2, got {t1} >= {t2}")


@dataclass(frozen=True)
class IndicatorSpec:
    name: str
    role: str
    x_min: float
    x_mid: float
    x_max: float
    response: ResponseSpec
    weight: float = 0.0
    target: str | None = None
    dependency: DependencySpec | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise TranslationError(f"indicator {self.name!r}: role must be one of {ROLES}, got {self.role!r}")
        if not (self.x_min <= self.x_mid <= self.x_max) or self.x_min == self.x_max:
            raise TranslationError(
                f"indicator {self.name!r}: need x_min <= x_mid <= x_max with x_min < x_max, "
                f"got {self.x_min}, {self.x_mid}, {self.x_max}"
            )
        if not 0.0 <= self.weight <= 1.0:
            raise TranslationError(f"indicator {self.name!r}: weight must lie in [0, 1], got {self.weight}")
        if self.role == "prerequisite":
            if self.weight != 0.0:
                raise TranslationError(f"indicator {self.name!r}: prerequisite indicators carry weight 0")
        elif self.target not in TARGETS:
            raise TranslationError(f"indicator {self.name!r}: target must be one of {TARGETS}, got {self.target!r}")


@dataclass(frozen=True)
class CombinationSpec:
    target: str
    p_base: float | None = None
    k: float = DEFAULT_POISSON_K
    k_explicit: bool = False

    def __post_init__(self):
        if self.target not in TARGETS:
            raise TranslationError(f"combination target must be one of {TARGETS}, got {self.target!r}")
        if self.target == "poissons_ratio":
            if not self.k > 0:
                raise TranslationError(f"Poisson combination k must be > 0, got {self.k}")
        elif self.p_base is None or not self.p_base > 0:
            raise TranslationError(f"{self.target} combination needs p_base > 0, got {self.p_base}")


def normalize(x, spec: IndicatorSpec):
    """Piecewise-linear map of raw values to [-1, 1] around ``x_mid``."""
    x = np.asarray(x, dtype=float)
    up = spec.x_max - spec.x_mid
    down = spec.x_mid - spec.x_min
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = (x - spec.x_mid) / up if up > 0 else np.where(x > spec.x_mid, 1.0, 0.0)
        lo = (x - spec.x_mid) / down if down > 0 else np.where(x < spec.x_mid, -1.0, 0.0)
    out = np.where(x >= spec.x_mid, hi, lo)
    clipped = np.clip(out, -1.0, 1.0)
    n_clamped = int(np.count_nonzero(np.isfinite(out) & (out != clipped)))
    if n_clamped:
        logger.info("indicator %s: %d value(s) clamped to [-1, 1]", spec.name, n_clamped)
    return clipped if clipped.ndim else float(clipped)


def signed_input(xn, role: str):
    """Place a normalised value on the branch its role dictates."""
    xn = np.asarray(xn, dtype=float)
    if role == "resilience":
        return np.abs(xn)
    if role == "vulnerability":
        return -np.abs(xn)
    return xn


def apply_response(xn, r: ResponseSpec):
    """Signed effect: vulnerability branch for ``xn < 0``, resilience otherwise."""
    xn = np.asarray(xn, dtype=float)
    a = np.abs(xn)
    out = np.where(xn < 0, -r.vulnerability(a), r.resilience(a))
    return out if out.ndim else float(out)


def coupling_for(f_a, d: DependencySpec):
    if d.piecewise is None:
        return np.full(np.shape(f_a), d.coupling, dtype=float) if np.ndim(f_a) else d.coupling
    t1, t2, c_low, c_high = d.piecewise
    return np.where(f_a < t1, c_low, np.where(f_a < t2, d.coupling, c_high))


def apply_dependency(f_a, f_b, d: DependencySpec):
    f_a = np.asarray(f_a, dtype=float)
    f_b = np.asarray(f_b, dtype=float)
    if d.kind == "threshold":
        failing = f_a > d.threshold if d.inverted else f_a < d.threshold
        out = np.where(failing, d.base * f_b, f_b)
    else:
        out = f_b * (1.0 + f_a * coupling_for(f_a, d))
    return out if out.ndim else float(out)


def combine_parameter(effects: Sequence[tuple], c: CombinationSpec):
    """Combine ``(effect, weight)`` pairs into one parameter value (or grid)."""
    weights = [float(w) for _, w in effects]
    if effects and abs(sum(weights) - 1.0) > WEIGHT_TOL:
        raise TranslationError(f"{c.target} combination: weights sum to {sum(weights):.12g}, must be 1")
    s = sum((w * np.asarray(f, dtype=float) for f, w in effects), np.float64(0.0))
    if c.target == "poissons_ratio":
        nu = 0.5 * expit(-c.k * s)
        # keep strictly inside (0, 0.5) even when expit saturates
        tiny = np.finfo(float).tiny
        out = np.clip(nu, tiny, np.nextafter(0.5, 0.0))
    else:
        out = c.p_base * np.exp(s)
    return out if np.ndim(out) else float(out)


def check_specs(specs: Sequence[IndicatorSpec], combos: Mapping[str, CombinationSpec]) -> None:
    """Cross-checks that single specs cannot do on their own."""
    names = [s.name for s in specs]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise TranslationError(f"duplicate indicator names: {sorted(dupes)}")
    by_name = dict(zip(names, specs))
    for s in specs:
        if s.dependency is not None and s.dependency.prerequisite not in by_name:
            raise TranslationError(
                f"indicator {s.name!r} depends on {s.dependency.prerequisite!r}, which is not configured"
            )
    for target in TARGETS:
        members = [s for s in specs if s.role != "prerequisite" and s.target == target]
        if not members:
            continue
        if target not in combos:
            raise TranslationError(f"indicators target {target} but no combination is configured for it")
        total = sum(s.weight for s in members)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise TranslationError(
                f"combination {target}: member weights sum to {total:.12g}, must be 1 "
                f"({', '.join(f'{s.name}={s.weight}' for s in members)})"
            )
        c = combos[target]
        if target == "poissons_ratio" and not c.k_explicit:
            expo = [s.name for s in members if "exponential" in s.response.kinds]
            if expo:
                raise TranslationError(
                    f"combination poissons_ratio: exponential response on {expo} saturates the sigmoid; "
                    "set k explicitly to accept it"
                )


@dataclass
class FabricReport:
    missing_elements: dict[str, int] = field(default_factory=dict)
    baseline_substitutions: dict[str, int] = field(default_factory=dict)


def indicator_effects(
    rasters: Mapping[str, np.ndarray], specs: Sequence[IndicatorSpec]
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Per-indicator effect grids and missing masks, dependencies applied."""
    raw: dict[str, np.ndarray] = {}
    missing: dict[str, np.ndarray] = {}
    for s in specs:
        if s.name not in rasters:
            raise TranslationError(f"no raster supplied for indicator {s.name!r}")
        values = np.asarray(rasters[s.name], dtype=float)
        miss = ~np.isfinite(values)
        if miss.all():
            raise TranslationError(f"raster for indicator {s.name!r} has no valid data")
        xn = normalize(np.where(miss, s.x_mid, values), s)
        raw[s.name] = apply_response(signed_input(xn, s.role), s.response)
        missing[s.name] = miss
    effects = {}
    for s in specs:
        f = raw[s.name]
        if s.dependency is not None:
            d = s.dependency
            f = apply_dependency(raw[d.prerequisite], f, d)
            missing[s.name] = missing[s.name] | missing[d.prerequisite]
        effects[s.name] = np.asarray(f, dtype=float)
    return effects, missing


def build_material_field(
    rasters: Mapping[str, np.ndarray],
    specs: Sequence[IndicatorSpec],
    combos: Mapping[str, CombinationSpec],
    baselines: tuple[float, float, float],
    shape: tuple[int, int] | None = None,
) -> tuple[MaterialField, FabricReport]:
    """Per-element (h, E, nu) grids from indicator grids on the element grid.

    ``rasters`` maps indicator names to element-grid arrays with NaN marking
    missing data. An element missing any input of a parameter (including a
    dependency's prerequisite) takes that parameter's baseline.
    """
    check_specs(specs, combos)
    if shape is None:
        if not rasters:
            raise TranslationError("grid shape required when no rasters are given")
        shape = np.shape(next(iter(rasters.values())))
    effects, missing = indicator_effects(rasters, specs) if specs else ({}, {})
    report = FabricReport(missing_elements={k: int(v.sum()) for k, v in missing.items()})

    grids = {}
    for target, base in zip(TARGETS, baselines):
        members = [s for s in specs if s.role != "prerequisite" and s.target == target]
        if not members:
            grids[target] = np.full(shape, float(base))
            report.baseline_substitutions[target] = 0
            continue
        value = np.asarray(combine_parameter([(effects[s.name], s.weight) for s in members], combos[target]))
        gap = np.zeros(shape, dtype=bool)
        for s in members:
            gap |= missing[s.name]
        grids[target] = np.where(gap, float(base), value)
        report.baseline_substitutions[target] = int(gap.sum())
    field_ = MaterialField(grids["thickness"], grids["youngs_modulus"], grids["poissons_ratio"]).validate()
    return field_, report
