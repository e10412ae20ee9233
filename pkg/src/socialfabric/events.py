"""Conflict events to plate loads."""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from datetime import date

from .geo import DomainRect, project
from .types import DISTRIBUTIONS, ForceDescriptor, GeoPoint

logger = logging.getLogger(__name__)

STRATEGIC = "Strategic developments"
DEFAULT_CIVILIAN_GAMMA = 0.75


class EventError(ValueError):
    pass


@dataclass(frozen=True)
class ConflictEvent:
    event_date: date
    event_type: str
    sub_event_type: str
    fatalities: int
    civilian_targeting: int
    location: GeoPoint
    geo_precision: int

    def __post_init__(self):
        if self.fatalities < 0:
            raise EventError(f"fatalities must be >= 0, got {self.fatalities}")
        if self.geo_precision not in (1, 2, 3):
            raise EventError(f"geo_precision must be 1, 2 or 3, got {self.geo_precision}")
        if self.civilian_targeting not in (0, 1):
            raise EventError(f"civilian_targeting must be 0 or 1, got {self.civilian_targeting}")
        object.__setattr__(self, "location", GeoPoint(*self.location).validate())


@dataclass(frozen=True)
class EventTypeParams:
    """Load parameters for one event type.

    ``distributions`` maps sub-event types to a distribution kind; sub-types
    not listed use ``default_distribution``.
    """

    event_type: str
    f_base: float
    alpha: float
    decay_rate: float
    r_base: float | None = None
    beta: float = 0.0
    expansion_rate: float = 1.0
    default_distribution: str = "point"
    distributions: Mapping[str, str] = field(default_factory=dict)
    democracy_adjust: bool = False

    def __post_init__(self):
        name = self.event_type
        if not self.f_base >= 0:
            raise EventError(f"{name}: F_base must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise EventError(f"{name}: alpha must lie in [0, 1], got {self.alpha}")
        if not (self.decay_rate > 0 and self.expansion_rate > 0):
            raise EventError(f"{name}: decay and expansion rates must be > 0")
        if self.beta < 0:
            raise EventError(f"{name}: beta must be >= 0")
        kinds = {self.default_distribution, *self.distributions.values()}
        bad = kinds - set(DISTRIBUTIONS)
        if bad:
            raise EventError(f"{name}: unknown distribution(s) {sorted(bad)}")
        spread = kinds - {"point"}
        if self.r_base is None and spread:
            raise EventError(f"{name}: distributions {sorted(spread)} need r_base")
        if self.r_base is not None:
            if not spread:
                raise EventError(f"{name}: point-only event types must not set r_base")
            if not self.r_base > 0:
                raise EventError(f"{name}: r_base must be > 0")
        object.__setattr__(self, "distributions", dict(self.distributions))

    def distribution_for(self, sub_event_type: str) -> str:
        return self.distributions.get(sub_event_type, self.default_distribution)


@dataclass(frozen=True)
class ScenarioContext:
    analysis_date: date
    democracy_index: float = 0.0
    civilian_gamma: float = DEFAULT_CIVILIAN_GAMMA

    def __post_init__(self):
        if not 0.0 <= self.democracy_index <= 1.0:
            raise EventError(f"democracy_index must lie in [0, 1], got {self.democracy_index}")
        if self.civilian_gamma < 0:
            raise EventError("civilian_gamma must be >= 0")

    def days_since(self, event_date: date) -> int:
        dt = (self.analysis_date - event_date).days
        if dt < 0:
            raise EventError(f"event date {event_date} is after analysis date {self.analysis_date}")
        return dt


def fatality_scale(n_f: float, alpha: float) -> float:
    """Blend of linear and logarithmic growth in fatalities; equals 1 at zero."""
    return alpha * (1.0 + n_f) + (1.0 - alpha) * (1.0 + math.log1p(n_f))


def intensity(n_f: float, civilian: int, alpha: float, gamma: float = DEFAULT_CIVILIAN_GAMMA) -> float:
    return fatality_scale(n_f, alpha) * (1.0 + gamma * civilian)


def decay_cutoff(decay_rate: float) -> float:
    """Elapsed days at which an impact has fallen to 1 % and is dropped."""
    return math.log(100.0) / decay_rate


def temporal_decay(dt: float, decay_rate: float) -> float:
    if dt < 0:
        raise EventError(f"elapsed time must be >= 0, got {dt}")
    if dt < decay_cutoff(decay_rate):
        return math.exp(-decay_rate * dt)
    return 0.0


def lookup_params(params: Mapping[str, EventTypeParams] | EventTypeParams, event_type: str) -> EventTypeParams:
    if isinstance(params, EventTypeParams):
        if params.event_type != event_type:
            raise EventError(f"parameters for {params.event_type!r} used on a {event_type!r} event")
        return params
    try:
        return params[event_type]
    except KeyError:
        raise EventError(
            f"unknown event type {event_type!r}; configured types: {sorted(params)}"
        ) from None


def effective_magnitude(e: ConflictEvent, params, ctx: ScenarioContext) -> float:
    p = lookup_params(params, e.event_type)
    base = p.f_base * (1.0 - ctx.democracy_index) if p.democracy_adjust else p.f_base
    i = intensity(e.fatalities, e.civilian_targeting, p.alpha, ctx.civilian_gamma)
    return base * i * temporal_decay(ctx.days_since(e.event_date), p.decay_rate)


def expanded_radius(r_base: float, beta: float, rate: float, dt: float) -> float:
    return r_base * (1.0 + beta * -math.expm1(-rate * dt))


def effective_radius(e: ConflictEvent, params, ctx: ScenarioContext) -> float:
    p = lookup_params(params, e.event_type)
    if p.distribution_for(e.sub_event_type) == "point" or p.r_base is None:
        raise EventError(f"{e.event_type} / {e.sub_event_type} is a point load and has no radius")
    return expanded_radius(p.r_base, p.beta, p.expansion_rate, ctx.days_since(e.event_date))


@dataclass
class EventSelection:
    retained: list[ConflictEvent]
    total: int
    dropped_precision: int
    dropped_strategic: int
    by_type: Counter


def select_events(events: Iterable[ConflictEvent]) -> EventSelection:
    """Keep events with exact locations that are not strategic developments."""
    events = list(events)
    retained, low_precision, strategic = [], 0, 0
    for e in events:
        if e.geo_precision != 1:
            low_precision += 1
        elif e.event_type == STRATEGIC:
            strategic += 1
        else:
            retained.append(e)
    return EventSelection(
        retained=retained,
        total=len(events),
        dropped_precision=low_precision,
        dropped_strategic=strategic,
        by_type=Counter(e.event_type for e in retained),
    )


@dataclass
class ForceSetReport:
    selected: int = 0
    decayed: int = 0
    outside: int = 0
    emitted: int = 0
    dropped_precision: int = 0
    dropped_strategic: int = 0
    total: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def build_force_set_report(
    events: Iterable[ConflictEvent],
    params: Mapping[str, EventTypeParams],
    ctx: ScenarioContext,
    domain: DomainRect | None = None,
) -> tuple[list[ForceDescriptor], ForceSetReport]:
    """Forces plus counts of everything filtered on the way."""
    sel = select_events(events)
    report = ForceSetReport(
        selected=len(sel.retained), total=sel.total,
        dropped_precision=sel.dropped_precision, dropped_strategic=sel.dropped_strategic,
    )
    ref = domain.ref if domain is not None else None
    forces = []
    for e in sel.retained:
        mag = effective_magnitude(e, params, ctx)
        if mag <= 0.0:
            report.decayed += 1
            continue
        p = lookup_params(params, e.event_type)
        kind = p.distribution_for(e.sub_event_type)
        radius = effective_radius(e, p, ctx) if kind != "point" else 0.0
        loc = project(e.location, ref) if ref is not None else (e.location.lon, e.location.lat)
        if domain is not None and not domain.contains(loc):
            logger.warning(
                "%s event on %s at (%.4f, %.4f) lies outside the domain; skipped",
                e.event_type, e.event_date, e.location.lon, e.location.lat,
            )
            report.outside += 1
            continue
        forces.append(ForceDescriptor(
            location=loc, magnitude=mag, distribution=kind, radius=radius,
            event_type=e.event_type, sub_event_type=e.sub_event_type,
        ))
    report.emitted = len(forces)
    return forces, report


def build_force_set(events, params, ctx, domain: DomainRect | None = None) -> list[ForceDescriptor]:
    """Loads for every retained, undecayed event inside the domain.

    Without a domain, locations stay in lon/lat degrees.
    """
    return build_force_set_report(events, params, ctx, domain)[0]
