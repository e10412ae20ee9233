"""Shipped parameter tables: event loads and the reference indicator set.

Indicator normalisation bounds assume inputs pre-scaled to [0, 1] (0 is the
neutral value); real datasets need their own bounds in the config.
"""

from __future__ import annotations

from .events import EventTypeParams
from .translate import CombinationSpec, DependencySpec, IndicatorSpec, ResponseSpec

EXPLOSIONS = "Explosions/Remote violence"
BATTLES = "Battles"
VIOLENCE_AGAINST_CIVILIANS = "Violence against civilians"
RIOTS = "Riots"
PROTESTS = "Protests"


def default_event_params() -> dict[str, EventTypeParams]:
    tables = [
        EventTypeParams(
            EXPLOSIONS, f_base=1.0e9, alpha=0.4, decay_rate=0.0064,
            r_base=10_000.0, beta=0.5, expansion_rate=0.0512,
            default_distribution="gaussian",
            distributions={
                "Chemical weapon": "linear",
                "Shelling/artillery/missile attack": "linear",
                "Air/drone strike": "gaussian",
                "Suicide bomb": "gaussian",
                "Remote explosive/landmine/IED": "gaussian",
                "Grenade": "gaussian",
            },
        ),
        EventTypeParams(
            BATTLES, f_base=8.0e8, alpha=0.4, decay_rate=0.0064,
            r_base=25_000.0, beta=0.5, expansion_rate=0.0512,
            default_distribution="linear",
        ),
        EventTypeParams(
            VIOLENCE_AGAINST_CIVILIANS, f_base=6.0e8, alpha=0.2, decay_rate=0.0128,
            default_distribution="point",
        ),
        EventTypeParams(
            RIOTS, f_base=3.0e8, alpha=0.3, decay_rate=0.0256,
            r_base=5_000.0, beta=0.1, expansion_rate=0.3070,
            default_distribution="constant",
        ),
        EventTypeParams(
            PROTESTS, f_base=1.0e8, alpha=0.3, decay_rate=0.0256,
            r_base=5_000.0, beta=0.1, expansion_rate=0.3070,
            default_distribution="constant", democracy_adjust=True,
        ),
    ]
    return {p.event_type: p for p in tables}


def _unit(name, role, response, weight=0.0, target=None, dependency=None) -> IndicatorSpec:
    return IndicatorSpec(
        name=name, role=role, x_min=0.0, x_mid=0.0, x_max=1.0,
        response=response, weight=weight, target=target, dependency=dependency,
    )


def default_indicators() -> list[IndicatorSpec]:
    power = ResponseSpec.single
    return [
        _unit("cisi", "resilience", power("power", gamma=0.5), 0.15, "thickness"),
        _unit("spi_drought", "vulnerability", power("power", gamma=1.2), 0.20, "thickness"),
        _unit("spi_wetness", "vulnerability", power("power", gamma=1.2), 0.20, "thickness"),
        _unit(
            "health_infrastructure", "resilience", power("logarithmic", alpha=2.5), 0.30, "thickness",
            dependency=DependencySpec(
                kind="threshold", prerequisite="travel_time_healthcare",
                threshold=0.03, base=0.4, inverted=True,
            ),
        ),
        _unit("travel_time_healthcare", "prerequisite", power("linear", m=1.0)),
        _unit("dependency_ratio", "vulnerability", power("exponential", beta=0.8), 0.15, "thickness"),
        _unit("gdp", "resilience", power("linear", m=1.0), 0.60, "youngs_modulus"),
        _unit("poverty", "vulnerability", power("power", gamma=1.5), 0.20, "youngs_modulus"),
        _unit("child_poverty", "vulnerability", power("power", gamma=0.5), 0.20, "youngs_modulus"),
        _unit("population_density", "vulnerability", power("linear", m=2.0), 0.60, "poissons_ratio"),
        _unit("road_density", "resilience", power("logarithmic", alpha=2.0), 0.40, "poissons_ratio"),
    ]


def default_combinations() -> dict[str, CombinationSpec]:
    return {
        "thickness": CombinationSpec("thickness", p_base=2500.0),
        "youngs_modulus": CombinationSpec("youngs_modulus", p_base=5.0e9),
        "poissons_ratio": CombinationSpec("poissons_ratio", k=2.5),
    }


# Reference plate used throughout the behavioural checks.
BASELINE_MATERIAL = (2000.0, 5.0e9, 0.3)
NIGERIA_BBOX = ((2.668, 4.270), (14.680, 13.892))
DEFAULT_DEMOCRACY_INDEX = 0.4
