"""Small value types shared across modules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DISTRIBUTIONS = ("point", "gaussian", "linear", "constant")


class GeoPoint(NamedTuple):
    lon: float
    lat: float

    def validate(self) -> "GeoPoint":
        if not (-180.0 <= self.lon <= 180.0 and -90.0 <= self.lat <= 90.0):
            raise ValueError(f"coordinates out of range: lon={self.lon}, lat={self.lat}")
        return self


class ProjectedPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class ForceDescriptor:
    """One event rendered as a load on the plate.

    ``location`` is in the projected frame (metres). ``source`` optionally
    carries the originating event for reporting.
    """

    location: ProjectedPoint
    magnitude: float
    distribution: str = "point"
    radius: float = 0.0
    event_type: str = ""
    sub_event_type: str = ""

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        if not (self.magnitude >= 0.0):
            raise ValueError(f"force magnitude must be >= 0, got {self.magnitude}")
        if not (self.radius >= 0.0):
            raise ValueError(f"force radius must be >= 0, got {self.radius}")
        if self.distribution != "point" and self.radius <= 0.0:
            raise ValueError(f"{self.distribution} force needs a positive radius")
        object.__setattr__(self, "location", ProjectedPoint(*map(float, self.location)))


@dataclass(frozen=True)
class MaterialField:
    """Per-element thickness (m), Young's modulus (Pa) and Poisson's ratio.

    Arrays share the element grid shape ``(ny, nx)``.
    """

    h: np.ndarray
    E: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        arrays = [np.array(a, dtype=float) for a in (self.h, self.E, self.nu)]
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape):
            raise ValueError("h, E and nu grids must share one shape")
        for name, a in zip(("h", "E", "nu"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def uniform(cls, shape: tuple[int, int], h: float, E: float, nu: float) -> "MaterialField":
        return cls(np.full(shape, float(h)), np.full(shape, float(E)), np.full(shape, float(nu)))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.h.shape

    def violations(self) -> list[str]:
        """Human-readable list of invariant violations, first offender per rule."""
        out = []
        for name, bad, rule in (
            ("h", ~(self.h > 0), "h > 0"),
            ("E", ~(self.E > 0), "E > 0"),
            ("nu", ~((self.nu >= 0) & (self.nu < 0.5)), "0 <= nu < 0.5"),
        ):
            if bad.any():
                idx = tuple(int(i) for i in np.argwhere(bad)[0])
                value = getattr(self, name)[idx]
                out.append(f"element (row, col)={idx}: {name}={value!r} violates {rule}")
        return out

    def validate(self) -> "MaterialField":
        problems = self.violations()
        if problems:
            raise ValueError("invalid material field: " + "; ".join(problems))
        return self

    def bending_stiffness(self) -> np.ndarray:
        return self.E * (self.h**3 / (12.0 * (1.0 - self.nu**2)))
