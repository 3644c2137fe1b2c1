"""Scenario layout: waveguides, pinching-antenna placements, users, movable regions.

All lengths are in meters. Waveguides run parallel to the x-axis at height
``height`` above the user plane (z = 0); antenna l on waveguide n sits at
``(x[n, l], waveguide_y[n], height)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True)
class Vec3:
    """Cartesian point (meters)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinates: {(self.x, self.y, self.z)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


class MovableRegion(NamedTuple):
    """Closed interval on a waveguide within which one antenna may sit."""

    lower: float
    upper: float


def uniform_waveguide_y(num_waveguides: int, region_side: float) -> tuple[float, ...]:
    """y-coordinates of waveguides spread uniformly across the square region.

    A single waveguide is centered; otherwise y_n = (n-1) * region_side / (N-1).
    """
    if num_waveguides == 1:
        return (region_side / 2.0,)
    step = region_side / (num_waveguides - 1)
    return tuple(n * step for n in range(num_waveguides))


@dataclass(frozen=True)
class SystemGeometry:
    """Immutable 3-D layout of the square service region, waveguides, and users.

    Attributes:
        region_side: side length of the square user region.
        height: waveguide height above the user plane (> 0).
        num_waveguides: N, one RF chain per waveguide.
        waveguide_y: y-coordinate of each waveguide, inside [0, region_side].
        waveguide_length: usable antenna span along x on each waveguide.
        min_spacing: minimum gap between adjacent antennas on a waveguide.
        num_pas_per_waveguide: L antennas per waveguide.
        users: K user positions at z = 0 inside the region.
    """

    region_side: float
    height: float
    num_waveguides: int
    waveguide_y: tuple[float, ...]
    waveguide_length: float
    min_spacing: float
    num_pas_per_waveguide: int
    users: tuple[Vec3, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.height <= 0:
            raise ValueError("waveguide height must be positive")
        if len(self.waveguide_y) != self.num_waveguides:
            raise ValueError("waveguide_y length must equal num_waveguides")
        for y in self.waveguide_y:
            if not 0 <= y <= self.region_side:
                raise ValueError(f"waveguide y={y} outside [0, {self.region_side}]")
        span_needed = (self.num_pas_per_waveguide - 1) * self.min_spacing
        if self.waveguide_length < span_needed:
            raise ValueError(
                f"waveguide_length {self.waveguide_length} cannot fit "
                f"{self.num_pas_per_waveguide} antennas at spacing {self.min_spacing}"
            )
        for u in self.users:
            if u.z != 0:
                raise ValueError("users must lie in the z = 0 plane")
            if not (0 <= u.x <= self.region_side and 0 <= u.y <= self.region_side):
                raise ValueError(f"user {u} outside the service region")

    @property
    def num_users(self) -> int:
        return len(self.users)


def make_geometry(
    region_side: float,
    height: float,
    num_waveguides: int,
    waveguide_length: float,
    min_spacing: float,
    num_pas_per_waveguide: int,
    users: Sequence[Vec3],
    waveguide_y: Sequence[float] | None = None,
) -> SystemGeometry:
    """Build a SystemGeometry with uniformly spread waveguides by default."""
    if waveguide_y is None:
        waveguide_y = uniform_waveguide_y(num_waveguides, region_side)
    return SystemGeometry(
        region_side=region_side,
        height=height,
        num_waveguides=num_waveguides,
        waveguide_y=tuple(waveguide_y),
        waveguide_length=waveguide_length,
        min_spacing=min_spacing,
        num_pas_per_waveguide=num_pas_per_waveguide,
        users=tuple(users),
    )


def pa_position(geom: SystemGeometry, n: int, l: int, x: float) -> Vec3:
    """3-D position of antenna l on waveguide n when placed at coordinate x.

    Indices are 0-based; x must lie within [0, waveguide_length].
    """
    if not 0 <= n < geom.num_waveguides:
        raise IndexError(f"waveguide index {n} out of range")
    if not 0 <= l < geom.num_pas_per_waveguide:
        raise IndexError(f"antenna index {l} out of range")
    if not 0 <= x <= geom.waveguide_length:
        raise ValueError(f"x={x} outside [0, {geom.waveguide_length}]")
    return Vec3(x, geom.waveguide_y[n], geom.height)


def user_pa_distance(user: Vec3, pa: Vec3) -> float:
    """Euclidean distance between a ground user and an antenna point."""
    return math.sqrt((user.x - pa.x) ** 2 + (user.y - pa.y) ** 2 + (user.z - pa.z) ** 2)


def initial_regions(geom: SystemGeometry) -> list[MovableRegion]:
    """Disjoint per-antenna movable regions covering one waveguide.

    Each of the L antennas gets a slot of width
    (waveguide_length - (L-1)*min_spacing) / L, with gaps of exactly
    min_spacing between consecutive slots; the union plus gaps tiles
    [0, waveguide_length]. The same slots apply to every waveguide.
    """
    L = geom.num_pas_per_waveguide
    dx = geom.min_spacing
    width = (geom.waveguide_length - (L - 1) * dx) / L
    if width < 0:
        raise ValueError("geometry cannot fit the requested antennas")
    return [
        MovableRegion(l * (width + dx), (l + 1) * width + l * dx)
        for l in range(L)
    ]


def updated_region(
    l: int,
    prev_opt: float | None,
    init: MovableRegion,
    min_spacing: float,
) -> MovableRegion:
    """Movable region for antenna l once antenna l-1 has been placed.

    The lower edge advances to prev_opt + min_spacing (antenna 0 keeps lower 0);
    the upper edge is the initial slot's upper edge. A collapsed interval
    degenerates to the single point at the upper edge so sequential sweeps
    always stay feasible.
    """
    if l == 0:
        return MovableRegion(0.0, init.upper)
    if prev_opt is None:
        raise ValueError("prev_opt required for antennas after the first")
    lower = max(prev_opt + min_spacing, 0.0)
    if lower > init.upper:
        lower = init.upper
    return MovableRegion(lower, init.upper)


class PlacementViolation(NamedTuple):
    kind: str  # "range" or "spacing"
    waveguide: int
    pa: int
    amount: float


@dataclass
class PlacementReport:
    """Outcome of checking a placement against range and spacing constraints."""

    violations: list[PlacementViolation]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_placement(
    geom: SystemGeometry, x_coords: np.ndarray, tol: float = 1e-9
) -> PlacementReport:
    """Check an N x L placement matrix against the waveguide constraints.

    Reports every violated bound (entry outside [0, waveguide_length]) and
    every adjacent pair closer than min_spacing, with the violation magnitude.
    Violations below tol (default 1 nm, far under any spacing of interest) are
    treated as floating-point noise.
    """
    x = np.asarray(x_coords, dtype=float)
    N, L = geom.num_waveguides, geom.num_pas_per_waveguide
    if x.shape != (N, L):
        raise ValueError(f"placement shape {x.shape} != ({N}, {L})")
    violations: list[PlacementViolation] = []
    for n in range(N):
        for l in range(L):
            v = x[n, l]
            if v < -tol:
                violations.append(PlacementViolation("range", n, l, -v))
            elif v > geom.waveguide_length + tol:
                violations.append(
                    PlacementViolation("range", n, l, v - geom.waveguide_length)
                )
        for l in range(L - 1):
            gap = x[n, l + 1] - x[n, l]
            if gap < geom.min_spacing - tol:
                violations.append(
                    PlacementViolation("spacing", n, l, geom.min_spacing - gap)
                )
    return PlacementReport(violations)
