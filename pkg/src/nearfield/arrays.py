"""Geometry, steering vectors, and LoS channels for a uniform linear array."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LIGHT_SPEED = 3.0e8
"""Default propagation speed in m/s (3e8, so half-wave geometries stay exact)."""


class DegenerateGeometryError(ValueError):
    """The source position coincides with an array element (some R_n == 0)."""


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array of isotropic elements on one axis.

    The first element sits at the origin; element n sits at distance n*spacing
    along the array axis.  `spacing` defaults to half the carrier wavelength.
    """

    carrier_freq: float
    n_elements: int
    spacing: float | None = None
    light_speed: float = LIGHT_SPEED

    def __post_init__(self) -> None:
        if self.carrier_freq <= 0:
            raise ValueError(f"carrier_freq must be positive, got {self.carrier_freq}")
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError(f"n_elements must be a positive integer, got {self.n_elements}")
        if self.light_speed <= 0:
            raise ValueError(f"light_speed must be positive, got {self.light_speed}")
        if self.spacing is None:
            object.__setattr__(self, "spacing", self.wavelength / 2.0)
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def wavelength(self) -> float:
        return self.light_speed / self.carrier_freq

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def aperture(self) -> float:
        """Physical array extent (n_elements - 1) * spacing; zero for one element."""
        return (self.n_elements - 1) * self.spacing

    def element_offsets(self) -> np.ndarray:
        """Distances n*spacing of each element from the first one."""
        return self.spacing * np.arange(self.n_elements, dtype=float)


@dataclass(frozen=True)
class PolarPosition:
    """Source location: look angle (rad) and range (m) from the first element.

    `theta` may be any real number; all geometry enters through cos(theta),
    so angles outside [0, pi] are equivalent to their reflection into it.
    """

    theta: float
    range_m: float

    def __post_init__(self) -> None:
        if self.range_m <= 0:
            raise ValueError(f"range_m must be positive, got {self.range_m}")


def element_distances(cfg: ArrayConfig, pos: PolarPosition) -> np.ndarray:
    """Exact source-to-element distances R_n for all n, by the law of cosines."""
    nd = cfg.element_offsets()
    cos_t = math.cos(pos.theta)
    r = pos.range_m
    sq = r * r + nd * nd - 2.0 * r * nd * cos_t
    # roundoff can push exactly-collinear squares a few ulp below zero
    np.maximum(sq, 0.0, out=sq)
    dist = np.sqrt(sq)
    if np.any(dist == 0.0):
        n_bad = int(np.flatnonzero(dist == 0.0)[0])
        raise DegenerateGeometryError(
            f"source at (theta={pos.theta}, r={r}) coincides with element {n_bad}"
        )
    return dist


def element_distance(cfg: ArrayConfig, pos: PolarPosition, n: int) -> float:
    """Exact distance from the source to element n."""
    if not 0 <= n < cfg.n_elements:
        raise ValueError(f"element index {n} out of range [0, {cfg.n_elements})")
    return float(element_distances(cfg, pos)[n])


def steering_nf(cfg: ArrayConfig, pos: PolarPosition) -> np.ndarray:
    """Spherical-wavefront steering vector, element n = exp(-j*k*R_n)."""
    dist = element_distances(cfg, pos)
    return np.exp(-1j * cfg.wavenumber * dist)


def steering_ff(cfg: ArrayConfig, pos: PolarPosition) -> np.ndarray:
    """Planar-wavefront steering vector with the linear phase ramp.

    Element n = exp(-j*k*(r - n*d*cos(theta))); the ramp slope is k*d*cos(theta).
    """
    nd = cfg.element_offsets()
    phase = cfg.wavenumber * (pos.range_m - nd * math.cos(pos.theta))
    return np.exp(-1j * phase)


def channel_nf(cfg: ArrayConfig, pos: PolarPosition) -> np.ndarray:
    """Uplink LoS channel with exact per-element amplitudes lambda/(4*pi*R_n)."""
    dist = element_distances(cfg, pos)
    amp = cfg.wavelength / (4.0 * math.pi * dist)
    return amp * np.exp(-1j * cfg.wavenumber * dist)


def channel_ff(cfg: ArrayConfig, pos: PolarPosition) -> np.ndarray:
    """Planar-wavefront LoS channel: common amplitude lambda/(4*pi*r)."""
    amp = cfg.wavelength / (4.0 * math.pi * pos.range_m)
    return amp * steering_ff(cfg, pos)
