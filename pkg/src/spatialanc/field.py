"""Scene description and 2D free-field ground-truth synthesis.

Conventions (load-bearing -- a silent sign flip breaks the control loop):
time dependence e^{+i omega t}, outgoing waves carry the second-kind Hankel
function. A unit line (cylindrical) source at x_s radiates

    S(x) = -(i/4) * H2_0(k ||x - x_s||)

and a unit plane wave arriving from azimuth phi_l is e^{i k r cos(phi - phi_l)}
at the polar point (r, phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import specfun
from .errors import DomainError, SingularityError


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform circular array: Q elements at angles 2*pi*q/Q, q = 0..Q-1."""

    radius: float
    count: int
    role: str = "reference"  # reference | error | loudspeaker

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("array radius must be positive")
        if self.count < 1:
            raise ValueError("array needs at least one element")
        if self.role not in ("reference", "error", "loudspeaker"):
            raise ValueError(f"unknown array role {self.role!r}")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.count) / self.count

    @property
    def positions(self) -> np.ndarray:
        """Cartesian (Q, 2) element positions."""
        a = self.angles
        return self.radius * np.stack([np.cos(a), np.sin(a)], axis=1)


@dataclass(frozen=True)
class LineSource:
    """2D line (cylindrical) source at polar position (distance, azimuth)."""

    distance: float
    azimuth: float
    amplitude: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.distance <= 0:
            raise ValueError("line source distance must be positive")


@dataclass(frozen=True)
class PlaneWave:
    """Plane wave arriving from the given azimuth."""

    azimuth: float
    amplitude: complex = 1.0 + 0.0j


Source = Union[LineSource, PlaneWave]


@dataclass(frozen=True)
class Scene:
    """Noise sources plus medium constants and the frequency bins of a run."""

    sources: tuple[Source, ...]
    speed_of_sound: float = 343.0
    frequencies: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "frequencies", tuple(self.frequencies))
        if self.speed_of_sound <= 0:
            raise ValueError("speed of sound must be positive")
        if any(f <= 0 for f in self.frequencies):
            raise ValueError("all frequencies must be positive")

    def wavenumber(self, f: float) -> float:
        if f <= 0:
            raise DomainError("frequency must be positive")
        return 2.0 * math.pi * f / self.speed_of_sound

    def scaled(self, amplitudes: np.ndarray) -> "Scene":
        """Copy of the scene with per-source amplitudes multiplied in."""
        if len(amplitudes) != len(self.sources):
            raise ValueError("one amplitude per source required")
        scaled = []
        for src, a in zip(self.sources, amplitudes):
            if isinstance(src, LineSource):
                scaled.append(LineSource(src.distance, src.azimuth, src.amplitude * a))
            else:
                scaled.append(PlaneWave(src.azimuth, src.amplitude * a))
        return Scene(tuple(scaled), self.speed_of_sound, self.frequencies)


def pressure_at(scene: Scene, f: float, point: tuple[float, float]) -> complex:
    """Complex pressure of the scene at polar point (r, phi)."""
    k = scene.wavenumber(f)
    r, phi = point
    total = 0.0 + 0.0j
    for src in scene.sources:
        if isinstance(src, PlaneWave):
            total += src.amplitude * np.exp(1j * k * r * math.cos(phi - src.azimuth))
        else:
            # law of cosines for the source-to-point distance
            d2 = r * r + src.distance * src.distance
            d2 -= 2.0 * r * src.distance * math.cos(phi - src.azimuth)
            d = math.sqrt(max(d2, 0.0))
            if d < 1e-12:
                raise SingularityError("evaluation point coincides with a line source")
            total += src.amplitude * (-0.25j) * specfun.hankel2(0, k * d)
    return complex(total)


def sample_array(scene: Scene, f: float, arr: ArrayGeometry) -> np.ndarray:
    """Pressure at every element of a circular array (length Q, ordered by q)."""
    return np.array(
        [pressure_at(scene, f, (arr.radius, phi)) for phi in arr.angles],
        dtype=complex,
    )


def true_mode_coefficients(scene: Scene, f: float, order: int):
    """Exact analytic mode coefficients of the scene.

    Plane wave from phi_l: beta_m = amp * i^m e^{-i m phi_l}.
    Line source at (r_s, phi_s): beta_m = amp * (-i/4) H2_m(k r_s) e^{-i m phi_s}
    (Graf addition theorem, valid for evaluation radii r < r_s).
    """
    from .modal import ModeCoefficients  # local import avoids a module cycle

    k = scene.wavenumber(f)
    ms = np.arange(-order, order + 1)
    coeffs = np.zeros(2 * order + 1, dtype=complex)
    for src in scene.sources:
        if isinstance(src, PlaneWave):
            coeffs += src.amplitude * (1j ** ms) * np.exp(-1j * ms * src.azimuth)
        else:
            hpos = specfun.hankel2_sequence(order, k * src.distance)
            signs = np.where(np.arange(1, order + 1) % 2 == 1, -1.0, 1.0)
            hfull = np.concatenate([(signs * hpos[1:])[::-1], hpos])
            coeffs += src.amplitude * (-0.25j) * hfull * np.exp(-1j * ms * src.azimuth)
    return ModeCoefficients(order=order, coeffs=coeffs, k=k)
