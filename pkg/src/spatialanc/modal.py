"""Circular-harmonic analysis and synthesis.

A 2D incident field is expanded as

    S(r, phi; k) ~= sum_{m=-M..M} beta_m(k) J_m(k r) e^{i m phi}

This module owns the coefficient container, the truncation rules, mode
extraction from uniform circular-array samples, the plane-wave-to-mode map,
and field resynthesis from coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

from . import specfun
from .errors import DomainError

if TYPE_CHECKING:  # pragma: no cover
    from .field import ArrayGeometry

#: |J_m(kr)| below this is treated as a Bessel zero: the mode is flagged
#: unrecoverable instead of being amplified by the near-zero division.
BESSEL_ZERO_EPS = 1e-6


@dataclass(frozen=True)
class ModeCoefficients:
    """Coefficients beta_m for m = -order..order at one wavenumber.

    ``unrecoverable`` marks modes whose extraction divided by a (near-)zero
    Bessel value; such entries are zeroed and downstream metrics skip them.
    """

    order: int
    coeffs: np.ndarray  # complex, length 2*order+1, index 0 <-> m = -order
    k: float
    unrecoverable: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (2 * self.order + 1,):
            raise ValueError(
                f"expected {2 * self.order + 1} coefficients, got {coeffs.shape}"
            )
        mask = self.unrecoverable
        if mask is None:
            mask = np.zeros(2 * self.order + 1, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != coeffs.shape:
                raise ValueError("mask length must match coefficient length")
        if not np.all(np.isfinite(coeffs[~mask])):
            raise ValueError("non-finite mode coefficients")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "unrecoverable", mask)

    @property
    def orders(self) -> np.ndarray:
        """Mode indices m = -order..order, aligned with ``coeffs``."""
        return np.arange(-self.order, self.order + 1)

    def __getitem__(self, m: int) -> complex:
        if abs(m) > self.order:
            raise IndexError(f"mode {m} outside order {self.order}")
        return complex(self.coeffs[m + self.order])


def truncation_order(k: float, radius: float, rule: str = "ceil-kR") -> int:
    """Truncation order M for a region of radius ``radius`` at wavenumber k.

    rule 'ceil-kR' gives M = ceil(kR); 'ceil-ekR/2' gives M = ceil(e*kR/2).
    A 0.1% relative slack is applied before the ceiling so that arguments
    landing a hair above an integer (e.g. kR = 20.004 at the 41-element
    Nyquist frequency) round to that integer instead of the next one.
    """
    if k <= 0 or radius <= 0:
        raise DomainError("k and radius must be positive")
    if rule == "ceil-kR":
        val = k * radius
    elif rule == "ceil-ekR/2":
        val = 0.5 * math.e * k * radius
    else:
        raise ValueError(f"unknown truncation rule {rule!r}")
    return max(1, math.ceil(val * (1.0 - 1e-3)))


def _mode_bessel(order: int, x: float) -> np.ndarray:
    """J_m(x) for m = -order..order (parity-expanded sequence)."""
    pos = specfun.bessel_j_sequence(order, x)
    full = np.empty(2 * order + 1)
    full[order:] = pos
    signs = np.where(np.arange(1, order + 1) % 2 == 1, -1.0, 1.0)
    full[:order] = (signs * pos[1:])[::-1]
    return full


def extract_modes(
    samples: np.ndarray,
    arr: "ArrayGeometry",
    k: float,
    order: int,
    bessel_eps: float = BESSEL_ZERO_EPS,
) -> ModeCoefficients:
    """Extract beta_m from uniform circular-array samples.

    beta_m = (1 / (Q J_m(k r))) * sum_q samples[q] e^{-i m phi_q}

    Exact (alias-free) when the field is order-limited to M' with
    Q >= 2 M' + 1 and order >= M'. Modes with |J_m(kr)| < ``bessel_eps``
    are flagged unrecoverable and zeroed rather than amplified.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != (arr.count,):
        raise ValueError("sample count does not match array geometry")
    if k <= 0:
        raise DomainError("k must be positive")
    ms = np.arange(-order, order + 1)
    # (2M+1) x Q analysis matrix of conjugated exponentials
    exps = np.exp(-1j * ms[:, None] * arr.angles[None, :])
    raw = exps @ samples / arr.count
    jvals = _mode_bessel(order, k * arr.radius)
    bad = np.abs(jvals) < bessel_eps
    coeffs = np.zeros_like(raw)
    coeffs[~bad] = raw[~bad] / jvals[~bad]
    return ModeCoefficients(order=order, coeffs=coeffs, k=k, unrecoverable=bad)


def modes_from_plane_waves(
    gamma: np.ndarray,
    angles: Iterable[float],
    order: int,
    k: float,
) -> ModeCoefficients:
    """Mode coefficients of a weighted plane-wave set.

    beta_m = i^m * sum_l gamma_l e^{-i m phi_l}   (Jacobi-Anger expansion)
    """
    gamma = np.asarray(gamma, dtype=complex)
    angles = np.asarray(list(angles), dtype=float)
    if gamma.shape != angles.shape:
        raise ValueError("gamma and angles must have equal length")
    ms = np.arange(-order, order + 1)
    coeffs = (1j ** ms) * (np.exp(-1j * ms[:, None] * angles[None, :]) @ gamma)
    return ModeCoefficients(order=order, coeffs=coeffs, k=k)


def synthesize_field(beta: ModeCoefficients, point: tuple[float, float]) -> complex:
    """Evaluate the truncated expansion at polar point (r, phi)."""
    r, phi = point
    jvals = _mode_bessel(beta.order, beta.k * r)
    ms = beta.orders
    return complex(np.sum(beta.coeffs * jvals * np.exp(1j * ms * phi)))


def synthesis_matrix(
    radii: np.ndarray, phis: np.ndarray, k: float, order: int
) -> np.ndarray:
    """Matrix A with A[p, :] @ coeffs = field value at point p.

    Vectorized form of ``synthesize_field`` for a batch of polar points;
    Bessel sequences are computed once per distinct radius.
    """
    radii = np.asarray(radii, dtype=float)
    phis = np.asarray(phis, dtype=float)
    ms = np.arange(-order, order + 1)
    jmat = np.empty((len(radii), 2 * order + 1))
    cache: dict[float, np.ndarray] = {}
    for i, r in enumerate(radii):
        row = cache.get(r)
        if row is None:
            row = _mode_bessel(order, k * r)
            cache[r] = row
        jmat[i] = row
    return jmat * np.exp(1j * ms[None, :] * phis[:, None])
