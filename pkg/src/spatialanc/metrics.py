"""Evaluation metrics over the control region.

All field-domain metrics synthesize mode coefficients on a polar grid over
the control disc (default radius 1 m, 24 radii x 64 angles) and compare
power sums, so the uniform-in-r weighting cancels in every ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modal import ModeCoefficients, synthesis_matrix

NOISE_LEVEL_CLAMP_DB = 20.0  # divergence display ceiling


@dataclass
class EvalGrid:
    """Polar evaluation grid: points (r_i, phi_j) covering a disc."""

    radii: np.ndarray
    angles: np.ndarray
    _synth_cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def polar(cls, radius: float = 1.0, n_radii: int = 24, n_angles: int = 64) -> "EvalGrid":
        """Grid with ring radii (i + 0.5) * radius / n_radii (no origin cluster)."""
        radii = (np.arange(n_radii) + 0.5) * radius / n_radii
        angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
        return cls(radii=radii, angles=angles)

    @property
    def n_points(self) -> int:
        return len(self.radii) * len(self.angles)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (r, phi) coordinate arrays."""
        rr, pp = np.meshgrid(self.radii, self.angles, indexing="ij")
        return rr.ravel(), pp.ravel()

    def synthesis(self, k: float, order: int) -> np.ndarray:
        """Cached (n_points x 2*order+1) mode-synthesis matrix for wavenumber k."""
        key = (round(float(k), 12), order)
        mat = self._synth_cache.get(key)
        if mat is None:
            rr, pp = self.points()
            mat = synthesis_matrix(rr, pp, k, order)
            self._synth_cache[key] = mat
        return mat


def sdr(true_field: np.ndarray, reproduced: np.ndarray) -> float:
    """Signal-to-distortion ratio 10 log10(sum|S|^2 / sum|S - S_rep|^2) in dB.

    Returns +inf on an exact match; raises on an all-zero true field.
    """
    true_field = np.asarray(true_field)
    reproduced = np.asarray(reproduced)
    if true_field.shape != reproduced.shape:
        raise ValueError("field arrays must have equal shape")
    sig = float(np.sum(np.abs(true_field) ** 2))
    if sig == 0.0:
        raise ValueError("SDR undefined for an all-zero true field")
    dist = float(np.sum(np.abs(true_field - reproduced) ** 2))
    if dist == 0.0:
        return math.inf
    return 10.0 * math.log10(sig / dist)


def _masked_coeffs(modes: ModeCoefficients) -> np.ndarray:
    out = modes.coeffs.copy()
    out[modes.unrecoverable] = 0.0
    return out


def noise_level(
    residual: ModeCoefficients,
    initial: ModeCoefficients,
    grid: EvalGrid,
    clamp_db: float = NOISE_LEVEL_CLAMP_DB,
) -> float:
    """Residual-to-initial power ratio over the grid, in dB.

    0 dB = no attenuation; negative = attenuation; -inf sentinel on an
    exactly zero residual; clamped at ``clamp_db`` so divergent runs stay
    plottable. Modes flagged unrecoverable in either input are skipped.
    """
    if residual.order != initial.order:
        raise ValueError("mode orders must match")
    mask = residual.unrecoverable | initial.unrecoverable
    res = residual.coeffs.copy()
    ini = initial.coeffs.copy()
    res[mask] = 0.0
    ini[mask] = 0.0
    A = grid.synthesis(initial.k, initial.order)
    den = float(np.sum(np.abs(A @ ini) ** 2))
    if den == 0.0:
        raise ValueError("noise level undefined for a zero initial field")
    num = float(np.sum(np.abs(A @ res) ** 2))
    if num == 0.0:
        return -math.inf
    return min(10.0 * math.log10(num / den), clamp_db)


def mode_error_map(true_modes: np.ndarray, estimated: np.ndarray) -> np.ndarray:
    """Per-cell amplitude error 20 log10|est - true| over a (freq x mode) grid.

    Exact cells come out as -inf; any display floor is applied by the caller
    (the harness floors at -120 dB and records that in the CSV metadata).
    """
    true_modes = np.asarray(true_modes, dtype=complex)
    estimated = np.asarray(estimated, dtype=complex)
    if true_modes.shape != estimated.shape:
        raise ValueError("mode grids must have equal shape")
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(estimated - true_modes))
