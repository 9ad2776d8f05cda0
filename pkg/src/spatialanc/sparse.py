"""Overcomplete plane-wave dictionary and complex-valued sparse solvers.

The observation model is s = E @ gamma + v with E the Q x L matrix of
plane-wave responses at the reference microphones (Q < L, underdetermined).
Two solvers are provided:

* ``solve_l1`` -- steepest descent on the l1-regularized least-squares cost
  ||s - E gamma||_2^2 + lam1 * (||Re gamma||_1 + ||Im gamma||_1), with the
  sign function applied independently to real and imaginary parts.
* ``solve_irls`` -- iteratively reweighted least squares for the nonconvex
  objective (1/p) ||gamma||_p^p + (lam2/2) ||s - E gamma||_2^2, using the
  dual-form update that only ever solves a Q x Q system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, SolverError
from .field import ArrayGeometry


@dataclass(frozen=True)
class Dictionary:
    """Q x L plane-wave dictionary for one wavenumber.

    E[q, l] = exp(i k r cos(phi_q - phi_l)): unit-magnitude response of the
    q-th microphone to a unit plane wave from candidate azimuth phi_l.
    """

    matrix: np.ndarray
    angles: np.ndarray  # candidate azimuths phi_l = 2*pi*l/L
    k: float
    mic_radius: float

    @property
    def n_mics(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_waves(self) -> int:
        return self.matrix.shape[1]


@dataclass
class SolverConfig:
    """Hyperparameters for both solver variants.

    ``lam1`` (l1 strength) and ``mu_mic`` (descent step) default to
    data-adaptive values when left as None: lam1 = 1e-2 * ||E^H s||_inf and
    mu_mic = 0.5 / ||E||_2^2 (power-iteration estimate). ``max_iters`` of
    None picks 500 for the l1 solver and 50 outer iterations for IRLS.
    """

    variant: str = "irls"  # "l1-sd" | "irls"
    lam1: Optional[float] = None
    mu_mic: Optional[float] = None
    lam2: float = 1e5
    p: float = 0.5
    max_iters: Optional[int] = None
    tolerance: float = 1e-6
    eps_init: float = 1.0
    eps_floor: float = 1e-8

    def __post_init__(self):
        if self.variant not in ("l1-sd", "irls"):
            raise ValueError(f"unknown solver variant {self.variant!r}")
        if not (0.0 < self.p <= 1.0):
            raise ValueError("p must lie in (0, 1]")
        if self.lam2 < 0 or (self.lam1 is not None and self.lam1 < 0):
            raise ValueError("regularization weights must be >= 0")
        if self.mu_mic is not None and self.mu_mic <= 0:
            raise ValueError("mu_mic must be positive")

    def iters(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return 500 if self.variant == "l1-sd" else 50


@dataclass(frozen=True)
class SolveResult:
    gamma: np.ndarray
    iterations: int
    residual: float  # ||s - E gamma||_2 recomputed at exit
    converged: bool
    residual_history: np.ndarray  # ||v||_2 after each iteration


def build_dictionary(arr: ArrayGeometry, k: float, n_waves: int) -> Dictionary:
    """Plane-wave dictionary for the given array at wavenumber k."""
    if n_waves < 1:
        raise ValueError("need at least one candidate plane wave")
    if k < 0:
        raise DomainError("k must be non-negative")
    angles = 2.0 * np.pi * np.arange(n_waves) / n_waves
    phase = k * arr.radius * np.cos(arr.angles[:, None] - angles[None, :])
    return Dictionary(matrix=np.exp(1j * phase), angles=angles, k=k, mic_radius=arr.radius)


def spectral_norm_sq(E: np.ndarray, iters: int = 50) -> float:
    """||E||_2^2 by power iteration on E^H E (deterministic start vector)."""
    v = np.ones(E.shape[1], dtype=complex) / np.sqrt(E.shape[1])
    lam = 0.0
    for _ in range(iters):
        w = E.conj().T @ (E @ v)
        lam = np.linalg.norm(w)
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(lam)


def _complex_sign(z: np.ndarray) -> np.ndarray:
    """sign(Re z) + i sign(Im z), with sign(0) = 0."""
    return np.sign(z.real) + 1j * np.sign(z.imag)


def solve_l1(
    s: np.ndarray,
    D: Dictionary,
    cfg: SolverConfig,
    gamma0: Optional[np.ndarray] = None,
) -> SolveResult:
    """l1-regularized steepest descent.

    Update: gamma <- gamma + mu E^H v - (mu lam1 / 2)(sign Re + i sign Im)
    with v = s - E gamma. Stops on relative iterate change <= tolerance or
    after max_iters; raises SolverError on divergence.
    """
    if cfg.variant != "l1-sd":
        raise ValueError("solve_l1 requires variant 'l1-sd'")
    E = D.matrix
    s = np.asarray(s, dtype=complex)
    if s.shape != (E.shape[0],):
        raise ValueError("signal length does not match dictionary")
    gamma = (
        np.zeros(E.shape[1], dtype=complex)
        if gamma0 is None
        else np.array(gamma0, dtype=complex)
    )
    mu = cfg.mu_mic if cfg.mu_mic is not None else 0.5 / max(spectral_norm_sq(E), 1e-300)
    corr = np.abs(E.conj().T @ s)
    lam1 = cfg.lam1 if cfg.lam1 is not None else 1e-2 * float(corr.max(initial=0.0))
    s_norm = np.linalg.norm(s)

    history = []
    n_done = 0
    converged = False
    for n in range(cfg.iters()):
        v = s - E @ gamma
        vnorm = np.linalg.norm(v)
        if vnorm > 1e6 * max(s_norm, 1e-300):
            raise SolverError(f"l1 descent diverged at iteration {n}")
        new = gamma + mu * (E.conj().T @ v) - (mu * lam1 / 2.0) * _complex_sign(gamma)
        step = np.linalg.norm(new - gamma)
        gamma = new
        history.append(np.linalg.norm(s - E @ gamma))
        n_done = n + 1
        if step <= cfg.tolerance * max(np.linalg.norm(gamma), 1e-300):
            converged = True
            break
    residual = float(np.linalg.norm(s - E @ gamma))
    return SolveResult(gamma, n_done, residual, converged, np.array(history))


def solve_irls(
    s: np.ndarray,
    D: Dictionary,
    cfg: SolverConfig,
    gamma0: Optional[np.ndarray] = None,
) -> SolveResult:
    """lp-norm IRLS in basis-pursuit-denoising form.

    Each outer iteration forms weights u_l = (|gamma_l|^2 + eps)^{1 - p/2}
    and solves the Q x Q dual system
        gamma = U E^H (E U E^H + I/lam2)^{-1} s.
    eps follows a decreasing continuation (divide by 10 when the iterate
    change drops below sqrt(eps)*||gamma||/100, floored at eps_floor). A
    nonzero warm start skips the continuation and starts at the floor,
    trusting the support of the supplied gamma.
    """
    if cfg.variant != "irls":
        raise ValueError("solve_irls requires variant 'irls'")
    E = D.matrix
    s = np.asarray(s, dtype=complex)
    if s.shape != (E.shape[0],):
        raise ValueError("signal length does not match dictionary")
    Q = E.shape[0]
    warm = gamma0 is not None and np.any(gamma0)
    gamma = (
        np.array(gamma0, dtype=complex)
        if warm
        else np.zeros(E.shape[1], dtype=complex)
    )
    eps = cfg.eps_floor if warm else cfg.eps_init
    s_norm = np.linalg.norm(s)
    eye = np.eye(Q)

    history = []
    n_done = 0
    converged = False
    for n in range(cfg.iters()):
        u = (np.abs(gamma) ** 2 + eps) ** (1.0 - cfg.p / 2.0)
        A = (E * u[None, :]) @ E.conj().T + eye / cfg.lam2
        try:
            new = u * (E.conj().T @ np.linalg.solve(A, s))
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"IRLS linear solve failed at iteration {n}: {exc}")
        change = np.linalg.norm(new - gamma) / max(np.linalg.norm(gamma), 1e-300)
        gamma = new
        vnorm = float(np.linalg.norm(s - E @ gamma))
        if vnorm > 1e6 * max(s_norm, 1e-300):
            raise SolverError(f"IRLS diverged at iteration {n}")
        history.append(vnorm)
        n_done = n + 1
        if change < np.sqrt(eps) / 100.0:
            eps = max(eps / 10.0, cfg.eps_floor)
        if change < cfg.tolerance and eps <= cfg.eps_floor:
            converged = True
            break
    residual = float(np.linalg.norm(s - E @ gamma))
    return SolveResult(gamma, n_done, residual, converged, np.array(history))


def solve(
    s: np.ndarray,
    D: Dictionary,
    cfg: SolverConfig,
    gamma0: Optional[np.ndarray] = None,
) -> SolveResult:
    """Dispatch on cfg.variant."""
    if cfg.variant == "l1-sd":
        return solve_l1(s, D, cfg, gamma0)
    return solve_irls(s, D, cfg, gamma0)


def lp_objective(gamma: np.ndarray, s: np.ndarray, E: np.ndarray, cfg: SolverConfig,
                 eps: float = 0.0) -> float:
    """(1/p) sum (|gamma|^2 + eps)^{p/2} + (lam2/2) ||s - E gamma||^2.

    The smoothed-l_p objective the IRLS iteration majorizes; exposed for the
    monotonicity checks in the test suite.
    """
    data = np.linalg.norm(s - E @ gamma) ** 2
    return float(
        np.sum((np.abs(gamma) ** 2 + eps) ** (cfg.p / 2.0)) / cfg.p
        + 0.5 * cfg.lam2 * data
    )
