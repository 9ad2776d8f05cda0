"""Run configuration: YAML parsing, defaulting, and validation.

The config file is a nested key/value YAML document; every field has a
default, so an empty (or missing) file yields the standard setup: 41-element
arrays at radii 2 m (reference), 1.5 m (loudspeakers), 1 m (error), expansion
order 20, 128 candidate plane waves, 100-1400 Hz sweep in 10 Hz steps, 50
control iterations. See README for the full grammar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Optional

import numpy as np
import yaml

from .anc import AncGeometry
from .errors import ConfigError
from .field import ArrayGeometry, LineSource, PlaneWave, Scene
from .sparse import SolverConfig

#: method name -> (reference method, solver overrides or None for direct)
METHODS = {
    "mdff": ("direct", None),
    "l1": ("sparse-l1", {"variant": "l1-sd"}),
    "irls-p1": ("sparse-irls", {"variant": "irls", "p": 1.0}),
    "irls-p05": ("sparse-irls", {"variant": "irls", "p": 0.5}),
}

_DEFAULT_SCENE = ({"type": "line", "distance": 3.0, "azimuth": 0.0, "amplitude": 1.0},)
# Two incoherent on-grid plane waves for the control experiments; indices are
# into the 128-angle candidate grid.
_DEFAULT_ANC_SCENE = (
    {"type": "plane", "azimuth_index": 7, "amplitude": 1.0},
    {"type": "plane", "azimuth_index": 55, "amplitude": 0.8},
)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    speed_of_sound: float = 343.0
    order: int = 20
    n_plane_waves: int = 128
    # frequency sweep (Hz)
    freq_start: float = 100.0
    freq_stop: float = 1400.0
    freq_step: float = 10.0
    # arrays
    ref_radius: float = 2.0
    ref_count: int = 41
    err_radius: float = 1.0
    err_count: int = 41
    spk_radius: float = 1.5
    spk_count: int = 41
    # methods and solver hyperparameters
    methods: tuple = ("mdff", "l1", "irls-p1", "irls-p05")
    lam1: Optional[float] = None  # None = 1e-2 * ||E^H s||_inf per solve
    mu_mic: Optional[float] = None  # None = 0.5 / ||E||_2^2 per dictionary
    lam2: float = 1e5
    max_iters: Optional[int] = None  # None = 500 (l1) / 50 (irls)
    tolerance: float = 1e-6
    eps_init: float = 1.0
    eps_floor: float = 1e-8
    # control loop
    iterations: int = 50
    mu_sp: float = 0.1
    excitation: str = "stochastic"
    eval_draws: int = 16
    interleave: bool = False
    # scenes (normalized source mappings)
    scene_sources: tuple = _DEFAULT_SCENE
    anc_scene_sources: tuple = _DEFAULT_ANC_SCENE
    # figure-specific knobs
    fig6_ref_counts: tuple = (21, 41, 81)
    fig1_freq_start: float = 2.0
    fig1_freq_stop: float = 1400.0
    fig1_freq_step: float = 2.0

    def frequencies(self) -> np.ndarray:
        return np.arange(self.freq_start, self.freq_stop + 0.5 * self.freq_step,
                         self.freq_step)

    def fig1_frequencies(self) -> np.ndarray:
        return np.arange(self.fig1_freq_start,
                         self.fig1_freq_stop + 0.5 * self.fig1_freq_step,
                         self.fig1_freq_step)

    def geometry(self, ref_count: Optional[int] = None) -> AncGeometry:
        return AncGeometry(
            reference=ArrayGeometry(self.ref_radius, ref_count or self.ref_count,
                                    "reference"),
            loudspeaker=ArrayGeometry(self.spk_radius, self.spk_count, "loudspeaker"),
            error=ArrayGeometry(self.err_radius, self.err_count, "error"),
        )

    def _sources(self, specs) -> tuple:
        out = []
        for spec in specs:
            amp = spec.get("amplitude", 1.0)
            if isinstance(amp, (list, tuple)):
                amp = complex(amp[0], amp[1])
            else:
                amp = complex(amp)
            if spec["type"] == "line":
                out.append(LineSource(spec["distance"], spec["azimuth"], amp))
            else:
                if "azimuth_index" in spec:
                    az = 2.0 * math.pi * spec["azimuth_index"] / self.n_plane_waves
                else:
                    az = spec["azimuth"]
                out.append(PlaneWave(az, amp))
        return tuple(out)

    def scene(self) -> Scene:
        """Scene for the reproduction experiments (mode maps, SDR)."""
        return Scene(self._sources(self.scene_sources), self.speed_of_sound)

    def anc_scene(self) -> Scene:
        """Scene for the control experiments (incoherent sources)."""
        return Scene(self._sources(self.anc_scene_sources), self.speed_of_sound)

    def solver_config(self, method: str) -> Optional[SolverConfig]:
        overrides = METHODS[method][1]
        if overrides is None:
            return None
        return SolverConfig(
            lam1=self.lam1, mu_mic=self.mu_mic, lam2=self.lam2,
            max_iters=self.max_iters, tolerance=self.tolerance,
            eps_init=self.eps_init, eps_floor=self.eps_floor,
            **overrides,
        )

    def to_metadata(self) -> dict[str, Any]:
        """Flat, ordered key/value view of every result-affecting tunable."""
        md: dict[str, Any] = {}
        for name in (
            "seed", "speed_of_sound", "order", "n_plane_waves",
            "freq_start", "freq_stop", "freq_step",
            "ref_radius", "ref_count", "err_radius", "err_count",
            "spk_radius", "spk_count",
            "lam1", "mu_mic", "lam2", "max_iters", "tolerance",
            "eps_init", "eps_floor",
            "iterations", "mu_sp", "excitation", "eval_draws", "interleave",
            "fig1_freq_start", "fig1_freq_stop", "fig1_freq_step",
        ):
            md[name] = getattr(self, name)
        md["methods"] = ",".join(self.methods)
        md["fig6_ref_counts"] = ",".join(str(q) for q in self.fig6_ref_counts)
        md["scene"] = _scene_str(self.scene_sources)
        md["anc_scene"] = _scene_str(self.anc_scene_sources)
        return md


def _scene_str(specs) -> str:
    parts = []
    for s in specs:
        if s["type"] == "line":
            parts.append(f"line(d={s['distance']},az={s['azimuth']},amp={s.get('amplitude', 1.0)})")
        elif "azimuth_index" in s:
            parts.append(f"plane(idx={s['azimuth_index']},amp={s.get('amplitude', 1.0)})")
        else:
            parts.append(f"plane(az={s['azimuth']},amp={s.get('amplitude', 1.0)})")
    return ";".join(parts)


def _check(errors: list, cond: bool, path: str, msg: str) -> None:
    if not cond:
        errors.append(f"{path}: {msg}")


def _normalize_sources(raw, path: str, errors: list) -> tuple:
    if not isinstance(raw, list) or not raw:
        errors.append(f"{path}: expected a non-empty list of sources")
        return ()
    out = []
    for i, src in enumerate(raw):
        p = f"{path}[{i}]"
        if not isinstance(src, dict) or "type" not in src:
            errors.append(f"{p}: each source needs a 'type' (line | plane)")
            continue
        kind = src["type"]
        if kind == "line":
            _check(errors, "distance" in src and src["distance"] > 0, p,
                   "line source needs distance > 0")
            _check(errors, "azimuth" in src, p, "line source needs azimuth")
        elif kind == "plane":
            _check(errors, "azimuth" in src or "azimuth_index" in src, p,
                   "plane wave needs azimuth or azimuth_index")
        else:
            errors.append(f"{p}: unknown source type {kind!r}")
            continue
        out.append(dict(src))
    return tuple(out)


def config_from_mapping(data: dict) -> RunConfig:
    """Build and validate a RunConfig from a nested mapping (parsed YAML)."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level of the config must be a mapping")

    errors: list[str] = []
    cfg = RunConfig()

    def section(name):
        sub = data.get(name, {})
        if sub is None:
            sub = {}
        if not isinstance(sub, dict):
            errors.append(f"{name}: expected a mapping")
            return {}
        return sub

    top = {k: v for k, v in data.items()
           if k not in ("frequencies", "arrays", "solver", "anc", "scene",
                        "anc_scene", "fig1", "fig6")}
    updates: dict[str, Any] = {}
    for key in ("seed", "speed_of_sound", "order", "n_plane_waves", "methods"):
        if key in top:
            updates[key] = top[key]
    unknown = set(top) - {"seed", "speed_of_sound", "order", "n_plane_waves", "methods"}
    for key in sorted(unknown):
        errors.append(f"{key}: unknown top-level key")

    freq = section("frequencies")
    for src_key, dst in (("start", "freq_start"), ("stop", "freq_stop"),
                         ("step", "freq_step")):
        if src_key in freq:
            updates[dst] = freq[src_key]

    arrays = section("arrays")
    for arr_name, prefix in (("reference", "ref"), ("error", "err"),
                             ("loudspeaker", "spk")):
        sub = arrays.get(arr_name, {}) or {}
        if "radius" in sub:
            updates[f"{prefix}_radius"] = sub["radius"]
        if "count" in sub:
            updates[f"{prefix}_count"] = sub["count"]

    solver = section("solver")
    for key in ("lam1", "mu_mic", "lam2", "max_iters", "tolerance",
                "eps_init", "eps_floor"):
        if key in solver:
            updates[key] = solver[key]
    if "p" in solver:
        errors.append("solver.p: fixed per method (irls-p1 / irls-p05); not configurable")

    anc_sec = section("anc")
    for key in ("iterations", "mu_sp", "excitation", "eval_draws", "interleave"):
        if key in anc_sec:
            updates[key] = anc_sec[key]

    if "scene" in data and data["scene"] is not None:
        updates["scene_sources"] = _normalize_sources(data["scene"], "scene", errors)
    if "anc_scene" in data and data["anc_scene"] is not None:
        updates["anc_scene_sources"] = _normalize_sources(
            data["anc_scene"], "anc_scene", errors)

    fig1 = section("fig1")
    for src_key, dst in (("start", "fig1_freq_start"), ("stop", "fig1_freq_stop"),
                         ("step", "fig1_freq_step")):
        if src_key in fig1:
            updates[dst] = fig1[src_key]
    fig6 = section("fig6")
    if "ref_counts" in fig6:
        updates["fig6_ref_counts"] = tuple(fig6["ref_counts"])

    if "methods" in updates:
        updates["methods"] = tuple(updates["methods"])

    try:
        cfg = replace(cfg, **updates)
    except TypeError as exc:
        raise ConfigError(str(exc))

    # semantic validation
    _check(errors, cfg.order >= 1, "order", "must be >= 1")
    _check(errors, cfg.n_plane_waves >= 1, "n_plane_waves", "must be >= 1")
    _check(errors, cfg.speed_of_sound > 0, "speed_of_sound", "must be positive")
    _check(errors, cfg.freq_start > 0 and cfg.freq_stop >= cfg.freq_start
           and cfg.freq_step > 0, "frequencies", "need 0 < start <= stop, step > 0")
    for prefix, label in (("ref", "reference"), ("err", "error"), ("spk", "loudspeaker")):
        _check(errors, getattr(cfg, f"{prefix}_count") >= 1,
               f"arrays.{label}.count", "must be >= 1")
        _check(errors, getattr(cfg, f"{prefix}_radius") > 0,
               f"arrays.{label}.radius", "must be positive")
    _check(errors, cfg.ref_radius > cfg.spk_radius > cfg.err_radius, "arrays",
           "radius ordering must be reference > loudspeaker > error")
    for m in cfg.methods:
        _check(errors, m in METHODS, "methods",
               f"unknown method {m!r} (known: {', '.join(METHODS)})")
    _check(errors, cfg.lam2 >= 0, "solver.lam2", "must be >= 0")
    _check(errors, cfg.lam1 is None or cfg.lam1 >= 0, "solver.lam1", "must be >= 0")
    _check(errors, cfg.mu_mic is None or cfg.mu_mic > 0, "solver.mu_mic",
           "must be positive")
    _check(errors, cfg.tolerance > 0, "solver.tolerance", "must be positive")
    _check(errors, cfg.iterations >= 0, "anc.iterations", "must be >= 0")
    _check(errors, cfg.mu_sp > 0, "anc.mu_sp", "must be positive")
    _check(errors, cfg.excitation in ("fixed", "stochastic"), "anc.excitation",
           "must be 'fixed' or 'stochastic'")
    _check(errors, cfg.eval_draws >= 1, "anc.eval_draws", "must be >= 1")
    _check(errors, all(q >= 1 for q in cfg.fig6_ref_counts), "fig6.ref_counts",
           "all counts must be >= 1")
    for i, src in enumerate(cfg.scene_sources):
        if src.get("type") == "line":
            _check(errors, src["distance"] > cfg.ref_radius, f"scene[{i}]",
                   "line sources must lie outside the reference array")

    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    return cfg


def validate_config(path: Optional[str]) -> RunConfig:
    """Load, default, and validate a YAML config file (None = all defaults)."""
    if path is None:
        return config_from_mapping({})
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path!r}: {exc}")
    return config_from_mapping(data)
