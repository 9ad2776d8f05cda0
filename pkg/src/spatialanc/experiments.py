"""Canned experiments and deterministic CSV emission.

Each experiment writes one CSV (plus a rendered PNG unless figures are
disabled) into the output directory. Every CSV starts with a ``# key = value``
metadata block echoing the full configuration, so a result file is always
reproducible from its own header. Numeric formatting is fixed (%.10g) and
rows are emitted in a deterministic (frequency, method, count) order, making
repeat runs byte-identical.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .anc import run_anc
from .config import METHODS, RunConfig
from .field import sample_array, true_mode_coefficients
from .metrics import EvalGrid, mode_error_map, sdr
from .modal import extract_modes
from .sparse import build_dictionary, solve

log = logging.getLogger("spatialanc")

EXPERIMENTS = ("fig1", "fig3", "fig4", "fig5", "fig6")

ERROR_FLOOR_DB = -120.0  # display floor for dB maps, recorded in metadata

_EXP_IDS = {name: i for i, name in enumerate(EXPERIMENTS, start=1)}
_METHOD_IDS = {name: i for i, name in enumerate(METHODS, start=1)}


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "auto"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return str(value)


def _write_csv(path: Path, metadata: dict, header: list[str],
               rows: Iterable[tuple]) -> None:
    with open(path, "w", newline="\n") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key} = {_fmt(value)}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _metadata(cfg: RunConfig, experiment: str) -> dict:
    md = {"experiment": experiment, "code_version": __version__}
    md.update(cfg.to_metadata())
    md["error_floor_db"] = ERROR_FLOOR_DB
    return md


def _run_seed(cfg: RunConfig, experiment: str, f: float, method: str,
              ref_count: int) -> list[int]:
    """Deterministic, order-independent RNG seed for one (bin, method) run."""
    return [cfg.seed, _EXP_IDS[experiment], int(round(f * 1000.0)),
            _METHOD_IDS[method], ref_count]


def _floor_db(values: np.ndarray) -> np.ndarray:
    return np.maximum(values, ERROR_FLOOR_DB)


def _mode_header(order: int) -> list[str]:
    return [f"m_{m:+d}" for m in range(-order, order + 1)]


# --------------------------------------------------------------------------
# individual experiments

def _extracted_mode_grid(cfg: RunConfig, freqs: np.ndarray):
    """Direct-extraction magnitude and error grids over a frequency sweep."""
    scene = cfg.scene()
    ref = cfg.geometry().reference
    mags = np.empty((len(freqs), 2 * cfg.order + 1))
    true_grid = np.empty((len(freqs), 2 * cfg.order + 1), dtype=complex)
    est_grid = np.empty_like(true_grid)
    for i, f in enumerate(freqs):
        k = scene.wavenumber(f)
        est = extract_modes(sample_array(scene, f, ref), ref, k, cfg.order)
        true = true_mode_coefficients(scene, f, cfg.order)
        coeffs = est.coeffs.copy()
        coeffs[est.unrecoverable] = 0.0
        with np.errstate(divide="ignore"):
            mags[i] = 20.0 * np.log10(np.abs(coeffs))
        true_grid[i] = true.coeffs
        est_grid[i] = coeffs
    return mags, true_grid, est_grid


def run_fig1(cfg: RunConfig, out_dir: Path, render: bool) -> list[Path]:
    """Extracted mode magnitudes of the reproduction scene vs frequency.

    The aliasing onset of the reference array is visible as high-|m| energy
    appearing above its spatial Nyquist frequency.
    """
    freqs = cfg.fig1_frequencies()
    mags, _, _ = _extracted_mode_grid(cfg, freqs)
    mags = _floor_db(mags)
    csv_path = out_dir / "fig1_mode_magnitudes.csv"
    _write_csv(
        csv_path, _metadata(cfg, "fig1"),
        ["frequency_hz"] + _mode_header(cfg.order),
        ((f, *row) for f, row in zip(freqs, mags)),
    )
    written = [csv_path]
    if render:
        from .plotting import render_mode_map
        png = out_dir / "fig1_mode_magnitudes.png"
        render_mode_map(freqs, cfg.order, mags, png,
                        title="Extracted mode magnitude (dB)")
        written.append(png)
    return written


def run_fig3(cfg: RunConfig, out_dir: Path, render: bool) -> list[Path]:
    """Reference-field reproduction SDR per method over the sweep."""
    freqs = cfg.frequencies()
    scene = cfg.scene()
    geo = cfg.geometry()
    grid = EvalGrid.polar(radius=cfg.err_radius)
    rows = []
    curves: dict[str, list[float]] = {m: [] for m in cfg.methods}
    warm: dict[str, Optional[np.ndarray]] = {m: None for m in cfg.methods}
    for f in freqs:
        k = scene.wavenumber(f)
        samples = sample_array(scene, f, geo.reference)
        true = true_mode_coefficients(scene, f, cfg.order)
        A = grid.synthesis(k, cfg.order)
        true_field = A @ true.coeffs
        dictionary = build_dictionary(geo.reference, k, cfg.n_plane_waves)
        for method in cfg.methods:
            if METHODS[method][0] == "direct":
                est = extract_modes(samples, geo.reference, k, cfg.order)
                coeffs = est.coeffs.copy()
                coeffs[est.unrecoverable] = 0.0
            else:
                result = solve(samples, dictionary, cfg.solver_config(method),
                               warm[method])
                warm[method] = result.gamma
                from .modal import modes_from_plane_waves
                coeffs = modes_from_plane_waves(
                    result.gamma, dictionary.angles, cfg.order, k).coeffs
            value = sdr(true_field, A @ coeffs)
            rows.append((f, method, value))
            curves[method].append(value)
        log.debug("fig3 f=%g done", f)
    csv_path = out_dir / "fig3_sdr.csv"
    _write_csv(csv_path, _metadata(cfg, "fig3"),
               ["frequency_hz", "method", "sdr_db"], rows)
    written = [csv_path]
    if render:
        from .plotting import render_curves
        png = out_dir / "fig3_sdr.png"
        render_curves(freqs, {m: np.array(v) for m, v in curves.items()}, png,
                      ylabel="SDR (dB)", title="Reproduction SDR")
        written.append(png)
    return written


def run_fig4(cfg: RunConfig, out_dir: Path, render: bool) -> list[Path]:
    """Mode-coefficient error maps (direct extraction vs sparse IRLS p=0.5)."""
    freqs = cfg.frequencies()
    scene = cfg.scene()
    geo = cfg.geometry()
    methods = [m for m in ("mdff", "irls-p05") if m in cfg.methods] or ["mdff"]
    maps: dict[str, np.ndarray] = {}
    true_grid = np.empty((len(freqs), 2 * cfg.order + 1), dtype=complex)
    est_grids = {m: np.empty_like(true_grid) for m in methods}
    warm: dict[str, Optional[np.ndarray]] = {m: None for m in methods}
    for i, f in enumerate(freqs):
        k = scene.wavenumber(f)
        samples = sample_array(scene, f, geo.reference)
        true_grid[i] = true_mode_coefficients(scene, f, cfg.order).coeffs
        dictionary = build_dictionary(geo.reference, k, cfg.n_plane_waves)
        for method in methods:
            if METHODS[method][0] == "direct":
                est = extract_modes(samples, geo.reference, k, cfg.order)
                coeffs = est.coeffs.copy()
                coeffs[est.unrecoverable] = 0.0
            else:
                result = solve(samples, dictionary, cfg.solver_config(method),
                               warm[method])
                warm[method] = result.gamma
                from .modal import modes_from_plane_waves
                coeffs = modes_from_plane_waves(
                    result.gamma, dictionary.angles, cfg.order, k).coeffs
            est_grids[method][i] = coeffs
    rows = []
    for method in methods:
        maps[method] = _floor_db(mode_error_map(true_grid, est_grids[method]))
        for f, row in zip(freqs, maps[method]):
            rows.append((f, method, *row))
    csv_path = out_dir / "fig4_mode_errors.csv"
    _write_csv(csv_path, _metadata(cfg, "fig4"),
               ["frequency_hz", "method"] + _mode_header(cfg.order), rows)
    written = [csv_path]
    if render:
        from .plotting import render_mode_map
        for method in methods:
            png = out_dir / f"fig4_mode_errors_{method}.png"
            render_mode_map(freqs, cfg.order, maps[method], png,
                            title=f"Mode error (dB), {method}")
            written.append(png)
    return written


def _anc_levels(cfg: RunConfig, experiment: str, freqs: np.ndarray,
                methods: list[str], ref_count: int) -> dict[str, np.ndarray]:
    scene = cfg.anc_scene()
    geo = cfg.geometry(ref_count=ref_count)
    grid = EvalGrid.polar(radius=cfg.err_radius)
    out = {m: np.empty(len(freqs)) for m in methods}
    for i, f in enumerate(freqs):
        for method in methods:
            trace = run_anc(
                scene, geo, METHODS[method][0], f,
                iterations=cfg.iterations, mu_sp=cfg.mu_sp, order=cfg.order,
                n_waves=cfg.n_plane_waves, solver_cfg=cfg.solver_config(method),
                excitation=cfg.excitation,
                seed=_run_seed(cfg, experiment, f, method, ref_count),
                eval_grid=grid, eval_draws=cfg.eval_draws,
                interleave=cfg.interleave,
            )
            out[method][i] = trace.final_noise_level_db
        log.debug("%s f=%g Q=%d done", experiment, f, ref_count)
    return out


def run_fig5(cfg: RunConfig, out_dir: Path, render: bool) -> list[Path]:
    """Average noise level after N control iterations, per method."""
    freqs = cfg.frequencies()
    methods = list(cfg.methods)
    levels = _anc_levels(cfg, "fig5", freqs, methods, cfg.ref_count)
    rows = [(f, m, levels[m][i]) for i, f in enumerate(freqs) for m in methods]
    csv_path = out_dir / "fig5_noise_level.csv"
    _write_csv(csv_path, _metadata(cfg, "fig5"),
               ["frequency_hz", "method", "noise_level_db"], rows)
    written = [csv_path]
    if render:
        from .plotting import render_curves
        png = out_dir / "fig5_noise_level.png"
        render_curves(freqs, levels, png, ylabel="Noise level (dB)",
                      title=f"Noise level after {cfg.iterations} iterations")
        written.append(png)
    return written


def run_fig6(cfg: RunConfig, out_dir: Path, render: bool) -> list[Path]:
    """Noise level vs number of reference microphones (direct vs IRLS p=0.5)."""
    freqs = cfg.frequencies()
    methods = [m for m in ("mdff", "irls-p05") if m in cfg.methods] or ["mdff"]
    rows = []
    curves: dict[str, np.ndarray] = {}
    for ref_count in cfg.fig6_ref_counts:
        levels = _anc_levels(cfg, "fig6", freqs, methods, ref_count)
        for method in methods:
            curves[f"{method} Q={ref_count}"] = levels[method]
        for i, f in enumerate(freqs):
            for method in methods:
                rows.append((f, ref_count, method, levels[method][i]))
    csv_path = out_dir / "fig6_noise_level_vs_mics.csv"
    _write_csv(csv_path, _metadata(cfg, "fig6"),
               ["frequency_hz", "ref_mics", "method", "noise_level_db"], rows)
    written = [csv_path]
    if render:
        from .plotting import render_curves
        png = out_dir / "fig6_noise_level_vs_mics.png"
        render_curves(freqs, curves, png, ylabel="Noise level (dB)",
                      title="Noise level vs reference microphone count")
        written.append(png)
    return written


_RUNNERS = {
    "fig1": run_fig1,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "fig6": run_fig6,
}


def run_experiment(name: str, cfg: RunConfig, out_dir,
                   render_figures: bool = True) -> list[Path]:
    """Run one canned experiment; returns the list of files written."""
    if name not in _RUNNERS:
        raise ValueError(
            f"unknown experiment {name!r} (known: {', '.join(EXPERIMENTS)})")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s -> %s", name, out)
    written = _RUNNERS[name](cfg, out, render_figures)
    for path in written:
        log.info("wrote %s", path)
    return written
