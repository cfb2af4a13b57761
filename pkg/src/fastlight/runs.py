"""Run orchestration: analytic, propagate, sf, sweep and canned figure recipes."""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np

from .config import SimulationConfig, config_for_figure, serialize_config
from .diagnostics import area_profile, peak_advance, sf_delay_time, tipping_angle
from .errors import ThresholdNotReached, ValidationError
from .output import RunManifest, write_series
from .physics import (
    C_LIGHT,
    MediumSpec,
    PhysicalParams,
    analytic_amplitudes,
    analytic_field,
    atom_count,
    sech_envelope,
    sf_delay_mean,
)
from .solver import build_grid, inverted_state, lab_frame_snapshot, propagate
from .superfluorescence import (
    EnsembleSettings,
    compare_to_polder,
    derive_run_seed,
    run_ensemble,
    sample_initial_state,
)

__all__ = ["run_command"]

SNAPSHOT_POINTS = 500
SNAPSHOT_MARGIN_CTAU = 6.0  # vacuum shown on each side of the cell, in c*tau


def run_command(cfg: SimulationConfig, out_dir, jobs: int = 1) -> RunManifest:
    """Execute one run mode and write its CSV outputs plus manifest.json."""
    mode = cfg.mode()
    if mode == "fig":
        base = config_for_figure(cfg)
        manifest = run_command(base, out_dir, jobs)
        manifest.mode = f"fig{cfg.fig['number']}"
        manifest.write()
        return manifest

    started = time.monotonic()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(mode=mode, config_text=serialize_config(cfg), out_dir=str(out_dir))

    if mode == "analytic":
        _run_analytic(cfg, out_dir, manifest)
    elif mode == "propagate":
        _run_propagate(cfg, out_dir, manifest)
    elif mode == "sf":
        _run_sf(cfg, out_dir, manifest)
    elif mode == "sweep":
        _run_sweep(cfg, out_dir, manifest, jobs)
    else:
        raise ValidationError(f"unknown mode {mode!r}")

    manifest.wall_clock_s = time.monotonic() - started
    manifest.write()
    return manifest


def _snapshot_x(medium: MediumSpec, tau: float, span: float | None = None) -> np.ndarray:
    """Sample positions: the cell plus vacuum margins sized to what is visible."""
    margin = SNAPSHOT_MARGIN_CTAU * C_LIGHT * tau
    if span is not None:
        # cap by the light-travel distance the simulated window can populate
        margin = min(margin, max(C_LIGHT * tau, 0.4 * C_LIGHT * span))
    return np.linspace(medium.x0 - margin, medium.x1 + margin, SNAPSHOT_POINTS)


def _field_columns():
    return ["x_cm", "x_ctau", "re_omega", "im_omega", "re_omega_norm", "im_omega_norm"]


def _write_snapshot(path, x, omega, params: PhysicalParams) -> None:
    ctau = C_LIGHT * params.tau
    scale = params.tau / 2.0  # omega in units of 2/tau
    rows = [
        (x[i], x[i] / ctau, omega[i].real, omega[i].imag,
         omega[i].real * scale, omega[i].imag * scale)
        for i in range(x.size)
    ]
    write_series(path, _field_columns(), rows)


def _emit_snapshot_set(out_dir, manifest, times, sampler, params, label="snapshot"):
    ctau_t = params.tau
    index_rows = []
    for k, t_lab in enumerate(times):
        x, omega = sampler(t_lab)
        path = out_dir / f"{label}_{k}.csv"
        _write_snapshot(path, x, omega, params)
        manifest.add_output(path)
        index_rows.append((k, t_lab, t_lab / ctau_t, path.name))
    path = out_dir / f"{label}s_index.csv"
    write_series(path, ["index", "t_lab_ns", "t_lab_tau", "file"], index_rows)
    manifest.add_output(path)


def _write_series_csv(path, t_nodes, series, params, manifest):
    scale = params.tau / 2.0
    rows = [
        (t_nodes[i], t_nodes[i] / params.tau, series[i].real, series[i].imag,
         abs(series[i]), series[i].real * scale, series[i].imag * scale)
        for i in range(t_nodes.size)
    ]
    write_series(
        path,
        ["t_ns", "t_tau", "re_omega", "im_omega", "abs_omega", "re_omega_norm", "im_omega_norm"],
        rows,
    )
    manifest.add_output(path)


def _write_advance(path, meas, manifest):
    write_series(
        path,
        ["peak_time_out_ns", "peak_time_ref_ns", "advance_ns", "advance_tau"],
        [(meas.peak_time_out, meas.peak_time_reference, meas.advance, meas.advance_in_tau)],
    )
    manifest.add_output(path)


def _emit_plot_script(out_dir, manifest, label, files):
    """Plain-text gnuplot helper; convenience only, nothing depends on it."""
    lines = [f"# gnuplot script for the {label} outputs", "set datafile separator ','", "set key autotitle columnhead"]
    for f in files:
        lines.append(f"plot '{f}' using 2:5 with lines")
        lines.append("pause -1")
    path = Path(out_dir) / f"plot_{label}.gp"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest.add_output(path)


def _default_snapshot_times(cfg, pulse_peak, tau):
    if cfg.run["snapshot_times"] is not None:
        return list(cfg.run["snapshot_times"])
    return [pulse_peak + tau * f for f in (-4.0, -0.3, 0.0, 4.0)]


def _run_analytic(cfg: SimulationConfig, out_dir: Path, manifest: RunManifest) -> None:
    params = cfg.physical_params()
    medium = cfg.medium_spec()
    pulse = cfg.pulse_spec()
    tau = params.tau
    peak = pulse.peak_time  # the closed form itself peaks at x = 0 when t = 0
    times = _default_snapshot_times(cfg, peak, tau)
    x_snap = _snapshot_x(medium, tau)

    def sampler(t_lab):
        return x_snap, analytic_field(x_snap, t_lab - peak, medium, params) + 0j

    _emit_snapshot_set(out_dir, manifest, times, sampler, params)

    # entrance/exit time series and the analytic peak advance
    t_nodes = np.arange(peak - 15 * tau, peak + 15 * tau + 1e-12, tau / 80.0)
    inp = analytic_field(medium.x0, t_nodes - peak + medium.x0 / C_LIGHT, medium, params) + 0j
    outp = analytic_field(medium.x1, t_nodes - peak + medium.x1 / C_LIGHT, medium, params) + 0j
    reference = sech_envelope(t_nodes, pulse) + 0j
    _write_series_csv(out_dir / "input.csv", t_nodes, inp, params, manifest)
    _write_series_csv(out_dir / "output.csv", t_nodes, outp, params, manifest)
    meas = peak_advance(outp, reference, t_nodes, tau)
    _write_advance(out_dir / "advance.csv", meas, manifest)

    # medium amplitudes at each snapshot time
    x_med = np.linspace(medium.x0, medium.x1, 201)
    for k, t_lab in enumerate(times):
        c1, c2 = analytic_amplitudes(x_med, t_lab - peak, medium, params)
        rows = [
            (x_med[i], x_med[i] / (C_LIGHT * tau), c1[i].real, c1[i].imag, c2[i].real, c2[i].imag)
            for i in range(x_med.size)
        ]
        path = out_dir / f"amplitudes_{k}.csv"
        write_series(path, ["x_cm", "x_ctau", "re_c1", "im_c1", "re_c2", "im_c2"], rows)
        manifest.add_output(path)

    manifest.grid_sizes["analytic"] = {"n_snapshot_x": SNAPSHOT_POINTS, "n_t": int(t_nodes.size)}
    manifest.extra["advance_tau"] = meas.advance_in_tau
    _emit_plot_script(out_dir, manifest, "analytic", [f"snapshot_{k}.csv" for k in range(len(times))])


def _build_run_grid(cfg, params, medium, pulse, window):
    g = cfg.grid
    t_min = g["t_min"] if g["t_min"] is not None else window[0]
    t_max = g["t_max"] if g["t_max"] is not None else window[1]
    return build_grid(
        medium,
        params,
        (t_min, t_max),
        dx=g["dx"],
        dt=g["dt"],
        n_detuning=g["detuning_nodes"],
        placement=g["detuning_placement"],
        half_range_sigmas=g["detuning_half_range_sigmas"],
        pulse=pulse,
        allow_unsafe=g["allow_unsafe"],
    )


def _probe_indices(cfg, grid):
    idx = {grid.n_x - 1}
    if cfg.run["probes"] is not None:
        for x in cfg.run["probes"]:
            idx.add(int(np.argmin(np.abs(grid.x_nodes - x))))
    return tuple(sorted(idx))


def _write_tipping(out_dir, manifest, history, grid, params):
    tip = tipping_angle(history.c1, history.c2)
    mean_tip = tip @ grid.detuning.weights
    max_tip = tip.max(axis=1)
    rows = [
        (grid.t_nodes[i], grid.t_nodes[i] / params.tau, mean_tip[i], max_tip[i])
        for i in range(grid.n_t)
    ]
    path = out_dir / "tipping.csv"
    write_series(path, ["t_ns", "t_tau", "mean_tipping_rad", "max_tipping_rad"], rows)
    manifest.add_output(path)
    return mean_tip


def _run_propagate(cfg: SimulationConfig, out_dir: Path, manifest: RunManifest) -> None:
    params = cfg.physical_params()
    medium = cfg.medium_spec()
    pulse = cfg.pulse_spec()
    tau = params.tau
    if pulse.cutoff_half_width is not None:
        window = (pulse.peak_time - (pulse.cutoff_half_width + 2.0) * tau,
                  pulse.peak_time + 25.0 * tau)
    else:
        window = (pulse.peak_time - 30.0 * tau, pulse.peak_time + 12.0 * tau)
    grid = _build_run_grid(cfg, params, medium, pulse, window)
    boundary = sech_envelope(grid.t_nodes, pulse).astype(complex)

    if cfg.run["sf_seed"]:
        n_atoms = atom_count(params, medium.length)
        state = sample_initial_state(
            cfg.run["seed"], grid.n_x, n_atoms, cfg.sf["phase_mode"]
        ).to_atomic_state()
    else:
        state = inverted_state(grid.n_x)

    result = propagate(grid, params, boundary, state, probes=_probe_indices(cfg, grid))
    record = result.record

    _write_series_csv(out_dir / "input.csv", grid.t_nodes, boundary, params, manifest)
    _write_series_csv(out_dir / "output.csv", grid.t_nodes, record.output_series, params, manifest)

    meas = peak_advance(record.output_series, boundary, grid.t_nodes, tau)
    _write_advance(out_dir / "advance.csv", meas, manifest)

    prof = area_profile(record, params)
    rows = [
        (prof.x[i], prof.x[i] / (C_LIGHT * tau), prof.x[i] * prof.alpha_used,
         prof.theta[i], prof.theta[i] / math.pi, prof.theta_imag[i],
         prof.dtheta_dx[i], prof.theorem_rhs[i], prof.residual[i])
        for i in range(prof.x.size)
    ]
    path = out_dir / "area.csv"
    write_series(
        path,
        ["x_cm", "x_ctau", "x_gain_lengths", "theta_rad", "theta_pi", "theta_imag_rad",
         "dtheta_dx", "gain_eq_rhs", "residual"],
        rows,
    )
    manifest.add_output(path)

    times = _default_snapshot_times(cfg, pulse.peak_time, tau)
    x_snap = _snapshot_x(medium, tau)

    def sampler(t_lab):
        return x_snap, lab_frame_snapshot(
            record, t_lab, medium, x_snap, boundary_fn=lambda tr: sech_envelope(tr, pulse)
        )

    _emit_snapshot_set(out_dir, manifest, times, sampler, params)
    _write_tipping(out_dir, manifest, result.probes[grid.n_x - 1], grid, params)

    manifest.grid_sizes["propagate"] = {
        "n_x": grid.n_x, "n_t": grid.n_t, "n_detuning": grid.detuning.n_nodes,
    }
    manifest.extra.update(
        advance_tau=meas.advance_in_tau,
        max_norm_deviation=result.max_norm_deviation,
        area_entry_rad=float(prof.theta[0]),
        area_exit_rad=float(prof.theta[-1]),
        seeded=bool(cfg.run["sf_seed"]),
    )
    _emit_plot_script(out_dir, manifest, "propagate", ["input.csv", "output.csv"])


def _run_sf(cfg: SimulationConfig, out_dir: Path, manifest: RunManifest) -> None:
    params = cfg.physical_params()
    medium = cfg.medium_spec()
    length = medium.length
    predicted = sf_delay_mean(length, params)
    pad = cfg.sf["window_pad"]
    t_end = (cfg.sf["window_factor"] * predicted + pad) if math.isfinite(predicted) else (
        pad + 100.0 * params.tau
    )
    grid = _build_run_grid(cfg, params, medium, None, (0.0, t_end))
    seed = cfg.run["seed"]
    state = sample_initial_state(seed, grid.n_x, atom_count(params, length), cfg.sf["phase_mode"])
    boundary = np.zeros(grid.n_t, dtype=complex)
    result = propagate(grid, params, boundary, state.to_atomic_state(),
                       probes=_probe_indices(cfg, grid))
    record = result.record

    _write_series_csv(out_dir / "output.csv", grid.t_nodes, record.output_series, params, manifest)
    history = result.probes[grid.n_x - 1]
    _write_tipping(out_dir, manifest, history, grid, params)

    try:
        delay = sf_delay_time(history, grid.detuning.weights, grid.t_nodes, cfg.sf["threshold"])
        triggered = True
    except ThresholdNotReached:
        delay, triggered = math.nan, False
    rows = [(length, length / (C_LIGHT * params.tau), seed, delay,
             delay / params.tau, predicted, predicted / params.tau, triggered)]
    path = out_dir / "delay.csv"
    write_series(
        path,
        ["length_cm", "length_ctau", "seed", "delay_ns", "delay_tau",
         "predicted_ns", "predicted_tau", "triggered"],
        rows,
    )
    manifest.add_output(path)

    if cfg.run["snapshot_times"] is not None:
        times = list(cfg.run["snapshot_times"])
    else:
        lo = grid.t_nodes[0] + medium.x1 / C_LIGHT
        hi = grid.t_nodes[-1] + medium.x0 / C_LIGHT
        times = [lo + f * (hi - lo) for f in (0.4, 0.7, 0.85, 0.98)]
    span = grid.t_nodes[-1] - grid.t_nodes[0]
    x_snap = _snapshot_x(medium, params.tau, span)

    def sampler(t_lab):
        return x_snap, lab_frame_snapshot(record, t_lab, medium, x_snap,
                                          boundary_fn=lambda tr: np.zeros_like(tr, dtype=complex))

    _emit_snapshot_set(out_dir, manifest, times, sampler, params)

    manifest.grid_sizes["sf"] = {
        "n_x": grid.n_x, "n_t": grid.n_t, "n_detuning": grid.detuning.n_nodes,
    }
    manifest.extra.update(
        delay_ns=delay, triggered=triggered,
        predicted_delay_ns=predicted,
        max_norm_deviation=result.max_norm_deviation,
    )
    _emit_plot_script(out_dir, manifest, "sf", ["output.csv", "tipping.csv"])


def _run_sweep(cfg: SimulationConfig, out_dir: Path, manifest: RunManifest, jobs: int) -> None:
    params = cfg.physical_params()
    lengths = cfg.sweep_lengths()
    settings = EnsembleSettings(
        n_detuning=cfg.grid["detuning_nodes"],
        window_factor=cfg.sf["window_factor"],
        window_pad=cfg.sf["window_pad"],
        threshold=cfg.sf["threshold"],
        phase_mode=cfg.sf["phase_mode"],
        dx=cfg.grid["dx"],
        dt=cfg.grid["dt"],
    )
    stats = run_ensemble(params, lengths, cfg.sf["n_runs"], cfg.run["seed"], settings, jobs=jobs)

    delay_rows = []
    for s in stats:
        for k, d in enumerate(s.delays):
            delay_rows.append(
                (s.length, s.length / (C_LIGHT * params.tau), k,
                 derive_run_seed(cfg.run["seed"], s.length, k),
                 math.nan if d is None else d,
                 math.nan if d is None else d / params.tau,
                 d is not None)
            )
    path = out_dir / "delays.csv"
    write_series(
        path,
        ["length_cm", "length_ctau", "run_index", "seed", "delay_ns", "delay_tau", "triggered"],
        delay_rows,
    )
    manifest.add_output(path)

    rows, crossover = compare_to_polder(stats, params)
    table = [
        (r.length, r.length_ctau, r.n_triggered, r.n_runs, r.mean_delay, r.std_delay,
         r.polder, r.advance, r.mean_delay / params.tau, r.polder / params.tau,
         r.advance / params.tau, r.past_crossover, crossover)
        for r in rows
    ]
    path = out_dir / "polder.csv"
    write_series(
        path,
        ["length_cm", "length_ctau", "n_triggered", "n_runs", "mean_delay_ns", "std_delay_ns",
         "predicted_ns", "advance_ns", "mean_delay_tau", "predicted_tau", "advance_tau",
         "past_crossover", "predicted_crossover_cm"],
        table,
    )
    manifest.add_output(path)

    manifest.grid_sizes["sweep"] = {"n_lengths": len(lengths), "n_runs": cfg.sf["n_runs"]}
    manifest.extra.update(predicted_crossover_cm=crossover,
                          predicted_crossover_ctau=crossover / (C_LIGHT * params.tau))
    _emit_plot_script(out_dir, manifest, "sweep", ["polder.csv"])
