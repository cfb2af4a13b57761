"""Acceptance suite: one test per numbered criterion, each printing a
PASS/FAIL line with the measured values (run with -s or check captured
output).  The heavy propagation runs are shared session fixtures; the
full suite is CPU-bound and takes tens of minutes single-threaded.
"""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from fastlight import (
    C_LIGHT,
    MediumSpec,
    PhysicalParams,
    PulseSpec,
    advance_time,
    area_profile,
    atom_count,
    beers_alpha,
    build_grid,
    group_velocity,
    inverted_state,
    peak_advance,
    propagate,
    run_ensemble,
    sample_initial_state,
    sech_envelope,
    sf_advance_crossover,
    sf_delay_mean,
    sf_delay_time,
)
from fastlight.config import apply_overrides, parse_config
from fastlight.output import sha256_of
from fastlight.physics import inverse_velocity_offset
from fastlight.runs import run_command
from fastlight.superfluorescence import EnsembleSettings

TAU = 0.1  # ns
CTAU = C_LIGHT * TAU


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


@pytest.fixture(scope="session")
def params() -> PhysicalParams:
    return PhysicalParams(g=266.0, t2star=0.733, tau=TAU, density=8e10, wavelength=7.8e-5)


def matched_sech_errors(params, refine: int):
    """Max relative envelope error of the marched field against the matched
    analytic sech through a 6 cm cell, at the default grid over refine."""
    medium = MediumSpec(0.0, 6.0)
    pulse = PulseSpec(peak_time=0.0, tau=TAU)
    grid = build_grid(
        medium,
        params,
        (-30 * TAU, 12 * TAU),
        pulse=pulse,
        dx=1.0 / (10.0 * beers_alpha(params)) / refine,
        dt=TAU / (160.0 * refine),
    )
    boundary = sech_envelope(grid.t_nodes, pulse).astype(complex)
    result = propagate(grid, params, boundary, inverted_state(grid.n_x))
    q = inverse_velocity_offset(params, "quadrature", grid.detuning)
    X, T = np.meshgrid(grid.x_nodes, grid.t_nodes, indexing="ij")
    exact = (2.0 / TAU) / np.cosh((T + q * X) / TAU)
    err = float(np.max(np.abs(result.record.omega - exact)) / exact.max())
    return err, result, grid


@pytest.fixture(scope="session")
def matched_run(params):
    return matched_sech_errors(params, 1)


@pytest.fixture(scope="session")
def matched_run_refined(params):
    return matched_sech_errors(params, 2)


def cut_pulse_run(params, seed=None, t_max_tau=90.0):
    """The hard-cut 2 pi pulse through a 2 c tau cell, optionally seeded."""
    medium = MediumSpec(0.0, 2 * CTAU)
    pulse = PulseSpec(peak_time=0.0, tau=TAU, cutoff_half_width=10.0)
    grid = build_grid(medium, params, (-12 * TAU, t_max_tau * TAU), pulse=pulse)
    boundary = sech_envelope(grid.t_nodes, pulse).astype(complex)
    if seed is None:
        state = inverted_state(grid.n_x)
    else:
        state = sample_initial_state(
            seed, grid.n_x, atom_count(params, medium.length)
        ).to_atomic_state()
    result = propagate(grid, params, boundary, inverted_state(grid.n_x) if seed is None else state)
    return grid, boundary, result


@pytest.fixture(scope="session")
def cut_run(params):
    return cut_pulse_run(params)


@pytest.fixture(scope="session")
def seeded_cut_run(params):
    return cut_pulse_run(params, seed=90210)


SWEEP_LENGTHS_CTAU = (1.0, 1.5, 2.0, 3.0, 5.0)


@pytest.fixture(scope="session")
def sweep_stats(params):
    lengths = [k * CTAU for k in SWEEP_LENGTHS_CTAU]
    settings = EnsembleSettings(window_factor=2.5, window_pad=0.5)
    return run_ensemble(params, lengths, 20, seed0=6021023, settings=settings)


@pytest.fixture(scope="session")
def pure_sf_run(params):
    medium = MediumSpec(0.0, 2 * CTAU)
    predicted = sf_delay_mean(medium.length, params)
    grid = build_grid(medium, params, (0.0, 3.0 * predicted + 1.0))
    state = sample_initial_state(
        515253, grid.n_x, atom_count(params, medium.length)
    ).to_atomic_state()
    result = propagate(
        grid, params, np.zeros(grid.n_t, dtype=complex), state, store_field=False
    )
    delay = sf_delay_time(
        result.probes[grid.n_x - 1], grid.detuning.weights, grid.t_nodes
    )
    return delay, result, grid


def test_criterion_1_group_velocity(params):
    vq = group_velocity(params, "quadrature")
    vl = group_velocity(params, "limit")
    ok = abs(vq - (-3.27)) <= 0.02 and abs(vl - (-100.0 / 33.0)) <= 1e-6
    report(
        "criterion 1 (group velocity)",
        ok,
        f"quadrature v_g/c = {vq:.4f} (want -3.27 +/- 0.02), "
        f"limit = {vl:.7f} (want -100/33 +/- 1e-6)",
    )
    assert abs(vq - (-3.27)) <= 0.02
    assert abs(vl - (-100.0 / 33.0)) <= 1e-6


def test_criterion_2_beer_coefficient(params):
    alpha = beers_alpha(params)
    ok = abs(alpha - 8.15) <= 0.01
    report("criterion 2 (Beer coefficient)", ok, f"alpha = {alpha:.4f} /cm (want 8.15 +/- 0.01)")
    assert ok


def test_criterion_3_analytic_numeric_agreement(matched_run, matched_run_refined):
    err, result, grid = matched_run
    err_fine, result_fine, _ = matched_run_refined
    ratio = err / err_fine
    ok = err < 1e-3 and ratio >= 3.8
    report(
        "criterion 3 (analytic-numeric agreement)",
        ok,
        f"max rel err = {err:.3e} (want < 1e-3) on {grid.n_x}x{grid.n_t} nodes; "
        f"halving dx,dt gives {err_fine:.3e}, ratio {ratio:.2f} (want >= 3.8)",
    )
    assert err < 1e-3
    assert ratio >= 3.8


def test_criterion_4_advance_with_cutoffs(cut_run, params):
    grid, boundary, result = cut_run
    meas = peak_advance(result.record.output_series, boundary, grid.t_nodes, TAU)
    out = result.record.output_series
    peak_idx = int(np.argmax(np.abs(out)))
    ring_idx = int(np.argmin(out.real))
    ringing_after = grid.t_nodes[ring_idx] > grid.t_nodes[peak_idx]
    ringing_present = out.real.min() < -0.02 * np.abs(out).max()
    ok = abs(meas.advance_in_tau - 2.5) <= 0.2 and ringing_after and ringing_present
    report(
        "criterion 4 (advance with cutoffs)",
        ok,
        f"peak advance = {meas.advance_in_tau:.3f} tau (want 2.5 +/- 0.2); "
        f"ringing min Re = {out.real.min():.2f} at t = {grid.t_nodes[ring_idx]/TAU:.1f} tau, "
        f"after the peak at {grid.t_nodes[peak_idx]/TAU:.1f} tau: {ringing_after}",
    )
    assert abs(meas.advance_in_tau - 2.5) <= 0.2
    assert ringing_present and ringing_after


def test_criterion_5_area_dynamics(cut_run, params):
    grid, _, result = cut_run
    prof = area_profile(result.record, params)
    entry_ok = abs(prof.theta[0] - (2 * math.pi - 8 * math.exp(-10))) < 1e-4
    gain_lengths = prof.x * prof.alpha_used
    in_band = np.abs(prof.theta / math.pi - 1.0) <= 0.5
    first_in = float(gain_lengths[np.argmax(in_band)]) if in_band.any() else math.inf
    stays = bool(in_band[np.argmax(in_band):].all()) if in_band.any() else False
    ok = entry_ok and first_in <= 15.0 and stays
    report(
        "criterion 5 (area dynamics)",
        ok,
        f"theta(x0) = 2pi - {2*math.pi - prof.theta[0]:.2e} (want 2pi - 3.6e-4); "
        f"enters pi +/- 0.5pi at {first_in:.1f} gain lengths (want <= 15); "
        f"stays in band after entering: {stays}",
    )
    assert entry_ok
    assert stays
    assert first_in <= 15.0, (
        f"band entered at {first_in:.1f} gain lengths; the cut-tail seed of "
        f"3.6e-4 cannot reach the band edge before ~16.8 gain lengths even at "
        f"the gain equation's own maximal rate ln(0.5*pi/3.6e-4)/(alpha/2)"
    )


def test_criterion_6_area_theorem_oracle():
    # synthetic strongly broadened regime: T2* = tau/20, 0.01 pi input area
    p = PhysicalParams(g=266.0, t2star=TAU / 20.0, tau=TAU)
    alpha = beers_alpha(p)
    medium = MediumSpec(0.0, 2.0 / alpha)
    pulse = PulseSpec(
        peak_time=0.0, tau=TAU, cutoff_half_width=10.0, peak_amplitude=0.01 / TAU
    )
    grid = build_grid(
        medium, p, (-11 * TAU, 11 * TAU), pulse=pulse,
        n_detuning=700, placement="uniform",
    )
    boundary = sech_envelope(grid.t_nodes, pulse).astype(complex)
    result = propagate(grid, p, boundary, inverted_state(grid.n_x))
    prof = area_profile(result.record, p)
    sol = solve_ivp(
        lambda _x, th: 0.5 * alpha * np.sin(th),
        (grid.x_nodes[0], grid.x_nodes[-1]),
        [prof.theta[0]],
        t_eval=grid.x_nodes,
        rtol=1e-10,
        atol=1e-13,
    )
    rel = float(np.max(np.abs(prof.theta - sol.y[0]) / np.abs(sol.y[0])))
    ok = rel < 0.05
    report(
        "criterion 6 (area theorem oracle)",
        ok,
        f"max deviation from independently integrated gain equation = "
        f"{100*rel:.3f}% over 2 gain lengths (want < 5%); "
        f"norm dev {result.max_norm_deviation:.1e}",
    )
    assert ok
    assert result.max_norm_deviation < 1e-8


def test_criterion_7_norm_conservation(
    matched_run, matched_run_refined, cut_run, seeded_cut_run, sweep_stats, pure_sf_run
):
    devs = {
        "matched": matched_run[1].max_norm_deviation,
        "matched_refined": matched_run_refined[1].max_norm_deviation,
        "cut": cut_run[2].max_norm_deviation,
        "seeded_cut": seeded_cut_run[2].max_norm_deviation,
        "sweep": max(s.max_norm_deviation for s in sweep_stats),
        "pure_sf": pure_sf_run[1].max_norm_deviation,
    }
    worst = max(devs.values())
    ok = worst < 1e-8
    report(
        "criterion 7 (norm conservation)",
        ok,
        "max |1 - norm| per run: "
        + ", ".join(f"{k} {v:.2e}" for k, v in devs.items())
        + " (want all < 1e-8)",
    )
    assert ok


def test_criterion_8_sf_statistics(sweep_stats, params):
    rows = []
    for s in sweep_stats:
        rows.append(
            (s.length / CTAU, s.mean / TAU, s.std / TAU,
             s.polder_prediction / TAU, s.n_missed,
             abs(s.mean - s.polder_prediction) / s.polder_prediction)
        )
    means = [s.mean for s in sweep_stats]
    monotone = all(a > b for a, b in zip(means, means[1:]))
    crossover = sf_advance_crossover(params) / CTAU
    within_band = all(r[5] <= 0.15 for r in rows)
    detail = "; ".join(
        f"L={r[0]:.1f}ctau mean={r[1]:.1f}tau pred={r[3]:.1f}tau off={100*r[5]:.0f}%"
        + (f" missed={r[4]}" if r[4] else "")
        for r in rows
    )
    ok = within_band and monotone and abs(crossover - 5.0) <= 1.0
    report(
        "criterion 8 (SF statistics)",
        ok,
        f"{detail}; monotone decreasing: {monotone}; "
        f"crossover at {crossover:.2f} ctau (want 5 +/- 1)",
    )
    assert monotone
    assert abs(crossover - 5.0) <= 1.0
    assert within_band, (
        "mean delays exceed the mean-delay law by more than 15%: "
        + detail
        + "; the gaussian detuning spread dephases the seeded dipoles over "
        "the delay time at these parameters, which the delay law does not model"
    )


def test_criterion_9_advance_robust_to_seeding(cut_run, seeded_cut_run):
    grid, boundary, bare = cut_run
    grid_s, boundary_s, seeded = seeded_cut_run
    bare_adv = peak_advance(bare.record.output_series, boundary, grid.t_nodes, TAU)
    seed_adv = peak_advance(seeded.record.output_series, boundary_s, grid_s.t_nodes, TAU)
    diff = abs(seed_adv.advance_in_tau - bare_adv.advance_in_tau)
    ok = diff <= 0.2
    report(
        "criterion 9 (advance robust to SF seeding)",
        ok,
        f"seeded advance = {seed_adv.advance_in_tau:.4f} tau vs bare "
        f"{bare_adv.advance_in_tau:.4f} tau, |diff| = {diff:.2e} (want <= 0.2)",
    )
    assert ok


def test_criterion_10_pure_sf_run(pure_sf_run, sweep_stats, params):
    delay, result, grid = pure_sf_run
    predicted = sf_delay_mean(2 * CTAU, params)
    ensemble_2ctau = next(s for s in sweep_stats if abs(s.length - 2 * CTAU) < 1e-9)
    pulse_out = float(np.abs(result.record.output_series).max())
    emerged = pulse_out > 1.0  # a macroscopic pulse, not seed-level noise
    ok = emerged and abs(delay - predicted) <= ensemble_2ctau.std
    report(
        "criterion 10 (pure SF run)",
        ok,
        f"delay = {delay/TAU:.2f} tau vs predicted {predicted/TAU:.2f} tau "
        f"(ensemble std {ensemble_2ctau.std/TAU:.2f} tau); "
        f"peak emitted |Omega| = {pulse_out:.2f} /ns",
    )
    assert emerged
    assert abs(delay - predicted) <= ensemble_2ctau.std, (
        f"single-run delay {delay/TAU:.2f} tau is {abs(delay-predicted)/TAU:.2f} tau from "
        f"the predicted {predicted/TAU:.2f} tau, beyond the ensemble std "
        f"{ensemble_2ctau.std/TAU:.2f} tau; same dephasing bias as criterion 8"
    )


def test_criterion_11_determinism(tmp_path):
    # identical seed and config must give byte-identical CSVs, and sweep
    # outputs must not depend on the worker count
    overrides = [
        "medium.x1=0.4", "grid.t_min=-1.2", "grid.t_max=1.0",
        "run.snapshot_times=-0.2,0.05", "run.seed=31415", "run.sf_seed=true",
    ]
    cfg = apply_overrides(parse_config(""), overrides)
    m1 = run_command(cfg, tmp_path / "a")
    m2 = run_command(cfg, tmp_path / "b")
    csv_a = {p.name: sha256_of(p) for p in sorted((tmp_path / "a").glob("*.csv"))}
    csv_b = {p.name: sha256_of(p) for p in sorted((tmp_path / "b").glob("*.csv"))}
    same_repeat = csv_a == csv_b and len(csv_a) > 0

    sweep_overrides = [
        "pulse.present=false", "run.mode=sweep", "run.seed=99",
        "physical.density=8.162e5", "physical.g=25.5",
        "physical.t2star=10.0", "physical.tau=10.0",
        "grid.detuning_nodes=16", "sf.lengths=2.0,3.0", "sf.n_runs=2",
        "sf.window_factor=3.0",
    ]
    scfg = apply_overrides(parse_config(""), sweep_overrides)
    run_command(scfg, tmp_path / "j1", jobs=1)
    run_command(scfg, tmp_path / "j2", jobs=2)
    same_jobs = sha256_of(tmp_path / "j1" / "delays.csv") == sha256_of(
        tmp_path / "j2" / "delays.csv"
    ) and sha256_of(tmp_path / "j1" / "polder.csv") == sha256_of(
        tmp_path / "j2" / "polder.csv"
    )
    ok = same_repeat and same_jobs
    report(
        "criterion 11 (determinism)",
        ok,
        f"repeat run CSVs identical: {same_repeat} ({len(csv_a)} files); "
        f"sweep identical across 1 vs 2 workers: {same_jobs}",
    )
    assert same_repeat
    assert same_jobs
