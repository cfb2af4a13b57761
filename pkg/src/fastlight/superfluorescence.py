"""Stochastic tipping-angle seeding and Monte Carlo delay-time ensembles.

An inverted cell is seeded with a small random Bloch tipping angle per
spatial point (gaussian, mean 2/sqrt(Na), variance 1/Na, with a binary 0/pi
phase giving a zero-average dipole) and propagated with no input pulse; the
delay until the exit-face tipping angle reaches one radian is the
superfluorescence delay.  Ensembles over medium lengths are reproducible
from a single seed and independent of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from hashlib import blake2b

import numpy as np

from .diagnostics import sf_delay_time
from .errors import ThresholdNotReached, ValidationError
from .physics import (
    C_LIGHT,
    MediumSpec,
    PhysicalParams,
    advance_time,
    atom_count,
    sf_advance_crossover,
    sf_delay_mean,
)
from .solver import InitialAtomicState, build_grid, propagate

__all__ = [
    "SFInitialState",
    "sample_initial_state",
    "derive_run_seed",
    "DelayStatistics",
    "run_ensemble",
    "PolderRow",
    "compare_to_polder",
]


@dataclass(frozen=True)
class SFInitialState:
    """Per-point tipping angles and phases realizing the seeded inversion."""

    theta0: np.ndarray  # radians, > 0
    phi: np.ndarray  # radians
    seed: int

    def to_atomic_state(self) -> InitialAtomicState:
        c1 = np.sin(self.theta0 / 2.0) * np.exp(1j * self.phi)
        c2 = np.cos(self.theta0 / 2.0).astype(complex)
        return InitialAtomicState(c1=c1, c2=c2)


def sample_initial_state(
    seed: int, n_points: int, n_atoms: float, phase_mode: str = "binary"
) -> SFInitialState:
    """Draw the seeded initial state for n_points cells of an Na-atom cell.

    theta0 is gaussian with mean 2/sqrt(Na) and variance 1/Na, redrawing
    any non-positive samples; phi is 0 or pi with equal probability
    ("binary", the default, which zeroes the average dipole) or uniform on
    [0, 2 pi) ("uniform").  Identical seeds give bit-identical states.
    """
    if n_atoms <= 1:
        raise ValidationError(f"need more than one atom, got Na = {n_atoms!r}")
    if n_points < 1:
        raise ValidationError("n_points must be >= 1")
    rng = np.random.default_rng(seed)
    mean = 2.0 / math.sqrt(n_atoms)
    sigma = 1.0 / math.sqrt(n_atoms)
    theta0 = rng.normal(mean, sigma, size=n_points)
    while True:
        bad = theta0 <= 0.0
        if not bad.any():
            break
        theta0[bad] = rng.normal(mean, sigma, size=int(bad.sum()))
    if phase_mode == "binary":
        phi = math.pi * rng.integers(0, 2, size=n_points).astype(float)
    elif phase_mode == "uniform":
        phi = rng.uniform(0.0, 2.0 * math.pi, size=n_points)
    else:
        raise ValidationError(f"unknown phase_mode {phase_mode!r}")
    return SFInitialState(theta0=theta0, phi=phi, seed=int(seed))


def derive_run_seed(seed0: int, length: float, run_index: int) -> int:
    """Stable per-run stream: seed0 XOR a 64-bit hash of (length, run index)."""
    digest = blake2b(f"{length!r}|{run_index}".encode(), digest_size=8).digest()
    return (int(seed0) ^ int.from_bytes(digest, "big")) & (2**64 - 1)


@dataclass(frozen=True)
class DelayStatistics:
    """Measured delays for one medium length against the mean-delay law."""

    length: float  # cm
    delays: list  # ns, one entry per run; None where never triggered
    mean: float  # ns over triggering runs; nan if none triggered
    std: float  # ns, ddof=1 over triggering runs; nan if < 2
    n_runs: int
    n_missed: int  # runs that never reached threshold in the window
    polder_prediction: float  # ns
    window_end: float  # ns
    max_norm_deviation: float = 0.0  # worst conservation residual over the runs

    @property
    def triggered(self) -> list:
        return [d for d in self.delays if d is not None]


@dataclass(frozen=True)
class EnsembleSettings:
    """Grid and detection settings shared by every run of an ensemble."""

    n_detuning: int = 48
    window_factor: float = 2.5  # window end = factor * predicted delay + pad
    window_pad: float = 1.0  # ns
    threshold: float = 1.0  # radians
    phase_mode: str = "binary"
    dx: float | None = None
    dt: float | None = None
    allow_unsafe: bool = False  # accept dx/dt beyond the resolution bounds


def _window_end(length: float, params: PhysicalParams, settings: EnsembleSettings) -> float:
    """Window long enough for a typical delay; finite even when the law diverges."""
    predicted = sf_delay_mean(length, params)
    if not math.isfinite(predicted):
        return settings.window_pad + 100.0 * params.tau
    return settings.window_factor * predicted + settings.window_pad


def _single_run(args) -> tuple[int, int, float | None, float]:
    """One seeded SF run; module-level so process pools can pickle it."""
    (li, k, length, params, seed0, settings) = args
    medium = MediumSpec(x0=0.0, x1=length)
    t_end = _window_end(length, params, settings)
    grid = build_grid(
        medium,
        params,
        (0.0, t_end),
        dx=settings.dx,
        dt=settings.dt,
        n_detuning=settings.n_detuning,
        allow_unsafe=settings.allow_unsafe,
    )
    seed = derive_run_seed(seed0, length, k)
    state = sample_initial_state(
        seed, grid.n_x, atom_count(params, length), settings.phase_mode
    )
    boundary = np.zeros(grid.n_t, dtype=complex)
    result = propagate(
        grid, params, boundary, state.to_atomic_state(), store_field=False
    )
    history = result.probes[grid.n_x - 1]
    try:
        delay = sf_delay_time(
            history, grid.detuning.weights, grid.t_nodes, settings.threshold
        )
    except ThresholdNotReached:
        delay = None
    return (li, k, delay, result.max_norm_deviation)


def run_ensemble(
    params: PhysicalParams,
    lengths,
    n_runs: int,
    seed0: int,
    settings: EnsembleSettings | None = None,
    jobs: int = 1,
) -> list[DelayStatistics]:
    """Seeded delay ensembles for each length, reproducible and order-independent.

    Per-run failures to trigger are recorded, not fatal.  With jobs > 1 the
    runs execute in a process pool; aggregation sorts on (length index,
    run index) so the statistics do not depend on completion order.
    """
    if n_runs < 1:
        raise ValidationError("n_runs must be >= 1")
    settings = settings or EnsembleSettings()
    lengths = [float(L) for L in lengths]
    job_args = [
        (li, k, L, params, int(seed0), settings)
        for li, L in enumerate(lengths)
        for k in range(n_runs)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_single_run, job_args))
    else:
        raw = [_single_run(a) for a in job_args]
    raw.sort(key=lambda r: (r[0], r[1]))

    out = []
    for li, L in enumerate(lengths):
        delays = [d for (i, _k, d, _dev) in raw if i == li]
        devs = [dev for (i, _k, _d, dev) in raw if i == li]
        hits = [d for d in delays if d is not None]
        mean = float(np.mean(hits)) if hits else math.nan
        std = float(np.std(hits, ddof=1)) if len(hits) > 1 else math.nan
        out.append(
            DelayStatistics(
                length=L,
                delays=delays,
                mean=mean,
                std=std,
                n_runs=n_runs,
                n_missed=len(delays) - len(hits),
                polder_prediction=sf_delay_mean(L, params),
                window_end=_window_end(L, params, settings),
                max_norm_deviation=max(devs),
            )
        )
    return out


@dataclass(frozen=True)
class PolderRow:
    length: float  # cm
    length_ctau: float
    n_triggered: int
    n_runs: int
    mean_delay: float  # ns
    std_delay: float  # ns
    polder: float  # ns
    advance: float  # ns
    past_crossover: bool  # predicted delay below predicted advance


def compare_to_polder(
    stats: list[DelayStatistics], params: PhysicalParams
) -> tuple[list[PolderRow], float]:
    """Length-by-length comparison table plus the predicted crossover length (cm)."""
    if not stats:
        raise ValidationError("no statistics to compare")
    ctau = C_LIGHT * params.tau
    rows = []
    for s in stats:
        adv = advance_time(s.length, params)
        rows.append(
            PolderRow(
                length=s.length,
                length_ctau=s.length / ctau,
                n_triggered=s.n_runs - s.n_missed,
                n_runs=s.n_runs,
                mean_delay=s.mean,
                std_delay=s.std,
                polder=s.polder_prediction,
                advance=adv,
                past_crossover=s.polder_prediction < adv,
            )
        )
    if params.g > 0:
        try:
            crossover = sf_advance_crossover(params)
        except ValidationError:
            crossover = math.nan  # advance exceeds the delay law everywhere sensible
    else:
        crossover = math.inf
    return rows, crossover
