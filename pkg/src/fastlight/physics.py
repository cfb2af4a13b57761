"""Closed-form physics of short sech pulses in an inverted two-level gain medium.

Unit convention, fixed package-wide: time in ns, length in cm, Rabi
frequencies and detunings in 1/ns, atom-field coupling g in 1/ns^2,
number density in 1/cm^3.  The vacuum light speed is C_LIGHT cm/ns.

The medium is a uniform slab of inverted atoms between x0 and x1 with a
gaussian distribution of detunings of width 1/T2*.  A resonant sech pulse
of area 2*pi propagates through it as a solitary wave whose group velocity
can exceed c or be negative; an inverted slab also superfluoresces after a
length-dependent mean delay.  Everything in this module is an explicit
formula or a quadrature of one; the time-domain solver lives in
:mod:`fastlight.solver`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergingGroupVelocity, ValidationError

C_LIGHT = 29.9792458  # cm/ns, exact

__all__ = [
    "C_LIGHT",
    "PhysicalParams",
    "MediumSpec",
    "PulseSpec",
    "DetuningDistribution",
    "gaussian_detuning_quadrature",
    "sech_envelope",
    "group_velocity",
    "inverse_velocity_offset",
    "beers_alpha",
    "phase_offsets",
    "analytic_field",
    "analytic_amplitudes",
    "advance_time",
    "sf_delay_mean",
    "sf_advance_crossover",
    "atom_count",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Medium and pulse scales.

    g         atom-field coupling, 1/ns^2
    t2star    inhomogeneous (Doppler) lifetime, ns
    tau       nominal temporal pulse width, ns
    density   atomic number density, 1/cm^3
    wavelength transition wavelength, cm
    """

    g: float
    t2star: float
    tau: float
    density: float = 0.0
    wavelength: float = 0.0

    def __post_init__(self) -> None:
        if self.g < 0:
            raise ValidationError(f"coupling g must be >= 0, got {self.g}")
        if self.t2star <= 0:
            raise ValidationError(f"t2star must be > 0, got {self.t2star}")
        if self.tau <= 0:
            raise ValidationError(f"tau must be > 0, got {self.tau}")
        if self.density < 0:
            raise ValidationError(f"density must be >= 0, got {self.density}")
        if self.wavelength < 0:
            raise ValidationError(f"wavelength must be >= 0, got {self.wavelength}")


@dataclass(frozen=True)
class MediumSpec:
    """Uniform slab between the entrance face x0 and exit face x1 (cm)."""

    x0: float
    x1: float

    def __post_init__(self) -> None:
        if not self.x1 > self.x0:
            raise ValidationError(f"need x1 > x0, got x0={self.x0}, x1={self.x1}")

    @property
    def length(self) -> float:
        return self.x1 - self.x0


@dataclass(frozen=True)
class PulseSpec:
    """Input sech pulse, optionally hard-cut a fixed number of widths from the peak.

    peak_time is the retarded time t - x/c at which the envelope peaks,
    i.e. the arrival time of the peak at x = 0.  peak_amplitude defaults
    to 2/tau, which makes the full (uncut) pulse area exactly 2*pi.
    """

    peak_time: float
    tau: float
    cutoff_half_width: float | None = None  # in units of tau; None = infinite wings
    peak_amplitude: float | None = None  # 1/ns; None = 2/tau

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValidationError(f"pulse tau must be > 0, got {self.tau}")
        if self.cutoff_half_width is not None and self.cutoff_half_width <= 0:
            raise ValidationError("cutoff_half_width must be > 0 when present")
        if self.peak_amplitude is not None and self.peak_amplitude < 0:
            raise ValidationError("peak_amplitude must be >= 0")

    @property
    def amplitude(self) -> float:
        return 2.0 / self.tau if self.peak_amplitude is None else self.peak_amplitude

    @property
    def support(self) -> tuple[float, float] | None:
        """Retarded-time interval outside which the envelope is identically zero."""
        if self.cutoff_half_width is None:
            return None
        half = self.cutoff_half_width * self.tau
        return (self.peak_time - half, self.peak_time + half)


def _sech(u):
    """Overflow-safe sech via 2 e^{-|u|} / (1 + e^{-2|u|})."""
    e = np.exp(-np.abs(u))
    return 2.0 * e / (1.0 + e * e)


def sech_envelope(t, spec: PulseSpec):
    """Sech envelope amplitude*sech((t - peak)/tau), hard-zeroed outside the cutoff.

    Accepts a scalar or array of times (ns) and returns the Rabi value (1/ns).
    Points exactly on the cutoff keep their sech value; the zero region is
    strictly beyond it.
    """
    t = np.asarray(t, dtype=float)
    u = (t - spec.peak_time) / spec.tau
    out = spec.amplitude * _sech(u)
    if spec.cutoff_half_width is not None:
        out = np.where(np.abs(u) > spec.cutoff_half_width, 0.0, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DetuningDistribution:
    """Quadrature nodes and weights for the gaussian detuning average.

    The weights approximate integration against
    F(d) = T2*/sqrt(2 pi) exp(-(T2* d)^2 / 2); they sum to one and the
    nodes come in symmetric +/- pairs with equal weights.
    """

    nodes: np.ndarray  # 1/ns, ascending
    weights: np.ndarray  # dimensionless, sum to 1

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValidationError("nodes and weights must be 1-d arrays of equal length")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError(f"weights must sum to 1, got {weights.sum()!r}")
        if not np.allclose(nodes, -nodes[::-1], rtol=0, atol=1e-12 * max(1.0, abs(nodes).max())):
            raise ValidationError("nodes must be symmetric about zero")
        if not np.allclose(weights, weights[::-1], rtol=1e-12, atol=0):
            raise ValidationError("paired +/- nodes must carry equal weights")

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def max_abs_node(self) -> float:
        return float(np.abs(self.nodes).max())

    def average(self, values: np.ndarray) -> complex | float:
        """Weighted average over the last axis (the node axis)."""
        return np.asarray(values) @ self.weights


def gaussian_detuning_quadrature(
    t2star: float,
    n_nodes: int = 48,
    placement: str = "hermite",
    half_range_sigmas: float = 4.0,
) -> DetuningDistribution:
    """Build a symmetric gaussian-weighted detuning quadrature.

    placement "hermite" uses Gauss-Hermite nodes (exact for polynomials up
    to degree 2*n-1, the default).  placement "uniform" uses equally spaced
    midpoint nodes over +/- half_range_sigmas standard deviations with
    renormalized gaussian weights; its uniform spacing keeps the discrete
    free-induction signal clean until t ~ 2*pi/spacing, which matters when
    the line is much wider than the pulse spectrum.
    """
    if t2star <= 0:
        raise ValidationError("t2star must be > 0")
    if n_nodes < 2 or n_nodes % 2 != 0:
        raise ValidationError(f"n_nodes must be even and >= 2, got {n_nodes}")
    if placement == "hermite":
        y, w = np.polynomial.hermite.hermgauss(n_nodes)
        nodes = math.sqrt(2.0) * y / t2star
        weights = w / w.sum()
    elif placement == "uniform":
        if half_range_sigmas <= 0:
            raise ValidationError("half_range_sigmas must be > 0")
        half = n_nodes // 2
        step = half_range_sigmas / (t2star * half)
        pos = step * (np.arange(half) + 0.5)
        nodes = np.concatenate([-pos[::-1], pos])
        raw = np.exp(-((t2star * nodes) ** 2) / 2.0)
        weights = raw / raw.sum()
    else:
        raise ValidationError(f"unknown quadrature placement {placement!r}")
    # enforce exact symmetry against rounding
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    return DetuningDistribution(nodes=nodes, weights=weights)


def _detuning_integral(p: PhysicalParams, mode: str, detuning: DetuningDistribution | None) -> float:
    """I = integral F(d) dd / (d^2 + 1/tau^2); equals tau^2 in the long-T2* limit."""
    if mode == "limit":
        return p.tau**2
    if mode == "quadrature":
        dist = detuning if detuning is not None else gaussian_detuning_quadrature(p.t2star)
        return float(np.sum(dist.weights / (dist.nodes**2 + 1.0 / p.tau**2)))
    raise ValidationError(f"unknown group-velocity mode {mode!r}")


def inverse_velocity_offset(
    p: PhysicalParams, mode: str = "limit", detuning: DetuningDistribution | None = None
) -> float:
    """Return 1/c - 1/v_g in ns/cm, i.e. (g I / 2) / c.

    Positive for an inverted medium; the medium slowness is 1/c minus this.
    Finite for every parameter set, including the point where v_g itself
    diverges, so the analytic branches are built from this quantity.
    """
    return (p.g * _detuning_integral(p, mode, detuning) / 2.0) / C_LIGHT


def group_velocity(
    p: PhysicalParams, mode: str = "limit", detuning: DetuningDistribution | None = None
) -> float:
    """Group velocity of the matched sech pulse as the signed ratio v_g/c.

    1 - c/v_g = (g/2) * I with I the gaussian detuning integral of
    1/(d^2 + 1/tau^2); "limit" replaces I by tau^2 (long-T2* limit) and
    "quadrature" evaluates it numerically.  The ratio may be negative.
    """
    gi_half = p.g * _detuning_integral(p, mode, detuning) / 2.0
    denom = 1.0 - gi_half
    if abs(denom) < 1e-12 * max(1.0, gi_half):
        raise DivergingGroupVelocity(
            f"group velocity diverges: 1 - g*I/2 = {denom!r} for g={p.g}, tau={p.tau}"
        )
    return 1.0 / denom


def beers_alpha(p: PhysicalParams) -> float:
    """Weak-field gain coefficient alpha = sqrt(pi/2) g T2* / c, in 1/cm."""
    return math.sqrt(math.pi / 2.0) * p.g * p.t2star / C_LIGHT


def phase_offsets(m: MediumSpec, p: PhysicalParams, mode: str = "limit") -> tuple[float, float]:
    """Time offsets (phi0, phi1) in ns that keep the piecewise field continuous.

    In the long-T2* limit phi0 = -tau^2 g x0 / 2c and
    phi1 = tau^2 g (x1 - x0) / 2c; "quadrature" replaces tau^2 by the full
    detuning integral so the offsets stay consistent with that velocity.
    """
    q = inverse_velocity_offset(p, mode)  # ns/cm
    return (-q * m.x0, q * (m.x1 - m.x0))


def analytic_field(x, t, m: MediumSpec, p: PhysicalParams, mode: str = "limit"):
    """Piecewise sech solution Omega(x, t) in 1/ns; broadcasts over x and t.

    Vacuum branches travel at c on both sides of the slab; inside, the peak
    moves at the matched group velocity and the offsets from
    :func:`phase_offsets` make the field continuous at both faces.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    q = inverse_velocity_offset(p, mode)
    phi0, phi1 = phase_offsets(m, p, mode)
    s_medium = 1.0 / C_LIGHT - q  # slowness 1/v_g, ns/cm
    u_in = (t - x / C_LIGHT) / p.tau
    u_med = (t - x * s_medium + phi0) / p.tau
    u_out = (t - x / C_LIGHT + phi1) / p.tau
    u = np.select([x < m.x0, x > m.x1], [u_in, u_out], default=u_med)
    out = (2.0 / p.tau) * _sech(u)
    return out if out.ndim else float(out)


def analytic_amplitudes(x, t, m: MediumSpec, p: PhysicalParams, mode: str = "limit"):
    """Atomic amplitudes (c1, c2) of the matched solution inside the slab.

    c1 = i sech(u) and c2 = -tanh(u) with the same argument as the medium
    field branch; |c1|^2 + |c2|^2 = 1 identically.  Raises outside the slab.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < m.x0) or np.any(x > m.x1):
        raise ValidationError("analytic_amplitudes is defined only inside the medium")
    q = inverse_velocity_offset(p, mode)
    phi0, _ = phase_offsets(m, p, mode)
    u = (t - x * (1.0 / C_LIGHT - q) + phi0) / p.tau
    c1 = 1j * _sech(u)
    c2 = -np.tanh(u) + 0j
    return c1, c2


def advance_time(length: float, p: PhysicalParams) -> float:
    """Peak advance L g tau^2 / 2c (ns) relative to vacuum transit of length L (cm)."""
    if length < 0:
        raise ValidationError("length must be >= 0")
    return length * p.g * p.tau**2 / (2.0 * C_LIGHT)


def _l0(p: PhysicalParams) -> float:
    if p.density <= 0 or p.wavelength <= 0:
        raise ValidationError("sf formulas need density > 0 and wavelength > 0")
    return (2.0 * math.pi * p.density * p.wavelength) ** -0.5


def sf_delay_mean(length: float, p: PhysicalParams) -> float:
    """Mean superfluorescence delay (3c/4gL) ln^2(L/L0), ns, with L0 = (2 pi N lambda)^-1/2.

    Returns inf for g = 0 (an uncoupled medium never superfluoresces).
    Raises for L <= L0 where the logarithm is not positive.
    """
    l0 = _l0(p)
    if length <= l0:
        raise ValidationError(f"need L > L0 = {l0:.6g} cm, got L = {length!r}")
    if p.g == 0:
        return math.inf
    return (3.0 * C_LIGHT / (4.0 * p.g * length)) * math.log(length / l0) ** 2


def sf_advance_crossover(p: PhysicalParams, l_max: float = 1e3) -> float:
    """Length (cm) where the mean SF delay equals the pulse advance time.

    Bisection on sf_delay_mean(L) - advance_time(L), which is decreasing
    minus increasing and hence crosses once beyond e^2 L0.
    """
    lo = math.e**2 * _l0(p)
    if p.g == 0:
        raise ValidationError("no crossover for g = 0")
    f = lambda L: sf_delay_mean(L, p) - advance_time(L, p)
    if f(lo) <= 0:
        raise ValidationError("delay already below advance at e^2 L0")
    hi = lo * 2.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > l_max:
            raise ValidationError(f"no crossover below {l_max} cm")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def atom_count(p: PhysicalParams, length: float) -> float:
    """Atom number N lambda L^2 for a unit-Fresnel-number cell of length L (cm)."""
    if length <= 0:
        raise ValidationError("length must be > 0")
    if p.density <= 0 or p.wavelength <= 0:
        raise ValidationError("atom_count needs density > 0 and wavelength > 0")
    return p.density * p.wavelength * length**2
