"""Line-oriented run configuration: parsing, validation, canonical serialization.

Format: `[section]` headers, `key = value` lines, `#` comments, blank lines
ignored.  Unknown sections or keys are rejected.  An empty file resolves to
the default rubidium-vapor scenario (g = 266 /ns^2, T2* = 0.733 ns,
tau = 0.1 ns, a 2 c tau cell, a 2 pi sech pulse cut 10 widths from its
peak).  Every value can also be overridden from the command line with
`--override section.key=value`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, ValidationError
from .physics import C_LIGHT, MediumSpec, PhysicalParams, PulseSpec

__all__ = ["SimulationConfig", "parse_config", "serialize_config", "apply_overrides", "MODES"]

MODES = ("analytic", "propagate", "sf", "sweep", "fig")

_DEFAULT_TAU = 0.1  # ns


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


# (type tag, default) per section/key; None defaults mean "derived later"
_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "physical": {
        "g": ("float", 266.0),
        "t2star": ("float", 0.733),
        "tau": ("float", _DEFAULT_TAU),
        "density": ("float", 8.0e10),
        "wavelength": ("float", 7.8e-5),
    },
    "medium": {
        "x0": ("float", 0.0),
        "x1": ("float", 2.0 * C_LIGHT * _DEFAULT_TAU),
    },
    "pulse": {
        "present": ("bool", True),
        "peak_time": ("float", 0.0),
        "tau": ("optfloat", None),  # defaults to physical.tau
        "cutoff_half_width": ("optfloat", 10.0),
        "peak_amplitude": ("optfloat", None),  # defaults to 2/tau
    },
    "grid": {
        "dx": ("optfloat", None),
        "dt": ("optfloat", None),
        "t_min": ("optfloat", None),
        "t_max": ("optfloat", None),
        "detuning_nodes": ("int", 48),
        "detuning_placement": ("choice:hermite,uniform", "hermite"),
        "detuning_half_range_sigmas": ("float", 4.0),
        "allow_unsafe": ("bool", False),
    },
    "run": {
        "mode": ("choice:" + ",".join(MODES), "propagate"),
        "seed": ("int", 20260808),
        "snapshot_times": ("optfloatlist", None),  # ns; None = mode default
        "probes": ("optfloatlist", None),  # cm; None = exit face
        "sf_seed": ("bool", False),
        "out": ("optstr", None),
    },
    "sf": {
        "n_runs": ("int", 20),
        "lengths": ("optfloatlist", None),  # cm; None = 9 lengths in (0.5..5) c tau
        "window_factor": ("float", 2.5),
        "window_pad": ("float", 1.0),
        "threshold": ("float", 1.0),
        "phase_mode": ("choice:binary,uniform", "binary"),
    },
    "fig": {
        "number": ("int", 2),
    },
}


def _convert(section: str, key: str, raw: str, line_no: int):
    tag, _default = _SCHEMA[section][key]
    raw = raw.strip()
    try:
        if tag == "float":
            return float(raw)
        if tag == "int":
            return int(raw, 0)
        if tag == "bool":
            return _parse_bool(raw)
        if tag == "optfloat":
            return None if raw.lower() in ("", "none") else float(raw)
        if tag == "optfloatlist":
            return None if raw.lower() in ("", "none") else _parse_float_list(raw)
        if tag == "optstr":
            return None if raw == "" else raw
        if tag.startswith("choice:"):
            choices = tag.split(":", 1)[1].split(",")
            if raw not in choices:
                raise ValueError(f"must be one of {choices}")
            return raw
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: bad value for {section}.{key}: {exc}") from None
    raise ConfigError(f"line {line_no}: unhandled type for {section}.{key}")


@dataclass(frozen=True)
class SimulationConfig:
    """Fully resolved run configuration; raw maps mirror the file sections."""

    physical: dict = field(default_factory=dict)
    medium: dict = field(default_factory=dict)
    pulse: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    sf: dict = field(default_factory=dict)
    fig: dict = field(default_factory=dict)

    def physical_params(self) -> PhysicalParams:
        p = self.physical
        return PhysicalParams(
            g=p["g"],
            t2star=p["t2star"],
            tau=p["tau"],
            density=p["density"],
            wavelength=p["wavelength"],
        )

    def medium_spec(self) -> MediumSpec:
        return MediumSpec(x0=self.medium["x0"], x1=self.medium["x1"])

    def pulse_spec(self) -> PulseSpec | None:
        if not self.pulse["present"]:
            return None
        tau = self.pulse["tau"] if self.pulse["tau"] is not None else self.physical["tau"]
        return PulseSpec(
            peak_time=self.pulse["peak_time"],
            tau=tau,
            cutoff_half_width=self.pulse["cutoff_half_width"],
            peak_amplitude=self.pulse["peak_amplitude"],
        )

    def sweep_lengths(self) -> tuple[float, ...]:
        if self.sf["lengths"] is not None:
            return self.sf["lengths"]
        ctau = C_LIGHT * self.physical["tau"]
        return tuple(ctau * (0.5 + 4.5 * i / 8.0) for i in range(9))

    def mode(self) -> str:
        return self.run["mode"]


def _defaults() -> dict[str, dict]:
    return {s: {k: v for k, (_t, v) in keys.items()} for s, keys in _SCHEMA.items()}


def parse_config(text: str) -> SimulationConfig:
    """Parse and validate config text; raises ConfigError with a line number."""
    values = _defaults()
    section = None
    for i, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ConfigError(f"line {i}: unknown section [{name}]")
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {i}: expected 'key = value', got {raw_line.strip()!r}")
        if section is None:
            raise ConfigError(f"line {i}: key outside any [section]")
        key, raw_val = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {i}: unknown key {section}.{key}")
        values[section][key] = _convert(section, key, raw_val, i)
    cfg = SimulationConfig(**values)
    validate_config(cfg)
    return cfg


def apply_overrides(cfg: SimulationConfig, overrides: list[str]) -> SimulationConfig:
    """Apply `section.key=value` strings on top of a parsed config, then revalidate."""
    values = {s: dict(getattr(cfg, s)) for s in _SCHEMA}
    for n, item in enumerate(overrides, start=1):
        if "=" not in item:
            raise ConfigError(f"override {n}: expected section.key=value, got {item!r}")
        path, raw_val = item.split("=", 1)
        if "." not in path:
            raise ConfigError(f"override {n}: expected section.key=value, got {item!r}")
        section, key = path.strip().split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"override {n}: unknown key {section}.{key}")
        values[section][key] = _convert(section, key, raw_val, 0)
    out = SimulationConfig(**values)
    validate_config(out)
    return out


def validate_config(cfg: SimulationConfig) -> None:
    """Cross-field validation; raises ValidationError naming the bad invariant."""
    try:
        cfg.physical_params()
        cfg.medium_spec()
        cfg.pulse_spec()
    except ValidationError:
        raise
    if cfg.run["seed"] < 0 or cfg.run["seed"] > 2**64 - 1:
        raise ValidationError("run.seed must fit in 64 bits")
    g = cfg.grid
    for key in ("dx", "dt"):
        if g[key] is not None and g[key] <= 0:
            raise ValidationError(f"grid.{key} must be > 0 when given")
    if g["detuning_nodes"] < 2 or g["detuning_nodes"] % 2:
        raise ValidationError("grid.detuning_nodes must be even and >= 2")
    if g["t_min"] is not None and g["t_max"] is not None and g["t_max"] <= g["t_min"]:
        raise ValidationError("grid.t_max must exceed grid.t_min")
    if cfg.sf["n_runs"] < 1:
        raise ValidationError("sf.n_runs must be >= 1")
    if cfg.sf["window_factor"] <= 0 or cfg.sf["window_pad"] < 0:
        raise ValidationError("sf window settings must be positive")
    if cfg.sf["threshold"] <= 0:
        raise ValidationError("sf.threshold must be > 0")
    if cfg.sf["lengths"] is not None and any(L <= 0 for L in cfg.sf["lengths"]):
        raise ValidationError("sf.lengths must all be > 0")
    mode = cfg.run["mode"]
    if mode in ("sf", "sweep") and cfg.pulse["present"]:
        raise ValidationError(f"mode {mode!r} takes no input pulse; set pulse.present = false")
    if mode in ("analytic", "propagate") and not cfg.pulse["present"]:
        raise ValidationError(f"mode {mode!r} requires an input pulse")
    if mode == "fig" and cfg.fig["number"] not in (2, 4, 5, 6, 7, 8):
        raise ValidationError("fig.number must be one of 2, 4, 5, 6, 7, 8")


def _format_value(val) -> str:
    if val is None:
        return ""
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, tuple):
        return ", ".join(repr(float(v)) for v in val)
    return str(val)


def serialize_config(cfg: SimulationConfig) -> str:
    """Canonical text for a config; parse_config(serialize_config(c)) == c."""
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        data = getattr(cfg, section)
        for key in keys:
            lines.append(f"{key} = {_format_value(data[key])}")
        lines.append("")
    return "\n".join(lines)


def config_for_figure(cfg: SimulationConfig) -> SimulationConfig:
    """Resolve a fig-mode config into the base mode it reproduces."""
    number = cfg.fig["number"]
    values = {s: dict(getattr(cfg, s)) for s in _SCHEMA}
    ctau = C_LIGHT * values["physical"]["tau"]
    values["medium"]["x0"] = 0.0
    values["medium"]["x1"] = 2.0 * ctau
    if number == 2:
        values["run"]["mode"] = "analytic"
        values["pulse"]["present"] = True
        values["pulse"]["cutoff_half_width"] = None
    elif number in (4, 5, 7):
        values["run"]["mode"] = "propagate"
        values["pulse"]["present"] = True
        values["pulse"]["cutoff_half_width"] = 10.0
        values["run"]["sf_seed"] = number == 7
    elif number == 6:
        values["run"]["mode"] = "sweep"
        values["pulse"]["present"] = False
    elif number == 8:
        values["run"]["mode"] = "sf"
        values["pulse"]["present"] = False
    out = SimulationConfig(**values)
    validate_config(out)
    return out
