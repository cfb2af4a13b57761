"""Fast-light sech pulse propagation and superfluorescence in inverted gain media."""

__version__ = "0.1.0"

from .physics import (  # noqa: E402
    C_LIGHT,
    DetuningDistribution,
    MediumSpec,
    PhysicalParams,
    PulseSpec,
    advance_time,
    analytic_amplitudes,
    analytic_field,
    atom_count,
    beers_alpha,
    gaussian_detuning_quadrature,
    group_velocity,
    phase_offsets,
    sech_envelope,
    sf_advance_crossover,
    sf_delay_mean,
)
from .solver import (  # noqa: E402
    AtomGrid,
    FieldRecord,
    InitialAtomicState,
    PropagationResult,
    SimulationGrid,
    build_grid,
    evolve_atoms_slice,
    inverted_state,
    lab_frame_snapshot,
    polarization,
    propagate,
)
from .diagnostics import (  # noqa: E402
    AdvanceMeasurement,
    AreaProfile,
    area_profile,
    norm_residual,
    peak_advance,
    pulse_area,
    sf_delay_time,
    tipping_angle,
)
from .superfluorescence import (  # noqa: E402
    DelayStatistics,
    EnsembleSettings,
    SFInitialState,
    compare_to_polder,
    derive_run_seed,
    run_ensemble,
    sample_initial_state,
)
from .errors import (  # noqa: E402
    ConfigError,
    DivergingGroupVelocity,
    FastlightError,
    NumericalError,
    ThresholdNotReached,
    ValidationError,
)
