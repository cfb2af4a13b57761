import pytest

from fastlight import C_LIGHT, MediumSpec, PhysicalParams, PulseSpec

RB_G = 266.0  # 1/ns^2
RB_T2STAR = 0.733  # ns
RB_TAU = 0.1  # ns
RB_DENSITY = 8.0e10  # 1/cm^3
RB_WAVELENGTH = 7.8e-5  # cm


@pytest.fixture(scope="session")
def rb_params() -> PhysicalParams:
    """Rb-vapor scenario used throughout: the package defaults."""
    return PhysicalParams(
        g=RB_G, t2star=RB_T2STAR, tau=RB_TAU, density=RB_DENSITY, wavelength=RB_WAVELENGTH
    )


@pytest.fixture(scope="session")
def cell_2ctau(rb_params) -> MediumSpec:
    return MediumSpec(x0=0.0, x1=2.0 * C_LIGHT * rb_params.tau)


@pytest.fixture(scope="session")
def sech_2pi(rb_params) -> PulseSpec:
    return PulseSpec(peak_time=0.0, tau=rb_params.tau)


@pytest.fixture(scope="session")
def sech_2pi_cut(rb_params) -> PulseSpec:
    return PulseSpec(peak_time=0.0, tau=rb_params.tau, cutoff_half_width=10.0)
