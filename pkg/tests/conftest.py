import numpy as np
import pytest

from impact_absorber.beam import (TABLE1_BEAM, ForcingLayout, assemble_modal_model,
                                  excitation_amplitude_from_fatigue)
from impact_absorber.contact import ContactSetup, hertz_constant, sphere_from_mass_ratio

DAMPING = 0.0204


@pytest.fixture(scope="session")
def beam():
    return TABLE1_BEAM


@pytest.fixture(scope="session")
def model(beam):
    return assemble_modal_model(beam, 12, DAMPING)


@pytest.fixture(scope="session")
def layout(model, beam):
    x_f, x_c = beam.length / 3, beam.length
    F = excitation_amplitude_from_fatigue(model, beam, ForcingLayout(x_f, 1.0, x_c))
    return ForcingLayout(x_f, F, x_c)


def make_contact(model, beam, mass_ratio=0.01, clearance=1e-3):
    R, m_a = sphere_from_mass_ratio(beam.mass, mass_ratio, beam.density)
    kH = hertz_constant(R, beam.youngs_modulus, beam.poisson, beam.youngs_modulus, beam.poisson)
    return ContactSetup(R, m_a, kH, clearance, float(model.tip_values[0]), mass_ratio)


@pytest.fixture(scope="session")
def contact(model, beam):
    return make_contact(model, beam)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
