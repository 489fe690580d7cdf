"""Design toolkit for impact absorbers (vibro-impact nonlinear energy sinks)
attached to flexible cantilever hosts."""

__version__ = "0.1.0"

from .beam import (TABLE1_BEAM, BeamSpec, ForcingLayout, ModalModel, assemble_modal_model,
                   excitation_amplitude_from_fatigue, resonant_amplitude_no_absorber)
from .contact import ContactSetup, hertz_constant, hunter_reed, sphere_from_mass_ratio
from .impact_event import PulseParams, calibrate, extract_pulse_params, simulate_single_impact
from .semianalytic import (DimensionlessDesign, efficacy_curve, frequency_response,
                           optimum_design)
from .reference import SimConfig, efficacy_scan, integrate, stepped_sine_sweep

__all__ = [
    "BeamSpec", "TABLE1_BEAM", "ForcingLayout", "ModalModel", "assemble_modal_model",
    "excitation_amplitude_from_fatigue", "resonant_amplitude_no_absorber",
    "ContactSetup", "hertz_constant", "hunter_reed", "sphere_from_mass_ratio",
    "PulseParams", "calibrate", "extract_pulse_params", "simulate_single_impact",
    "DimensionlessDesign", "efficacy_curve", "frequency_response", "optimum_design",
    "SimConfig", "efficacy_scan", "integrate", "stepped_sine_sweep",
]
