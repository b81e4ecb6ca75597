"""Exact two-photon scattering at a single two-level atom coupled to a
chiral one-dimensional field: closed-form propagator kernels, rectangular
pulse solutions, second-order correlations, process decomposition, and an
independent lab-frame integrator for cross-validation."""

__version__ = "0.1.0"

from .analytic import (
    ProcessAmplitudes,
    longpulse_g2,
    longpulse_psi_out,
    rect_nonlin_out,
    rect_one_photon_out,
    rect_process_amplitudes,
    rect_two_photon_out,
)
from .correlations import (
    CorrelationCurve,
    find_dip_zeros,
    g2_slice,
    normalized_g2,
    second_order_correlation,
)
from .kernels import eval_abs_kernel, eval_nonlin_kernel
from .model import (
    Grid1D,
    LabState1,
    LabState2,
    PhysicalParams,
    PiecewiseConstant,
    Wavefunction1,
    Wavefunction2,
    gaussian_pulse,
    max_asymmetry,
    norm1,
    norm2,
    rectangular_pulse,
)
from .oracle import (
    evolve_one_photon,
    evolve_two_photon,
    excitation_trace,
    far_field_one_photon,
    far_field_two_photon,
    one_photon_initial,
    run_one_photon_rect,
    run_two_photon_rect,
    two_photon_initial,
)
from .propagate import (
    TwoPhotonResult,
    apply_one_photon,
    apply_two_photon,
    apply_two_photon_linear,
    apply_two_photon_nonlinear,
    default_output_grid,
)

__all__ = [
    "__version__",
    "PhysicalParams",
    "Grid1D",
    "PiecewiseConstant",
    "Wavefunction1",
    "Wavefunction2",
    "LabState1",
    "LabState2",
    "rectangular_pulse",
    "gaussian_pulse",
    "norm1",
    "norm2",
    "max_asymmetry",
    "eval_abs_kernel",
    "eval_nonlin_kernel",
    "apply_one_photon",
    "apply_two_photon_linear",
    "apply_two_photon_nonlinear",
    "apply_two_photon",
    "default_output_grid",
    "TwoPhotonResult",
    "rect_one_photon_out",
    "rect_nonlin_out",
    "rect_two_photon_out",
    "rect_process_amplitudes",
    "longpulse_psi_out",
    "longpulse_g2",
    "ProcessAmplitudes",
    "evolve_one_photon",
    "evolve_two_photon",
    "excitation_trace",
    "one_photon_initial",
    "two_photon_initial",
    "far_field_one_photon",
    "far_field_two_photon",
    "run_one_photon_rect",
    "run_two_photon_rect",
    "second_order_correlation",
    "normalized_g2",
    "g2_slice",
    "find_dip_zeros",
    "CorrelationCurve",
]
