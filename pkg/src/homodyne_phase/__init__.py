"""Verification of number-phase uncertainty relations by direct
kernel-based sampling from balanced-homodyne quadrature data."""

__version__ = "0.1.0"

from .analysis import URReport, exp_moments_of_distribution, verify_urs
from .homodyne import (
    MomentEstimate,
    PhaseSchedule,
    QuadratureDataset,
    estimate,
    estimate_dense,
    estimate_suite,
    sample_dataset,
)
from .kernels import (
    KernelSpec,
    KernelTable,
    build_kernel_table,
    kernel_exp_phase,
    kernel_exp_phase_classical,
    kernel_exp_phase_series,
    kernel_moment,
    kernel_photon_number,
    kernel_photon_number_sq,
    kernel_trig_sq,
    kernel_vacuum_prob,
)
from .maxent import PhaseDistribution, reconstruct_phase_dist
from .specfun import (
    OscillatorBasisCache,
    bessel_i0,
    hermite,
    kummer_phi,
    osc_eigenfunction,
)
from .states import (
    DensityMatrix,
    PhaseStatistics,
    TrigStatistics,
    coherent_state,
    exp_phase_moment_oracle,
    fock_state,
    make_state,
    phase_statistics_oracle,
    photon_moments_oracle,
    quadrature_pdf,
    rotate_phase,
    squeezed_vacuum_state,
    thermal_state,
    trig_statistics_oracle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
