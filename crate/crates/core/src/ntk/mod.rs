//! Tangent kernel of the model, its spectrum, the linearized dynamics and
//! the diagnostics built on them.

mod diagnostics;
mod kernel;
mod linear;

pub use diagnostics::{
    bound_diagnostics, concentration_stats, lazy_drift, lazy_drift_from_trace, loss_gap, trace_exp, BoundDiagnostics,
    ConcentrationConfig, ConcentrationRow, DriftReport, DriftRow, GapReport, GapRow,
};
pub use kernel::{kernel_spectrum, tangent_kernel, KernelMatrix, Spectrum, PSD_TOL, SYMMETRY_TOL};
pub use linear::{
    convergence_bound_check, linearized_closed_form, linearized_trajectory, BoundCheck, LinearizedRun,
    RESIDUAL_RESOLUTION,
};
