//! Explicit trial states for the cylinder operator: the transverse profile,
//! the Gaussian envelope with its cut-off, residuals and moment fits.

mod bundle;
mod profile;
mod study;

pub use bundle::{
    build_phi, cutoff, cutoff_derivative, energy_scale, envelope_beta, quasimode_grid, residual,
    transverse_state, QuasimodeBundle, QuasimodeGridPolicy, CUTOFF_RADIUS,
};
pub use profile::{
    build_psi, build_scaled_profile, profile_width, psi_grid, TransverseProfile, MIN_NODES_PER_WIDTH,
};
pub use study::{
    derivative_moment_check, log_log_fit, moment_check, residual_study, transverse_moment_check,
    MomentCheck, MomentKind, ResidualRow, ResidualStudy, SlopeFit,
};
