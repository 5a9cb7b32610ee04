//! The one-dimensional family `Q(α, β) = −d²/dt² + (β t^{k+1}/(k+1) − α)²`
//! and its ground-state band function.

mod band;
mod cache;
mod minimize;

pub use band::{
    asymptotic_lambda0, assemble_q, band_grid, lambda0, lambda0_scaled, pvw_lambda0, truncation_length, lowest_on_grid,
    BandPoint, MontgomeryParams, DEFAULT_NODES, DEFAULT_TOL,
};
pub use cache::{cache_len, clear_cache, load_cache, save_cache};
pub use minimize::{band_derivative_at_zero, invert_band, nu_hat, BandMinimum};
