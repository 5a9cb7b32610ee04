//! Numerical laboratory for semiclassical magnetic Schrödinger operators
//! whose field vanishes to finite order on a curve.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] — grids, Sturm bisection for tridiagonal matrices and a
//!   shift-invert Krylov solver for sparse Hermitian grid operators.
//! * [`field`] — field algebra (`Tr⁺`, trace norm), well regions, Taylor
//!   model fields with their radial gauge, and hypersurface model fields.
//! * [`montgomery`] — the reduced 1D family `−d²/dt² + (β t^{k+1}/(k+1) − α)²`,
//!   its band function, minimum, inversion and the vector variant.
//! * [`model2d`] — link-phase discretisations of the 2D model operators and
//!   the bottom-of-spectrum scaling study.
//! * [`quasimode`] — explicit trial states, residuals and moment fits.
//! * [`gaps`] — Bloch fibers, spectrum clouds, gap detection and gap
//!   certificates.
//! * [`cli`] — the `magspec` command-line frontend.

pub mod cli;
pub mod error;
pub mod field;
pub mod gaps;
pub mod model2d;
pub mod montgomery;
pub mod quasimode;
pub mod spectral;

pub use error::{Error, Result};
