//! Magnetic field algebra and the model fields used by the 2D operators.

mod antisym;
mod model;
mod profile;
mod taylor;
mod wells;

pub use antisym::{tr_plus, trace_norm, AntisymmetricMatrix};
pub use model::{omega_min, ModelField, ModelFieldSpec};
pub use profile::Profile;
pub use taylor::{radial_gauge_potential, Polynomial, PolynomialPotential, TaylorField};
pub use wells::{check_wall_condition, well_region};
