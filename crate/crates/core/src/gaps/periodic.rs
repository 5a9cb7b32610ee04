use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{omega_min, ModelField, Profile};
use crate::model2d::{assemble_from_links, transverse_length, Axis, GridPolicy};
use crate::spectral::{Boundary, Grid1D, Grid2D, HermitianGridOperator};

/// Doubly `2π`-periodic field `b(s, t) = uniform + ω(s) sin t` on the torus.
///
/// With `uniform = 0` the cell flux vanishes and `A = (−ω(s) cos t, 0)` is
/// a periodic gauge (`b = ∂_t A₁`, the orientation of the model fields).
/// The zero set consists of the lines `t = 0` and `t = π`, both of order 1
/// with `|∂_t b| = |ω(s)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicField {
    #[serde(default)]
    pub uniform: f64,
    pub omega: Profile,
}

impl PeriodicField {
    pub fn new(uniform: f64, omega: Profile) -> Result<Self> {
        if !uniform.is_finite() {
            return Err(Error::param("uniform field component must be finite"));
        }
        let mut omega = omega;
        omega.prepare()?;
        Ok(PeriodicField { uniform, omega })
    }

    /// `b = sin t`.
    pub fn sine() -> Self {
        PeriodicField {
            uniform: 0.0,
            omega: Profile::constant(1.0),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PeriodicField = serde_json::from_str(text)?;
        PeriodicField::new(raw.uniform, raw.omega)
    }

    pub fn b(&self, s: f64, t: f64) -> f64 {
        self.uniform + self.omega.value(s) * t.sin()
    }

    /// Flux through one `2π × 2π` cell.
    pub fn cell_flux(&self) -> f64 {
        self.uniform * TAU * TAU
    }

    /// `min_s |ω(s)|` and its argmin, the hypersurface constant of both
    /// zero lines.
    pub fn omega_min(&self) -> Result<(f64, f64)> {
        if self.omega.sampled_min(4096) <= 0.0 {
            return Err(Error::param("ω must stay positive so that the zero set is two smooth lines"));
        }
        omega_min(&ModelField::new(1, self.omega.clone(), Profile::default())?, 1024)
    }

    /// Exact integral of `A₁ = −ω(s) cos t` from `(s0, t)` to `(s1, t)`.
    pub fn a1_integral(&self, s0: f64, s1: f64, t: f64) -> f64 {
        -t.cos() * (self.omega.antiderivative(s1) - self.omega.antiderivative(s0))
    }
}

/// Quasimomentum reduced to `[0, 2π)` and rounded to a multiple of
/// `2π·2⁻⁴⁰`, so that `θ` and `θ + 2π` give bit-identical fibers.
pub fn canonical_theta(theta: f64) -> f64 {
    const STEPS: f64 = (1u64 << 40) as f64;
    let q = (theta / TAU * STEPS).round().rem_euclid(STEPS);
    q * (TAU / STEPS)
}

/// Torus grid `[0, 2π)²` resolving the transverse width at `h`.
pub fn bloch_grid(field: &PeriodicField, h: f64, policy: &GridPolicy) -> Result<Grid2D> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("h must be positive, got {h}")));
    }
    let (w, _) = field.omega_min()?;
    let ell = transverse_length(1, h, w);
    let ns = (TAU / ell * policy.s_per_width).ceil() as usize;
    let nt = (TAU / ell * policy.t_per_width).ceil() as usize;
    Ok(Grid2D::new(
        Grid1D::periodic(0.0, TAU, ns.max(3))?,
        Grid1D::periodic(0.0, TAU, nt.max(3))?,
    ))
}

fn spans_period(grid: &Grid1D) -> bool {
    grid.is_periodic() && ((grid.upper() - grid.lower()) - TAU).abs() <= 1e-12 * TAU
}

/// Floquet fiber at quasimomentum `θ`: the link-phase operator on the
/// torus grid with wrap links multiplied by `e^{iθ_s}`, `e^{iθ_t}`.
pub fn bloch_operator(
    field: &PeriodicField,
    h: f64,
    theta: [f64; 2],
    grid: &Grid2D,
) -> Result<HermitianGridOperator> {
    if field.uniform != 0.0 {
        return Err(Error::Gauge(format!(
            "cell flux {} is nonzero, so no periodic vector potential exists",
            field.cell_flux()
        )));
    }
    if !(spans_period(&grid.s) && spans_period(&grid.t)) {
        return Err(Error::param("Bloch fibers need periodic grids spanning [0, 2π) on both axes"));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("quasimomentum must be finite"));
    }
    let theta = [canonical_theta(theta[0]), canonical_theta(theta[1])];
    assemble_from_links(grid, h, Boundary::Torus { theta }, |link| match link.axis {
        Axis::S => field.a1_integral(link.from_coords.0, link.to_coords.0, link.from_coords.1),
        Axis::T => 0.0,
    })
}

/// Discrete torus dispersion `h² Σ (4/Δ²) sin²((n + θ/2π)Δ/2)` of the field-free
/// fiber, for mode numbers `(n_s, n_t)`.
pub fn free_dispersion(h: f64, grid: &Grid2D, theta: [f64; 2], modes: [i64; 2]) -> f64 {
    let axis = |g: &Grid1D, th: f64, n: i64| {
        let d = g.spacing();
        let k = n as f64 + th / TAU;
        4.0 / (d * d) * (0.5 * k * d).sin().powi(2)
    };
    h * h * (axis(&grid.s, theta[0], modes[0]) + axis(&grid.t, theta[1], modes[1]))
}
