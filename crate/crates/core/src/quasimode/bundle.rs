use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::profile::{build_psi, build_scaled_profile, profile_width, psi_grid, TransverseProfile};
use crate::error::{Error, Result};
use crate::field::{omega_min, ModelField};
use crate::model2d::{assemble_h0, assemble_h_dirichlet};
use crate::montgomery::invert_band;
use crate::spectral::{Boundary, Grid1D, Grid2D, HermitianGridOperator};

/// Support radius `r` of the cut-off; it equals 1 on `|s| ≤ r/2`.
pub const CUTOFF_RADIUS: f64 = PI / 2.0;

const OMEGA_SAMPLES: usize = 1024;
const INVERSION_TOL: f64 = 1e-10;

/// Quintic-smoothstep bump: 1 on `|s| ≤ r/2`, 0 on `|s| ≥ r`.
pub fn cutoff(s: f64) -> f64 {
    let half = 0.5 * CUTOFF_RADIUS;
    let u = ((s.abs() - half) / half).clamp(0.0, 1.0);
    1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

pub fn cutoff_derivative(s: f64) -> f64 {
    let half = 0.5 * CUTOFF_RADIUS;
    let u = (s.abs() - half) / half;
    if !(u > 0.0 && u < 1.0) {
        return 0.0;
    }
    -30.0 * u * u * (1.0 - u) * (1.0 - u) / half * s.signum()
}

/// Envelope exponent `β = 1/(3(k+2))`.
pub fn envelope_beta(k: u32) -> f64 {
    1.0 / (3.0 * (k as f64 + 2.0))
}

/// Energy scale `h^{(2k+2)/(k+2)}`.
pub fn energy_scale(k: u32, h: f64) -> f64 {
    let k = k as f64;
    h.powf((2.0 * k + 2.0) / (k + 2.0))
}

/// Trial state `Φ` on a grid together with its target energy and residual
/// against the operator matching the grid (cylinder for a periodic
/// `s`-axis, Dirichlet otherwise).
#[derive(Debug, Clone)]
pub struct QuasimodeBundle {
    pub k: u32,
    pub h: f64,
    pub target_nu: f64,
    /// `μ = target_nu · h^{(2k+2)/(k+2)}`.
    pub mu: f64,
    pub alpha1: f64,
    pub beta: f64,
    /// Centre of the construction (argmin of `ω`).
    pub s1: f64,
    pub omega_min: f64,
    pub grid: Grid2D,
    /// Node values, row-major in `(s, t)` like the grid operators.
    pub values: Vec<Complex64>,
    /// `(Σ |Φ|² Δs Δt)^{1/2}`.
    pub norm: f64,
    /// `‖HΦ − μΦ‖/‖Φ‖`.
    pub residual: f64,
}

impl QuasimodeBundle {
    /// `⟨Φ, op Φ⟩/⟨Φ, Φ⟩`.
    pub fn rayleigh_quotient(&self, op: &HermitianGridOperator) -> Result<f64> {
        check_shape(op, self)?;
        let image = op.apply(&self.values);
        let num: f64 = self.values.iter().zip(&image).map(|(x, y)| (x.conj() * y).re).sum();
        let den: f64 = self.values.iter().map(|x| x.norm_sqr()).sum();
        Ok(num / den)
    }
}

/// Signed offset of `s` from `s1` on the circle, in `[−π, π)`.
pub(crate) fn circle_offset(s: f64, s1: f64) -> f64 {
    (s - s1 + PI).rem_euclid(TAU) - PI
}

/// Grid resolution for quasimode runs, in nodes per characteristic length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeGridPolicy {
    /// Nodes per `min(ℓ, h^β)` along `s`.
    pub s_per_width: f64,
    /// Nodes per transverse width `ℓ`.
    pub t_per_width: f64,
}

impl Default for QuasimodeGridPolicy {
    fn default() -> Self {
        QuasimodeGridPolicy {
            s_per_width: 12.0,
            t_per_width: 20.0,
        }
    }
}

/// Cylinder grid for `Φ` at `h`: periodic `s ∈ [s₁ − π, s₁ + π)` and
/// `|t| ≤ L ℓ`, where `L` is the half-width of the native grid of `ψ`.
pub fn quasimode_grid(
    field: &ModelField,
    h: f64,
    psi: &TransverseProfile,
    policy: &QuasimodeGridPolicy,
) -> Result<Grid2D> {
    if !(policy.s_per_width > 0.0 && policy.t_per_width > 0.0) {
        return Err(Error::param("grid densities must be positive"));
    }
    let (w, s1) = omega_min(field, OMEGA_SAMPLES)?;
    let ell = profile_width(field.k(), h, w);
    let envelope = h.powf(envelope_beta(field.k()));
    let ns = (TAU / (ell.min(envelope) / policy.s_per_width)).ceil() as usize;
    let extent = psi.grid.upper() * ell;
    field.check_extent(extent)?;
    let nt = (2.0 * extent / ell * policy.t_per_width).ceil() as usize + 1;
    Ok(Grid2D::new(
        Grid1D::periodic(s1 - PI, s1 + PI, ns)?,
        Grid1D::symmetric(extent, nt | 1)?,
    ))
}

/// `α₁` with `λ₀(α₁, 1) = target_nu · ω_min^{−2/(k+2)}` and the matching `ψ`.
pub fn transverse_state(field: &ModelField, target_nu: f64) -> Result<TransverseProfile> {
    let k = field.k();
    let (w, _) = omega_min(field, OMEGA_SAMPLES)?;
    let alpha1 = invert_band(k, target_nu * w.powf(-2.0 / (k as f64 + 2.0)), INVERSION_TOL)?;
    build_psi(k, alpha1, &psi_grid(k, alpha1)?)
}

/// Builds
/// `Φ = c h^{−β/2} χ(s) e^{iφ(s)/h} e^{iα₁ω_min^{1/(k+2)} s/h^{1/(k+2)}} e^{−s²/(2h^{2β})} Ψ(t)`
/// with `s` measured from the argmin of `ω`, normalises it on `grid` and
/// measures its residual.
pub fn build_phi(field: &ModelField, h: f64, target_nu: f64, grid: &Grid2D) -> Result<QuasimodeBundle> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("h must be positive, got {h}")));
    }
    let psi = transverse_state(field, target_nu)?;
    build_phi_from(field, h, target_nu, grid, &psi)
}

pub(crate) fn build_phi_from(
    field: &ModelField,
    h: f64,
    target_nu: f64,
    grid: &Grid2D,
    psi: &TransverseProfile,
) -> Result<QuasimodeBundle> {
    let k = field.k();
    let (w, s1) = omega_min(field, OMEGA_SAMPLES)?;
    let beta = envelope_beta(k);
    let transverse = build_scaled_profile(h, w, psi, &grid.t)?;
    let wave = psi.alpha1 * w.powf(1.0 / (k as f64 + 2.0)) / h.powf(1.0 / (k as f64 + 2.0));
    let sigma2 = h.powf(2.0 * beta);
    let phi0 = field.phi(s1);

    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for is in 0..grid.s.points() {
        let offset = circle_offset(grid.s.node(is), s1);
        let bump = cutoff(offset);
        if bump == 0.0 {
            continue;
        }
        let phase = (field.phi(s1 + offset) - phi0) / h + wave * offset;
        let envelope = Complex64::from_polar(bump * (-offset * offset / (2.0 * sigma2)).exp(), phase);
        for (it, &psi_t) in transverse.iter().enumerate() {
            values[grid.index(is, it)] = envelope * psi_t;
        }
    }
    let area = grid.cell_area();
    let raw = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * area).sqrt();
    if !(raw > 0.0) {
        return Err(Error::Resolution("the s-grid misses the support of the cut-off".into()));
    }
    values.iter_mut().for_each(|v| *v /= raw);
    let norm = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * area).sqrt();

    let mut bundle = QuasimodeBundle {
        k,
        h,
        target_nu,
        mu: target_nu * energy_scale(k, h),
        alpha1: psi.alpha1,
        beta,
        s1,
        omega_min: w,
        grid: *grid,
        values,
        norm,
        residual: 0.0,
    };
    let op = if grid.periodic_s() {
        assemble_h0(field, h, grid)?
    } else {
        assemble_h_dirichlet(field, h, grid)?
    };
    bundle.residual = residual(&op, &bundle)?;
    Ok(bundle)
}

fn check_shape(op: &HermitianGridOperator, bundle: &QuasimodeBundle) -> Result<()> {
    if op.dim() != bundle.values.len() {
        return Err(Error::param(format!(
            "operator dimension {} does not match the bundle grid ({} nodes)",
            op.dim(),
            bundle.values.len()
        )));
    }
    let periodic_op = !matches!(op.boundary(), Boundary::Dirichlet);
    if periodic_op != bundle.grid.periodic_s() {
        return Err(Error::param("operator boundary does not match the bundle grid"));
    }
    Ok(())
}

/// `‖op Φ − μ Φ‖₂ / ‖Φ‖₂` on the shared grid.
pub fn residual(op: &HermitianGridOperator, bundle: &QuasimodeBundle) -> Result<f64> {
    check_shape(op, bundle)?;
    Ok(vector_residual(op, &bundle.values, bundle.mu))
}

pub(crate) fn vector_residual(op: &HermitianGridOperator, values: &[Complex64], mu: f64) -> f64 {
    let image = op.apply(values);
    let num: f64 = image
        .iter()
        .zip(values)
        .map(|(y, x)| (y - mu * x).norm_sqr())
        .sum();
    let den: f64 = values.iter().map(|x| x.norm_sqr()).sum();
    (num / den).sqrt()
}
