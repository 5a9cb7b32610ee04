use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::assemble::{assemble_k, assemble_model, lowest_eigs_model};
use crate::error::{Error, Result};
use crate::field::{omega_min, ModelField, TaylorField};
use crate::montgomery::nu_hat;
use crate::spectral::{richardson, Boundary, Grid1D, Grid2D};

/// Grid resolution rules for the 2D model studies, in units of the
/// transverse length `ℓ = (h/ω_min)^{1/(k+2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    /// Nodes per `ℓ` along `s` on the coarse level.
    pub s_per_width: f64,
    /// Nodes per `ℓ` along `t` on the coarse level.
    pub t_per_width: f64,
    /// Strip half-width in units of `ℓ`; `None` picks a decay-based value.
    pub t_extent: Option<f64>,
    /// Largest admissible grid-error estimate relative to `h^{(2k+2)/(k+2)}·target`.
    pub max_error_fraction: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            s_per_width: 4.0,
            t_per_width: 8.0,
            t_extent: None,
            max_error_fraction: 0.1,
        }
    }
}

/// Transverse length `(h/ω)^{1/(k+2)}`.
pub fn transverse_length(k: u32, h: f64, omega: f64) -> f64 {
    (h / omega).powf(1.0 / (k as f64 + 2.0))
}

/// Strip half-width in units of `ℓ` at which the decay integral of the
/// scaled transverse potential reaches about 12.
pub fn default_t_extent(k: u32) -> f64 {
    let k = k as f64;
    (12.0 * (k + 1.0) * (k + 2.0)).powf(1.0 / (k + 2.0)) + 1.0
}

/// Rescaled bottoms `h^{−(2k+2)/(k+2)} λ₀(H^h_D)` along a decreasing `h` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub k: u32,
    pub h_values: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub rescaled: Vec<f64>,
    pub target: f64,
    pub grid_nodes_s: Vec<usize>,
    pub grid_nodes_t: Vec<usize>,
    pub est_grid_error: Vec<f64>,
}

impl ScalingStudy {
    /// Successive differences of the rescaled values.
    pub fn deltas(&self) -> Vec<f64> {
        self.rescaled.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn is_decreasing(&self) -> bool {
        self.deltas().iter().all(|&d| d < 0.0)
    }

    /// `(last rescaled − target)/target`.
    pub fn final_gap(&self) -> Option<f64> {
        self.rescaled.last().map(|r| (r - self.target) / self.target)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,lambda0,rescaled,target,grid_nodes_s,grid_nodes_t,est_grid_error\n");
        for i in 0..self.h_values.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.h_values[i],
                self.lambda0[i],
                self.rescaled[i],
                self.target,
                self.grid_nodes_s[i],
                self.grid_nodes_t[i],
                self.est_grid_error[i]
            );
        }
        out
    }
}

/// Grids for the Dirichlet one-well operator at semiclassical parameter `h`:
/// `s ∈ [s₁ − π, s₁ + π]` around the minimiser of `ω`, `|t| ≤ T`.
pub fn dirichlet_grid(field: &ModelField, h: f64, policy: &GridPolicy) -> Result<Grid2D> {
    let (w_min, s1) = omega_min(field, 256)?;
    let ell = transverse_length(field.k(), h, w_min);
    let extent = (policy.t_extent.unwrap_or_else(|| default_t_extent(field.k())) * ell).min(field.max_extent());
    let ns = ((2.0 * PI / ell * policy.s_per_width).ceil() as usize).max(2) - 1;
    let nt = ((2.0 * extent / ell * policy.t_per_width).ceil() as usize).max(2) - 1;
    Ok(Grid2D::new(
        Grid1D::new(s1 - PI, s1 + PI, ns)?,
        Grid1D::symmetric(extent, nt)?,
    ))
}

/// Lowest Dirichlet eigenvalue on `grid` and on its uniform refinement,
/// combined by Richardson extrapolation.
fn extrapolated_bottom(field: &ModelField, h: f64, grid: &Grid2D, shift: f64) -> Result<(f64, f64)> {
    let coarse = lowest_eigs_model(&assemble_model(field, h, grid, Boundary::Dirichlet, shift)?, 1)?[0];
    let fine_grid = grid.refined();
    let fine = lowest_eigs_model(&assemble_model(field, h, &fine_grid, Boundary::Dirichlet, shift)?, 1)?[0];
    Ok(richardson(coarse, fine))
}

/// Scaling study of the Dirichlet one-well bottom.
///
/// The potential is shifted by the constant `α_min ω_min ℓ^{k+1}` before
/// assembly; on a Dirichlet rectangle this is a gauge change that only
/// removes the mean oscillation of the ground state along `s`.
pub fn conjecture_study(field: &ModelField, h_list: &[f64], policy: &GridPolicy) -> Result<ScalingStudy> {
    if h_list.is_empty() {
        return Err(Error::param("h list is empty"));
    }
    if h_list.iter().any(|&h| !(h > 0.0)) || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("h list must be positive and strictly decreasing"));
    }
    let k = field.k();
    let kf = k as f64;
    let (w_min, _) = omega_min(field, 256)?;
    let minimum = nu_hat(k, 1e-8)?;
    let target = minimum.nu_hat * w_min.powf(2.0 / (kf + 2.0));
    let power = (2.0 * kf + 2.0) / (kf + 2.0);

    let mut study = ScalingStudy {
        k,
        h_values: Vec::new(),
        lambda0: Vec::new(),
        rescaled: Vec::new(),
        target,
        grid_nodes_s: Vec::new(),
        grid_nodes_t: Vec::new(),
        est_grid_error: Vec::new(),
    };
    for &h in h_list {
        let grid = dirichlet_grid(field, h, policy)?;
        let ell = transverse_length(k, h, w_min);
        let shift = minimum.alpha_min * w_min * ell.powi(k as i32 + 1);
        let (value, error) = extrapolated_bottom(field, h, &grid, shift)?;
        let scale = h.powf(power);
        let limit = policy.max_error_fraction * scale * target;
        if error > limit {
            // second-order scheme: error shrinks like the square of the spacing
            let factor = (error / limit).sqrt();
            let required = (grid.s.points().max(grid.t.points()) as f64 * factor).ceil() as usize;
            return Err(Error::GridPolicy {
                message: format!(
                    "estimated grid error {error:e} at h = {h} exceeds {limit:e}"
                ),
                required_nodes: required,
            });
        }
        study.h_values.push(h);
        study.lambda0.push(value);
        study.rescaled.push(value / scale);
        study.grid_nodes_s.push(grid.s.points());
        study.grid_nodes_t.push(grid.t.points());
        study.est_grid_error.push(error);
    }
    Ok(study)
}

/// Lowest eigenvalues of `K^h` against the dilated spectrum of `K¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationStudy {
    pub k: u32,
    /// Half-width of the `h = 1` square.
    pub radius: f64,
    pub nodes: usize,
    pub reference: Vec<f64>,
    pub h_values: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    /// `|λ_j(K^h) − h^{(2k+2)/(k+2)} λ_j(K¹)| / (h^{(2k+2)/(k+2)} λ_j(K¹))`.
    pub relative_error: Vec<Vec<f64>>,
}

impl DilationStudy {
    pub fn max_relative_error(&self) -> f64 {
        self.relative_error.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,index,lambda,dilated_reference,relative_error\n");
        let power = (2.0 * self.k as f64 + 2.0) / (self.k as f64 + 2.0);
        for (i, &h) in self.h_values.iter().enumerate() {
            for (j, &v) in self.eigenvalues[i].iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{h},{j},{v},{},{}",
                    h.powf(power) * self.reference[j],
                    self.relative_error[i][j]
                );
            }
        }
        out
    }
}

/// Compares the `count` lowest eigenvalues of `K^h` on the square of
/// half-width `radius·h^{1/(k+2)}` with those of `K¹` on `[−radius, radius]²`,
/// both with `nodes` interior nodes per axis.
pub fn dilation_study(
    field: &TaylorField,
    h_list: &[f64],
    count: usize,
    radius: f64,
    nodes: usize,
) -> Result<DilationStudy> {
    if h_list.is_empty() || h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::param("h list must be non-empty and positive"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param(format!("radius must be positive, got {radius}")));
    }
    let k = field.k() as f64;
    let square = |r: f64| -> Result<Grid2D> {
        let g = Grid1D::symmetric(r, nodes)?;
        Ok(Grid2D::new(g, g))
    };
    let reference = lowest_eigs_model(&assemble_k(field, 1.0, &square(radius)?)?, count)?;
    let power = (2.0 * k + 2.0) / (k + 2.0);
    let mut study = DilationStudy {
        k: field.k(),
        radius,
        nodes,
        reference: reference.clone(),
        h_values: h_list.to_vec(),
        eigenvalues: Vec::new(),
        relative_error: Vec::new(),
    };
    for &h in h_list {
        let grid = square(radius * h.powf(1.0 / (k + 2.0)))?;
        let values = lowest_eigs_model(&assemble_k(field, h, &grid)?, count)?;
        let errors = values
            .iter()
            .zip(&reference)
            .map(|(v, r)| (v - h.powf(power) * r).abs() / (h.powf(power) * r))
            .collect();
        study.eigenvalues.push(values);
        study.relative_error.push(errors);
    }
    Ok(study)
}
