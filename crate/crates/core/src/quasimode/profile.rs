use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montgomery::{assemble_q, band_grid, lowest_on_grid, MontgomeryParams};
use crate::spectral::{tridiag_eigenvector, Grid1D};

/// Fewest `t`-nodes per transverse width accepted by [`build_scaled_profile`].
pub const MIN_NODES_PER_WIDTH: f64 = 16.0;

/// Ground state of the discretised `Q(α₁, 1)` together with its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseProfile {
    pub k: u32,
    pub alpha1: f64,
    pub grid: Grid1D,
    /// Samples with `Σ ψ_i² Δt = 1`.
    pub values: Vec<f64>,
    pub eigenvalue: f64,
}

impl TransverseProfile {
    /// `ψ(τ)` by cubic Lagrange interpolation on the four nearest nodes,
    /// counting the zero boundary values of the Dirichlet grid as nodes;
    /// zero outside the grid.
    pub fn interpolate(&self, tau: f64) -> f64 {
        let n = self.values.len() + 2;
        let x = (tau - self.grid.lower()) / self.grid.spacing();
        if !(x >= 0.0 && x <= (n - 1) as f64) {
            return 0.0;
        }
        let sample = |j: usize| if j == 0 || j == n - 1 { 0.0 } else { self.values[j - 1] };
        if n < 4 {
            return sample((x.round() as usize).min(n - 1));
        }
        let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = x - base as f64;
        let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
        let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
        let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
        sample(base) * l0 + sample(base + 1) * l1 + sample(base + 2) * l2 + sample(base + 3) * l3
    }
}

/// Default grid for [`build_psi`]: the truncation rule of the band solver.
pub fn psi_grid(k: u32, alpha1: f64) -> Result<Grid1D> {
    band_grid(&MontgomeryParams::new(k, alpha1, 1.0)?)
}

/// Unit-norm ground state `ψ` of `Q(α₁, 1)` on `grid` and its eigenvalue.
pub fn build_psi(k: u32, alpha1: f64, grid: &Grid1D) -> Result<TransverseProfile> {
    let params = MontgomeryParams::new(k, alpha1, 1.0)?;
    let op = assemble_q(&params, grid)?;
    let eigenvalue = lowest_on_grid(&params, grid)?;
    let mut values = tridiag_eigenvector(&op, eigenvalue)?;
    let norm = (values.iter().map(|v| v * v).sum::<f64>() * grid.spacing()).sqrt();
    values.iter_mut().for_each(|v| *v /= norm);
    Ok(TransverseProfile {
        k,
        alpha1,
        grid: *grid,
        values,
        eigenvalue,
    })
}

/// Transverse width `ℓ = (h/ω_min)^{1/(k+2)}`.
pub fn profile_width(k: u32, h: f64, omega_min: f64) -> f64 {
    (h / omega_min).powf(1.0 / (k as f64 + 2.0))
}

/// `Ψ(t) = ℓ^{−1/2} ψ(t/ℓ)` sampled on `t_grid`, normalised so that
/// `Σ Ψ_i² Δt = 1`.
pub fn build_scaled_profile(h: f64, omega_min: f64, psi: &TransverseProfile, t_grid: &Grid1D) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) || !(omega_min > 0.0) {
        return Err(Error::param("h and omega_min must be positive"));
    }
    let ell = profile_width(psi.k, h, omega_min);
    let per_width = ell / t_grid.spacing();
    if per_width < MIN_NODES_PER_WIDTH {
        return Err(Error::Resolution(format!(
            "t-grid has {per_width:.2} nodes per transverse width {ell:e}; at least {MIN_NODES_PER_WIDTH} are needed"
        )));
    }
    let scale = ell.powf(-0.5);
    let mut values: Vec<f64> = t_grid.nodes().iter().map(|&t| scale * psi.interpolate(t / ell)).collect();
    let norm = (values.iter().map(|v| v * v).sum::<f64>() * t_grid.spacing()).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Resolution("t-grid misses the support of the profile".into()));
    }
    values.iter_mut().for_each(|v| *v /= norm);
    Ok(values)
}

/// `(Σ |t_i|^{2p} v_i² Δt)^{1/2}`.
pub(crate) fn weighted_norm(grid: &Grid1D, values: &[f64], power: f64) -> f64 {
    let sum: f64 = grid
        .nodes()
        .iter()
        .zip(values)
        .map(|(t, v)| t.abs().powf(2.0 * power) * v * v)
        .sum();
    (sum * grid.spacing()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montgomery::nu_hat;

    #[test]
    fn ground_state_at_the_band_minimum() {
        let m = nu_hat(1, 1e-8).unwrap();
        let psi = build_psi(1, m.alpha_min, &psi_grid(1, m.alpha_min).unwrap()).unwrap();
        assert!((psi.eigenvalue - 0.5698).abs() < 2e-3);
        let norm: f64 = psi.values.iter().map(|v| v * v).sum::<f64>() * psi.grid.spacing();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn even_potential_gives_even_state() {
        let grid = psi_grid(2, 0.0).unwrap();
        let psi = build_psi(2, 0.0, &grid).unwrap();
        let n = psi.values.len();
        for i in 0..n / 2 {
            assert!((psi.values[i] - psi.values[n - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let grid = Grid1D::symmetric(2.0, 41).unwrap();
        let f = |x: f64| (x * x - 4.0) * (x - 0.3);
        let psi = TransverseProfile {
            k: 1,
            alpha1: 0.0,
            grid,
            values: grid.nodes().iter().map(|&x| f(x)).collect(),
            eigenvalue: 0.0,
        };
        for &x in &[-2.0, -1.99, -1.234, 0.0, 0.377, 1.95, 2.0] {
            assert!((psi.interpolate(x) - f(x)).abs() < 1e-12, "{x}");
        }
        assert_eq!(psi.interpolate(2.5), 0.0);
    }

    #[test]
    fn coarse_t_grid_is_a_resolution_error() {
        let psi = build_psi(1, 0.5, &psi_grid(1, 0.5).unwrap()).unwrap();
        let coarse = Grid1D::symmetric(1.0, 21).unwrap();
        assert!(matches!(
            build_scaled_profile(0.01, 1.0, &psi, &coarse),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn width_scales_with_h() {
        let psi = build_psi(1, 0.5, &psi_grid(1, 0.5).unwrap()).unwrap();
        let spread = |h: f64| {
            let ell = profile_width(1, h, 1.0);
            let grid = Grid1D::symmetric(12.0 * ell, 801).unwrap();
            let v = build_scaled_profile(h, 1.0, &psi, &grid).unwrap();
            let mean: f64 = grid.nodes().iter().zip(&v).map(|(t, x)| t * x * x).sum::<f64>() * grid.spacing();
            let second: f64 = grid.nodes().iter().zip(&v).map(|(t, x)| t * t * x * x).sum::<f64>() * grid.spacing();
            (second - mean * mean).sqrt()
        };
        let ratio = spread(0.005) / spread(0.01);
        assert!((ratio / 2f64.powf(-1.0 / 3.0) - 1.0).abs() < 0.02, "{ratio}");
    }
}
