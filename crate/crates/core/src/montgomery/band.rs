use serde::{Deserialize, Serialize};

use super::cache;
use crate::error::{Error, Result};
use crate::spectral::{richardson, tridiag_lowest_eigs, Grid1D, TridiagonalOperator};

/// Interior node count of the coarse level of the Richardson pair.
pub const DEFAULT_NODES: usize = 4001;
/// Default accuracy for band evaluations.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_NODES: usize = 1 << 21;
const PROBE_NODES: usize = 801;
/// Target decay exponent `∫√(V − λ)` between turning point and truncation.
const AGMON_TARGET: f64 = 16.0;

/// Parameters of `Q(α, β) = −d²/dt² + (β t^{k+1}/(k+1) − α)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MontgomeryParams {
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
}

impl MontgomeryParams {
    pub fn new(k: u32, alpha: f64, beta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be positive"));
        }
        if !alpha.is_finite() || !beta.is_finite() || beta == 0.0 {
            return Err(Error::param(format!(
                "need finite alpha and nonzero beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(MontgomeryParams { k, alpha, beta })
    }

    pub fn potential(&self, t: f64) -> f64 {
        let kp1 = self.k as i32 + 1;
        let v = self.beta * t.powi(kp1) / kp1 as f64 - self.alpha;
        v * v
    }

    /// Natural length `|β|^{−1/(k+2)}`.
    fn width(&self) -> f64 {
        self.beta.abs().powf(-1.0 / (self.k as f64 + 2.0))
    }

    /// Largest `|t|` at which the potential vanishes (0 if it never does).
    fn turning_radius(&self) -> f64 {
        let kp1 = self.k as f64 + 1.0;
        let r = kp1 * self.alpha / self.beta;
        if r > 0.0 || self.k % 2 == 0 {
            r.abs().powf(1.0 / kp1)
        } else {
            0.0
        }
    }
}

/// Converged bottom of the spectrum of `Q(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub params: MontgomeryParams,
    pub lambda0: f64,
    pub tolerance: f64,
    /// Truncation half-length.
    pub length: f64,
    /// Interior nodes of the finest level used.
    pub nodes: usize,
}

/// Finite-difference matrix of `Q(α, β)` on `grid` with Dirichlet ends.
///
/// The grid must be symmetric and long enough that the potential at both
/// ends is at least four times a coarse estimate of `λ₀`.
pub fn assemble_q(params: &MontgomeryParams, grid: &Grid1D) -> Result<TridiagonalOperator> {
    if grid.is_periodic() || !grid.is_symmetric() {
        return Err(Error::param("assemble_q needs a symmetric Dirichlet grid"));
    }
    let length = grid.upper();
    let probe = assemble_unchecked(params, &Grid1D::symmetric(length, PROBE_NODES)?)?;
    let estimate = tridiag_lowest_eigs(&probe, 1, 1e-8)?[0].max(0.0);
    let required = 4.0 * estimate;
    let potential = params.potential(length).min(params.potential(-length));
    if potential < required {
        let mut suggested = length;
        while params.potential(suggested).min(params.potential(-suggested)) < 1.5 * required {
            suggested *= 1.25;
        }
        return Err(Error::DomainTooSmall {
            length,
            potential,
            required,
            suggested,
        });
    }
    assemble_unchecked(params, grid)
}

pub(crate) fn assemble_unchecked(
    params: &MontgomeryParams,
    grid: &Grid1D,
) -> Result<TridiagonalOperator> {
    let dt = grid.spacing();
    let kinetic = 1.0 / (dt * dt);
    let diagonal = (0..grid.points())
        .map(|i| 2.0 * kinetic + params.potential(grid.node(i)))
        .collect();
    let off = vec![-kinetic; grid.points() - 1];
    TridiagonalOperator::new(diagonal, off)
}

/// Number of eigenvalues below `mu` of `c·tridiag(−1, 2, −1) + diag(w)`.
///
/// Runs the Sturm recurrence on `p_i = q_i − c`, which satisfies
/// `p_i = w_i − μ + c·p_{i−1}/(c + p_{i−1})`. This avoids forming
/// `2c + w_i − μ`, whose rounding error `ε·c` would otherwise dominate the
/// bottom eigenvalue on fine grids.
fn chain_count(c: f64, w: &[f64], mu: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt() * c;
    let mut p = c + (w[0] - mu);
    let mut count = usize::from(c + p < 0.0);
    for &wi in &w[1..] {
        let mut q = c + p;
        if q.abs() < tiny {
            q = -tiny;
        }
        p = (wi - mu) + c * (p / q);
        if c + p < 0.0 {
            count += 1;
        }
    }
    count
}

/// Bottom eigenvalue of the discretised `Q(α, β)` on `grid`, by bisection.
pub fn lowest_on_grid(params: &MontgomeryParams, grid: &Grid1D) -> Result<f64> {
    let dt = grid.spacing();
    let c = 1.0 / (dt * dt);
    let w: Vec<f64> = (0..grid.points()).map(|i| params.potential(grid.node(i))).collect();
    let mut lo = w.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = lo + 1.0;
    while chain_count(c, &w, hi) == 0 {
        hi = lo + 2.0 * (hi - lo);
        if !hi.is_finite() {
            return Err(Error::Numerical {
                message: "no eigenvalue below the search ceiling".into(),
                lo,
                hi,
            });
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 * hi.abs().max(1.0) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if chain_count(c, &w, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Half-length at which the decay integral `∫√(V − λ)` measured from the
/// last turning point reaches the target on both sides, and the potential
/// exceeds `4λ`.
fn agmon_length(params: &MontgomeryParams, lambda: f64) -> f64 {
    let w = params.width();
    let dt = w / 400.0;
    let mut length: f64 = 0.0;
    for sign in [-1.0, 1.0] {
        let mut t = params.turning_radius();
        let mut decay = 0.0;
        loop {
            t += dt;
            let excess = params.potential(sign * t) - lambda;
            if excess <= 0.0 {
                decay = 0.0;
            } else {
                decay += excess.sqrt() * dt;
            }
            if decay >= AGMON_TARGET && excess >= 3.0 * lambda {
                break;
            }
        }
        length = length.max(t);
    }
    length
}

/// Symmetric truncation length for `Q(α, β)`.
pub fn truncation_length(params: &MontgomeryParams) -> Result<f64> {
    let w = params.width();
    let probe = params.turning_radius() + 8.0 * w;
    let coarse = lowest_on_grid(params, &Grid1D::symmetric(probe, PROBE_NODES)?)?;
    Ok(agmon_length(params, coarse.max(0.0) * 1.02 + 1e-3 * w.powi(-2)))
}

/// The default Richardson base grid for `Q(α, β)`.
pub fn band_grid(params: &MontgomeryParams) -> Result<Grid1D> {
    Grid1D::symmetric(truncation_length(params)?, DEFAULT_NODES)
}

/// Richardson-extrapolated bottom of the spectrum on a given base grid,
/// refining until successive extrapolations agree within `tol`.
///
/// Returns `(value, error estimate, finest node count)`.
pub(crate) fn converge_on(params: &MontgomeryParams, base: &Grid1D, tol: f64) -> Result<(f64, f64, usize)> {
    let mut fine_grid = base.refined();
    let mut coarse = lowest_on_grid(params, base)?;
    let mut fine = lowest_on_grid(params, &fine_grid)?;
    let (mut value, delta) = richardson(coarse, fine);
    if delta <= tol {
        return Ok((value, delta.max(f64::EPSILON * value.abs()), fine_grid.points()));
    }
    loop {
        fine_grid = fine_grid.refined();
        if fine_grid.points() > MAX_NODES {
            return Err(Error::Numerical {
                message: format!(
                    "band value for k = {}, alpha = {}, beta = {} did not reach tolerance {tol}",
                    params.k, params.alpha, params.beta
                ),
                lo: value - delta,
                hi: value + delta,
            });
        }
        coarse = fine;
        fine = lowest_on_grid(params, &fine_grid)?;
        let (next, _) = richardson(coarse, fine);
        let change = (next - value).abs();
        value = next;
        if change <= tol {
            let floor = f64::EPSILON * value.abs();
            return Ok((value, change.max(floor), fine_grid.points()));
        }
    }
}

/// Converged `λ₀(α, β)`; cached by rounded parameters.
pub fn lambda0(k: u32, alpha: f64, beta: f64, tol: f64) -> Result<BandPoint> {
    let params = MontgomeryParams::new(k, alpha, beta)?;
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    if let Some(hit) = cache::lookup(&params, tol) {
        return Ok(hit);
    }
    let base = band_grid(&params)?;
    let (value, tolerance, nodes) = converge_on(&params, &base, tol)?;
    let point = BandPoint {
        params,
        lambda0: value,
        tolerance,
        length: base.upper(),
        nodes,
    };
    cache::store(point, tol);
    Ok(point)
}

/// `β^{2/(k+2)} λ₀(β^{−1/(k+2)} α, 1)`.
pub fn lambda0_scaled(k: u32, alpha: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::param("scaling law needs beta > 0"));
    }
    let e = 1.0 / (k as f64 + 2.0);
    let reduced = lambda0(k, beta.powf(-e) * alpha, 1.0, DEFAULT_TOL)?;
    Ok(beta.powf(2.0 * e) * reduced.lambda0)
}

/// `(k+1)^{2k/(k+1)} α^{k/(k+1)}`.
pub fn asymptotic_lambda0(k: u32, alpha: f64) -> Result<f64> {
    if k == 0 || !(alpha > 0.0) {
        return Err(Error::param("asymptote needs k ≥ 1 and alpha > 0"));
    }
    let k = k as f64;
    Ok((k + 1.0).powf(2.0 * k / (k + 1.0)) * alpha.powf(k / (k + 1.0)))
}

/// `λ₀(Q(v·w/|w|, |w|)) + |v − (v·w/|w|²) w|²`.
pub fn pvw_lambda0(v: &[f64], w: &[f64], k: u32) -> Result<f64> {
    if v.len() != w.len() || v.is_empty() || v.len() > 3 {
        return Err(Error::param("v and w must share a dimension between 1 and 3"));
    }
    let ww: f64 = w.iter().map(|x| x * x).sum();
    if !(ww > 0.0) {
        return Err(Error::param("w must be nonzero"));
    }
    let vw: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    let norm_w = ww.sqrt();
    let perp: f64 = v
        .iter()
        .zip(w)
        .map(|(a, b)| {
            let d = a - vw / ww * b;
            d * d
        })
        .sum();
    Ok(lambda0(k, vw / norm_w, norm_w, DEFAULT_TOL)?.lambda0 + perp)
}
