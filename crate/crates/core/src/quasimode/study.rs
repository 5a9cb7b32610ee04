use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bundle::{
    build_phi_from, cutoff, cutoff_derivative, envelope_beta, quasimode_grid, transverse_state,
    QuasimodeGridPolicy,
};
use super::profile::{build_psi, build_scaled_profile, profile_width, psi_grid, weighted_norm};
use crate::error::{Error, Result};
use crate::field::ModelField;
use crate::spectral::Grid1D;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval of the slope (Student t);
    /// absent with only two points.
    pub half_width: Option<f64>,
    pub points: usize,
}

/// Two-sided 97.5% Student-t quantiles for 1..=30 degrees of freedom.
const T_975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
    2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048,
    2.045, 2.042,
];

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::param("a log-log fit needs at least two matching points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::param("log-log fit needs positive finite data"));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::param("log-log fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = xs.len() - 2;
    let half_width = (dof > 0).then(|| {
        let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let quantile = T_975.get(dof - 1).copied().unwrap_or(1.96);
        quantile * (sse / dof as f64 / sxx).sqrt()
    });
    Ok(SlopeFit {
        slope,
        intercept,
        half_width,
        points: xs.len(),
    })
}

fn check_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.is_empty() || h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::param("h list must be non-empty and positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub k: u32,
    pub h: f64,
    pub target_nu: f64,
    pub alpha1: f64,
    pub mu: f64,
    pub residual: f64,
    /// Estimated discretisation error of `residual`, from one uniform
    /// refinement: `(4/3)|r(Δ) − r(Δ/2)|`.
    pub grid_err_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStudy {
    pub rows: Vec<ResidualRow>,
}

impl ResidualStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,h,target_nu,alpha1,mu,residual,grid_err_budget\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.k, r.h, r.target_nu, r.alpha1, r.mu, r.residual, r.grid_err_budget
            );
        }
        out
    }

    /// Fit of `ln residual` against `ln h`.
    pub fn fit(&self) -> Result<SlopeFit> {
        let hs: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        let rs: Vec<f64> = self.rows.iter().map(|r| r.residual).collect();
        log_log_fit(&hs, &rs)
    }

    /// Largest `grid_err_budget / residual` over the rows.
    pub fn worst_budget_ratio(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.grid_err_budget / r.residual)
            .fold(0.0, f64::max)
    }
}

/// Residuals of the trial state for every `h`, each with a grid-error
/// budget from a second, uniformly refined grid.
pub fn residual_study(
    field: &ModelField,
    target_nu: f64,
    h_list: &[f64],
    policy: &QuasimodeGridPolicy,
) -> Result<ResidualStudy> {
    check_h_list(h_list)?;
    let psi = transverse_state(field, target_nu)?;
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let grid = quasimode_grid(field, h, &psi, policy)?;
        let coarse = build_phi_from(field, h, target_nu, &grid, &psi)?;
        let fine = build_phi_from(field, h, target_nu, &grid.refined(), &psi)?;
        rows.push(ResidualRow {
            k: field.k(),
            h,
            target_nu,
            alpha1: psi.alpha1,
            mu: coarse.mu,
            residual: coarse.residual,
            grid_err_budget: 4.0 / 3.0 * (coarse.residual - fine.residual).abs(),
        });
    }
    Ok(ResidualStudy { rows })
}

/// Which norm a [`MomentCheck`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKind {
    /// `‖|s|^m E‖`, predicted `h^{βm}`.
    Envelope,
    /// `‖|s|^m E′‖`, predicted `h^{β(m−1)}`.
    EnvelopeDerivative,
    /// `‖t^{k+1} Ψ‖`, predicted `h^{(k+1)/(k+2)}`.
    Transverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub kind: MomentKind,
    pub k: u32,
    pub m: u32,
    pub beta: f64,
    /// `(h, norm)` pairs in the order of the input list.
    pub measured: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
}

impl MomentCheck {
    pub fn deviation(&self) -> f64 {
        (self.fitted_exponent - self.predicted_exponent).abs()
    }

    fn from_measurements(kind: MomentKind, k: u32, m: u32, beta: f64, measured: Vec<(f64, f64)>, predicted: f64) -> Result<Self> {
        let (hs, ns): (Vec<f64>, Vec<f64>) = measured.iter().copied().unzip();
        let fit = log_log_fit(&hs, &ns)?;
        Ok(MomentCheck {
            kind,
            k,
            m,
            beta,
            measured,
            fitted_exponent: fit.slope,
            predicted_exponent: predicted,
        })
    }
}

/// Quadrature nodes for the envelope norms on `[−π, π]`.
const ENVELOPE_NODES: usize = 40_001;

/// Envelope `E(s) = c χ(s) e^{−s²/(2h^{2β})}` normalised on the quadrature
/// grid, together with `E′`.
fn envelope_samples(h: f64, beta: f64) -> (Grid1D, Vec<f64>, Vec<f64>) {
    let grid = Grid1D::symmetric(std::f64::consts::PI, ENVELOPE_NODES).expect("static grid");
    let sigma2 = h.powf(2.0 * beta);
    let mut e = Vec::with_capacity(ENVELOPE_NODES);
    let mut de = Vec::with_capacity(ENVELOPE_NODES);
    for s in grid.nodes() {
        let g = (-s * s / (2.0 * sigma2)).exp();
        e.push(cutoff(s) * g);
        de.push((cutoff_derivative(s) - s / sigma2 * cutoff(s)) * g);
    }
    let c = 1.0 / weighted_norm(&grid, &e, 0.0);
    e.iter_mut().for_each(|v| *v *= c);
    de.iter_mut().for_each(|v| *v *= c);
    (grid, e, de)
}

fn check_moment_input(m: u32, h_list: &[f64]) -> Result<()> {
    if m > 3 {
        return Err(Error::param(format!("moment order must be 0..=3, got {m}")));
    }
    check_h_list(h_list)
}

fn resolve_beta(k: u32, beta: Option<f64>) -> Result<f64> {
    match beta {
        Some(b) if !(b > 0.0 && b.is_finite()) => Err(Error::param("beta override must be positive")),
        Some(b) => Ok(b),
        None => Ok(envelope_beta(k)),
    }
}

/// Fits `h ↦ ‖|s|^m E‖`; the default `β` is `1/(3(k+2))`.
pub fn moment_check(k: u32, m: u32, h_list: &[f64], beta: Option<f64>) -> Result<MomentCheck> {
    check_moment_input(m, h_list)?;
    let beta = resolve_beta(k, beta)?;
    let measured = h_list
        .iter()
        .map(|&h| {
            let (grid, e, _) = envelope_samples(h, beta);
            (h, weighted_norm(&grid, &e, m as f64))
        })
        .collect();
    MomentCheck::from_measurements(MomentKind::Envelope, k, m, beta, measured, beta * m as f64)
}

/// Fits `h ↦ ‖|s|^m E′‖` against `h^{β(m−1)}`.
pub fn derivative_moment_check(k: u32, m: u32, h_list: &[f64], beta: Option<f64>) -> Result<MomentCheck> {
    check_moment_input(m, h_list)?;
    let beta = resolve_beta(k, beta)?;
    let measured = h_list
        .iter()
        .map(|&h| {
            let (grid, _, de) = envelope_samples(h, beta);
            (h, weighted_norm(&grid, &de, m as f64))
        })
        .collect();
    MomentCheck::from_measurements(
        MomentKind::EnvelopeDerivative,
        k,
        m,
        beta,
        measured,
        beta * (m as f64 - 1.0),
    )
}

/// Fits `h ↦ ‖t^{k+1} Ψ‖` for the ground state of `Q(α₁, 1)` with
/// `ω_min = 1`, against `h^{(k+1)/(k+2)}`.
pub fn transverse_moment_check(k: u32, alpha1: f64, h_list: &[f64]) -> Result<MomentCheck> {
    check_h_list(h_list)?;
    let psi = build_psi(k, alpha1, &psi_grid(k, alpha1)?)?;
    let measured = h_list
        .iter()
        .map(|&h| {
            let ell = profile_width(k, h, 1.0);
            let grid = Grid1D::symmetric(psi.grid.upper() * ell, 4001)?;
            let values = build_scaled_profile(h, 1.0, &psi, &grid)?;
            Ok((h, weighted_norm(&grid, &values, (k + 1) as f64)))
        })
        .collect::<Result<Vec<_>>>()?;
    let kf = k as f64;
    MomentCheck::from_measurements(
        MomentKind::Transverse,
        k,
        k + 1,
        envelope_beta(k),
        measured,
        (kf + 1.0) / (kf + 2.0),
    )
}
