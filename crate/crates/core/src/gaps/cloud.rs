use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::periodic::{bloch_grid, bloch_operator, canonical_theta, PeriodicField};
use crate::error::{Error, Result};
use crate::model2d::GridPolicy;
use crate::montgomery::nu_hat;
use crate::quasimode::energy_scale;
use crate::spectral::{sparse_lowest_eigs, Grid2D};

/// Default number of quasimomenta per axis.
pub const DEFAULT_THETA_COUNT: usize = 12;
/// Default number of eigenvalues per fiber.
pub const DEFAULT_BANDS: usize = 12;
/// Fiber residual tolerance relative to the operator norm bound. Far below
/// any merge tolerance met in practice.
pub const CLOUD_TOLERANCE: f64 = 1e-8;

/// Lowest `m` eigenvalues of every fiber on a uniform `n × n` grid of
/// quasimomenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCloud {
    pub h: f64,
    /// Points per axis.
    pub theta_count: usize,
    /// `(θ_s, θ_t)` in row-major order over `(i_s, i_t)`.
    pub theta_grid: Vec<[f64; 2]>,
    /// Sorted eigenvalues per quasimomentum.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Twice the largest drift of a sorted eigenvalue between adjacent
    /// quasimomenta, divided by the spacing `Δθ`.
    pub lipschitz_bound: f64,
}

impl SpectrumCloud {
    /// Builds a cloud from precomputed fiber spectra (row-major over an
    /// `n × n` grid), deriving the Lipschitz bound.
    pub fn from_fibers(h: f64, theta_count: usize, eigenvalues: Vec<Vec<f64>>) -> Result<Self> {
        let n = theta_count;
        if n < 1 || eigenvalues.len() != n * n {
            return Err(Error::param(format!(
                "expected {} fiber spectra, got {}",
                n * n,
                eigenvalues.len()
            )));
        }
        let m = eigenvalues[0].len();
        if m == 0 || eigenvalues.iter().any(|e| e.len() != m) {
            return Err(Error::param("every fiber needs the same positive number of eigenvalues"));
        }
        let mut eigenvalues = eigenvalues;
        for e in &mut eigenvalues {
            e.sort_by(f64::total_cmp);
        }
        let step = theta_step(n);
        let mut drift: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let here = &eigenvalues[i * n + j];
                for other in [&eigenvalues[((i + 1) % n) * n + j], &eigenvalues[i * n + (j + 1) % n]] {
                    for (a, b) in here.iter().zip(other) {
                        drift = drift.max((a - b).abs());
                    }
                }
            }
        }
        let theta_grid = (0..n)
            .flat_map(|i| (0..n).map(move |j| [i as f64 * step, j as f64 * step]))
            .collect();
        Ok(SpectrumCloud {
            h,
            theta_count: n,
            theta_grid,
            eigenvalues,
            lipschitz_bound: 2.0 * drift / step,
        })
    }

    pub fn bands(&self) -> usize {
        self.eigenvalues[0].len()
    }

    pub fn theta_step(&self) -> f64 {
        theta_step(self.theta_count)
    }

    /// Merge tolerance `η = lipschitz_bound · Δθ`.
    pub fn merge_tolerance(&self) -> f64 {
        self.lipschitz_bound * self.theta_step()
    }

    /// Highest energy below which every fiber contributes all its
    /// eigenvalues: the minimum over `θ` of the `m`-th eigenvalue.
    pub fn reliable_ceiling(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| *e.last().unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    /// All cloud values, sorted.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min(&self) -> f64 {
        self.sorted_values()[0]
    }
}

fn theta_step(n: usize) -> f64 {
    TAU / n as f64
}

/// Fiber spectra on the `theta_count × theta_count` quasimomentum grid.
pub fn spectrum_cloud(
    field: &PeriodicField,
    h: f64,
    theta_count: usize,
    m: usize,
    grid: &Grid2D,
) -> Result<SpectrumCloud> {
    if theta_count < 4 {
        return Err(Error::param(format!("need at least 4 quasimomenta per axis, got {theta_count}")));
    }
    if m == 0 {
        return Err(Error::param("need at least one eigenvalue per fiber"));
    }
    let step = theta_step(theta_count);
    let mut spectra = Vec::with_capacity(theta_count * theta_count);
    for i in 0..theta_count {
        for j in 0..theta_count {
            let theta = [canonical_theta(i as f64 * step), canonical_theta(j as f64 * step)];
            let op = bloch_operator(field, h, theta, grid)?;
            spectra.push(sparse_lowest_eigs(&op, m, 0.0, CLOUD_TOLERANCE * op.norm_bound())?);
        }
    }
    SpectrumCloud::from_fibers(h, theta_count, spectra)
}

/// Gaps found in an energy window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub h: f64,
    pub window: [f64; 2],
    /// Disjoint open intervals, sorted.
    pub gaps: Vec<[f64; 2]>,
    pub merge_tol: f64,
    pub count: usize,
}

impl GapReport {
    pub fn widths(&self) -> Vec<f64> {
        self.gaps.iter().map(|g| g[1] - g[0]).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Gaps of the cloud in `window` with merge tolerance `η` from the cloud.
pub fn detect_gaps(cloud: &SpectrumCloud, window: (f64, f64)) -> Result<GapReport> {
    detect_gaps_with(cloud, window, cloud.merge_tolerance())
}

/// Gap detection with an explicit merge tolerance `η`.
///
/// Sorted cloud values closer than `η` form clusters; a gap is the open
/// interval between two consecutive clusters, both inside the window,
/// that is wider than `2η`. Spaces between the window edges and the first
/// or last cluster are not reported, since the spectrum outside the
/// window is not inspected.
pub fn detect_gaps_with(cloud: &SpectrumCloud, window: (f64, f64), eta: f64) -> Result<GapReport> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::param(format!("window must satisfy lo < hi, got ({lo}, {hi})")));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::param("merge tolerance must be nonnegative"));
    }
    let ceiling = cloud.reliable_ceiling();
    if hi > ceiling {
        return Err(Error::param(format!(
            "window top {hi} lies above the reliable ceiling {ceiling} of the {}-band cloud",
            cloud.bands()
        )));
    }
    let values: Vec<f64> = cloud.sorted_values();
    let mut gaps = Vec::new();
    for pair in values.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a > 2.0 * eta && a >= lo && b <= hi {
            gaps.push([a, b]);
        }
    }
    Ok(GapReport {
        h: cloud.h,
        window: [lo, hi],
        count: gaps.len(),
        gaps,
        merge_tol: eta,
    })
}

/// Gap counts in rescaled windows `[a, b]·h^{(2k+2)/(k+2)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCountTable {
    pub k: u32,
    pub window_coefficients: [f64; 2],
    pub h_values: Vec<f64>,
    pub counts: Vec<usize>,
    /// Least-squares `C` in `count ≈ C·h^{−2/(3(k+2))}`.
    pub envelope_constant: f64,
    pub envelope_exponent: f64,
}

impl GapCountTable {
    pub fn envelope(&self, h: f64) -> f64 {
        self.envelope_constant * h.powf(-self.envelope_exponent)
    }

    /// Whether the counts never decrease as `h` decreases (plateaus allowed).
    pub fn is_nondecreasing(&self) -> bool {
        let mut order: Vec<usize> = (0..self.h_values.len()).collect();
        order.sort_by(|&a, &b| self.h_values[b].total_cmp(&self.h_values[a]));
        order.windows(2).all(|w| self.counts[w[1]] >= self.counts[w[0]])
    }
}

/// Options for [`gap_count_scaling`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudOptions {
    pub theta_count: usize,
    pub bands: usize,
    pub policy: GridPolicy,
}

impl Default for CloudOptions {
    fn default() -> Self {
        CloudOptions {
            theta_count: DEFAULT_THETA_COUNT,
            bands: DEFAULT_BANDS,
            policy: GridPolicy::default(),
        }
    }
}

/// Gap counts for every `h` in the window `[a, b]·h^{(2k+2)/(k+2)}`, with
/// the envelope `C·h^{−2/(3(k+2))}` fitted to the counts. The periodic
/// fields have `k = 1`.
pub fn gap_count_scaling(
    field: &PeriodicField,
    k: u32,
    window: (f64, f64),
    h_list: &[f64],
    options: &CloudOptions,
) -> Result<GapCountTable> {
    if k != 1 {
        return Err(Error::param(format!("periodic fields vanish to order 1, got k = {k}")));
    }
    let (a, b) = window;
    let (w, _) = field.omega_min()?;
    let threshold = nu_hat(k, 1e-8)?.nu_hat * w.powf(2.0 / (k as f64 + 2.0));
    if !(a > threshold && b > a) {
        return Err(Error::param(format!(
            "window coefficients must satisfy {threshold} < a < b, got ({a}, {b})"
        )));
    }
    if h_list.is_empty() || h_list.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::param("h list must be non-empty and positive"));
    }
    let exponent = 2.0 / (3.0 * (k as f64 + 2.0));
    let mut counts = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let grid = bloch_grid(field, h, &options.policy)?;
        let cloud = spectrum_cloud(field, h, options.theta_count, options.bands, &grid)?;
        let scale = energy_scale(k, h);
        counts.push(detect_gaps(&cloud, (a * scale, b * scale))?.count);
    }
    let (num, den) = h_list.iter().zip(&counts).fold((0.0, 0.0), |(n, d), (&h, &c)| {
        let x = h.powf(-exponent);
        (n + c as f64 * x, d + x * x)
    });
    Ok(GapCountTable {
        k,
        window_coefficients: [a, b],
        h_values: h_list.to_vec(),
        counts,
        envelope_constant: num / den,
        envelope_exponent: exponent,
    })
}
