use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::band::{asymptotic_lambda0, band_grid, converge_on, lambda0, MontgomeryParams, DEFAULT_TOL};
use crate::error::{Error, Result};

const SCAN_POINTS: usize = 48;
const WIDEN_RETRIES: usize = 3;

/// Minimum of the band function `α ↦ λ₀(α, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandMinimum {
    pub k: u32,
    #[serde(rename = "nu_hat")]
    pub nu_hat: f64,
    #[serde(rename = "alpha_min")]
    pub alpha_min: f64,
    #[serde(rename = "tol")]
    pub tolerance: f64,
    /// Set when the scan saw more than one local minimum.
    #[serde(skip)]
    pub multiple_minima: bool,
}

impl BandMinimum {
    /// For even `k` the band is even in α and `−alpha_min` is a minimiser too.
    pub fn symmetric_partner(&self) -> Option<f64> {
        (self.k % 2 == 0).then_some(-self.alpha_min)
    }
}

fn band(k: u32, alpha: f64, tol: f64) -> Result<f64> {
    Ok(lambda0(k, alpha, 1.0, tol)?.lambda0)
}

/// Minimises `λ₀(·, 1)`: coarse scan of `[0, α_asym]`, where the harmonic
/// asymptote equals `2λ₀(0, 1)`, followed by golden-section search. For
/// even `k` only `α ≥ 0` is searched.
pub fn nu_hat(k: u32, tol: f64) -> Result<BandMinimum> {
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let inner = (tol * 1e-2).clamp(1e-11, DEFAULT_TOL);
    let at_zero = band(k, 0.0, inner)?;
    let kf = k as f64;
    // asymptote(α) = 2 λ₀(0,1)
    let mut hi = (2.0 * at_zero / (kf + 1.0).powf(2.0 * kf / (kf + 1.0))).powf((kf + 1.0) / kf);
    debug_assert!((asymptotic_lambda0(k, hi)? - 2.0 * at_zero).abs() < 1e-9);

    for attempt in 0..=WIDEN_RETRIES {
        let step = hi / (SCAN_POINTS - 1) as f64;
        let samples: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| band(k, i as f64 * step, inner))
            .collect::<Result<_>>()?;
        let best = (0..SCAN_POINTS)
            .min_by(|&a, &b| samples[a].total_cmp(&samples[b]))
            .unwrap();
        if best == SCAN_POINTS - 1 {
            if attempt == WIDEN_RETRIES {
                break;
            }
            hi *= 2.0;
            continue;
        }
        let local_minima = (1..SCAN_POINTS - 1)
            .filter(|&i| samples[i] < samples[i - 1] && samples[i] <= samples[i + 1])
            .count()
            + usize::from(samples[0] < samples[1]);
        let lo = if best == 0 { 0.0 } else { (best - 1) as f64 * step };
        let (alpha_min, nu) = golden(|a| band(k, a, inner), lo, (best + 1) as f64 * step, tol.sqrt())?;
        let (alpha_min, nu) = if samples[0] <= nu { (0.0, samples[0]) } else { (alpha_min, nu) };
        if k % 2 == 1 && alpha_min <= 0.0 {
            return Err(Error::Bracket(format!(
                "band minimum for odd k = {k} found at alpha = {alpha_min}"
            )));
        }
        return Ok(BandMinimum {
            k,
            nu_hat: nu,
            alpha_min,
            tolerance: tol,
            multiple_minima: local_minima > 1,
        });
    }
    Err(Error::Bracket(format!(
        "band function still decreasing at alpha = {hi} after {WIDEN_RETRIES} widenings"
    )))
}

/// Golden-section minimisation on `[a, b]` down to width `width`.
fn golden(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64)> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > width {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

fn cached_minimum(k: u32) -> Result<BandMinimum> {
    static TABLE: OnceLock<Mutex<HashMap<u32, BandMinimum>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = table.lock().unwrap_or_else(|e| e.into_inner()).get(&k) {
        return Ok(*m);
    }
    let m = nu_hat(k, 1e-9)?;
    table.lock().unwrap_or_else(|e| e.into_inner()).insert(k, m);
    Ok(m)
}

/// Central difference of `λ₀(·, 1)` at 0 with step `10⁻⁴`. Both band
/// values use the same truncation and grids.
pub fn band_derivative_at_zero(k: u32) -> Result<f64> {
    if k % 2 == 0 {
        return Err(Error::param(format!(
            "the derivative at zero is only defined for odd k (got {k}); it vanishes by parity"
        )));
    }
    let step = 1e-4;
    let params = MontgomeryParams::new(k, 0.0, 1.0)?;
    let grid = band_grid(&params)?;
    let plus = converge_on(&MontgomeryParams::new(k, step, 1.0)?, &grid, 1e-9)?.0;
    let minus = converge_on(&MontgomeryParams::new(k, -step, 1.0)?, &grid, 1e-9)?.0;
    Ok((plus - minus) / (2.0 * step))
}

/// Solves `λ₀(α, 1) = target` on the increasing branch `α ≥ α_min`.
pub fn invert_band(k: u32, target: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !target.is_finite() {
        return Err(Error::param("invert_band needs a finite target and positive tolerance"));
    }
    let minimum = cached_minimum(k)?;
    if target < minimum.nu_hat + tol {
        return Err(Error::NoSolution {
            target,
            minimum: minimum.nu_hat,
        });
    }
    let inner = (tol * 1e-2).clamp(1e-11, DEFAULT_TOL);
    let kf = k as f64;
    let mut lo = minimum.alpha_min;
    let mut hi = (target / (kf + 1.0).powf(2.0 * kf / (kf + 1.0)))
        .powf((kf + 1.0) / kf)
        .max(lo + 1.0);
    let mut widen = 0;
    while band(k, hi, inner)? < target {
        lo = hi;
        hi = 2.0 * hi + 1.0;
        widen += 1;
        if widen > 60 {
            return Err(Error::Bracket(format!("no upper bracket for target {target}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = band(k, mid, inner)?;
        if (value - target).abs() <= 0.5 * tol || hi - lo <= 1e-15 * hi.abs().max(1.0) {
            return Ok(mid);
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical {
        message: format!("band inversion for target {target} did not converge"),
        lo,
        hi,
    })
}
