use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth 2π-periodic function of the arclength coordinate `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `base + amplitude·(1 − cos(s − center))`.
    CosineBump {
        base: f64,
        amplitude: f64,
        #[serde(default)]
        center: f64,
    },
    /// Uniform periodic samples at `s_j = 2πj/n`, interpolated by a
    /// periodic cubic spline.
    Table {
        values: Vec<f64>,
        #[serde(skip)]
        curvature: Vec<f64>,
    },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Constant { value: 0.0 }
    }
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn cosine_bump(base: f64, amplitude: f64, center: f64) -> Self {
        Profile::CosineBump {
            base,
            amplitude,
            center,
        }
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        let mut p = Profile::Table {
            values,
            curvature: Vec::new(),
        };
        p.prepare()?;
        Ok(p)
    }

    /// Validates parameters and precomputes spline data. Called after
    /// deserialisation.
    pub(crate) fn prepare(&mut self) -> Result<()> {
        match self {
            Profile::Constant { value } if !value.is_finite() => {
                Err(Error::param("profile value must be finite"))
            }
            Profile::CosineBump {
                base,
                amplitude,
                center,
            } if !(base.is_finite() && amplitude.is_finite() && center.is_finite()) => {
                Err(Error::param("profile parameters must be finite"))
            }
            Profile::Table { values, curvature } => {
                if values.len() < 3 {
                    return Err(Error::param("table profiles need at least 3 samples"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("table samples must be finite"));
                }
                *curvature = periodic_spline_curvature(values);
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Constant { value } if *value == 0.0)
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::CosineBump {
                base,
                amplitude,
                center,
            } => base + amplitude * (1.0 - (s - center).cos()),
            Profile::Table { values, curvature } => {
                let (j, u, h) = locate(values.len(), s);
                let n = values.len();
                let (y0, y1) = (values[j], values[(j + 1) % n]);
                let (m0, m1) = (curvature[j], curvature[(j + 1) % n]);
                let w = 1.0 - u;
                w * y0 + u * y1 + h * h / 6.0 * ((w * w * w - w) * m0 + (u * u * u - u) * m1)
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { .. } => 0.0,
            Profile::CosineBump {
                amplitude, center, ..
            } => amplitude * (s - center).sin(),
            Profile::Table { values, curvature } => {
                let (j, u, h) = locate(values.len(), s);
                let n = values.len();
                let (y0, y1) = (values[j], values[(j + 1) % n]);
                let (m0, m1) = (curvature[j], curvature[(j + 1) % n]);
                let w = 1.0 - u;
                (y1 - y0) / h + h / 6.0 * ((1.0 - 3.0 * w * w) * m0 + (3.0 * u * u - 1.0) * m1)
            }
        }
    }

    /// `∫₀ˢ profile`, valid for any real `s`.
    pub fn antiderivative(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { value } => value * s,
            Profile::CosineBump {
                base,
                amplitude,
                center,
            } => (base + amplitude) * s - amplitude * ((s - center).sin() + center.sin()),
            Profile::Table { values, curvature } => {
                let n = values.len();
                let h = TAU / n as f64;
                let cell = |j: usize| {
                    h * 0.5 * (values[j] + values[(j + 1) % n])
                        - h * h * h / 24.0 * (curvature[j] + curvature[(j + 1) % n])
                };
                let period: f64 = (0..n).map(cell).sum();
                let turns = (s / TAU).floor();
                let (j, u, _) = locate(n, s);
                let whole: f64 = (0..j).map(cell).sum();
                let (y0, y1) = (values[j], values[(j + 1) % n]);
                let (m0, m1) = (curvature[j], curvature[(j + 1) % n]);
                let w = 1.0 - u;
                let partial = h * (y0 * (u - 0.5 * u * u) + y1 * 0.5 * u * u)
                    + h * h * h / 6.0
                        * (m0 * (-0.25 * w.powi(4) + 0.5 * w * w - 0.25)
                            + m1 * (0.25 * u.powi(4) - 0.5 * u * u));
                turns * period + whole + partial
            }
        }
    }

    /// Minimum over `n` uniform samples of one period.
    pub fn sampled_min(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| self.value(TAU * j as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sampled_max(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| self.value(TAU * j as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Cell index, local coordinate in `[0, 1)` and spacing for `s`.
fn locate(n: usize, s: f64) -> (usize, f64, f64) {
    let h = TAU / n as f64;
    let x = s.rem_euclid(TAU) / h;
    let j = (x.floor() as usize).min(n - 1);
    (j, x - j as f64, h)
}

/// Second derivatives of the periodic interpolating cubic spline:
/// `M_{j−1} + 4M_j + M_{j+1} = 6(y_{j+1} − 2y_j + y_{j−1})/h²`, solved as a
/// cyclic tridiagonal system (Sherman–Morrison).
fn periodic_spline_curvature(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let h = TAU / n as f64;
    let rhs: Vec<f64> = (0..n)
        .map(|j| 6.0 * (y[(j + 1) % n] - 2.0 * y[j] + y[(j + n - 1) % n]) / (h * h))
        .collect();
    // A = T + u vᵀ with corners folded into u = (γ,0,…,0,1), v = (1,0,…,0,1/γ)
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    let solve = |b: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = 1.0 / diag[0];
        d[0] = b[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - c[i - 1];
            c[i] = 1.0 / m;
            d[i] = (b[i] - d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    };
    let x = solve(&rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = solve(&u);
    let vx = x[0] + x[n - 1] / gamma;
    let vz = z[0] + z[n - 1] / gamma;
    let factor = vx / (1.0 + vz);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}
