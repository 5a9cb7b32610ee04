use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::profile::Profile;
use crate::error::{Error, Result};

/// Default upper bound on `ω(s)·|t|^k` over the assembled strip.
pub const DEFAULT_VALIDITY: f64 = 4.0;

const POSITIVITY_SAMPLES: usize = 4096;

/// JSON form of a [`ModelField`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFieldSpec {
    pub k: u32,
    pub omega: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Largest admissible field intensity `ω(s)|t|^k` on the strip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity: Option<f64>,
}

/// Model field `b(s,t) = ω(s) t^k` on the cylinder `s ∈ ℝ/2πℤ`, in the
/// normal gauge `A = (a₀(s) + ω(s) t^{k+1}/(k+1), 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelField {
    k: u32,
    omega: Profile,
    baseline: Profile,
    description: String,
    validity: f64,
}

impl ModelField {
    pub fn new(k: u32, omega: Profile, baseline: Profile) -> Result<Self> {
        ModelField::from_spec(ModelFieldSpec {
            k,
            omega,
            baseline: Some(baseline),
            description: None,
            validity: None,
        })
    }

    /// `ω ≡ value`, zero baseline.
    pub fn uniform(k: u32, value: f64) -> Result<Self> {
        ModelField::new(k, Profile::constant(value), Profile::default())
    }

    pub fn from_spec(spec: ModelFieldSpec) -> Result<Self> {
        if spec.k == 0 {
            return Err(Error::param("vanishing order k must be positive"));
        }
        let mut omega = spec.omega;
        omega.prepare()?;
        let mut baseline = spec.baseline.unwrap_or_default();
        baseline.prepare()?;
        let lowest = omega.sampled_min(POSITIVITY_SAMPLES);
        if !(lowest > 0.0) {
            return Err(Error::param(format!(
                "omega profile must be positive, sampled minimum is {lowest}"
            )));
        }
        let validity = spec.validity.unwrap_or(DEFAULT_VALIDITY);
        if !(validity > 0.0 && validity.is_finite()) {
            return Err(Error::param("validity bound must be positive"));
        }
        let description = spec.description.unwrap_or_else(|| describe(spec.k, &omega));
        Ok(ModelField {
            k: spec.k,
            omega,
            baseline,
            description,
            validity,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ModelField::from_spec(serde_json::from_str(text)?)
    }

    pub fn to_spec(&self) -> ModelFieldSpec {
        ModelFieldSpec {
            k: self.k,
            omega: self.omega.clone(),
            baseline: (!self.baseline.is_zero()).then(|| self.baseline.clone()),
            description: Some(self.description.clone()),
            validity: Some(self.validity),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn omega(&self) -> &Profile {
        &self.omega
    }

    pub fn baseline(&self) -> &Profile {
        &self.baseline
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn validity(&self) -> f64 {
        self.validity
    }

    /// Field coefficient `b(s, t)`.
    pub fn b(&self, s: f64, t: f64) -> f64 {
        self.omega.value(s) * t.powi(self.k as i32)
    }

    /// Tangential potential component `A₁(s, t)`; `A₂ ≡ 0`.
    pub fn a1(&self, s: f64, t: f64) -> f64 {
        let kp1 = (self.k + 1) as f64;
        self.baseline.value(s) + self.omega.value(s) * t.powi(self.k as i32 + 1) / kp1
    }

    /// Gauge phase `φ(s) = ∫₀ˢ a₀`.
    pub fn phi(&self, s: f64) -> f64 {
        self.baseline.antiderivative(s)
    }

    /// Exact line integral of `A₁` along the horizontal segment from
    /// `(s0, t)` to `(s1, t)`.
    pub fn a1_integral(&self, s0: f64, s1: f64, t: f64) -> f64 {
        let kp1 = (self.k + 1) as f64;
        let tangential = self.omega.antiderivative(s1) - self.omega.antiderivative(s0);
        self.phi(s1) - self.phi(s0) + tangential * t.powi(self.k as i32 + 1) / kp1
    }

    /// The same field with the baseline removed.
    pub fn without_baseline(&self) -> ModelField {
        ModelField {
            baseline: Profile::default(),
            ..self.clone()
        }
    }

    /// Largest `T` with `max_s ω(s)·T^k` inside the validity bound.
    pub fn max_extent(&self) -> f64 {
        (self.validity / self.omega.sampled_max(POSITIVITY_SAMPLES)).powf(1.0 / self.k as f64)
    }

    /// Rejects strips `|t| ≤ extent` that leave the validity band.
    pub fn check_extent(&self, extent: f64) -> Result<()> {
        let limit = self.max_extent();
        if extent > limit * (1.0 + 1e-12) {
            return Err(Error::param(format!(
                "strip half-width {extent} exceeds the model validity limit {limit}"
            )));
        }
        Ok(())
    }
}

fn describe(k: u32, omega: &Profile) -> String {
    match omega {
        Profile::Constant { value } => format!("b = {value}·t^{k}"),
        Profile::CosineBump {
            base,
            amplitude,
            center,
        } => format!("b = ({base} + {amplitude}(1 - cos(s - {center})))·t^{k}"),
        Profile::Table { values, .. } => format!("b = ω(s)·t^{k}, ω tabulated at {} nodes", values.len()),
    }
}

/// Minimum of `ω` over the circle and its argmin in `[0, 2π)`.
///
/// The sampled minimum is refined by a parabola through the neighbouring
/// samples and then by golden-section search inside that cell pair.
pub fn omega_min(field: &ModelField, samples: usize) -> Result<(f64, f64)> {
    if samples < 16 {
        return Err(Error::param("omega_min needs at least 16 samples"));
    }
    let omega = field.omega();
    if let Profile::Constant { value } = omega {
        return Ok((*value, 0.0));
    }
    let step = TAU / samples as f64;
    let values: Vec<f64> = (0..samples).map(|j| omega.value(j as f64 * step)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-14 * hi.abs().max(1.0) {
        return Ok((lo, 0.0));
    }
    let tie = 1e-12 * lo.abs().max(1.0);
    let j = values.iter().position(|&v| v <= lo + tie).unwrap();

    let (vm, v0, vp) = (
        values[(j + samples - 1) % samples],
        values[j],
        values[(j + 1) % samples],
    );
    let curvature = vm - 2.0 * v0 + vp;
    let mut guess = j as f64 * step;
    if curvature > 0.0 {
        guess += 0.5 * step * (vm - vp) / curvature;
    }
    let (mut a, mut b) = (j as f64 * step - step, j as f64 * step + step);
    let mut best = (omega.value(guess), guess);
    // golden section on [a, b]
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (omega.value(x1), omega.value(x2));
    while b - a > 1e-11 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = omega.value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = omega.value(x2);
        }
    }
    let mid = 0.5 * (a + b);
    let fmid = omega.value(mid);
    if fmid < best.0 {
        best = (fmid, mid);
    }
    let mut s = best.1.rem_euclid(TAU);
    if s < 1e-9 || TAU - s < 1e-9 {
        s = 0.0;
    }
    Ok((best.0, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn omega_min_of_standard_profiles() {
        let flat = ModelField::uniform(1, 1.0).unwrap();
        assert_eq!(omega_min(&flat, 64).unwrap(), (1.0, 0.0));

        let bump = ModelField::new(1, Profile::cosine_bump(1.0, 0.5, 0.0), Profile::default()).unwrap();
        let (v, s) = omega_min(&bump, 64).unwrap();
        assert!((v - 1.0).abs() < 1e-15 && s == 0.0);

        // 2 + sin s
        let shifted =
            ModelField::new(1, Profile::cosine_bump(1.0, 1.0, 1.5 * PI), Profile::default()).unwrap();
        let (v, s) = omega_min(&shifted, 64).unwrap();
        let n = 1_000_000;
        let (ov, os) = (0..n)
            .map(|j| {
                let s = TAU * j as f64 / n as f64;
                (2.0 + s.sin(), s)
            })
            .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
        assert!((v - ov).abs() < 1e-10 && (v - 1.0).abs() < 1e-12);
        assert!((s - os).abs() < 1e-5 && (s - 1.5 * PI).abs() < 1e-6);
    }

    #[test]
    fn omega_min_requires_samples() {
        let flat = ModelField::uniform(1, 1.0).unwrap();
        assert!(omega_min(&flat, 15).is_err());
    }

    #[test]
    fn rejects_nonpositive_profiles() {
        assert!(ModelField::new(1, Profile::cosine_bump(-0.1, 1.0, 0.0), Profile::default()).is_err());
        assert!(ModelField::uniform(0, 1.0).is_err());
    }

    #[test]
    fn field_vanishes_on_the_axis_and_matches_the_potential() {
        let f = ModelField::new(3, Profile::cosine_bump(1.0, 0.5, 0.2), Profile::constant(0.3)).unwrap();
        for &s in &[0.0, 1.0, 4.0] {
            assert_eq!(f.b(s, 0.0), 0.0);
            let t = 0.7;
            let d = 1e-5;
            let curl = -(f.a1(s, t + d) - f.a1(s, t - d)) / (2.0 * d);
            assert!((curl.abs() - f.b(s, t).abs()).abs() < 1e-8);
        }
        assert!((f.phi(2.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn json_spec() {
        let f = ModelField::from_json(
            r#"{"k": 1, "omega": {"type": "cosine-bump", "base": 1, "amplitude": 1, "center": 4.71238898038469}}"#,
        )
        .unwrap();
        assert!((f.omega().value(0.0) - 2.0).abs() < 1e-12);
        let again = ModelField::from_spec(f.to_spec()).unwrap();
        assert_eq!(again, f);
        assert!(ModelField::from_json(r#"{"k": 1, "omega": {"type": "table", "values": [1, -0.1, 1]}}"#).is_err());
    }

    #[test]
    fn extent_respects_validity() {
        let f = ModelField::uniform(2, 1.0).unwrap();
        assert!((f.max_extent() - 2.0).abs() < 1e-12);
        assert!(f.check_extent(1.9).is_ok());
        assert!(f.check_extent(2.1).is_err());
    }
}
