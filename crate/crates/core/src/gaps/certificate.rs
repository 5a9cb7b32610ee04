use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ModelField;
use crate::quasimode::{build_phi, quasimode_grid, transverse_state, QuasimodeGridPolicy};

/// Statement attached to every verdict: the conclusion holds only below an
/// unquantified `h₁`.
pub const SMALLNESS_CAVEAT: &str =
    "valid hypotheses imply at least N_h gaps in I(h) only for h in (0, h_1) with an unquantified h_1 <= h_0; \
     a valid certificate is evidence at the given h, not a proof";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub mu: f64,
    pub residual_bound: f64,
}

/// Approximate eigenvalues with residual bounds for the abstract gap
/// criterion at one value of `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub h: f64,
    pub c: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub interval: [f64; 2],
    pub entries: Vec<CertificateEntry>,
}

impl GapCertificate {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `c·h^M`.
    pub fn scale(&self) -> f64 {
        self.c * self.h.powf(self.m)
    }
}

/// The hypothesis families of the gap criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    /// `h > 0`, `c > 0`, `M ≥ 1`, at least one entry, all `μ_j` in `I(h)`.
    Structure,
    /// `μ_j − μ_{j−1} > c h^M`.
    Spacing,
    /// `dist(μ₀, ∂I) > c h^M`.
    LowerDistance,
    /// `dist(μ_N, ∂I) > c h^M`.
    UpperDistance,
    /// `ρ_j ≤ (c/3) h^M`.
    Residual,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Hypothesis::Structure => "structure",
            Hypothesis::Spacing => "spacing mu_j - mu_(j-1) > c h^M",
            Hypothesis::LowerDistance => "dist(mu_0, boundary of I) > c h^M",
            Hypothesis::UpperDistance => "dist(mu_N, boundary of I) > c h^M",
            Hypothesis::Residual => "residual rho_j <= (c/3) h^M",
        };
        f.write_str(text)
    }
}

/// A violated inequality. `margin` is the signed amount by which it
/// fails (left side minus right side, oriented so that negative means
/// violated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub hypothesis: Hypothesis,
    pub entry: Option<usize>,
    pub margin: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    /// Number of gaps asserted in `I(h)` when valid: entries − 1.
    pub gaps_asserted: usize,
    pub violations: Vec<Violation>,
    pub caveat: String,
}

impl Verdict {
    pub fn first_failure(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn fails(&self, hypothesis: Hypothesis) -> bool {
        self.violations.iter().any(|v| v.hypothesis == hypothesis)
    }
}

/// Checks every hypothesis family and lists all violations in order.
pub fn certify(cert: &GapCertificate) -> Verdict {
    let mut violations = Vec::new();
    let mut push = |hypothesis, entry, margin: f64, message: String| {
        violations.push(Violation {
            hypothesis,
            entry,
            margin,
            message,
        })
    };
    let [lo, hi] = cert.interval;
    let scale = cert.scale();

    if !(cert.h > 0.0) {
        push(Hypothesis::Structure, None, cert.h, format!("h = {} is not positive", cert.h));
    }
    if !(cert.c > 0.0) {
        push(Hypothesis::Structure, None, cert.c, format!("c = {} is not positive", cert.c));
    }
    if !(cert.m >= 1.0) {
        push(Hypothesis::Structure, None, cert.m - 1.0, format!("M = {} is below 1", cert.m));
    }
    if !(lo < hi) {
        push(Hypothesis::Structure, None, hi - lo, format!("interval ({lo}, {hi}) is empty"));
    }
    if cert.entries.is_empty() {
        push(Hypothesis::Structure, None, 0.0, "certificate has no entries".into());
    }
    for (j, e) in cert.entries.iter().enumerate() {
        if !(e.mu > lo && e.mu < hi) {
            let margin = (e.mu - lo).min(hi - e.mu);
            push(Hypothesis::Structure, Some(j), margin, format!("mu_{j} = {} lies outside I(h)", e.mu));
        }
        if !(e.residual_bound >= 0.0) {
            push(Hypothesis::Structure, Some(j), e.residual_bound, format!("rho_{j} is negative"));
        }
    }
    for (j, pair) in cert.entries.windows(2).enumerate() {
        let margin = pair[1].mu - pair[0].mu - scale;
        if !(margin > 0.0) {
            push(
                Hypothesis::Spacing,
                Some(j + 1),
                margin,
                format!("mu_{} - mu_{} = {} is not above c h^M = {scale}", j + 1, j, pair[1].mu - pair[0].mu),
            );
        }
    }
    if let (Some(first), Some(last)) = (cert.entries.first(), cert.entries.last()) {
        let dist = |mu: f64| (mu - lo).abs().min((hi - mu).abs());
        let margin = dist(first.mu) - scale;
        if !(margin > 0.0) {
            push(
                Hypothesis::LowerDistance,
                Some(0),
                margin,
                format!("dist(mu_0, boundary) = {} is not above c h^M = {scale}", dist(first.mu)),
            );
        }
        let n = cert.entries.len() - 1;
        let margin = dist(last.mu) - scale;
        if !(margin > 0.0) {
            push(
                Hypothesis::UpperDistance,
                Some(n),
                margin,
                format!("dist(mu_{n}, boundary) = {} is not above c h^M = {scale}", dist(last.mu)),
            );
        }
    }
    for (j, e) in cert.entries.iter().enumerate() {
        let margin = scale / 3.0 - e.residual_bound;
        if !(margin >= 0.0) {
            push(
                Hypothesis::Residual,
                Some(j),
                margin,
                format!("rho_{j} = {} exceeds (c/3) h^M = {}", e.residual_bound, scale / 3.0),
            );
        }
    }
    Verdict {
        valid: violations.is_empty(),
        gaps_asserted: cert.entries.len().saturating_sub(1),
        violations,
        caveat: SMALLNESS_CAVEAT.to_string(),
    }
}

/// Certificate from quasimodes of `field` at energies `ν_j h^M`,
/// `M = (2k+2)/(k+2)`, with measured residuals as `ρ_j`. The interval is
/// `(μ₀ − 2c h^M, μ_N + 2c h^M)`.
pub fn certificate_from_quasimodes(
    field: &ModelField,
    h: f64,
    target_nus: &[f64],
    c: f64,
    policy: &QuasimodeGridPolicy,
) -> Result<GapCertificate> {
    if target_nus.is_empty() || target_nus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("target energies must be non-empty and strictly increasing"));
    }
    let k = field.k() as f64;
    let m = (2.0 * k + 2.0) / (k + 2.0);
    let mut entries = Vec::with_capacity(target_nus.len());
    for &nu in target_nus {
        let psi = transverse_state(field, nu)?;
        let grid = quasimode_grid(field, h, &psi, policy)?;
        let bundle = build_phi(field, h, nu, &grid)?;
        entries.push(CertificateEntry {
            mu: bundle.mu,
            residual_bound: bundle.residual,
        });
    }
    let scale = c * h.powf(m);
    let interval = [entries[0].mu - 2.0 * scale, entries[entries.len() - 1].mu + 2.0 * scale];
    Ok(GapCertificate {
        h,
        c,
        m,
        interval,
        entries,
    })
}
