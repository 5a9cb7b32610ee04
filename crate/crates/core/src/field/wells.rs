use crate::error::{Error, Result};

/// Mask of the well region `{Tr⁺ < b₀ + ε₁}` over a rectangle of samples,
/// with `b₀` the sample minimum.
pub fn well_region(samples: &[Vec<f64>], epsilon1: f64) -> Result<Vec<Vec<bool>>> {
    if !(epsilon1 > 0.0) {
        return Err(Error::param("epsilon1 must be positive"));
    }
    let b0 = samples
        .iter()
        .flatten()
        .copied()
        .reduce(f64::min)
        .ok_or_else(|| Error::param("empty sample set"))?;
    let level = b0 + epsilon1;
    Ok(samples
        .iter()
        .map(|row| row.iter().map(|&v| v < level).collect())
        .collect())
}

/// True iff every boundary sample satisfies `Tr⁺ ≥ b₀ + ε₀`.
pub fn check_wall_condition(boundary: &[f64], b0: f64, epsilon0: f64) -> Result<bool> {
    if !(epsilon0 > 0.0) {
        return Err(Error::param("epsilon0 must be positive"));
    }
    Ok(boundary.iter().all(|&v| v >= b0 + epsilon0))
}
