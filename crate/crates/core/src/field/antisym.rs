use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real antisymmetric `n × n` matrix, the pointwise field operator `B(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix {
    entries: DMatrix<f64>,
}

impl AntisymmetricMatrix {
    /// Antisymmetrises `m`, i.e. stores `(m − mᵀ)/2`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::param("field matrix must be square"));
        }
        let n = m.nrows();
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] - m[(j, i)]);
                entries[(i, j)] = v;
                entries[(j, i)] = -v;
            }
        }
        Ok(AntisymmetricMatrix { entries })
    }

    /// Builds the matrix from its strict upper triangle, row by row.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::param(format!(
                "{} upper entries do not fit a {n}×{n} antisymmetric matrix",
                upper.len()
            )));
        }
        let mut entries = DMatrix::zeros(n, n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().unwrap();
                entries[(i, j)] = v;
                entries[(j, i)] = -v;
            }
        }
        Ok(AntisymmetricMatrix { entries })
    }

    /// The 2×2 field with `B₁₂ = b`.
    pub fn planar(b: f64) -> Self {
        Self::from_upper(2, &[b]).unwrap()
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn scaled(&self, c: f64) -> Self {
        AntisymmetricMatrix {
            entries: &self.entries * c,
        }
    }
}

/// Intensity `Tr⁺ B`: the sum of the positive `λ_j` where `±iλ_j` are the
/// eigenvalues of `B`. Singular values of an antisymmetric matrix come in
/// equal pairs, so this is half their sum.
pub fn tr_plus(b: &AntisymmetricMatrix) -> f64 {
    if b.size() == 0 {
        return 0.0;
    }
    let sv = b.entries.clone().svd(false, false).singular_values;
    0.5 * sv.iter().sum::<f64>()
}

/// Trace norm `|B| = [Tr(BᵀB)]^{1/2}`.
pub fn trace_norm(b: &AntisymmetricMatrix) -> f64 {
    b.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
}
