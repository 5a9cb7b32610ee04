//! Symmetric tridiagonal eigenvalues by Sturm counting and bisection.
//!
//! Counts come from the pivots of the `LDLᵀ` factorisation of `T − μI`:
//! the number of negative pivots equals the number of eigenvalues below
//! `μ`. Every eigenvalue is therefore located inside a certified bracket.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 256;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::param("tridiagonal operator needs dimension ≥ 1"));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::param(format!(
                "off-diagonal length {} does not match dimension {}",
                off_diagonal.len(),
                diagonal.len()
            )));
        }
        if diagonal.iter().chain(&off_diagonal).any(|x| !x.is_finite()) {
            return Err(Error::param("tridiagonal entries must be finite"));
        }
        Ok(TridiagonalOperator {
            diagonal,
            off_diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off_diagonal[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off_diagonal[i].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    /// Max-row-sum norm, used as the scale of residual tolerances.
    pub fn norm_scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diagonal[i] * x[i];
            if i > 0 {
                acc += self.off_diagonal[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off_diagonal[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    fn pivot_floor(&self) -> f64 {
        let emax = self
            .off_diagonal
            .iter()
            .fold(0.0_f64, |m, e| m.max(e.abs()));
        (f64::MIN_POSITIVE * emax * emax).max(f64::MIN_POSITIVE)
    }
}

/// Number of eigenvalues of `op` strictly below `mu`.
pub fn sturm_count(op: &TridiagonalOperator, mu: f64) -> usize {
    count_below(op, mu, op.pivot_floor())
}

fn count_below(op: &TridiagonalOperator, mu: f64, floor: f64) -> usize {
    let d = &op.diagonal;
    let e = &op.off_diagonal;
    let mut count = 0;
    let mut q = d[0] - mu;
    if q.abs() < floor {
        q = -floor;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = (d[i] - mu) - e[i - 1] * e[i - 1] / q;
        if q.abs() < floor {
            q = -floor;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `count` smallest eigenvalues of `op`, nondecreasing, each within
/// `tol` of the exact eigenvalue.
pub fn tridiag_lowest_eigs(op: &TridiagonalOperator, count: usize, tol: f64) -> Result<Vec<f64>> {
    if count == 0 || count > op.dim() {
        return Err(Error::param(format!(
            "requested {count} eigenvalues of a {}-dimensional operator",
            op.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let floor = op.pivot_floor();
    let (glo, ghi) = op.gershgorin();
    let pad = 1e-12 * (glo.abs().max(ghi.abs()) + 1.0);
    let (glo, ghi) = (glo - pad, ghi + pad);

    let mut values = Vec::with_capacity(count);
    let mut lower_start = glo;
    for j in 0..count {
        // invariant: count(lo) ≤ j < count(hi)
        let mut lo = lower_start;
        let mut hi = ghi;
        let mut converged = false;
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= tol {
                converged = true;
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(op, mid, floor) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if !converged && hi - lo > tol {
            return Err(Error::Numerical {
                message: format!("bisection for eigenvalue {j} did not reach tolerance {tol}"),
                lo,
                hi,
            });
        }
        let value = 0.5 * (lo + hi);
        values.push(value);
        lower_start = lo;
    }
    Ok(values)
}

/// Unit-norm eigenvector for `eigenvalue`, computed by inverse iteration
/// with the fixed shift `eigenvalue`. The sign is chosen so that the entry
/// of largest magnitude is positive.
pub fn tridiag_eigenvector(op: &TridiagonalOperator, eigenvalue: f64) -> Result<Vec<f64>> {
    let width = 1e-8 * (1.0 + eigenvalue.abs());
    tridiag_eigenvector_within(op, eigenvalue, width)
}

/// As [`tridiag_eigenvector`] with an explicit half-width for the
/// simplicity check around `eigenvalue`.
pub fn tridiag_eigenvector_within(
    op: &TridiagonalOperator,
    eigenvalue: f64,
    half_width: f64,
) -> Result<Vec<f64>> {
    let n = op.dim();
    let inside = sturm_count(op, eigenvalue + half_width) - sturm_count(op, eigenvalue - half_width);
    if inside > 1 {
        return Err(Error::Degeneracy {
            eigenvalue,
            count: inside,
        });
    }
    if inside == 0 {
        return Err(Error::param(format!(
            "no eigenvalue within {half_width} of {eigenvalue}"
        )));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }

    let factor = ShiftedLu::new(op, eigenvalue);
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let scale = op.norm_scale();
    for _ in 0..8 {
        let mut w = factor.solve(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical {
                message: "inverse iteration produced a non-finite vector".into(),
                lo: eigenvalue - half_width,
                hi: eigenvalue + half_width,
            });
        }
        w.iter_mut().for_each(|x| *x /= norm);
        v = w;
        let av = op.apply(&v);
        let rayleigh: f64 = av.iter().zip(&v).map(|(a, b)| a * b).sum();
        let res = av
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rayleigh * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if res <= 1e-10 * scale {
            break;
        }
    }
    fix_sign(&mut v);
    Ok(v)
}

/// Sign convention: the first entry of maximal magnitude is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Gaussian elimination with partial pivoting for `T − σI` (LAPACK gttrf
/// layout). Exact zero pivots are replaced by a tiny multiple of the scale,
/// which is what inverse iteration at an exact eigenvalue needs.
struct ShiftedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(op: &TridiagonalOperator, shift: f64) -> Self {
        let n = op.dim();
        let mut d: Vec<f64> = op.diagonal.iter().map(|x| x - shift).collect();
        let mut dl = op.off_diagonal.clone();
        let mut du = op.off_diagonal.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * op.norm_scale();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let l = dl[i] / d[i];
                dl[i] = l;
                d[i + 1] -= l * du[i];
            } else {
                swapped[i] = true;
                let l = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = l;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - l * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -l * du[i + 1];
                }
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        ShiftedLu {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.dl[i] * x[i];
        }
        x[n - 1] /= self.d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}
