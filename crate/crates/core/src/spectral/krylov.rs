//! Lowest eigenpairs of sparse Hermitian operators.
//!
//! A block Krylov space of `(A − σI)⁻¹` is grown with full
//! reorthogonalisation; Ritz pairs are extracted by Rayleigh–Ritz on `A`
//! itself and accepted once the true residual `‖A x − λ x‖` of every
//! requested pair is below the tolerance. Blocks of several vectors keep
//! (near-)degenerate pairs from hiding behind each other.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::envelope::EnvelopeCholesky;
use super::hermitian::{dot, norm, HermitianGridOperator};
use crate::error::{Error, Result};

const MAX_RETRIES: usize = 3;
const BLOCK: usize = 4;
const MAX_BASIS: usize = 1200;

/// Eigenvalues in nondecreasing order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    /// Shift actually used for the factorisation (after retries).
    pub shift: f64,
}

/// The `count` smallest eigenvalues of `op` (see [`sparse_lowest_pairs`]).
pub fn sparse_lowest_eigs(
    op: &HermitianGridOperator,
    count: usize,
    shift: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    sparse_lowest_pairs(op, count, shift, tol).map(|p| p.values)
}

/// The `count` smallest eigenpairs with residual `‖A v − λ v‖ ≤ tol`.
///
/// `shift` must lie below the spectrum; when the factorisation of
/// `A − shift·I` breaks down the shift is moved further down, at most
/// three times.
pub fn sparse_lowest_pairs(
    op: &HermitianGridOperator,
    count: usize,
    shift: f64,
    tol: f64,
) -> Result<EigenPairs> {
    let n = op.dim();
    if count == 0 || count > n {
        return Err(Error::param(format!(
            "requested {count} eigenvalues of a {n}-dimensional operator"
        )));
    }
    if !(tol > 0.0) || !shift.is_finite() {
        return Err(Error::param("tolerance must be positive and shift finite"));
    }

    let scale = op.norm_bound().max(1e-300);
    let mut sigma = shift;
    let mut factor = None;
    for retry in 0..=MAX_RETRIES {
        if retry > 0 {
            sigma = shift - scale * 1e-8 * 100f64.powi(retry as i32 - 1);
        }
        if let Ok(f) = EnvelopeCholesky::factor(op, sigma) {
            factor = Some(f);
            break;
        }
    }
    let factor = factor.ok_or(Error::Breakdown {
        shift: sigma,
        retries: MAX_RETRIES,
    })?;

    let block = BLOCK.min(n);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut images: Vec<Vec<Complex64>> = Vec::new();
    let mut projected: Vec<Vec<Complex64>> = Vec::new();
    let mut seed = 0u64;

    let mut frontier: Vec<Vec<Complex64>> = (0..block).map(|_| start_vector(n, &mut seed)).collect();
    let mut best: Option<EigenPairs> = None;
    let mut previous: Option<Vec<f64>> = None;
    let mut blocks_since_check = 0usize;

    loop {
        let mut added = Vec::new();
        for v in frontier.drain(..) {
            if let Some(q) = orthonormalize(v, &basis) {
                let aq = op.apply(&q);
                let row: Vec<Complex64> = basis
                    .iter()
                    .chain(std::iter::once(&q))
                    .map(|b| dot(b, &aq))
                    .collect();
                projected.push(row);
                basis.push(q);
                images.push(aq);
                added.push(basis.len() - 1);
            }
        }
        if added.is_empty() && basis.len() < n {
            // the Krylov space became invariant; continue from fresh directions
            for _ in 0..block {
                let v = start_vector(n, &mut seed);
                if let Some(q) = orthonormalize(v, &basis) {
                    let aq = op.apply(&q);
                    let row: Vec<Complex64> = basis
                        .iter()
                        .chain(std::iter::once(&q))
                        .map(|b| dot(b, &aq))
                        .collect();
                    projected.push(row);
                    basis.push(q);
                    images.push(aq);
                    added.push(basis.len() - 1);
                }
            }
        }

        if basis.len() >= count.min(n) {
            let ritz = ritz_values(&projected, count.min(basis.len()));
            let settled = previous.as_ref().is_some_and(|prev: &Vec<f64>| {
                prev.len() == ritz.len()
                    && prev
                        .iter()
                        .zip(&ritz)
                        .all(|(a, b)| (a - b).abs() <= 1e-9 * (b.abs() + tol))
            });
            blocks_since_check += 1;
            if settled || blocks_since_check >= 8 || basis.len() == n {
                blocks_since_check = 0;
                let pairs = rayleigh_ritz(&basis, &images, &projected, count.min(basis.len()));
                let done =
                    pairs.values.len() == count && pairs.residuals.iter().all(|&r| r <= tol);
                best = Some(pairs);
                if done || basis.len() == n {
                    break;
                }
            }
            previous = Some(ritz);
        }
        if basis.len() >= MAX_BASIS.min(n) || added.is_empty() {
            if best.is_none() || basis.len() < n {
                best = Some(rayleigh_ritz(&basis, &images, &projected, count.min(basis.len())));
            }
            break;
        }
        frontier = added.iter().map(|&k| factor.solve(&basis[k])).collect();
    }

    let mut pairs = best.ok_or(Error::Numerical {
        message: "Krylov space could not be built".into(),
        lo: f64::NAN,
        hi: f64::NAN,
    })?;
    pairs.shift = sigma;
    if pairs.values.len() < count || pairs.residuals.iter().any(|&r| r > tol) {
        let worst = pairs.residuals.iter().copied().fold(0.0, f64::max);
        let lo = pairs.values.first().copied().unwrap_or(f64::NAN);
        let hi = pairs.values.last().copied().unwrap_or(f64::NAN);
        return Err(Error::Numerical {
            message: format!(
                "shift-invert iteration stalled at basis size {} with residual {worst:e} > {tol:e}",
                basis.len()
            ),
            lo,
            hi,
        });
    }
    Ok(pairs)
}

fn projected_matrix(projected: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let m = projected.len();
    let mut t = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for (j, row) in projected.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            // row j holds <q_i, A q_j>, i ≤ j
            t[(i, j)] = v;
            t[(j, i)] = v.conj();
        }
        t[(j, j)] = Complex64::new(row[j].re, 0.0);
    }
    t
}

fn ritz_values(projected: &[Vec<Complex64>], count: usize) -> Vec<f64> {
    let mut values: Vec<f64> = projected_matrix(projected)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values.truncate(count);
    values
}

fn rayleigh_ritz(
    basis: &[Vec<Complex64>],
    images: &[Vec<Complex64>],
    projected: &[Vec<Complex64>],
    count: usize,
) -> EigenPairs {
    let m = basis.len();
    let n = basis[0].len();
    let eig = projected_matrix(projected).symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for &k in order.iter().take(count) {
        let theta = eig.eigenvalues[k];
        let y = eig.eigenvectors.column(k);
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        let mut ax = vec![Complex64::new(0.0, 0.0); n];
        for (c, (q, aq)) in y.iter().zip(basis.iter().zip(images)) {
            for ((xi, axi), (qi, aqi)) in x.iter_mut().zip(ax.iter_mut()).zip(q.iter().zip(aq)) {
                *xi += c * qi;
                *axi += c * aqi;
            }
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        ax.iter_mut().for_each(|v| *v /= nx);
        let res = ax
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - theta * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        values.push(theta);
        vectors.push(x);
        residuals.push(res);
    }
    EigenPairs {
        values,
        vectors,
        residuals,
        shift: 0.0,
    }
}

/// Gram–Schmidt twice against `basis`; `None` if `v` is (numerically) in
/// the span.
fn orthonormalize(mut v: Vec<Complex64>, basis: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let original = norm(&v);
    if original == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
    let nv = norm(&v);
    if nv <= 1e-10 * original {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Some(v)
}

/// Deterministic start vectors: all-ones first, then splitmix64 noise.
fn start_vector(n: usize, seed: &mut u64) -> Vec<Complex64> {
    let k = *seed;
    *seed += 1;
    if k == 0 {
        return vec![Complex64::new(1.0, 0.0); n];
    }
    let mut state = 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k);
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n).map(|_| Complex64::new(next(), next())).collect()
}
