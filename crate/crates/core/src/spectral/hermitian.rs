use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary realisation carried by an assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Boundary {
    Dirichlet,
    /// Periodic along `s` (Bloch phase `theta_s` across the seam), Dirichlet in `t`.
    PeriodicS { theta_s: f64 },
    /// Periodic in both directions with quasimomentum `theta`.
    Torus { theta: [f64; 2] },
}

/// Sparse Hermitian matrix in compressed-row form.
///
/// Off-diagonal entries are only ever inserted as conjugate pairs and
/// diagonal entries as reals, so `entry(i, j) == conj(entry(j, i))` holds
/// bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianGridOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
    boundary: Boundary,
}

/// Accumulates diagonal terms and conjugate link pairs.
#[derive(Debug, Clone)]
pub struct OperatorBuilder {
    dim: usize,
    diagonal: Vec<f64>,
    links: Vec<(usize, usize, Complex64)>,
}

impl OperatorBuilder {
    pub fn new(dim: usize) -> Self {
        OperatorBuilder {
            dim,
            diagonal: vec![0.0; dim],
            links: Vec::new(),
        }
    }

    pub fn add_diagonal(&mut self, i: usize, value: f64) {
        self.diagonal[i] += value;
    }

    /// Adds `value` at `(i, j)` and `conj(value)` at `(j, i)`.
    pub fn add_link(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(i != j, "links join distinct nodes");
        // stored once, upper orientation
        if i < j {
            self.links.push((i, j, value));
        } else {
            self.links.push((j, i, value.conj()));
        }
    }

    pub fn build(self, boundary: Boundary) -> HermitianGridOperator {
        let mut triplets: Vec<(usize, usize, Complex64)> =
            Vec::with_capacity(self.dim + 2 * self.links.len());
        for (i, &d) in self.diagonal.iter().enumerate() {
            triplets.push((i, i, Complex64::new(d, 0.0)));
        }
        for &(i, j, v) in &self.links {
            triplets.push((i, j, v));
            triplets.push((j, i, v.conj()));
        }
        // upper entries in (i, j) order and their mirrors sort identically,
        // so merged duplicates stay exact conjugates
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        HermitianGridOperator {
            dim: self.dim,
            row_ptr,
            cols,
            values,
            boundary,
        }
    }
}

impl HermitianGridOperator {
    /// Operator from an explicit entry list; only the upper triangle
    /// (including the diagonal) is read, the lower half is mirrored.
    pub fn from_upper_entries(
        dim: usize,
        entries: &[(usize, usize, Complex64)],
        boundary: Boundary,
    ) -> Result<Self> {
        let mut builder = OperatorBuilder::new(dim);
        for &(i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::param(format!("entry ({i}, {j}) outside dimension {dim}")));
            }
            if i == j {
                if v.im != 0.0 {
                    return Err(Error::param("diagonal entries must be real"));
                }
                builder.add_diagonal(i, v.re);
            } else if i < j {
                builder.add_link(i, j, v);
            }
        }
        Ok(builder.build(boundary))
    }

    pub fn diagonal_matrix(values: &[f64]) -> Self {
        let mut builder = OperatorBuilder::new(values.len());
        for (i, &v) in values.iter().enumerate() {
            builder.add_diagonal(i, v);
        }
        builder.build(Boundary::Dirichlet)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored `(row, col, value)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entry(i, i).re).collect()
    }

    /// Exact Hermiticity check (bitwise comparison of mirrored entries).
    pub fn is_hermitian(&self) -> bool {
        self.entries().all(|(i, j, v)| {
            let m = self.entry(j, i);
            if i == j {
                v.im == 0.0
            } else {
                m.re == v.re && m.im == -v.im
            }
        })
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// Largest absolute row sum.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    /// Full spectrum by a dense Hermitian eigensolve. Intended for small
    /// operators and as an independent reference for the Krylov solver.
    pub fn dense_spectrum(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.to_dense().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Neighbour lists without the diagonal, used for reordering.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.dim)
            .map(|i| self.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
            .collect()
    }
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn links_are_stored_as_conjugate_pairs() {
        let mut b = OperatorBuilder::new(3);
        b.add_diagonal(0, 2.0);
        b.add_link(0, 1, Complex64::new(0.3, -0.7));
        b.add_link(2, 1, Complex64::new(-1.0, 0.25));
        b.add_link(1, 0, Complex64::new(0.1, 0.1));
        let op = b.build(Boundary::Dirichlet);
        assert!(op.is_hermitian());
        assert_eq!(op.entry(0, 1), Complex64::new(0.3, -0.7) + Complex64::new(0.1, -0.1));
        assert_eq!(op.entry(1, 2), Complex64::new(-1.0, -0.25));
    }

    #[test]
    fn upper_entries_are_mirrored() {
        let op = HermitianGridOperator::from_upper_entries(
            2,
            &[
                (0, 0, Complex64::new(1.0, 0.0)),
                (0, 1, Complex64::new(0.0, 1.0)),
                (1, 1, Complex64::new(1.0, 0.0)),
            ],
            Boundary::Dirichlet,
        )
        .unwrap();
        let spec = op.dense_spectrum();
        assert!((spec[0] - 0.0).abs() < 1e-14 && (spec[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn complex_diagonal_is_rejected() {
        let err = HermitianGridOperator::from_upper_entries(
            1,
            &[(0, 0, Complex64::new(1.0, 1.0))],
            Boundary::Dirichlet,
        );
        assert!(err.is_err());
    }
}
