//! Envelope (skyline) Cholesky factorisation `P(A − σI)Pᵀ = L Lᴴ` under a
//! reverse Cuthill–McKee ordering. Grid operators have a narrow envelope
//! under RCM, including the periodic wrap-around links.

use std::collections::VecDeque;

use num_complex::Complex64;

use super::hermitian::HermitianGridOperator;

pub(crate) struct EnvelopeCholesky {
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// First stored column of each (permuted) row.
    first: Vec<usize>,
    /// Offset of row `i`'s storage; row `i` holds columns `first[i]..=i`.
    offset: Vec<usize>,
    data: Vec<Complex64>,
}

/// Returned when a pivot is not safely positive.
#[derive(Debug)]
pub(crate) struct NotPositive;

impl EnvelopeCholesky {
    pub(crate) fn factor(op: &HermitianGridOperator, shift: f64) -> Result<Self, NotPositive> {
        let n = op.dim();
        let perm = reverse_cuthill_mckee(&op.adjacency());
        let mut inverse = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in op.row(old) {
                let jn = inverse[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![Complex64::new(0.0, 0.0); offset[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in op.row(old) {
                let jn = inverse[j];
                if jn <= new {
                    let mut value = v;
                    if jn == new {
                        value -= shift;
                    }
                    data[offset[new] + (jn - first[new])] = value;
                }
            }
        }

        let scale = op.norm_bound().max(shift.abs()).max(f64::MIN_POSITIVE);
        let floor = 1e3 * f64::EPSILON * scale;
        for i in 0..n {
            let fi = first[i];
            let row_i = offset[i];
            for j in fi..i {
                let fj = first[j];
                let row_j = offset[j];
                let start = fi.max(fj);
                let mut acc = data[row_i + (j - fi)];
                let a = &data[row_i + (start - fi)..row_i + (j - fi)];
                let b = &data[row_j + (start - fj)..row_j + (j - fj)];
                for (x, y) in a.iter().zip(b) {
                    acc -= x * y.conj();
                }
                let pivot = data[row_j + (j - fj)].re;
                data[row_i + (j - fi)] = acc / pivot;
            }
            let mut diag = data[row_i + (i - fi)].re;
            for x in &data[row_i..row_i + (i - fi)] {
                diag -= x.norm_sqr();
            }
            if !(diag > floor) {
                return Err(NotPositive);
            }
            data[row_i + (i - fi)] = Complex64::new(diag.sqrt(), 0.0);
        }
        Ok(EnvelopeCholesky {
            perm,
            first,
            offset,
            data,
        })
    }

    /// Solves `(A − σI) x = b`.
    pub(crate) fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.perm.len();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let mut acc = y[i];
            for (x, yk) in row[..i - fi].iter().zip(&y[fi..i]) {
                acc -= x * yk;
            }
            y[i] = acc / row[i - fi].re;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let xi = y[i] / row[i - fi].re;
            y[i] = xi;
            for (l, yk) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *yk -= l.conj() * xi;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    #[cfg(test)]
    pub(crate) fn envelope_size(&self) -> usize {
        self.data.len()
    }
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, seen: &mut [bool]) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![start]];
    seen[start] = true;
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    levels
}

/// Pseudo-peripheral start node of the component containing `start`
/// (George–Liu iteration).
fn peripheral_node(adj: &[Vec<usize>], start: usize, component: &[usize]) -> usize {
    let mut node = start;
    let mut depth = 0;
    let mut seen = vec![false; adj.len()];
    for _ in 0..8 {
        for &v in component {
            seen[v] = false;
        }
        let levels = bfs_levels(adj, node, &mut seen);
        if levels.len() <= depth {
            break;
        }
        depth = levels.len();
        let last = levels.last().unwrap();
        let candidate = *last
            .iter()
            .min_by_key(|&&v| (adj[v].len(), v))
            .unwrap();
        if candidate == node {
            break;
        }
        node = candidate;
    }
    node
}

pub(crate) fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut probe = vec![false; n];
    for root in 0..n {
        if placed[root] {
            continue;
        }
        let component: Vec<usize> = bfs_levels(adj, root, &mut probe).concat();
        let start = peripheral_node(adj, root, &component);
        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}
