//! Sparse symmetric matrices, bandwidth-reducing ordering and an envelope
//! (skyline) Cholesky factorisation.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rayon::prelude::*;

/// Symmetric matrix in compressed sparse row form, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: values.to_vec() }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or(0.0)
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(c, v)| c == i || v == 0.0))
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).into_par_iter().map(|i| self.row(i).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// `self + alpha·other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix) -> CsrMatrix {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, alpha * v)));
        }
        CsrMatrix::from_triplets(self.n, t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Gershgorin lower bound on the spectrum of `D⁻¹A` for a positive
    /// diagonal `D`.
    pub fn gershgorin_lower(&self, d: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| {
                let (mut diag, mut off) = (0.0, 0.0);
                for (j, v) in self.row(i) {
                    if j == i {
                        diag += v;
                    } else {
                        off += v.abs();
                    }
                }
                (diag - off) / d[i]
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reverse Cuthill–McKee ordering. Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize| -> (usize, usize) {
        // (last node reached, eccentricity)
        let mut dist = vec![usize::MAX; n];
        let mut q = VecDeque::from([start]);
        dist[start] = 0;
        let mut last = start;
        while let Some(x) = q.pop_front() {
            last = x;
            for (y, _) in a.row(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    q.push_back(y);
                }
            }
        }
        (last, dist[last])
    };

    while order.len() < n {
        // Pseudo-peripheral start in the next component.
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).unwrap();
        let mut start = seed;
        let mut ecc = 0;
        for _ in 0..4 {
            let (far, e) = bfs_levels(start);
            if e <= ecc {
                break;
            }
            start = far;
            ecc = e;
        }
        let mut q = VecDeque::from([start]);
        visited[start] = true;
        while let Some(x) = q.pop_front() {
            order.push(x);
            let mut nbrs: Vec<usize> = a.row(x).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                if !visited[j] {
                    visited[j] = true;
                    q.push_back(j);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `L` of a symmetric positive definite matrix stored by
/// rows within its envelope, after a symmetric permutation.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factor `a`, or return the permuted row at which positivity failed.
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, usize> {
        let n = a.n;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let first: Vec<usize> =
            (0..n).map(|i| a.row(perm[i]).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i)).collect();
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut data = vec![0.0; total];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jn = inv[j];
                if jn <= i {
                    data[start[i] + jn - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (head, row_i) = data.split_at_mut(start[i]);
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_j = &head[start[j]..start[j] + j - fj + 1];
                let s = dot(&row_i[lo - fi..j - fi], &row_j[lo - fj..j - fj]);
                row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
            }
            let d = row_i[i - fi] - dot(&row_i[..i - fi], &row_i[..i - fi]);
            if !(d > 0.0) {
                return Err(i);
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(Self { n, perm, first, start, data })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s = dot(&row[..i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
