//! Smallest eigenpairs of the symmetric pencil `(A, M)`.
//!
//! The sparse path runs block subspace iteration on `(A − σM)⁻¹M` with a
//! shift `σ` strictly below the spectrum, so every factorisation is of a
//! positive definite matrix. The dense path reduces to a standard symmetric
//! problem and is used for cross-checks and as a fallback on small pencils.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::OperatorPencil;
use crate::error::{Error, Result};
use crate::linalg::{dot, reverse_cuthill_mckee, SkylineCholesky};

pub const DEFAULT_SEED: u64 = 0x6a61_636f_6269;
/// Largest pencil handed to the dense path when the sparse path fails.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub method: SolverMethod,
    pub seed: u64,
    pub max_iterations: usize,
    /// Block width; defaults to `max(2k, k + 8)`.
    pub block: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { method: SolverMethod::Auto, seed: DEFAULT_SEED, max_iterations: 1000, block: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Au − λMu‖ / ‖Mu‖`.
    pub residuals: Vec<f64>,
    pub seed: u64,
    /// Path that produced the result (never `Auto`).
    pub method: SolverMethod,
}

/// Groups of indices whose eigenvalues agree within `1e-6·(1 + |λ|)`.
pub fn clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (v - values[c[0]]).abs() <= 1e-6 * (1.0 + v.abs()) => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Second eigenvalue counted with multiplicity.
    pub fn lambda2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        clusters(&self.eigenvalues)
    }

    /// Multiplicity of the eigenvalue at `index` among the computed ones.
    pub fn multiplicity(&self, index: usize) -> usize {
        self.clusters().into_iter().find(|c| c.contains(&index)).map_or(0, |c| c.len())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|uᵢᵀMuⱼ − δᵢⱼ|`.
    pub fn orthonormality_defect(&self, pencil: &OperatorPencil) -> f64 {
        let mv: Vec<Vec<f64>> = self.eigenvectors.iter().map(|u| pencil.mass.matvec(u)).collect();
        let mut worst: f64 = 0.0;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, w) in mv.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, w) - target).abs());
            }
        }
        worst
    }

    /// True when the first eigenvector has no negative entry beyond
    /// `1e-10·max|u|`.
    pub fn first_vector_single_signed(&self) -> bool {
        let u = &self.eigenvectors[0];
        let scale = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        u.iter().all(|&x| x >= -1e-10 * scale)
    }
}

pub fn smallest_eigenpairs(pencil: &OperatorPencil, k: usize, tol: f64) -> Result<Spectrum> {
    smallest_eigenpairs_with(pencil, k, tol, &SolverOptions::default())
}

/// Second eigenvalue counted with multiplicity.
pub fn lambda2(pencil: &OperatorPencil, tol: f64) -> Result<f64> {
    Ok(smallest_eigenpairs(pencil, 2, tol)?.eigenvalues[1])
}

pub fn smallest_eigenpairs_with(pencil: &OperatorPencil, k: usize, tol: f64, opts: &SolverOptions) -> Result<Spectrum> {
    let n = pencil.node_count;
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("requested {k} eigenpairs of a pencil of size {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut spec = match opts.method {
        SolverMethod::Dense => dense(pencil, k)?,
        SolverMethod::ShiftInvert => shift_invert(pencil, k, tol, opts)?,
        SolverMethod::Auto => match shift_invert(pencil, k, tol, opts) {
            Err(e @ Error::NonConvergence { .. }) if n > DENSE_LIMIT => return Err(e),
            Err(Error::NonConvergence { .. }) => dense(pencil, k)?,
            other => other?,
        },
    };
    spec.seed = opts.seed;
    normalise_signs(pencil, &mut spec);
    spec.residuals = spec.eigenvalues.iter().zip(&spec.eigenvectors).map(|(&l, u)| residual(pencil, l, u)).collect();
    let worst = spec.max_residual();
    if !(worst <= tol) {
        return Err(Error::NonConvergence {
            what: format!("{:?} eigensolver (residuals {:?})", spec.method, spec.residuals),
            residual: worst,
        });
    }
    Ok(spec)
}

fn residual(pencil: &OperatorPencil, lambda: f64, u: &[f64]) -> f64 {
    let au = pencil.stiffness_minus_potential.matvec(u);
    let mu = pencil.mass.matvec(u);
    let r: f64 = au.iter().zip(&mu).map(|(a, m)| (a - lambda * m).powi(2)).sum();
    (r / dot(&mu, &mu)).sqrt()
}

/// First vector made nonnegative in mass-weighted sum, others by their
/// largest entry.
fn normalise_signs(pencil: &OperatorPencil, spec: &mut Spectrum) {
    let ones = vec![1.0; pencil.node_count];
    let m1 = pencil.mass.matvec(&ones);
    for (i, u) in spec.eigenvectors.iter_mut().enumerate() {
        let s = if i == 0 {
            dot(u, &m1)
        } else {
            u.iter().copied().fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b })
        };
        if s < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Maps eigenvectors of the reduced standard problem back to the pencil.
type BackTransform = Box<dyn Fn(&DMatrix<f64>) -> DMatrix<f64>>;

fn dense(pencil: &OperatorPencil, k: usize) -> Result<Spectrum> {
    let n = pencil.node_count;
    let a = pencil.stiffness_minus_potential.to_dense();
    let (reduced, back): (DMatrix<f64>, BackTransform) = if pencil.mass.is_diagonal() {
        let s: Vec<f64> = pencil.mass.diag().iter().map(|m| 1.0 / m.sqrt()).collect();
        let b = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * s[i] * s[j]);
        (b, Box::new(move |v: &DMatrix<f64>| DMatrix::from_fn(n, v.ncols(), |i, j| v[(i, j)] * s[i])))
    } else {
        let l = pencil
            .mass
            .to_dense()
            .cholesky()
            .ok_or_else(|| Error::Assembly { node: 0, reason: "mass matrix is not positive definite".into() })?
            .l();
        let lt = l.transpose();
        let x = l.solve_lower_triangular(&a).expect("nonsingular factor");
        let b = l.solve_lower_triangular(&x.transpose()).expect("nonsingular factor");
        let b = (&b + b.transpose()) * 0.5;
        (b, Box::new(move |v: &DMatrix<f64>| lt.solve_upper_triangular(v).expect("nonsingular factor")))
    };
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(k);
    let vecs = DMatrix::from_fn(n, k, |i, j| eig.eigenvectors[(i, order[j])]);
    let u = back(&vecs);
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: (0..k).map(|j| u.column(j).iter().copied().collect()).collect(),
        residuals: Vec::new(),
        seed: 0,
        method: SolverMethod::Dense,
    })
}

/// M-orthonormalise the columns in place by twice-repeated modified
/// Gram–Schmidt. Columns that collapse are replaced by `fresh`.
fn m_orthonormalise(pencil: &OperatorPencil, cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    let n = pencil.node_count;
    for j in 0..cols.len() {
        for _ in 0..3 {
            let norm0 = pencil.mass.quadratic(&cols[j]).sqrt();
            for _ in 0..2 {
                let mv = pencil.mass.matvec(&cols[j]);
                for i in 0..j {
                    let c = dot(&cols[i], &mv);
                    let (head, tail) = cols.split_at_mut(j);
                    tail[0].iter_mut().zip(&head[i]).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = pencil.mass.quadratic(&cols[j]).sqrt();
            if norm > 1e-10 * norm0 && norm > 0.0 {
                cols[j].iter_mut().for_each(|x| *x /= norm);
                break;
            }
            cols[j] = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        }
    }
}

fn shift_invert(pencil: &OperatorPencil, k: usize, tol: f64, opts: &SolverOptions) -> Result<Spectrum> {
    let n = pencil.node_count;
    let a = &pencil.stiffness_minus_potential;
    let m = &pencil.mass;
    let b = opts.block.unwrap_or((2 * k).max(k + 8)).clamp(k, n);

    let qmax = pencil.potential.iter().copied().fold(0.0_f64, f64::max);
    let mut sigma = -qmax - 1.0;
    let perm = reverse_cuthill_mckee(a);
    let factor = loop {
        match SkylineCholesky::factor(&a.add_scaled(-sigma, m), perm.clone()) {
            Ok(f) => break f,
            Err(_) if sigma > -1e12 => sigma = 2.0 * sigma - 1.0,
            Err(row) => {
                return Err(Error::Assembly {
                    node: perm[row],
                    reason: "no admissible shift below the spectrum".into(),
                })
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut best = f64::INFINITY;
    let mut values = vec![0.0; b];
    for _ in 0..opts.max_iterations {
        let mut y: Vec<Vec<f64>> = x.par_iter().map(|v| factor.solve(&m.matvec(v))).collect();
        m_orthonormalise(pencil, &mut y, &mut rng);
        let ay: Vec<Vec<f64>> = y.par_iter().map(|v| a.matvec(v)).collect();
        let h = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        x = order
            .par_iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (r, yr) in y.iter().enumerate() {
                    let w = eig.eigenvectors[(r, c)];
                    v.iter_mut().zip(yr).for_each(|(s, t)| *s += w * t);
                }
                v
            })
            .collect();
        let worst = (0..k).into_par_iter().map(|i| residual(pencil, values[i], &x[i])).reduce(|| 0.0, f64::max);
        best = best.min(worst);
        if worst <= 0.25 * tol {
            break;
        }
    }
    x.truncate(k);
    values.truncate(k);
    if !(best <= tol) {
        return Err(Error::NonConvergence { what: "shift-invert subspace iteration".into(), residual: best });
    }
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors: x,
        residuals: Vec::new(),
        seed: opts.seed,
        method: SolverMethod::ShiftInvert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    fn path_pencil(n: usize) -> OperatorPencil {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let mass: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 3) as f64).collect();
        OperatorPencil::from_matrices(CsrMatrix::from_triplets(n, t), CsrMatrix::diagonal(&mass)).unwrap()
    }

    #[test]
    fn identity_pencil_has_unit_spectrum() {
        let m = CsrMatrix::diagonal(&[1.0, 2.0, 3.0, 0.5, 4.0]);
        let p = OperatorPencil::from_matrices(m.clone(), m).unwrap();
        for method in [SolverMethod::Dense, SolverMethod::ShiftInvert] {
            let opts = SolverOptions { method, ..Default::default() };
            let s = smallest_eigenpairs_with(&p, 3, 1e-10, &opts).unwrap();
            for l in s.eigenvalues {
                assert!((l - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sparse_and_dense_agree() {
        let p = path_pencil(150);
        let d = smallest_eigenpairs_with(
            &p,
            5,
            1e-10,
            &SolverOptions { method: SolverMethod::Dense, ..Default::default() },
        )
        .unwrap();
        let s = smallest_eigenpairs_with(
            &p,
            5,
            1e-10,
            &SolverOptions { method: SolverMethod::ShiftInvert, ..Default::default() },
        )
        .unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
        assert!(s.orthonormality_defect(&p) < 1e-10);
        assert!(s.first_vector_single_signed());
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let p = path_pencil(80);
        let a = smallest_eigenpairs(&p, 3, 1e-10).unwrap();
        let b = smallest_eigenpairs(&p, 3, 1e-10).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn budget_exhaustion_reports_residual() {
        let p = path_pencil(200);
        let opts = SolverOptions {
            method: SolverMethod::ShiftInvert,
            max_iterations: 1,
            block: Some(3),
            ..Default::default()
        };
        match smallest_eigenpairs_with(&p, 3, 1e-12, &opts) {
            Err(Error::NonConvergence { residual, .. }) => assert!(residual > 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clusters_group_close_values() {
        let c = clusters(&[-4.0, -2.0, -2.0 + 1e-9, -2.0, 0.0]);
        assert_eq!(c, vec![vec![0], vec![1, 2, 3], vec![4]]);
    }

    #[test]
    fn bad_requests_rejected() {
        let p = path_pencil(10);
        assert!(smallest_eigenpairs(&p, 0, 1e-10).is_err());
        assert!(smallest_eigenpairs(&p, 11, 1e-10).is_err());
    }
}
