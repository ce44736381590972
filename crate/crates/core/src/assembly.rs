//! Weak-form assembly of the Jacobi operator `L = −Δ − q` as a symmetric
//! pencil `(A, M)` on the structured grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometryFields;
use crate::linalg::{dot, reverse_cuthill_mckee, CsrMatrix, SkylineCholesky};
use crate::surface::{ImmersedSurface, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialMode {
    /// `q = |σ|² + Ric(ν,ν)` (`|σ|² + 2` in `S³`).
    Jacobi,
    /// Jacobi potential plus a constant.
    Shifted(f64),
    /// Arbitrary per-node potential.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MassMode {
    #[default]
    Lumped,
    Consistent,
}

/// Discrete pencil of `L`: `A = S − P(q)` and mass `M`.
#[derive(Debug, Clone)]
pub struct OperatorPencil {
    pub stiffness_minus_potential: CsrMatrix,
    pub mass: CsrMatrix,
    /// Weak form of `−Δ` alone.
    pub stiffness: CsrMatrix,
    pub node_count: usize,
    pub potential: Vec<f64>,
    pub mass_mode: MassMode,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PencilDiagnostics {
    pub asymmetry_a: f64,
    pub asymmetry_m: f64,
    /// `max_i |Σ_j S_ij|`: `−Δ` applied to constants.
    pub stiffness_row_sum: f64,
    pub min_mass_diagonal: f64,
}

struct Builder {
    t: Vec<(usize, usize, f64)>,
}

impl Builder {
    fn edge(&mut self, a: usize, b: usize, w: f64) {
        self.t.extend([(a, a, w), (b, b, w), (a, b, -w), (b, a, -w)]);
    }
}

const CORNER_A: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];
const CORNER_B: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
const Q1_MASS: [[f64; 4]; 4] = [[4.0, 2.0, 2.0, 1.0], [2.0, 4.0, 1.0, 2.0], [2.0, 1.0, 4.0, 2.0], [1.0, 2.0, 2.0, 4.0]];

/// Cells of the grid as corner quadruples `(i,k), (i+1,k), (i,k+1), (i+1,k+1)`.
fn cells(s: &ImmersedSurface) -> Vec<[usize; 4]> {
    let g = s.grid;
    let rows = match g.topology {
        Topology::Torus => g.nu,
        Topology::Sphere => g.nu - 1,
    };
    let mut out = Vec::with_capacity(rows * g.nv);
    for i in 0..rows {
        for k in 0..g.nv {
            let i1 = (i + 1) % g.nu;
            let k1 = (k + 1) % g.nv;
            out.push([g.node(i, k), g.node(i1, k), g.node(i, k1), g.node(i1, k1)]);
        }
    }
    out
}

/// Weak form of `−Δ`: edge fluxes for the diagonal conductivity and a
/// cell-averaged gradient product for the off-diagonal part.
fn assemble_stiffness(s: &ImmersedSurface, f: &GeometryFields) -> CsrMatrix {
    let g = s.grid;
    let (du, dv) = (g.du(), g.dv());
    let cond: Vec<[f64; 3]> = (0..g.len()).map(|n| f.conductivity(n)).collect();
    let mut b = Builder { t: Vec::with_capacity(g.len() * 20) };
    for c in cells(s) {
        // u-edge (i,k)–(i+1,k) and v-edge (i,k)–(i,k+1) owned by this cell.
        b.edge(c[0], c[1], 0.5 * (cond[c[0]][0] + cond[c[1]][0]) * dv / du);
        let kuv = 0.25 * c.iter().map(|&n| cond[n][1]).sum::<f64>();
        if kuv != 0.0 {
            for p in 0..4 {
                for q in 0..4 {
                    let w = 0.25 * kuv * (CORNER_A[p] * CORNER_B[q] + CORNER_B[p] * CORNER_A[q]);
                    b.t.push((c[p], c[q], w));
                }
            }
        }
    }
    for i in 0..g.nu {
        for k in 0..g.nv {
            let (a, c) = (g.node(i, k), g.node(i, (k + 1) % g.nv));
            b.edge(a, c, 0.5 * (cond[a][2] + cond[c][2]) * du / dv);
        }
    }
    CsrMatrix::from_triplets(g.len(), b.t)
}

fn assemble_mass(s: &ImmersedSurface, f: &GeometryFields, mode: MassMode) -> CsrMatrix {
    match mode {
        MassMode::Lumped => CsrMatrix::diagonal(&f.area_element),
        MassMode::Consistent => {
            // Bilinear mass with its row sums replaced by the nodal areas, so
            // that ∫1 is preserved exactly.
            let mut t: Vec<(usize, usize, f64)> = f.area_element.iter().enumerate().map(|(n, &a)| (n, n, a)).collect();
            for c in cells(s) {
                let area = 0.25 * c.iter().map(|&n| f.area_element[n]).sum::<f64>();
                for p in 0..4 {
                    for q in 0..4 {
                        let lumped = if p == q { 9.0 } else { 0.0 };
                        t.push((c[p], c[q], area * (Q1_MASS[p][q] - lumped) / 36.0));
                    }
                }
            }
            CsrMatrix::from_triplets(s.grid.len(), t)
        }
    }
}

/// `P_ij = M_ij (q_i + q_j)/2`, so a constant shift of `q` shifts `A` by a
/// multiple of `M`.
fn potential_matrix(mass: &CsrMatrix, q: &[f64]) -> CsrMatrix {
    let mut t = Vec::with_capacity(mass.nnz());
    for i in 0..mass.n {
        t.extend(mass.row(i).map(|(j, v)| (i, j, 0.5 * v * (q[i] + q[j]))));
    }
    CsrMatrix::from_triplets(mass.n, t)
}

pub fn assemble(s: &ImmersedSurface, f: &GeometryFields, mode: PotentialMode) -> Result<OperatorPencil> {
    assemble_with_mass(s, f, mode, MassMode::Lumped)
}

pub fn assemble_with_mass(
    s: &ImmersedSurface,
    f: &GeometryFields,
    mode: PotentialMode,
    mass_mode: MassMode,
) -> Result<OperatorPencil> {
    let n = s.grid.len();
    if f.len() != n {
        return Err(Error::Invalid(format!("geometry has {} nodes, surface {n}", f.len())));
    }
    let jacobi = || f.sigma_sq.iter().zip(&f.ricci_normal).map(|(a, b)| a + b);
    let potential: Vec<f64> = match mode {
        PotentialMode::Jacobi => jacobi().collect(),
        PotentialMode::Shifted(c) => jacobi().map(|q| q + c).collect(),
        PotentialMode::Custom(q) => {
            if q.len() != n {
                return Err(Error::Invalid(format!("custom potential has {} values for {n} nodes", q.len())));
            }
            q
        }
    };
    if let Some(node) = potential.iter().position(|q| !q.is_finite()) {
        return Err(Error::Assembly { node, reason: "non-finite potential".into() });
    }

    let stiffness = assemble_stiffness(s, f);
    let mass = assemble_mass(s, f, mass_mode);
    if let Some(node) = mass.diag().iter().position(|&m| !(m > 0.0)) {
        return Err(Error::Assembly { node, reason: "non-positive mass".into() });
    }
    if mass_mode == MassMode::Consistent {
        let perm = reverse_cuthill_mckee(&mass);
        if let Err(row) = SkylineCholesky::factor(&mass, perm.clone()) {
            return Err(Error::Assembly { node: perm[row], reason: "mass matrix is not positive definite".into() });
        }
    }
    let a = stiffness.add_scaled(-1.0, &potential_matrix(&mass, &potential));
    Ok(OperatorPencil { stiffness_minus_potential: a, mass, stiffness, node_count: n, potential, mass_mode })
}

impl OperatorPencil {
    /// Pencil with given matrices; used for externally supplied problems.
    pub fn from_matrices(a: CsrMatrix, mass: CsrMatrix) -> Result<Self> {
        if a.n != mass.n {
            return Err(Error::Invalid("A and M differ in size".into()));
        }
        let n = a.n;
        let mass_mode = if mass.is_diagonal() { MassMode::Lumped } else { MassMode::Consistent };
        Ok(Self {
            stiffness: a.clone(),
            stiffness_minus_potential: a,
            mass,
            node_count: n,
            potential: vec![0.0; n],
            mass_mode,
        })
    }

    /// `uᵀAu / uᵀMu`.
    pub fn rayleigh(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.node_count {
            return Err(Error::Invalid("vector length differs from the pencil size".into()));
        }
        let m = self.mass.quadratic(u);
        if !(m > 0.0) {
            return Err(Error::Invalid("Rayleigh quotient of the zero vector".into()));
        }
        Ok(self.stiffness_minus_potential.quadratic(u) / m)
    }

    /// `∫|∇u|² dv` in the discrete weak form.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        self.stiffness.quadratic(u)
    }

    /// `uᵀMv`.
    pub fn mass_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.mass.matvec(v))
    }

    pub fn diagnostics(&self) -> PencilDiagnostics {
        let ones = vec![1.0; self.node_count];
        PencilDiagnostics {
            asymmetry_a: self.stiffness_minus_potential.asymmetry(),
            asymmetry_m: self.mass.asymmetry(),
            stiffness_row_sum: self.stiffness.matvec(&ones).iter().fold(0.0, |m, x| m.max(x.abs())),
            min_mass_diagonal: self.mass.diag().into_iter().fold(f64::INFINITY, f64::min),
        }
    }

    /// Upper triangles of `A` then `M` as `row col value` lines.
    pub fn write_coo<W: Write>(&self, mut out: W) -> Result<()> {
        for (name, m) in [("A", &self.stiffness_minus_potential), ("M", &self.mass)] {
            let upper: Vec<(usize, usize, f64)> =
                (0..m.n).flat_map(|i| m.row(i).filter(move |&(j, _)| j >= i).map(move |(j, v)| (i, j, v))).collect();
            writeln!(out, "# matrix {name} n {} entries {}", m.n, upper.len())?;
            for (i, j, v) in upper {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build, ShapeKind, ShapeSpec};
    use crate::geometry::compute_geometry;

    fn clifford(n: usize) -> (ImmersedSurface, GeometryFields) {
        let s = build(&ShapeSpec::sphere3(ShapeKind::CliffordTorus, n)).unwrap();
        let f = compute_geometry(&s).unwrap();
        (s, f)
    }

    #[test]
    fn constants_on_clifford() {
        let (s, f) = clifford(16);
        let p = assemble(&s, &f, PotentialMode::Jacobi).unwrap();
        let ones = vec![1.0; p.node_count];
        let a1 = p.stiffness_minus_potential.matvec(&ones);
        let m1 = p.mass.matvec(&ones);
        for (a, m) in a1.iter().zip(&m1) {
            assert!((a + 4.0 * m).abs() < 1e-14);
        }
        assert!((p.rayleigh(&ones).unwrap() + 4.0).abs() < 1e-13);
    }

    #[test]
    fn zero_vector_rayleigh_errors() {
        let (s, f) = clifford(8);
        let p = assemble(&s, &f, PotentialMode::Jacobi).unwrap();
        assert!(p.rayleigh(&vec![0.0; p.node_count]).is_err());
    }

    #[test]
    fn custom_potential_length_checked() {
        let (s, f) = clifford(8);
        assert!(assemble(&s, &f, PotentialMode::Custom(vec![0.0; 3])).is_err());
    }

    #[test]
    fn coo_export_lists_upper_triangles() {
        let (s, f) = clifford(6);
        let p = assemble(&s, &f, PotentialMode::Jacobi).unwrap();
        let mut buf = Vec::new();
        p.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# matrix A n 36"));
        assert!(text.contains("# matrix M n 36 entries 36"));
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            let mut it = line.split_whitespace();
            let i: usize = it.next().unwrap().parse().unwrap();
            let j: usize = it.next().unwrap().parse().unwrap();
            assert!(j >= i);
        }
    }

    #[test]
    fn consistent_mass_preserves_total_area() {
        let (s, f) = clifford(12);
        let p = assemble_with_mass(&s, &f, PotentialMode::Jacobi, MassMode::Consistent).unwrap();
        let ones = vec![1.0; p.node_count];
        assert!((p.mass.quadratic(&ones) - f.area()).abs() < 1e-12);
        assert!(!p.mass.is_diagonal());
    }
}
