//! Parametric closed surfaces sampled on structured periodic grids.
//!
//! Ambient points are stored uniformly as `[f64; 4]`: a unit vector of `ℝ⁴`
//! for the round `S³`, and `(t, ω)` with `ω ∈ S² ⊂ ℝ³` for a warped product
//! `I ×_h S²`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warping::{Profile, WarpingFunction};

pub type Point = [f64; 4];

const UNIT_TOL: f64 = 1e-12;

/// Topology of the parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    /// `(u, v) ∈ [0, 2π)²`, periodic in both directions.
    Torus,
    /// Latitude–longitude grid: `θ_i = (i + ½)π/nu`, `φ_k = 2πk/nv`. No node
    /// sits on a pole; across a pole the chart continues by
    /// `X(−θ, φ + π) = X(θ, φ)`.
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub topology: Topology,
    pub nu: usize,
    pub nv: usize,
}

impl Grid {
    pub fn torus(nu: usize, nv: usize) -> Result<Self> {
        if nu < 5 || nv < 5 {
            return Err(Error::Invalid(format!("torus grid {nu}x{nv} too small (min 5x5)")));
        }
        Ok(Self { topology: Topology::Torus, nu, nv })
    }

    pub fn lat_long(nu: usize, nv: usize) -> Result<Self> {
        if nu < 3 || nv < 6 || !nv.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "latitude-longitude grid {nu}x{nv} invalid (need nu >= 3, even nv >= 6)"
            )));
        }
        Ok(Self { topology: Topology::Sphere, nu, nv })
    }

    /// Grid used for a nominal resolution `n`: `n × n` on a torus and
    /// `n/2 × n` on a sphere, so both have spacing `2π/n`.
    pub fn for_resolution(topology: Topology, n: usize) -> Result<Self> {
        match topology {
            Topology::Torus => Self::torus(n, n),
            Topology::Sphere => Self::lat_long(n / 2, n),
        }
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn du(&self) -> f64 {
        match self.topology {
            Topology::Torus => 2.0 * PI / self.nu as f64,
            Topology::Sphere => PI / self.nu as f64,
        }
    }

    pub fn dv(&self) -> f64 {
        2.0 * PI / self.nv as f64
    }

    /// Characteristic spacing used in refinement studies.
    pub fn spacing(&self) -> f64 {
        self.du().max(self.dv())
    }

    pub fn u(&self, i: usize) -> f64 {
        match self.topology {
            Topology::Torus => i as f64 * self.du(),
            Topology::Sphere => (i as f64 + 0.5) * self.du(),
        }
    }

    /// Quadrature weight of row `i` in the `u` direction, for integrands
    /// carrying the area factor `√det g`. Sphere rows use Fejér's first rule
    /// in `cos θ` (divided by `sin θ`), which stays spectrally accurate
    /// through the poles where the plain midpoint rule drops to second order.
    pub fn row_weight(&self, i: usize) -> f64 {
        match self.topology {
            Topology::Torus => self.du(),
            Topology::Sphere => {
                let n = self.nu;
                let theta = self.u(i);
                let tail: f64 =
                    (1..=n / 2).map(|j| (2.0 * j as f64 * theta).cos() / (4.0 * (j * j) as f64 - 1.0)).sum();
                2.0 / n as f64 * (1.0 - 2.0 * tail) / theta.sin()
            }
        }
    }

    pub fn v(&self, k: usize) -> f64 {
        k as f64 * self.dv()
    }

    pub fn node(&self, i: usize, k: usize) -> usize {
        i * self.nv + k
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node / self.nv, node % self.nv)
    }

    /// Resolve a possibly out-of-range index pair to a node, returning the
    /// node and whether the `u` direction was reflected through a pole.
    pub fn resolve(&self, i: isize, k: isize) -> (usize, bool) {
        let nu = self.nu as isize;
        let nv = self.nv as isize;
        match self.topology {
            Topology::Torus => (self.node(i.rem_euclid(nu) as usize, k.rem_euclid(nv) as usize), false),
            Topology::Sphere => {
                let (ii, kk, flipped) = if i < 0 {
                    (-1 - i, k + nv / 2, true)
                } else if i >= nu {
                    (2 * nu - 1 - i, k + nv / 2, true)
                } else {
                    (i, k, false)
                };
                debug_assert!((0..nu).contains(&ii), "stencil reaches past a pole twice");
                (self.node(ii as usize, kk.rem_euclid(nv) as usize), flipped)
            }
        }
    }
}

/// Ambient manifold of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Ambient {
    /// Unit sphere `S³ ⊂ ℝ⁴`.
    Sphere3,
    /// Warped product `I ×_h S²`.
    Warped(WarpingFunction),
}

impl Ambient {
    pub fn is_sphere3(&self) -> bool {
        matches!(self, Ambient::Sphere3)
    }

    pub fn warping(&self) -> Option<&WarpingFunction> {
        match self {
            Ambient::Warped(w) => Some(w),
            Ambient::Sphere3 => None,
        }
    }
}

/// Position and derivatives of a chart up to second order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub p: Point,
    pub du: Point,
    pub dv: Point,
    pub duu: Point,
    pub duv: Point,
    pub dvv: Point,
}

/// A parametrisation of a surface in ambient coordinates.
pub trait Chart: Send + Sync {
    fn point(&self, u: f64, v: f64) -> Point;

    /// Exact derivatives, when the chart knows them.
    fn jet(&self, _u: f64, _v: f64) -> Option<Jet> {
        None
    }
}

/// A closed immersed surface sampled on a grid.
#[derive(Debug, Clone)]
pub struct ImmersedSurface {
    pub ambient: Ambient,
    pub grid: Grid,
    pub points: Vec<Point>,
    /// Exact chart derivatives at the nodes; `None` means derivatives are
    /// taken by finite differences on the grid.
    pub jets: Option<Vec<Jet>>,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl ImmersedSurface {
    pub fn from_chart(ambient: Ambient, grid: Grid, chart: &dyn Chart) -> Result<Self> {
        let mut points = Vec::with_capacity(grid.len());
        let mut jets = Vec::with_capacity(grid.len());
        let mut exact = true;
        for i in 0..grid.nu {
            for k in 0..grid.nv {
                let (u, v) = (grid.u(i), grid.v(k));
                points.push(chart.point(u, v));
                if exact {
                    match chart.jet(u, v) {
                        Some(j) => jets.push(j),
                        None => exact = false,
                    }
                }
            }
        }
        let jets = exact.then_some(jets);
        Self::new(ambient, grid, points, jets)
    }

    pub fn from_points(ambient: Ambient, grid: Grid, points: Vec<Point>) -> Result<Self> {
        Self::new(ambient, grid, points, None)
    }

    fn new(ambient: Ambient, grid: Grid, points: Vec<Point>, jets: Option<Vec<Jet>>) -> Result<Self> {
        let s = Self { ambient, grid, points, jets };
        s.validate()?;
        Ok(s)
    }

    /// Check the sampling invariants: unit norms and interval membership.
    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.grid.len() {
            return Err(Error::Invalid(format!(
                "{} points for a {}x{} grid",
                self.points.len(),
                self.grid.nu,
                self.grid.nv
            )));
        }
        if let Ambient::Warped(w) = &self.ambient {
            if w.dim != 2 {
                return Err(Error::UnsupportedAmbient(format!(
                    "discretised hypersurfaces need a two-dimensional sphere factor (n = {})",
                    w.dim
                )));
            }
        }
        for (node, p) in self.points.iter().enumerate() {
            match &self.ambient {
                Ambient::Sphere3 => {
                    let r = norm(p);
                    if (r - 1.0).abs() > UNIT_TOL {
                        return Err(Error::Domain(format!("node {node}: |x| = {r} is not 1")));
                    }
                }
                Ambient::Warped(w) => {
                    if !w.contains(p[0]) {
                        return Err(Error::Domain(format!(
                            "node {node}: t = {} outside warping interval [{}, {}]",
                            p[0], w.interval.0, w.interval.1
                        )));
                    }
                    let r = norm(&p[1..]);
                    if (r - 1.0).abs() > UNIT_TOL {
                        return Err(Error::Domain(format!("node {node}: sphere-factor point has norm {r}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Compose the chart with an ambient map. Derivatives are recomputed on
    /// the grid, never pushed forward.
    pub fn map_points<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&Point) -> Point,
    {
        Self::from_points(self.ambient.clone(), self.grid, self.points.iter().map(f).collect())
    }

    /// Projection onto the `t` factor (warped ambient only).
    pub fn heights(&self) -> Option<Vec<f64>> {
        self.ambient.warping().map(|_| self.points.iter().map(|p| p[0]).collect())
    }

    /// Write the columnar text format: a header followed by one
    /// `index u v x0 x1 x2 x3` row per node.
    pub fn write_columnar<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# jacobi-surface v1")?;
        match &self.ambient {
            Ambient::Sphere3 => writeln!(out, "# ambient sphere3")?,
            Ambient::Warped(w) => writeln!(
                out,
                "# ambient warped {} {:.17e} {:.17e} {}",
                w.profile.to_spec(),
                w.interval.0,
                w.interval.1,
                w.dim
            )?,
        }
        let topo = match self.grid.topology {
            Topology::Torus => "torus",
            Topology::Sphere => "sphere",
        };
        writeln!(out, "# grid {topo} {} {}", self.grid.nu, self.grid.nv)?;
        writeln!(out, "index u v x0 x1 x2 x3")?;
        for (node, p) in self.points.iter().enumerate() {
            let (i, k) = self.grid.coords(node);
            writeln!(
                out,
                "{node} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                self.grid.u(i),
                self.grid.v(k),
                p[0],
                p[1],
                p[2],
                p[3]
            )?;
        }
        Ok(())
    }

    /// Read the columnar text format and validate the sampling invariants.
    pub fn read_columnar<R: BufRead>(input: R) -> Result<Self> {
        let mut ambient = None;
        let mut grid = None;
        let mut points = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with("index") {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            if let Some(rest) = line.strip_prefix('#') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                match f.first().copied() {
                    Some("ambient") => {
                        ambient = Some(match f.get(1).copied() {
                            Some("sphere3") => Ambient::Sphere3,
                            Some("warped") if f.len() == 6 => {
                                let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
                                let profile = Profile::from_spec(f[2])?;
                                let dim = f[5].parse::<usize>().map_err(|_| bad("bad dimension"))?;
                                Ambient::Warped(WarpingFunction::new(profile, (num(f[3])?, num(f[4])?), dim)?)
                            }
                            _ => return Err(bad("malformed ambient header")),
                        })
                    }
                    Some("grid") if f.len() == 4 => {
                        let nu = f[2].parse::<usize>().map_err(|_| bad("bad nu"))?;
                        let nv = f[3].parse::<usize>().map_err(|_| bad("bad nv"))?;
                        grid = Some(match f[1] {
                            "torus" => Grid::torus(nu, nv)?,
                            "sphere" => Grid::lat_long(nu, nv)?,
                            _ => return Err(bad("unknown topology")),
                        });
                    }
                    _ => {}
                }
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("non-numeric column"))?;
            if cols.len() != 7 {
                return Err(bad("expected 7 columns"));
            }
            if cols[0] as usize != points.len() {
                return Err(bad("node indices must be consecutive"));
            }
            points.push([cols[3], cols[4], cols[5], cols[6]]);
        }
        let ambient = ambient.ok_or_else(|| Error::Parse("missing ambient header".into()))?;
        let grid = grid.ok_or_else(|| Error::Parse("missing grid header".into()))?;
        Self::from_points(ambient, grid, points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Clifford;
    impl Chart for Clifford {
        fn point(&self, u: f64, v: f64) -> Point {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [s * u.cos(), s * u.sin(), s * v.cos(), s * v.sin()]
        }
    }

    #[test]
    fn sphere_grid_reflection() {
        let g = Grid::lat_long(4, 8).unwrap();
        assert_eq!(g.resolve(-1, 0), (g.node(0, 4), true));
        assert_eq!(g.resolve(-2, 6), (g.node(1, 2), true));
        assert_eq!(g.resolve(4, 1), (g.node(3, 5), true));
        assert_eq!(g.resolve(2, -1), (g.node(2, 7), false));
        let t = Grid::torus(6, 6).unwrap();
        assert_eq!(t.resolve(-1, 7), (t.node(5, 1), false));
    }

    #[test]
    fn rejects_off_sphere_points() {
        let g = Grid::torus(6, 6).unwrap();
        let mut pts = vec![[1.0, 0.0, 0.0, 0.0]; 36];
        pts[7] = [1.0, 1e-3, 0.0, 0.0];
        assert!(matches!(ImmersedSurface::from_points(Ambient::Sphere3, g, pts), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_heights_outside_interval() {
        let w = WarpingFunction::new(Profile::Product, (-0.5, 0.5), 2).unwrap();
        let g = Grid::lat_long(4, 8).unwrap();
        let pts = vec![[0.9, 0.0, 0.0, 1.0]; 32];
        assert!(ImmersedSurface::from_points(Ambient::Warped(w), g, pts).is_err());
    }

    #[test]
    fn columnar_roundtrip() {
        let g = Grid::torus(8, 6).unwrap();
        let s = ImmersedSurface::from_chart(Ambient::Sphere3, g, &Clifford).unwrap();
        let mut buf = Vec::new();
        s.write_columnar(&mut buf).unwrap();
        let back = ImmersedSurface::read_columnar(buf.as_slice()).unwrap();
        assert_eq!(back.grid, s.grid);
        assert_eq!(back.points, s.points);
        assert!(back.jets.is_none());
    }

    #[test]
    fn loader_rejects_corrupted_rows() {
        let g = Grid::torus(6, 6).unwrap();
        let s = ImmersedSurface::from_chart(Ambient::Sphere3, g, &Clifford).unwrap();
        let mut buf = Vec::new();
        s.write_columnar(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("\n3 ", "\n3 0 0 2 0 0 0\nignored ", 1);
        assert!(ImmersedSurface::read_columnar(text.as_bytes()).is_err());
    }
}
