//! Closed-form test surfaces, several with exactly known Jacobi spectra.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{real_harmonic, CartesianPoly};
use crate::surface::{Ambient, Chart, Grid, ImmersedSurface, Jet, Point, Topology};
use crate::warping::WarpingFunction;

/// Deformation profile of a graph over a slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// Orthonormal real spherical harmonic `Y_{l,m}`, `l ≤ 4`.
    Harmonic { l: usize, m: i32 },
    /// Arbitrary polynomial in the ambient coordinates of `S²`.
    Polynomial(CartesianPoly),
}

impl Perturbation {
    pub fn polynomial(&self) -> Result<CartesianPoly> {
        match self {
            Perturbation::Harmonic { l, m } => real_harmonic(*l, *m),
            Perturbation::Polynomial(p) => Ok(p.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Perturbation::Harmonic { l, m } => format!("Y{l}{m}"),
            Perturbation::Polynomial(_) => "poly".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShapeKind {
    CliffordTorus,
    /// `S¹(r) × S¹(√(1−r²)) ⊂ S³`.
    FlatTorus {
        r: f64,
    },
    /// Torus of revolution in `S³` whose first radius oscillates,
    /// `r(v) = r + amplitude·cos(mode·v)`. No closed-form spectrum.
    RotationalTorus {
        r: f64,
        amplitude: f64,
        mode: u32,
    },
    /// Geodesic sphere of radius `rho` about the pole `e₄` of `S³`.
    GeodesicSphere {
        rho: f64,
    },
    /// `{t0} × S²` in a warped product.
    Slice {
        t0: f64,
    },
    /// `t = t0 + amplitude·φ(ω)` over the sphere factor.
    GraphOverSlice {
        t0: f64,
        perturbation: Perturbation,
        amplitude: f64,
    },
}

impl ShapeKind {
    pub fn topology(&self) -> Topology {
        match self {
            ShapeKind::CliffordTorus | ShapeKind::FlatTorus { .. } | ShapeKind::RotationalTorus { .. } => {
                Topology::Torus
            }
            _ => Topology::Sphere,
        }
    }

    pub fn in_sphere3(&self) -> bool {
        !matches!(self, ShapeKind::Slice { .. } | ShapeKind::GraphOverSlice { .. })
    }

    pub fn label(&self) -> String {
        match self {
            ShapeKind::CliffordTorus => "clifford".into(),
            ShapeKind::FlatTorus { r } => format!("flat-torus(r={r})"),
            ShapeKind::RotationalTorus { r, amplitude, mode } => {
                format!("rotational-torus(r={r},a={amplitude},m={mode})")
            }
            ShapeKind::GeodesicSphere { rho } => format!("geodesic-sphere(rho={rho})"),
            ShapeKind::Slice { t0 } => format!("slice(t0={t0})"),
            ShapeKind::GraphOverSlice { t0, perturbation, amplitude } => {
                format!("graph(t0={t0},{},eps={amplitude})", perturbation.label())
            }
        }
    }
}

/// A catalog shape at a nominal grid resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub resolution: usize,
    /// Warping function for slice-type shapes; ignored for `S³` shapes.
    pub warping: Option<WarpingFunction>,
}

impl ShapeSpec {
    pub fn sphere3(kind: ShapeKind, resolution: usize) -> Self {
        Self { kind, resolution, warping: None }
    }

    pub fn warped(kind: ShapeKind, resolution: usize, warping: WarpingFunction) -> Self {
        Self { kind, resolution, warping: Some(warping) }
    }

    pub fn with_resolution(&self, resolution: usize) -> Self {
        Self { resolution, ..self.clone() }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::for_resolution(self.kind.topology(), self.resolution)
    }

    pub fn ambient(&self) -> Result<Ambient> {
        if self.kind.in_sphere3() {
            Ok(Ambient::Sphere3)
        } else {
            self.warping
                .clone()
                .map(Ambient::Warped)
                .ok_or_else(|| Error::Invalid(format!("{} needs a warping function", self.kind.label())))
        }
    }

    /// Second fundamental form norm of the flat torus `T_r`.
    pub fn flat_torus_sigma_sq(r: f64) -> f64 {
        let r2 = r * r;
        (1.0 - r2) / r2 + r2 / (1.0 - r2)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match &self.kind {
            ShapeKind::FlatTorus { r } if !(*r > 0.0 && *r < 1.0) => {
                bad(format!("flat torus needs 0 < r < 1 (r = {r})"))
            }
            ShapeKind::RotationalTorus { r, amplitude, .. }
                if !(r - amplitude.abs() > 0.0 && r + amplitude.abs() < 1.0) =>
            {
                bad(format!("rotational torus radius leaves (0, 1): r = {r}, amplitude = {amplitude}"))
            }
            ShapeKind::GeodesicSphere { rho } if !(*rho > 0.0 && *rho < std::f64::consts::PI) => {
                bad(format!("geodesic sphere needs 0 < rho < pi (rho = {rho})"))
            }
            _ => Ok(()),
        }
    }
}

/// Build the sampled surface of a catalog shape.
pub fn build(spec: &ShapeSpec) -> Result<ImmersedSurface> {
    build_on(spec, spec.grid()?)
}

/// Build a catalog shape on an explicit grid, ignoring `spec.resolution`.
/// The grid topology must match the shape.
pub fn build_on(spec: &ShapeSpec, grid: Grid) -> Result<ImmersedSurface> {
    spec.validate()?;
    if grid.topology != spec.kind.topology() {
        return Err(Error::Invalid(format!("{} cannot be sampled on a {:?} grid", spec.kind.label(), grid.topology)));
    }
    let ambient = spec.ambient()?;
    match &spec.kind {
        ShapeKind::CliffordTorus => ImmersedSurface::from_chart(ambient, grid, &FlatTorusChart::new(FRAC_1_SQRT_2)),
        ShapeKind::FlatTorus { r } => ImmersedSurface::from_chart(ambient, grid, &FlatTorusChart::new(*r)),
        ShapeKind::RotationalTorus { r, amplitude, mode } => ImmersedSurface::from_chart(
            ambient,
            grid,
            &RotationalTorusChart { r: *r, amplitude: *amplitude, mode: *mode as f64 },
        ),
        ShapeKind::GeodesicSphere { rho } => {
            ImmersedSurface::from_chart(ambient, grid, &GeodesicSphereChart { rho: *rho })
        }
        ShapeKind::Slice { t0 } => {
            ImmersedSurface::from_chart(ambient, grid, &GraphChart { t0: *t0, amplitude: 0.0, poly: None })
        }
        ShapeKind::GraphOverSlice { t0, perturbation, amplitude } => ImmersedSurface::from_chart(
            ambient,
            grid,
            &GraphChart { t0: *t0, amplitude: *amplitude, poly: Some(perturbation.polynomial()?) },
        ),
    }
}

/// Closed-form Jacobi eigenvalues, ascending and repeated by multiplicity.
pub fn exact_jacobi_spectrum(spec: &ShapeSpec, count: usize) -> Result<Vec<f64>> {
    match &spec.kind {
        ShapeKind::CliffordTorus => Ok(flat_torus_spectrum(FRAC_1_SQRT_2, count)),
        ShapeKind::FlatTorus { r } => {
            spec.validate()?;
            Ok(flat_torus_spectrum(*r, count))
        }
        ShapeKind::GeodesicSphere { rho } => {
            spec.validate()?;
            let s2 = rho.sin().powi(2);
            let cot2 = (rho.cos() / rho.sin()).powi(2);
            let mut out = Vec::with_capacity(count);
            let mut l = 0usize;
            while out.len() < count {
                let lam = (l * (l + 1)) as f64 / s2 - 2.0 * cot2 - 2.0;
                out.extend(std::iter::repeat_n(lam, (2 * l + 1).min(count - out.len())));
                l += 1;
            }
            Ok(out)
        }
        ShapeKind::Slice { t0 } => {
            let w = spec.warping.as_ref().ok_or_else(|| Error::Invalid("slice needs a warping function".into()))?;
            w.slice_spectrum(*t0, count)
        }
        other => Err(Error::UnsupportedShape(format!("no closed-form spectrum for {}", other.label()))),
    }
}

/// `m²/r² + k²/(1−r²) − |σ|² − 2` over all integer pairs, smallest first.
fn flat_torus_spectrum(r: f64, count: usize) -> Vec<f64> {
    let a = 1.0 / (r * r);
    let b = 1.0 / (1.0 - r * r);
    let shift = ShapeSpec::flat_torus_sigma_sq(r) + 2.0;
    let mut reach = 2i64;
    loop {
        let mut vals: Vec<f64> = (-reach..=reach)
            .flat_map(|m| (-reach..=reach).map(move |k| (m * m) as f64 * a + (k * k) as f64 * b))
            .collect();
        vals.sort_by(f64::total_cmp);
        // Anything outside the box exceeds min(a, b)(reach + 1)².
        let bound = a.min(b) * ((reach + 1) * (reach + 1)) as f64;
        if vals.len() >= count && vals[count - 1] < bound {
            return vals.into_iter().take(count).map(|v| v - shift).collect();
        }
        reach *= 2;
    }
}

struct FlatTorusChart {
    r: f64,
    s: f64,
}

impl FlatTorusChart {
    fn new(r: f64) -> Self {
        Self { r, s: (1.0 - r * r).sqrt() }
    }
}

impl Chart for FlatTorusChart {
    fn point(&self, u: f64, v: f64) -> Point {
        [self.r * u.cos(), self.r * u.sin(), self.s * v.cos(), self.s * v.sin()]
    }

    fn jet(&self, u: f64, v: f64) -> Option<Jet> {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let (r, s) = (self.r, self.s);
        Some(Jet {
            p: self.point(u, v),
            du: [-r * su, r * cu, 0.0, 0.0],
            dv: [0.0, 0.0, -s * sv, s * cv],
            duu: [-r * cu, -r * su, 0.0, 0.0],
            duv: [0.0; 4],
            dvv: [0.0, 0.0, -s * cv, -s * sv],
        })
    }
}

struct RotationalTorusChart {
    r: f64,
    amplitude: f64,
    mode: f64,
}

impl Chart for RotationalTorusChart {
    fn point(&self, u: f64, v: f64) -> Point {
        self.jet(u, v).map(|j| j.p).unwrap_or_default()
    }

    fn jet(&self, u: f64, v: f64) -> Option<Jet> {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let (sm, cm) = (self.mode * v).sin_cos();
        let rr = self.r + self.amplitude * cm;
        let r1 = -self.amplitude * self.mode * sm;
        let r2 = -self.amplitude * self.mode * self.mode * cm;
        let s = (1.0 - rr * rr).sqrt();
        let s1 = -rr * r1 / s;
        let s2 = -(r1 * r1 + rr * r2 + s1 * s1) / s;
        Some(Jet {
            p: [rr * cu, rr * su, s * cv, s * sv],
            du: [-rr * su, rr * cu, 0.0, 0.0],
            dv: [r1 * cu, r1 * su, s1 * cv - s * sv, s1 * sv + s * cv],
            duu: [-rr * cu, -rr * su, 0.0, 0.0],
            duv: [-r1 * su, r1 * cu, 0.0, 0.0],
            dvv: [r2 * cu, r2 * su, s2 * cv - 2.0 * s1 * sv - s * cv, s2 * sv + 2.0 * s1 * cv - s * sv],
        })
    }
}

/// Unit sphere `S²` in latitude–longitude coordinates with derivatives.
struct SphereJet {
    p: [f64; 3],
    dt: [f64; 3],
    dp: [f64; 3],
    dtt: [f64; 3],
    dtp: [f64; 3],
    dpp: [f64; 3],
}

fn sphere_jet(theta: f64, phi: f64) -> SphereJet {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    SphereJet {
        p: [st * cp, st * sp, ct],
        dt: [ct * cp, ct * sp, -st],
        dp: [-st * sp, st * cp, 0.0],
        dtt: [-st * cp, -st * sp, -ct],
        dtp: [-ct * sp, ct * cp, 0.0],
        dpp: [-st * cp, -st * sp, 0.0],
    }
}

struct GeodesicSphereChart {
    rho: f64,
}

impl Chart for GeodesicSphereChart {
    fn point(&self, u: f64, v: f64) -> Point {
        let w = sphere_jet(u, v).p;
        let (s, c) = self.rho.sin_cos();
        [s * w[0], s * w[1], s * w[2], c]
    }

    fn jet(&self, u: f64, v: f64) -> Option<Jet> {
        let w = sphere_jet(u, v);
        let s = self.rho.sin();
        let lift = |x: [f64; 3]| [s * x[0], s * x[1], s * x[2], 0.0];
        Some(Jet {
            p: self.point(u, v),
            du: lift(w.dt),
            dv: lift(w.dp),
            duu: lift(w.dtt),
            duv: lift(w.dtp),
            dvv: lift(w.dpp),
        })
    }
}

struct GraphChart {
    t0: f64,
    amplitude: f64,
    poly: Option<CartesianPoly>,
}

impl Chart for GraphChart {
    fn point(&self, u: f64, v: f64) -> Point {
        self.jet(u, v).map(|j| j.p).unwrap_or_default()
    }

    fn jet(&self, u: f64, v: f64) -> Option<Jet> {
        let w = sphere_jet(u, v);
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let (mut t, mut tu, mut tv, mut tuu, mut tuv, mut tvv) = (self.t0, 0.0, 0.0, 0.0, 0.0, 0.0);
        if let Some(poly) = self.poly.as_ref().filter(|_| self.amplitude != 0.0) {
            let e = self.amplitude;
            let g = poly.gradient(w.p);
            let h = poly.hessian(w.p);
            let quad = |a: [f64; 3], b: [f64; 3]| {
                (0..3).map(|i| (0..3).map(|j| a[i] * h[i][j] * b[j]).sum::<f64>()).sum::<f64>()
            };
            t += e * poly.eval(w.p);
            tu = e * dot(g, w.dt);
            tv = e * dot(g, w.dp);
            tuu = e * (quad(w.dt, w.dt) + dot(g, w.dtt));
            tuv = e * (quad(w.dt, w.dp) + dot(g, w.dtp));
            tvv = e * (quad(w.dp, w.dp) + dot(g, w.dpp));
        }
        let cat = |s: f64, x: [f64; 3]| [s, x[0], x[1], x[2]];
        Some(Jet {
            p: cat(t, w.p),
            du: cat(tu, w.dt),
            dv: cat(tv, w.dp),
            duu: cat(tuu, w.dtt),
            duv: cat(tuv, w.dtp),
            dvv: cat(tvv, w.dpp),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product() -> WarpingFunction {
        WarpingFunction::named("product", 2).unwrap()
    }

    #[test]
    fn clifford_spectrum_head() {
        let spec = ShapeSpec::sphere3(ShapeKind::CliffordTorus, 16);
        let s = exact_jacobi_spectrum(&spec, 9).unwrap();
        let expect = [-4.0, -2.0, -2.0, -2.0, -2.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn geodesic_and_slice_spectra() {
        let eq = ShapeSpec::sphere3(ShapeKind::GeodesicSphere { rho: std::f64::consts::FRAC_PI_2 }, 16);
        let s = exact_jacobi_spectrum(&eq, 4).unwrap();
        assert!((s[0] + 2.0).abs() < 1e-12 && s[1..].iter().all(|x| x.abs() < 1e-12));
        let sl = ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, 16, product());
        assert_eq!(exact_jacobi_spectrum(&sl, 4).unwrap(), vec![0.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn unsupported_spectrum_kind() {
        let g = ShapeSpec::warped(
            ShapeKind::GraphOverSlice { t0: 0.0, perturbation: Perturbation::Harmonic { l: 2, m: 0 }, amplitude: 0.1 },
            16,
            product(),
        );
        assert!(matches!(exact_jacobi_spectrum(&g, 3), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn invalid_parameters() {
        assert!(build(&ShapeSpec::sphere3(ShapeKind::FlatTorus { r: 1.2 }, 16)).is_err());
        assert!(build(&ShapeSpec::sphere3(ShapeKind::GeodesicSphere { rho: 0.0 }, 16)).is_err());
        assert!(build(&ShapeSpec::sphere3(ShapeKind::RotationalTorus { r: 0.7, amplitude: 0.4, mode: 2 }, 16)).is_err());
        // Slice without a warping function.
        assert!(build(&ShapeSpec { kind: ShapeKind::Slice { t0: 0.0 }, resolution: 16, warping: None }).is_err());
    }

    #[test]
    fn graph_leaving_interval_is_a_domain_error() {
        let w = WarpingFunction::new(crate::warping::Profile::Product, (-0.05, 0.05), 2).unwrap();
        let g = ShapeSpec::warped(
            ShapeKind::GraphOverSlice { t0: 0.0, perturbation: Perturbation::Harmonic { l: 2, m: 0 }, amplitude: 0.5 },
            16,
            w,
        );
        assert!(matches!(build(&g), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_amplitude_graph_is_the_slice() {
        let a = build(&ShapeSpec::warped(ShapeKind::Slice { t0: 0.3 }, 16, product())).unwrap();
        let b = build(&ShapeSpec::warped(
            ShapeKind::GraphOverSlice { t0: 0.3, perturbation: Perturbation::Harmonic { l: 3, m: 1 }, amplitude: 0.0 },
            16,
            product(),
        ))
        .unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn analytic_jets_match_finite_differences() {
        let charts: Vec<Box<dyn Chart>> = vec![
            Box::new(RotationalTorusChart { r: 0.6, amplitude: 0.1, mode: 2.0 }),
            Box::new(GeodesicSphereChart { rho: 1.1 }),
            Box::new(GraphChart { t0: 0.2, amplitude: 0.3, poly: Some(real_harmonic(3, 2).unwrap()) }),
        ];
        let eps = 1e-4;
        for c in &charts {
            let (u, v) = (0.7, 1.9);
            let j = c.jet(u, v).unwrap();
            let p = |a: f64, b: f64| c.point(a, b);
            for d in 0..4 {
                let fu = (p(u + eps, v)[d] - p(u - eps, v)[d]) / (2.0 * eps);
                let fv = (p(u, v + eps)[d] - p(u, v - eps)[d]) / (2.0 * eps);
                let fuu = (p(u + eps, v)[d] - 2.0 * j.p[d] + p(u - eps, v)[d]) / (eps * eps);
                let fvv = (p(u, v + eps)[d] - 2.0 * j.p[d] + p(u, v - eps)[d]) / (eps * eps);
                let fuv = (p(u + eps, v + eps)[d] - p(u + eps, v - eps)[d] - p(u - eps, v + eps)[d]
                    + p(u - eps, v - eps)[d])
                    / (4.0 * eps * eps);
                assert!((fu - j.du[d]).abs() < 1e-7);
                assert!((fv - j.dv[d]).abs() < 1e-7);
                assert!((fuu - j.duu[d]).abs() < 1e-5);
                assert!((fvv - j.dvv[d]).abs() < 1e-5);
                assert!((fuv - j.duv[d]).abs() < 1e-5);
            }
        }
    }
}
