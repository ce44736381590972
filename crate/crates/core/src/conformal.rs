//! Conformal dilations of `S³`, weighted conformal balancing, and the
//! conformal identities behind the `λ₂ ≤ −2` test-function argument.
//!
//! A dilation `G_a` with `|a| < 1` is stereographic projection from
//! `−a/|a|`, scaling by `(1 − |a|)/(1 + |a|)`, and inverse projection. It
//! fixes `±a/|a|`, pushes mass towards `a/|a|`, and its inverse is `G_{−a}`.

use serde::{Deserialize, Serialize};

use crate::assembly::OperatorPencil;
use crate::eigen::Spectrum;
use crate::error::{Error, Result};
use crate::geometry::{compute_geometry, GeometryFields};
use crate::linalg::dot;
use crate::surface::{ImmersedSurface, Point};

pub const MAX_PARAM_NORM: f64 = 1.0 - 1e-9;
pub const BALANCE_MAX_ITERATIONS: usize = 500;
pub const BALANCE_DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusParam {
    pub a: [f64; 4],
}

fn norm(x: &[f64; 4]) -> f64 {
    dot(x, x).sqrt()
}

fn scale(x: &[f64; 4], c: f64) -> [f64; 4] {
    x.map(|v| v * c)
}

fn add(x: &[f64; 4], y: &[f64; 4]) -> [f64; 4] {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]]
}

impl MobiusParam {
    pub const IDENTITY: Self = Self { a: [0.0; 4] };

    pub fn new(a: [f64; 4]) -> Result<Self> {
        let r = norm(&a);
        if !(r < MAX_PARAM_NORM) {
            return Err(Error::Domain(format!("dilation parameter needs |a| < 1 - 1e-9 (|a| = {r})")));
        }
        Ok(Self { a })
    }

    pub fn norm(&self) -> f64 {
        norm(&self.a)
    }

    pub fn inverse(&self) -> Self {
        Self { a: scale(&self.a, -1.0) }
    }

    /// Parameter of `G_b ∘ G_a` for collinear `a`, `b`.
    pub fn compose_collinear(&self, other: &Self) -> Result<Self> {
        let (a, b) = (&self.a, &other.a);
        // |a ∧ b| from its components; the Lagrange identity loses it to cancellation.
        let cross =
            (0..4).flat_map(|i| (i + 1..4).map(move |j| (a[i] * b[j] - a[j] * b[i]).powi(2))).sum::<f64>().sqrt();
        if cross > 1e-12 * (1.0 + norm(a) * norm(b)) {
            return Err(Error::Invalid("parameters are not collinear".into()));
        }
        Self::new(scale(&add(a, b), 1.0 / (1.0 + dot(a, b))))
    }
}

/// Stereographic dilation: project from `−e`, scale by `mu`, project back.
/// Returns the image point and the pushforward of `v`.
fn stereo_dilate(x: &Point, e: &Point, mu: f64, v: &Point) -> (Point, Point) {
    let s = dot(x, e);
    let ds = dot(v, e);
    let d = 1.0 + s;
    let z: Point = std::array::from_fn(|i| mu * (x[i] - s * e[i]) / d);
    let dz: Point = std::array::from_fn(|i| mu * ((v[i] - ds * e[i]) / d - (x[i] - s * e[i]) * ds / (d * d)));
    let zz = dot(&z, &z);
    let zdz = dot(&z, &dz);
    let q = 1.0 + zz;
    let y: Point = std::array::from_fn(|i| (2.0 * z[i] + (1.0 - zz) * e[i]) / q);
    let dy: Point = std::array::from_fn(|i| {
        (2.0 * dz[i] - 2.0 * zdz * e[i]) / q - (2.0 * z[i] + (1.0 - zz) * e[i]) * 2.0 * zdz / (q * q)
    });
    (y, dy)
}

/// Image of `x` and pushforward of the tangent vector `v`.
fn dilate_with_differential(m: &MobiusParam, x: &Point, v: &Point) -> (Point, Point) {
    let r = m.norm();
    if r == 0.0 {
        return (*x, *v);
    }
    let e = scale(&m.a, 1.0 / r);
    let lambda = (1.0 - r) / (1.0 + r);
    // Project from whichever pole is farther from x.
    let (y, dy) = if dot(x, &e) >= 0.0 {
        stereo_dilate(x, &e, lambda, v)
    } else {
        stereo_dilate(x, &scale(&e, -1.0), 1.0 / lambda, v)
    };
    let ny = norm(&y);
    (scale(&y, 1.0 / ny), dy)
}

pub fn mobius_apply(m: &MobiusParam, x: &Point) -> Result<Point> {
    if !(m.norm() < MAX_PARAM_NORM) {
        return Err(Error::Domain(format!("dilation parameter needs |a| < 1 (|a| = {})", m.norm())));
    }
    let r = norm(x);
    if (r - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("point must lie on S³ (|x| = {r})")));
    }
    Ok(dilate_with_differential(m, x, &[0.0; 4]).0)
}

/// Pushforward `dG_a(x)·v` of a tangent vector at `x`.
pub fn mobius_differential(m: &MobiusParam, x: &Point, v: &Point) -> Result<Point> {
    mobius_apply(m, x)?;
    Ok(dilate_with_differential(m, x, v).1)
}

/// Extension of `G_a` to the closed unit ball, with `G_a(0) = a`.
pub fn ball_extension(m: &MobiusParam, x: &Point) -> Point {
    let a = &m.a;
    let (aa, ax, xx) = (dot(a, a), dot(a, x), dot(x, x));
    let den = 1.0 + 2.0 * ax + aa * xx;
    std::array::from_fn(|i| ((1.0 - aa) * x[i] + (1.0 + 2.0 * ax + xx) * a[i]) / den)
}

/// Outcome of a balancing run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Balance {
    pub param: MobiusParam,
    /// `‖Σ wᵢ G(xᵢ)‖ / Σ wᵢ`.
    pub residual: f64,
    pub iterations: usize,
}

fn weighted_centre(m: &MobiusParam, points: &[Point], weights: &[f64]) -> Point {
    let total: f64 = weights.iter().sum();
    let mut c = [0.0; 4];
    for (p, &w) in points.iter().zip(weights) {
        let y = dilate_with_differential(m, p, &[0.0; 4]).0;
        c = add(&c, &scale(&y, w));
    }
    scale(&c, 1.0 / total)
}

/// Find `a` with `‖Σ wᵢ G_a(xᵢ)‖ ≤ tol·Σ wᵢ` by damped fixed-point steps:
/// compose with `G_b`, `b = −c/2`, then reduce the composition to a pure
/// dilation (its rotation part does not move the centre off zero).
pub fn balance_weighted(points: &[Point], weights: &[f64], tol: f64, start: MobiusParam) -> Result<Balance> {
    if points.len() != weights.len() || points.is_empty() {
        return Err(Error::Invalid("balancing needs one weight per point".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Invalid("balancing weights must have positive total".into()));
    }
    let mut m = MobiusParam::new(start.a)?;
    let mut c = weighted_centre(&m, points, weights);
    let mut step = BALANCE_DAMPING;
    for it in 0..BALANCE_MAX_ITERATIONS {
        let r = norm(&c);
        if r <= tol {
            return Ok(Balance { param: m, residual: r, iterations: it });
        }
        let b = MobiusParam { a: scale(&c, -step) };
        if b.norm() >= MAX_PARAM_NORM {
            step *= 0.5;
            continue;
        }
        let next = scale(&ball_extension(&m.inverse(), &scale(&b.a, -1.0)), -1.0);
        let Ok(next) = MobiusParam::new(next) else {
            step *= 0.5;
            continue;
        };
        let cn = weighted_centre(&next, points, weights);
        if norm(&cn) < r {
            m = next;
            c = cn;
            step = (step * 1.25).min(BALANCE_DAMPING);
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    let r = norm(&c);
    if r <= tol {
        return Ok(Balance { param: m, residual: r, iterations: BALANCE_MAX_ITERATIONS });
    }
    Err(Error::NonConvergence { what: "conformal balancing".into(), residual: r })
}

fn require_sphere3(s: &ImmersedSurface) -> Result<()> {
    if s.ambient.is_sphere3() {
        Ok(())
    } else {
        Err(Error::UnsupportedAmbient("conformal maps act on surfaces of S³".into()))
    }
}

fn check_density(f1: &[f64]) -> Result<()> {
    let scale = f1.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(scale > 0.0) {
        return Err(Error::Invalid("balancing density vanishes identically".into()));
    }
    if let Some(i) = f1.iter().position(|&x| x < -1e-8 * scale) {
        return Err(Error::Invalid(format!("balancing density is negative at node {i}")));
    }
    Ok(())
}

/// Balance the measure `f₁ dv` on the surface.
pub fn hersch_balance(s: &ImmersedSurface, f: &GeometryFields, f1: &[f64], tol: f64) -> Result<MobiusParam> {
    require_sphere3(s)?;
    if f1.len() != s.points.len() {
        return Err(Error::Invalid("density length differs from node count".into()));
    }
    check_density(f1)?;
    let w: Vec<f64> = f1.iter().zip(&f.area_element).map(|(a, b)| a.max(0.0) * b).collect();
    Ok(balance_weighted(&s.points, &w, tol, MobiusParam::IDENTITY)?.param)
}

/// Coordinate functions of `G_a ∘ i`, one node-vector per ambient axis.
pub fn balanced_coordinates(s: &ImmersedSurface, m: &MobiusParam) -> [Vec<f64>; 4] {
    let img: Vec<Point> = s.points.iter().map(|p| dilate_with_differential(m, p, &[0.0; 4]).0).collect();
    std::array::from_fn(|i| img.iter().map(|y| y[i]).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct BalancedBound {
    pub param: MobiusParam,
    pub bound: f64,
    pub residual: f64,
}

/// Aggregate Rayleigh quotient `Σψᵢᵀ A ψᵢ / Σψᵢᵀ M ψᵢ` of the coordinates
/// of `G ∘ i`, balanced against `M f₁`. Each balanced coordinate is
/// M-orthogonal to `f₁`, so the value bounds `λ₂` from above.
pub fn balanced_rayleigh_bound_from(
    s: &ImmersedSurface,
    pencil: &OperatorPencil,
    spectrum: &Spectrum,
    start: MobiusParam,
) -> Result<BalancedBound> {
    require_sphere3(s)?;
    let f1 = spectrum.eigenvectors.first().ok_or_else(|| Error::Invalid("empty spectrum".into()))?;
    check_density(f1)?;
    let clipped: Vec<f64> = f1.iter().map(|x| x.max(0.0)).collect();
    let w = pencil.mass.matvec(&clipped);
    let total: f64 = w.iter().sum();
    let bal = balance_weighted(&s.points, &w, 1e-9, start)?;
    let psi = balanced_coordinates(s, &bal.param);
    let num: f64 = psi.iter().map(|p| pencil.stiffness_minus_potential.quadratic(p)).sum();
    let den: f64 = psi.iter().map(|p| pencil.mass.quadratic(p)).sum();
    Ok(BalancedBound { param: bal.param, bound: num / den, residual: bal.residual * total })
}

pub fn balanced_rayleigh_bound(
    s: &ImmersedSurface,
    _f: &GeometryFields,
    pencil: &OperatorPencil,
    spectrum: &Spectrum,
) -> Result<f64> {
    Ok(balanced_rayleigh_bound_from(s, pencil, spectrum, MobiusParam::IDENTITY)?.bound)
}

/// Balance from several starting parameters. All converged balancings are
/// returned with the smallest bound first; balancing need not be unique.
pub fn balanced_rayleigh_bound_multistart(
    s: &ImmersedSurface,
    pencil: &OperatorPencil,
    spectrum: &Spectrum,
    starts: &[MobiusParam],
) -> Result<Vec<BalancedBound>> {
    let mut out = Vec::new();
    let mut last_err = None;
    for &start in starts {
        match balanced_rayleigh_bound_from(s, pencil, spectrum, start) {
            Ok(b) => out.push(b),
            Err(e) => last_err = Some(e),
        }
    }
    if out.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::Invalid("no starting parameters".into())));
    }
    out.sort_by(|a, b| a.bound.total_cmp(&b.bound));
    Ok(out)
}

/// Sampled image surface `G_a ∘ i` with its recomputed geometry.
pub fn image_surface(s: &ImmersedSurface, m: &MobiusParam) -> Result<(ImmersedSurface, GeometryFields)> {
    require_sphere3(s)?;
    MobiusParam::new(m.a)?;
    let img = s.map_points(|p| dilate_with_differential(m, p, &[0.0; 4]).0)?;
    let f = compute_geometry(&img)?;
    Ok((img, f))
}

/// `∫(|σ|² − 2H²) dv` on the image surface.
pub fn conformal_willmore_invariant(s: &ImmersedSurface, m: &MobiusParam) -> Result<f64> {
    let (_, f) = image_surface(s, m)?;
    let w: Vec<f64> = f.sigma_sq.iter().zip(&f.mean_curv).map(|(s, h)| s - 2.0 * h * h).collect();
    Ok(f.integrate(&w))
}

/// `(∫|∇Ψ|² dv, 2Ā)`. The energy uses the source metric and the analytic
/// pushforward of the source tangent vectors; the image area comes from the
/// image surface's own finite-difference metric.
pub fn dirichlet_energy_check(s: &ImmersedSurface, m: &MobiusParam) -> Result<(f64, f64)> {
    require_sphere3(s)?;
    let src = compute_geometry(s)?;
    let (_, img) = image_surface(s, m)?;
    let (du, dv) = (s.grid.du(), s.grid.dv());
    let energy: f64 = (0..src.len())
        .map(|n| {
            let j = &src.jets[n];
            let pu = mobius_differential(m, &j.p, &j.du).expect("validated point");
            let pv = mobius_differential(m, &j.p, &j.dv).expect("validated point");
            let [kuu, kuv, kvv] = src.conductivity(n);
            (kuu * dot(&pu, &pu) + 2.0 * kuv * dot(&pu, &pv) + kvv * dot(&pv, &pv)) * du * dv
        })
        .sum();
    Ok((energy, 2.0 * img.area()))
}

/// `(∫(H̄² + 1) dv̄, Ā)` on the image surface.
pub fn willmore_type_inequality_check(s: &ImmersedSurface, m: &MobiusParam) -> Result<(f64, f64)> {
    let (_, f) = image_surface(s, m)?;
    let w: Vec<f64> = f.mean_curv.iter().map(|h| h * h + 1.0).collect();
    Ok((f.integrate(&w), f.area()))
}
