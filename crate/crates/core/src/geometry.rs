//! First and second fundamental forms of sampled surfaces.
//!
//! Sign convention: `σ(X, Y) = −g(∇_X Y, ν)`, so slices of a warped product
//! with normal `∂t` have principal curvatures `h'/h`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::{Ambient, Grid, ImmersedSurface, Jet, Point};

/// Relative immersion guard: a node is degenerate when its metric
/// determinant falls below this fraction of the mean determinant.
pub const IMMERSION_EPS: f64 = 1e-10;

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// Per-node geometric data of a surface.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryFields {
    /// `(E, F, G)` of the induced metric in chart coordinates.
    pub metric: Vec<[f64; 3]>,
    /// Quadrature weight `√det g · w_u · dv` of each node (see `Grid::row_weight`).
    pub area_element: Vec<f64>,
    /// Unit normal in an orthonormal ambient frame: the `ℝ⁴` vector itself
    /// for `S³`, and `(ν_t, h·ν_ω)` for a warped product.
    pub normal: Vec<Point>,
    /// `(σ_uu, σ_uv, σ_vv)`.
    pub shape: Vec<[f64; 3]>,
    pub principal: Vec<[f64; 2]>,
    pub mean_curv: Vec<f64>,
    pub sigma_sq: Vec<f64>,
    /// Intrinsic Gaussian curvature from the metric and its derivatives.
    pub gauss_curv: Vec<f64>,
    pub ricci_normal: Vec<f64>,
    /// `⟨ν, ∂t⟩`, warped ambient only.
    pub cos_normal_t: Option<Vec<f64>>,
    #[serde(skip)]
    pub jets: Vec<Jet>,
}

#[derive(Clone, Copy)]
struct Derivs<const N: usize> {
    du: [f64; N],
    dv: [f64; N],
    duu: [f64; N],
    duv: [f64; N],
    dvv: [f64; N],
}

/// Fourth-order centred differences of a grid field. `parity[j]` is the sign
/// picked up by component `j` when a stencil crosses a pole.
fn grid_derivs<const N: usize>(grid: &Grid, field: &[[f64; N]], parity: [f64; N], node: usize) -> Derivs<N> {
    let (i, k) = grid.coords(node);
    let (i, k) = (i as isize, k as isize);
    let at = |a: isize, b: isize| -> [f64; N] {
        let (n, flipped) = grid.resolve(i + a, k + b);
        let mut x = field[n];
        if flipped {
            for j in 0..N {
                x[j] *= parity[j];
            }
        }
        x
    };
    let (du, dv) = (grid.du(), grid.dv());
    let mut d = Derivs { du: [0.0; N], dv: [0.0; N], duu: [0.0; N], duv: [0.0; N], dvv: [0.0; N] };
    for s in 0..5 {
        let off = s as isize - 2;
        let fu = at(off, 0);
        let fv = at(0, off);
        for j in 0..N {
            d.du[j] += D1[s] * fu[j] / du;
            d.duu[j] += D2[s] * fu[j] / (du * du);
            d.dv[j] += D1[s] * fv[j] / dv;
            d.dvv[j] += D2[s] * fv[j] / (dv * dv);
        }
        if D1[s] == 0.0 {
            continue;
        }
        for r in 0..5 {
            if D1[r] == 0.0 {
                continue;
            }
            let f = at(off, r as isize - 2);
            for j in 0..N {
                d.duv[j] += D1[s] * D1[r] * f[j] / (du * dv);
            }
        }
    }
    d
}

/// Chart derivatives by finite differences of the sampled positions.
pub fn finite_difference_jets(grid: &Grid, points: &[Point]) -> Vec<Jet> {
    (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let d = grid_derivs(grid, points, [1.0; 4], node);
            Jet { p: points[node], du: d.du, dv: d.dv, duu: d.duu, duv: d.duv, dvv: d.dvv }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of the 4×4 matrix with the given columns.
fn det4(c: [Point; 4]) -> f64 {
    let mut det = 0.0;
    for row in 0..4 {
        let minor = |col: usize| -> [f64; 3] {
            let mut r = [0.0; 3];
            let mut idx = 0;
            for j in 0..4 {
                if j != row {
                    r[idx] = c[col][j];
                    idx += 1;
                }
            }
            r
        };
        // Expand along the first column.
        let m = [minor(1), minor(2), minor(3)];
        let sub = [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]];
        let sign = if row % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * c[0][row] * det3(sub);
    }
    det
}

/// The vector `n` orthogonal to `a, b, c` with `det[a, b, c, n] = |n|²`.
pub fn cross4(a: Point, b: Point, c: Point) -> Point {
    let mut n = [0.0; 4];
    for (i, ni) in n.iter_mut().enumerate() {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        *ni = det4([a, b, c, e]);
    }
    n
}

struct NodeGeometry {
    metric: [f64; 3],
    det: f64,
    normal: Point,
    shape: [f64; 3],
    cos_t: f64,
}

fn node_geometry(ambient: &Ambient, jet: &Jet) -> Result<NodeGeometry> {
    match ambient {
        Ambient::Sphere3 => {
            let metric = [dot(&jet.du, &jet.du), dot(&jet.du, &jet.dv), dot(&jet.dv, &jet.dv)];
            let mut nu = cross4(jet.p, jet.du, jet.dv);
            let len = dot(&nu, &nu).sqrt();
            nu.iter_mut().for_each(|x| *x /= len);
            let shape = [-dot(&nu, &jet.duu), -dot(&nu, &jet.duv), -dot(&nu, &jet.dvv)];
            Ok(NodeGeometry {
                metric,
                det: metric[0] * metric[2] - metric[1] * metric[1],
                normal: nu,
                shape,
                cos_t: 0.0,
            })
        }
        Ambient::Warped(w) => {
            let (h, dh, _) = w.jet(jet.p[0])?;
            let omega = &jet.p[1..];
            let (tu, tv) = (jet.du[0], jet.dv[0]);
            let (ou, ov) = (&jet.du[1..], &jet.dv[1..]);
            let gam = [dot(ou, ou), dot(ou, ov), dot(ov, ov)];
            let metric = [tu * tu + h * h * gam[0], tu * tv + h * h * gam[1], tv * tv + h * h * gam[2]];
            let lift = |t: f64, o: &[f64]| [t, h * o[0], h * o[1], h * o[2]];
            let mut nu = cross4([0.0, omega[0], omega[1], omega[2]], lift(tu, ou), lift(tv, ov));
            let len = dot(&nu, &nu).sqrt();
            nu.iter_mut().for_each(|x| *x /= len);
            // Levi-Civita derivative ∇_a X_b of dt² + h² ds², fibre part
            // written extrinsically in ℝ³.
            let second = |tab: f64, oab: &[f64], ta: f64, oa: &[f64], tb: f64, ob: &[f64], gab: f64| {
                let at = tab - h * dh * gab;
                let mut ao = [0.0; 3];
                for j in 0..3 {
                    ao[j] = oab[j] + gab * omega[j] + dh / h * (ta * ob[j] + tb * oa[j]);
                }
                -(at * nu[0] + h * dot(&ao, &nu[1..]))
            };
            let shape = [
                second(jet.duu[0], &jet.duu[1..], tu, ou, tu, ou, gam[0]),
                second(jet.duv[0], &jet.duv[1..], tu, ou, tv, ov, gam[1]),
                second(jet.dvv[0], &jet.dvv[1..], tv, ov, tv, ov, gam[2]),
            ];
            Ok(NodeGeometry {
                metric,
                det: metric[0] * metric[2] - metric[1] * metric[1],
                normal: nu,
                shape,
                cos_t: nu[0],
            })
        }
    }
}

/// Metric of the chart `dt² + φ(t)|dw|²` and the derivatives entering the
/// Brioschi formula, from the 2-jet alone: the combination
/// `−½E_vv + F_uv − ½G_uu` is free of third derivatives.
fn metric_jet(ambient: &Ambient, jet: &Jet) -> Result<([f64; 3], Derivs<3>)> {
    let warped = ambient.warping().is_some();
    fn split(x: &Point, warped: bool) -> (f64, &[f64]) {
        if warped {
            (x[0], &x[1..])
        } else {
            (0.0, &x[..])
        }
    }
    let (phi, phi_u, phi_v, phi_uu, phi_uv, phi_vv) = match ambient {
        Ambient::Sphere3 => (1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        Ambient::Warped(w) => {
            let (h, dh, ddh) = w.jet(jet.p[0])?;
            let (tu, tv) = (jet.du[0], jet.dv[0]);
            let c = 2.0 * (dh * dh + h * ddh);
            (
                h * h,
                2.0 * h * dh * tu,
                2.0 * h * dh * tv,
                c * tu * tu + 2.0 * h * dh * jet.duu[0],
                c * tu * tv + 2.0 * h * dh * jet.duv[0],
                c * tv * tv + 2.0 * h * dh * jet.dvv[0],
            )
        }
    };
    let (tu, wu) = split(&jet.du, warped);
    let (tv, wv) = split(&jet.dv, warped);
    let (tuu, wuu) = split(&jet.duu, warped);
    let (tuv, wuv) = split(&jet.duv, warped);
    let (tvv, wvv) = split(&jet.dvv, warped);
    let g = |ta: f64, wa: &[f64], tb: f64, wb: &[f64]| ta * tb + phi * dot(wa, wb);
    // ∂_c g(a, b)
    let dg = |ta: f64, wa: &[f64], tb: f64, wb: &[f64], tac: f64, wac: &[f64], tbc: f64, wbc: &[f64], phic: f64| {
        tac * tb + ta * tbc + phic * dot(wa, wb) + phi * (dot(wac, wb) + dot(wa, wbc))
    };
    let metric = [g(tu, wu, tu, wu), g(tu, wu, tv, wv), g(tv, wv, tv, wv)];
    let du = [
        dg(tu, wu, tu, wu, tuu, wuu, tuu, wuu, phi_u),
        dg(tu, wu, tv, wv, tuu, wuu, tuv, wuv, phi_u),
        dg(tv, wv, tv, wv, tuv, wuv, tuv, wuv, phi_u),
    ];
    let dv = [
        dg(tu, wu, tu, wu, tuv, wuv, tuv, wuv, phi_v),
        dg(tu, wu, tv, wv, tuv, wuv, tvv, wvv, phi_v),
        dg(tv, wv, tv, wv, tvv, wvv, tvv, wvv, phi_v),
    ];
    let a11 = (tuu * tvv - tuv * tuv)
        + phi * (dot(wuu, wvv) - dot(wuv, wuv))
        + phi_u * (dot(wu, wvv) - dot(wv, wuv))
        + phi_v * (dot(wuu, wv) - dot(wu, wuv))
        - 0.5 * phi_vv * dot(wu, wu)
        + phi_uv * dot(wu, wv)
        - 0.5 * phi_uu * dot(wv, wv);
    // Only the combination a11 is used from the second derivatives.
    let d = Derivs { du, dv, duu: [0.0, 0.0, 0.0], duv: [0.0, a11, 0.0], dvv: [0.0; 3] };
    Ok((metric, d))
}

/// Gaussian curvature from the metric and its derivatives (Brioschi).
fn brioschi(g: [f64; 3], d: &Derivs<3>) -> f64 {
    let [e, f, gg] = g;
    let (eu, fu, gu) = (d.du[0], d.du[1], d.du[2]);
    let (ev, fv, gv) = (d.dv[0], d.dv[1], d.dv[2]);
    let (evv, fuv, guu) = (d.dvv[0], d.duv[1], d.duu[2]);
    let a = det3([[-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev], [fv - 0.5 * gu, e, f], [0.5 * gv, f, gg]]);
    let b = det3([[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, gg]]);
    let det = e * gg - f * f;
    (a - b) / (det * det)
}

/// Compute all per-node fields. Exact chart derivatives are used when the
/// surface carries them, fourth-order differences otherwise.
pub fn compute_geometry(s: &ImmersedSurface) -> Result<GeometryFields> {
    let grid = s.grid;
    let jets = match &s.jets {
        Some(j) => j.clone(),
        None => finite_difference_jets(&grid, &s.points),
    };
    let nodes: Vec<NodeGeometry> = jets.par_iter().map(|j| node_geometry(&s.ambient, j)).collect::<Result<_>>()?;

    let mean_det = nodes.iter().map(|n| n.det).sum::<f64>() / nodes.len() as f64;
    let threshold = IMMERSION_EPS * mean_det;
    if let Some((node, n)) = nodes.iter().enumerate().find(|(_, n)| !(n.det >= threshold)) {
        return Err(Error::DegenerateChart { node, det: n.det, threshold });
    }

    let row_weights: Vec<f64> = (0..grid.nu).map(|i| grid.row_weight(i) * grid.dv()).collect();
    let area_element: Vec<f64> =
        nodes.iter().enumerate().map(|(node, n)| n.det.sqrt() * row_weights[grid.coords(node).0]).collect();

    // Warped graphs are oriented so that ⟨ν, ∂t⟩ is positive on average.
    let flip =
        s.ambient.warping().is_some() && nodes.iter().zip(&area_element).map(|(n, a)| n.cos_t * a).sum::<f64>() < 0.0;
    let sign = if flip { -1.0 } else { 1.0 };

    let metric: Vec<[f64; 3]> = nodes.iter().map(|n| n.metric).collect();
    let gauss_curv: Vec<f64> =
        jets.par_iter().map(|j| metric_jet(&s.ambient, j).map(|(g, d)| brioschi(g, &d))).collect::<Result<_>>()?;

    let mut out = GeometryFields {
        metric,
        area_element,
        normal: Vec::with_capacity(nodes.len()),
        shape: Vec::with_capacity(nodes.len()),
        principal: Vec::with_capacity(nodes.len()),
        mean_curv: Vec::with_capacity(nodes.len()),
        sigma_sq: Vec::with_capacity(nodes.len()),
        gauss_curv,
        ricci_normal: Vec::with_capacity(nodes.len()),
        cos_normal_t: s.ambient.warping().map(|_| Vec::with_capacity(nodes.len())),
        jets,
    };
    for (node, n) in nodes.iter().enumerate() {
        let normal = n.normal.map(|x| sign * x);
        let shape = n.shape.map(|x| sign * x);
        let [e, f, g] = n.metric;
        // Shape operator S = g⁻¹σ.
        let inv = [g / n.det, -f / n.det, e / n.det];
        let s11 = inv[0] * shape[0] + inv[1] * shape[1];
        let s12 = inv[0] * shape[1] + inv[1] * shape[2];
        let s21 = inv[1] * shape[0] + inv[2] * shape[1];
        let s22 = inv[1] * shape[1] + inv[2] * shape[2];
        let h = 0.5 * (s11 + s22);
        let det_s = s11 * s22 - s12 * s21;
        let disc = (h * h - det_s).max(0.0).sqrt();
        out.principal.push([h + disc, h - disc]);
        out.mean_curv.push(h);
        out.sigma_sq.push(s11 * s11 + 2.0 * s12 * s21 + s22 * s22);
        let ric = match &s.ambient {
            Ambient::Sphere3 => 2.0,
            Ambient::Warped(w) => w.ricci_direction(s.points[node][0], normal[0].clamp(-1.0, 1.0))?,
        };
        out.ricci_normal.push(ric);
        if let Some(c) = out.cos_normal_t.as_mut() {
            c.push(normal[0]);
        }
        out.normal.push(normal);
        out.shape.push(shape);
    }
    Ok(out)
}

impl GeometryFields {
    pub fn len(&self) -> usize {
        self.area_element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.area_element.is_empty()
    }

    /// Trapezoidal quadrature `∫ f dv` of a per-node field.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.area_element).map(|(v, a)| v * a).sum()
    }

    pub fn area(&self) -> f64 {
        self.area_element.iter().sum()
    }

    /// `∫ K dv`.
    pub fn total_curvature(&self) -> f64 {
        self.integrate(&self.gauss_curv)
    }

    /// Euler characteristic from Gauss–Bonnet, `χ = round(∫K dv / 2π)`.
    pub fn euler_characteristic(&self) -> Result<i64> {
        let value = self.total_curvature() / (2.0 * std::f64::consts::PI);
        let chi = value.round();
        if (value - chi).abs() > 0.1 {
            return Err(Error::MeshTooCoarse { value });
        }
        Ok(chi as i64)
    }

    /// Genus of an orientable surface, `1 − χ/2`.
    pub fn genus(&self) -> Result<i64> {
        Ok(1 - self.euler_characteristic()? / 2)
    }

    /// `√det g · g^{ij}` at a node, as `(uu, uv, vv)`.
    pub fn conductivity(&self, node: usize) -> [f64; 3] {
        let [e, f, g] = self.metric[node];
        let root = (e * g - f * f).sqrt();
        [g / root, -f / root, e / root]
    }
}

/// `max |2K − 2 − 4H² + |σ|²|` over the nodes of a surface in `S³`.
pub fn gauss_equation_residual(s: &ImmersedSurface, f: &GeometryFields) -> Result<f64> {
    if !s.ambient.is_sphere3() {
        return Err(Error::UnsupportedAmbient("the Gauss-equation residual is defined for surfaces of S³".into()));
    }
    Ok((0..f.len())
        .map(|n| {
            let h = f.mean_curv[n];
            (2.0 * f.gauss_curv[n] - 2.0 - 4.0 * h * h + f.sigma_sq[n]).abs()
        })
        .fold(0.0, f64::max))
}
