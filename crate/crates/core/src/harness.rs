//! Theorem checks, refinement studies and parameter sweeps.
//!
//! Every check solves the discrete problem at a list of resolutions,
//! extrapolates `λ₂` in the grid spacing, and compares it with the bound
//! of the inequality under test. A check passes when
//! `bound − λ₂_extrapolated ≥ −tol_report`, where
//! `tol_report = max(5·(extrapolation error estimate), tol_floor)`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_with_mass, MassMode, OperatorPencil, PotentialMode};
use crate::catalog::{build, exact_jacobi_spectrum, Perturbation, ShapeKind, ShapeSpec};
use crate::conformal::{balanced_rayleigh_bound_multistart, BalancedBound, MobiusParam};
use crate::eigen::{smallest_eigenpairs_with, SolverMethod, SolverOptions, Spectrum, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::geometry::{compute_geometry, GeometryFields};
use crate::surface::ImmersedSurface;
use crate::warping::{ConditionStatus, Profile, WarpingFunction};

pub const DEFAULT_RESOLUTIONS: [usize; 3] = [32, 64, 128];
pub const DEFAULT_TOL_FLOOR: f64 = 1e-6;
pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    /// `λ₂ ≤ −2` for surfaces of positive genus in `S³`.
    T11,
    /// `λ₂ ≤ n` for hypersurfaces of `ℝ × Sⁿ`.
    T12,
    /// `λ₂ ≤` mean of the slice values `λ₂(L_t)` over the hypersurface.
    T13,
    /// The conformal-volume bound of El Soufi and Ilias with `q = −|σ|² − Ric(ν,ν)`.
    #[serde(rename = "ESI")]
    Esi,
}

impl TheoremId {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t11" => Ok(TheoremId::T11),
            "t12" => Ok(TheoremId::T12),
            "t13" => Ok(TheoremId::T13),
            "esi" => Ok(TheoremId::Esi),
            _ => Err(Error::Parse(format!("unknown check '{s}' (expected t11, t12, t13 or esi)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::T11 => "t11",
            TheoremId::T12 => "t12",
            TheoremId::T13 => "t13",
            TheoremId::Esi => "esi",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOptions {
    pub tol_floor: f64,
    pub solver_tol: f64,
    pub seed: u64,
    pub mass: MassMode,
    /// Eigenpairs computed per resolution; at least 2.
    pub eigen_count: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol_floor: DEFAULT_TOL_FLOOR,
            solver_tol: DEFAULT_SOLVER_TOL,
            seed: DEFAULT_SEED,
            mass: MassMode::Lumped,
            eigen_count: 6,
        }
    }
}

/// Richardson extrapolation of a sequence computed on refined grids.
#[derive(Debug, Clone, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Observed order; `None` when it could not be determined.
    pub order: Option<f64>,
    pub error_estimate: f64,
    pub warnings: Vec<String>,
}

/// Extrapolate `values[i]` computed at spacings `spacings[i]` (coarse to
/// fine). Three or more levels give an observed order from the last three;
/// two levels assume order 2.
pub fn richardson(spacings: &[f64], values: &[f64]) -> Extrapolation {
    assert_eq!(spacings.len(), values.len(), "one value per spacing");
    let mut warnings = Vec::new();
    // Drop repeated grids: a refinement ratio of 1 carries no information.
    let mut h: Vec<f64> = Vec::new();
    let mut v: Vec<f64> = Vec::new();
    for (&hi, &vi) in spacings.iter().zip(values) {
        if let Some(&last) = h.last() {
            if (last / hi - 1.0).abs() < 1e-12 {
                warnings.push(format!("grid ratio 1 at spacing {hi:e}: order undefined"));
                continue;
            }
        }
        h.push(hi);
        v.push(vi);
    }
    let n = v.len();
    if n == 0 {
        return Extrapolation { value: f64::NAN, order: None, error_estimate: f64::NAN, warnings };
    }
    if n == 1 {
        warnings.push("single resolution: no extrapolation".into());
        return Extrapolation { value: v[0], order: None, error_estimate: 0.0, warnings };
    }
    let two_level = |p: f64| {
        let r = h[n - 2] / h[n - 1];
        let value = v[n - 1] + (v[n - 1] - v[n - 2]) / (r.powf(p) - 1.0);
        (value, (value - v[n - 1]).abs())
    };
    if n == 2 {
        warnings.push("two resolutions: order 2 assumed".into());
        let (value, err) = two_level(2.0);
        return Extrapolation { value, order: None, error_estimate: err, warnings };
    }
    let (h0, h1, h2) = (h[n - 3], h[n - 2], h[n - 1]);
    let (d01, d12) = (v[n - 2] - v[n - 3], v[n - 1] - v[n - 2]);
    let order = if d12 == 0.0 && d01 == 0.0 {
        None
    } else if d01 * d12 <= 0.0 {
        warnings.push("non-monotone convergence: order undefined".into());
        None
    } else {
        observed_order(h0, h1, h2, d01 / d12)
    };
    match order {
        Some(p) => {
            let (value, err) = two_level(p);
            Extrapolation { value, order: Some(p), error_estimate: err, warnings }
        }
        None => {
            let (value, err) = two_level(2.0);
            Extrapolation { value, order: None, error_estimate: err.max((d12).abs()), warnings }
        }
    }
}

/// Solve `(h0^p − h1^p)/(h1^p − h2^p) = ratio` for `p`.
fn observed_order(h0: f64, h1: f64, h2: f64, ratio: f64) -> Option<f64> {
    let g = |p: f64| (h0.powf(p) - h1.powf(p)) / (h1.powf(p) - h2.powf(p)) - ratio;
    let (mut lo, mut hi) = (1e-3, 20.0);
    if g(lo) * g(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolutionResult {
    pub resolution: usize,
    pub spacing: f64,
    pub node_count: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda2_multiplicity: usize,
    pub eigenvalues: Vec<f64>,
    pub bound: f64,
    pub margin: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub scenario: String,
    pub theorem_id: TheoremId,
    pub shape: ShapeSpec,
    pub resolutions: Vec<usize>,
    pub per_resolution: Vec<ResolutionResult>,
    /// Bound at the finest resolution.
    pub bound: f64,
    pub lambda2_extrapolated: f64,
    pub order: Option<f64>,
    pub error_estimate: f64,
    pub tol_report: f64,
    /// `bound − λ₂_extrapolated`.
    pub margin: f64,
    pub pass: bool,
    /// `|margin| ≤ tol_report`.
    pub equality: bool,
    /// Closed-form `λ₂` when the shape has one.
    pub lambda2_exact: Option<f64>,
    pub seed: u64,
    pub extras: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

struct Solved {
    fields: GeometryFields,
    result: ResolutionResult,
}

fn solve_at(
    spec: &ShapeSpec,
    opts: &CheckOptions,
) -> Result<(ImmersedSurface, GeometryFields, OperatorPencil, Spectrum)> {
    let s = build(spec)?;
    let f = compute_geometry(&s)?;
    let p = assemble_with_mass(&s, &f, PotentialMode::Jacobi, opts.mass)?;
    let sopts = SolverOptions { method: SolverMethod::Auto, seed: opts.seed, ..Default::default() };
    let k = opts.eigen_count.max(2).min(p.node_count);
    let sp = smallest_eigenpairs_with(&p, k, opts.solver_tol, &sopts)?;
    Ok((s, f, p, sp))
}

fn warping_of(spec: &ShapeSpec) -> Result<&WarpingFunction> {
    spec.warping
        .as_ref()
        .filter(|_| !spec.kind.in_sphere3())
        .ok_or_else(|| Error::Hypothesis("this check needs a hypersurface of a warped product".into()))
}

/// Average of `values` over the surface.
fn mean(f: &GeometryFields, values: &[f64]) -> f64 {
    f.integrate(values) / f.area()
}

fn bound_at(
    theorem: TheoremId,
    spec: &ShapeSpec,
    s: &ImmersedSurface,
    f: &GeometryFields,
    extras: &mut BTreeMap<String, f64>,
) -> Result<f64> {
    match theorem {
        TheoremId::T11 => {
            if !spec.kind.in_sphere3() {
                return Err(Error::Hypothesis("the λ₂ ≤ −2 bound concerns surfaces of S³".into()));
            }
            let chi = f.euler_characteristic()?;
            extras.insert("euler_characteristic".into(), chi as f64);
            if chi > 0 {
                return Err(Error::Hypothesis(format!(
                    "the λ₂ ≤ −2 bound needs genus ≥ 1, but Gauss–Bonnet gives χ = {chi}"
                )));
            }
            Ok(-2.0)
        }
        TheoremId::T12 => {
            let w = warping_of(spec)?;
            if w.profile != Profile::Product {
                return Err(Error::Hypothesis(format!(
                    "the λ₂ ≤ n bound needs the product ℝ × Sⁿ (warping is {})",
                    w.profile.name()
                )));
            }
            Ok(w.dim as f64)
        }
        TheoremId::T13 => {
            let w = warping_of(spec)?;
            let heights = s.heights().expect("warped surface");
            let mut worst = f64::INFINITY;
            for &t in &heights {
                let c = w.convexity_condition(t)?;
                worst = worst.min(c);
                if w.condition_status(t)? != ConditionStatus::Strict {
                    return Err(Error::Hypothesis(format!("h''/h + (1 − h'²)/h² > 0 fails at t = {t} (value {c:e})")));
                }
            }
            extras.insert("min_condition".into(), worst);
            let slice: Vec<f64> = heights.iter().map(|&t| w.slice_lambda2(t)).collect::<Result<_>>()?;
            Ok(mean(f, &slice))
        }
        TheoremId::Esi => {
            let w = warping_of(spec)?;
            let n = w.dim as f64;
            let heights = s.heights().expect("warped surface");
            let mut umbilic = Vec::with_capacity(heights.len());
            let mut curvature = Vec::with_capacity(heights.len());
            for (i, &t) in heights.iter().enumerate() {
                let r = w.ambient_ricci(t)?.scalar;
                let h = f.mean_curv[i];
                umbilic.push(f.sigma_sq[i] - n * h * h);
                curvature.push((r - (n + 1.0) * f.ricci_normal[i]) / (n - 1.0));
            }
            let gap = mean(f, &umbilic);
            let tail = mean(f, &curvature);
            extras.insert("umbilicity_gap".into(), gap);
            extras.insert("curvature_term".into(), tail);
            Ok(tail - gap)
        }
    }
}

fn solve_resolution(
    theorem: TheoremId,
    spec: &ShapeSpec,
    opts: &CheckOptions,
    extras: &mut BTreeMap<String, f64>,
) -> Result<Solved> {
    let (s, f, _p, sp) = solve_at(spec, opts)?;
    let bound = bound_at(theorem, spec, &s, &f, extras)?;
    let result = ResolutionResult {
        resolution: spec.resolution,
        spacing: s.grid.spacing(),
        node_count: s.grid.len(),
        lambda1: sp.eigenvalues[0],
        lambda2: sp.eigenvalues[1],
        lambda2_multiplicity: sp.multiplicity(1),
        eigenvalues: sp.eigenvalues.clone(),
        bound,
        margin: bound - sp.eigenvalues[1],
        max_residual: sp.max_residual(),
    };
    Ok(Solved { fields: f, result })
}

/// Run one theorem check on a shape over a list of resolutions.
pub fn check_theorem(
    theorem: TheoremId,
    scenario: &str,
    spec: &ShapeSpec,
    resolutions: &[usize],
    opts: &CheckOptions,
) -> Result<TheoremReport> {
    if resolutions.is_empty() {
        return Err(Error::Invalid("no resolutions given".into()));
    }
    let mut extras = BTreeMap::new();
    let mut per = Vec::with_capacity(resolutions.len());
    let mut last = None;
    for &n in resolutions {
        let solved = solve_resolution(theorem, &spec.with_resolution(n), opts, &mut extras)?;
        per.push(solved.result.clone());
        last = Some(solved);
    }
    let last = last.expect("nonempty");
    extras.insert("area".into(), last.fields.area());
    let spacings: Vec<f64> = per.iter().map(|r| r.spacing).collect();
    let l2: Vec<f64> = per.iter().map(|r| r.lambda2).collect();
    let ext = richardson(&spacings, &l2);
    let bound = last.result.bound;
    let tol_report = (5.0 * ext.error_estimate).max(opts.tol_floor);
    let margin = bound - ext.value;
    let lambda2_exact = exact_jacobi_spectrum(spec, 2).ok().map(|v| v[1]);
    Ok(TheoremReport {
        scenario: scenario.to_string(),
        theorem_id: theorem,
        shape: spec.clone(),
        resolutions: resolutions.to_vec(),
        per_resolution: per,
        bound,
        lambda2_extrapolated: ext.value,
        order: ext.order,
        error_estimate: ext.error_estimate,
        tol_report,
        margin,
        pass: margin >= -tol_report,
        equality: margin.abs() <= tol_report,
        lambda2_exact,
        seed: opts.seed,
        extras,
        warnings: ext.warnings,
    })
}

fn default_opts(tol: f64) -> CheckOptions {
    CheckOptions { tol_floor: tol, ..Default::default() }
}

pub fn check_theorem_11(spec: &ShapeSpec, resolutions: &[usize], tol: f64) -> Result<TheoremReport> {
    check_theorem(TheoremId::T11, &spec.kind.label(), spec, resolutions, &default_opts(tol))
}

pub fn check_theorem_12(spec: &ShapeSpec, resolutions: &[usize], tol: f64) -> Result<TheoremReport> {
    check_theorem(TheoremId::T12, &spec.kind.label(), spec, resolutions, &default_opts(tol))
}

pub fn check_theorem_13(spec: &ShapeSpec, resolutions: &[usize], tol: f64) -> Result<TheoremReport> {
    check_theorem(TheoremId::T13, &spec.kind.label(), spec, resolutions, &default_opts(tol))
}

pub fn check_esi(spec: &ShapeSpec, resolutions: &[usize], tol: f64) -> Result<TheoremReport> {
    check_theorem(TheoremId::Esi, &spec.kind.label(), spec, resolutions, &default_opts(tol))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub spacing: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Order from this level and the two before it.
    pub observed_order: Option<f64>,
    /// `λ₂ − exact`, when a closed form exists.
    pub error: Option<f64>,
    /// Order of the error against the previous level.
    pub oracle_order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub shape: ShapeSpec,
    pub rows: Vec<ConvergenceRow>,
    pub extrapolation: Extrapolation,
    pub lambda2_exact: Option<f64>,
}

/// Refinement study of `λ₂`.
pub fn convergence_study(spec: &ShapeSpec, resolutions: &[usize], opts: &CheckOptions) -> Result<ConvergenceTable> {
    if resolutions.is_empty() {
        return Err(Error::Invalid("no resolutions given".into()));
    }
    let exact = exact_jacobi_spectrum(spec, 2).ok().map(|v| v[1]);
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in resolutions {
        let (s, _, _, sp) = solve_at(&spec.with_resolution(n), opts)?;
        let spacing = s.grid.spacing();
        let lambda2 = sp.eigenvalues[1];
        let error = exact.map(|e| lambda2 - e);
        let oracle_order = match (rows.last(), error) {
            (Some(prev), Some(e)) => prev.error.and_then(|pe| {
                let o = (pe.abs() / e.abs()).ln() / (prev.spacing / spacing).ln();
                o.is_finite().then_some(o)
            }),
            _ => None,
        };
        let observed_order = if rows.len() >= 2 {
            let k = rows.len();
            let (a, b) = (&rows[k - 2], &rows[k - 1]);
            let (d01, d12) = (b.lambda2 - a.lambda2, lambda2 - b.lambda2);
            if d01 * d12 > 0.0 {
                observed_order(a.spacing, b.spacing, spacing, d01 / d12)
            } else {
                None
            }
        } else {
            None
        };
        rows.push(ConvergenceRow {
            resolution: n,
            spacing,
            lambda1: sp.eigenvalues[0],
            lambda2,
            observed_order,
            error,
            oracle_order,
        });
    }
    let h: Vec<f64> = rows.iter().map(|r| r.spacing).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.lambda2).collect();
    Ok(ConvergenceTable { shape: spec.clone(), rows, extrapolation: richardson(&h, &l2), lambda2_exact: exact })
}

pub const FLAT_TORUS_RADII: [f64; 7] = [0.45, 0.5, 0.55, 0.6, 0.65, FRAC_1_SQRT_2, 0.75];
pub const GRAPH_AMPLITUDES: [f64; 6] = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1];

/// `λ₂ ≤ −2` across the flat tori `S¹(r) × S¹(√(1−r²))`.
pub fn flat_torus_sweep(
    radii: &[f64],
    resolutions: &[usize],
    opts: &CheckOptions,
) -> Vec<(String, Result<TheoremReport>)> {
    let scenarios: Vec<Scenario> = radii
        .iter()
        .map(|&r| Scenario {
            name: format!("flat-torus-r{r:.6}"),
            theorem: TheoremId::T11,
            shape: ShapeSpec::sphere3(ShapeKind::FlatTorus { r }, resolutions[0]),
            resolutions: resolutions.to_vec(),
            options: opts.clone(),
        })
        .collect();
    run_scenarios(&scenarios)
}

/// Slice-averaged bound across graphs `t = t0 + ε·φ` of growing amplitude.
pub fn graph_amplitude_sweep(
    warping: &WarpingFunction,
    t0: f64,
    perturbation: &Perturbation,
    amplitudes: &[f64],
    resolutions: &[usize],
    opts: &CheckOptions,
) -> Vec<(String, Result<TheoremReport>)> {
    let scenarios: Vec<Scenario> = amplitudes
        .iter()
        .map(|&a| Scenario {
            name: format!("graph-eps{a:.4}"),
            theorem: TheoremId::T13,
            shape: ShapeSpec::warped(
                ShapeKind::GraphOverSlice { t0, perturbation: perturbation.clone(), amplitude: a },
                resolutions[0],
                warping.clone(),
            ),
            resolutions: resolutions.to_vec(),
            options: opts.clone(),
        })
        .collect();
    run_scenarios(&scenarios)
}

/// One named check.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub name: String,
    pub theorem: TheoremId,
    pub shape: ShapeSpec,
    pub resolutions: Vec<usize>,
    pub options: CheckOptions,
}

/// Run scenarios concurrently; results are ordered by scenario name.
pub fn run_scenarios(scenarios: &[Scenario]) -> Vec<(String, Result<TheoremReport>)> {
    let mut out: Vec<(String, Result<TheoremReport>)> = scenarios
        .par_iter()
        .map(|sc| (sc.name.clone(), check_theorem(sc.theorem, &sc.name, &sc.shape, &sc.resolutions, &sc.options)))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Process exit status for a batch of results: the most severe outcome
/// wins (violation, then non-convergence, then hypothesis failure).
pub fn exit_code<'a, I>(results: I) -> i32
where
    I: IntoIterator<Item = &'a Result<TheoremReport>>,
{
    let mut code = EXIT_PASS;
    for r in results {
        let c = match r {
            Ok(rep) if rep.pass => EXIT_PASS,
            Ok(_) => EXIT_VIOLATION,
            Err(Error::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
            Err(Error::Hypothesis(_)) => EXIT_HYPOTHESIS,
            Err(_) => EXIT_HYPOTHESIS,
        };
        code = code.max(c);
    }
    code
}

/// Scenarios shipped with the tool, per check.
pub fn default_scenarios(theorem: TheoremId) -> Vec<Scenario> {
    let product = WarpingFunction::named("product", 2).expect("built-in warping");
    let cosh = WarpingFunction::named("cosh", 2).expect("built-in warping");
    let y20 = Perturbation::Harmonic { l: 2, m: 0 };
    let res = DEFAULT_RESOLUTIONS.to_vec();
    let mk = |name: &str, shape: ShapeSpec| Scenario {
        name: name.into(),
        theorem,
        shape,
        resolutions: res.clone(),
        options: CheckOptions::default(),
    };
    let graph = |w: &WarpingFunction, a: f64| {
        ShapeSpec::warped(ShapeKind::GraphOverSlice { t0: 0.0, perturbation: y20.clone(), amplitude: a }, 32, w.clone())
    };
    match theorem {
        TheoremId::T11 => vec![
            mk("clifford", ShapeSpec::sphere3(ShapeKind::CliffordTorus, 32)),
            mk("flat-torus-0.6", ShapeSpec::sphere3(ShapeKind::FlatTorus { r: 0.6 }, 32)),
            mk(
                "rotational-torus",
                ShapeSpec::sphere3(ShapeKind::RotationalTorus { r: 0.6, amplitude: 0.1, mode: 2 }, 32),
            ),
        ],
        TheoremId::T12 => vec![
            mk("product-slice", ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, 32, product.clone())),
            mk("product-graph-y20", graph(&product, 0.1)),
        ],
        TheoremId::T13 => vec![
            mk("cosh-slice", ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, 32, cosh.clone())),
            mk("cosh-graph-y20", graph(&cosh, 0.1)),
            mk("product-graph-y20", graph(&product, 0.1)),
        ],
        TheoremId::Esi => vec![
            mk("product-slice", ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, 32, product.clone())),
            mk("product-graph-y20", graph(&product, 0.1)),
            mk("cosh-slice", ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, 32, cosh)),
        ],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceReport {
    pub shape: ShapeSpec,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Smallest bound over all converged starts.
    pub bound: f64,
    pub gap: f64,
    pub candidates: Vec<BalancedBound>,
    pub first_vector_single_signed: bool,
}

/// Balanced coordinate test functions as a certified upper bound on `λ₂`,
/// from the identity and from dilations of size 0.3 along each axis.
pub fn balance_bound(spec: &ShapeSpec, opts: &CheckOptions) -> Result<BalanceReport> {
    let (s, _, p, sp) = solve_at(spec, opts)?;
    let mut starts = vec![MobiusParam::IDENTITY];
    for axis in 0..4 {
        for sign in [-1.0, 1.0] {
            let mut a = [0.0; 4];
            a[axis] = 0.3 * sign;
            starts.push(MobiusParam::new(a)?);
        }
    }
    let candidates = balanced_rayleigh_bound_multistart(&s, &p, &sp, &starts)?;
    let bound = candidates[0].bound;
    Ok(BalanceReport {
        shape: spec.clone(),
        lambda1: sp.eigenvalues[0],
        lambda2: sp.eigenvalues[1],
        bound,
        gap: bound - sp.eigenvalues[1],
        candidates,
        first_vector_single_signed: sp.first_vector_single_signed(),
    })
}
