//! Acceptance gate. Each criterion prints one PASS or FAIL line; the binary
//! exits nonzero when any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use jacobi_spectrum::assembly::{assemble, PotentialMode};
use jacobi_spectrum::catalog::{build, exact_jacobi_spectrum, Perturbation, ShapeKind, ShapeSpec};
use jacobi_spectrum::conformal::{
    conformal_willmore_invariant, dirichlet_energy_check, willmore_type_inequality_check, MobiusParam,
};
use jacobi_spectrum::eigen::{smallest_eigenpairs_with, SolverMethod, SolverOptions};
use jacobi_spectrum::geometry::{compute_geometry, gauss_equation_residual};
use jacobi_spectrum::harness::{
    self, balance_bound, check_theorem, convergence_study, CheckOptions, TheoremId, FLAT_TORUS_RADII,
};
use jacobi_spectrum::linalg::CsrMatrix;
use jacobi_spectrum::surface::Topology;
use jacobi_spectrum::warping::WarpingFunction;
use jacobi_spectrum::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Result<Outcome>;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn product() -> WarpingFunction {
    WarpingFunction::named("product", 2).unwrap()
}

fn cosh() -> WarpingFunction {
    WarpingFunction::named("cosh", 2).unwrap()
}

fn sphere3_catalog(n: usize) -> Vec<ShapeSpec> {
    [
        ShapeKind::CliffordTorus,
        ShapeKind::FlatTorus { r: 0.6 },
        ShapeKind::RotationalTorus { r: 0.6, amplitude: 0.1, mode: 2 },
        ShapeKind::GeodesicSphere { rho: FRAC_PI_2 },
        ShapeKind::GeodesicSphere { rho: 1.0 },
    ]
    .into_iter()
    .map(|k| ShapeSpec::sphere3(k, n))
    .collect()
}

fn warped_catalog(n: usize) -> Vec<ShapeSpec> {
    let y20 = Perturbation::Harmonic { l: 2, m: 0 };
    vec![
        ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, n, product()),
        ShapeSpec::warped(
            ShapeKind::GraphOverSlice { t0: 0.0, perturbation: y20.clone(), amplitude: 0.1 },
            n,
            product(),
        ),
        ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, n, cosh()),
        ShapeSpec::warped(ShapeKind::GraphOverSlice { t0: 0.0, perturbation: y20, amplitude: 0.1 }, n, cosh()),
    ]
}

fn clifford_spectrum() -> Result<Outcome> {
    let spec = ShapeSpec::sphere3(ShapeKind::CliffordTorus, 128);
    let rep = check_theorem(TheoremId::T11, "clifford", &spec, &[32, 64, 128], &CheckOptions::default())?;
    let fine = rep.per_resolution.last().unwrap();
    let order = rep.order.unwrap_or(f64::NAN);
    let pass = (fine.lambda1 + 4.0).abs() <= 1e-3
        && (fine.lambda2 + 2.0).abs() <= 1e-3
        && fine.lambda2_multiplicity == 4
        && (order - 2.0).abs() <= 0.2;
    Ok(outcome(
        pass,
        format!(
            "lambda1={:.6} lambda2={:.6} multiplicity={} order={order:.3}",
            fine.lambda1, fine.lambda2, fine.lambda2_multiplicity
        ),
    ))
}

fn flat_torus_family() -> Result<Outcome> {
    let opts = CheckOptions::default();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut equal_at = Vec::new();
    for (name, rep) in harness::flat_torus_sweep(&FLAT_TORUS_RADII, &[48, 96], &opts) {
        let rep = rep?;
        let ShapeKind::FlatTorus { r } = rep.shape.kind else { unreachable!("{name}") };
        let exact = exact_jacobi_spectrum(&rep.shape, 2)?[1];
        let err = (rep.per_resolution.last().unwrap().lambda2 - exact).abs();
        worst = worst.max(err);
        pass &= err <= 1e-3 && rep.lambda2_extrapolated <= -2.0 + 1e-6;
        if rep.equality {
            equal_at.push(r);
        }
    }
    pass &= equal_at.len() == 1 && (equal_at[0] - FRAC_1_SQRT_2).abs() < 1e-12;
    Ok(outcome(pass, format!("max |lambda2 - exact| at 96 = {worst:.2e}, equality at r = {equal_at:?}")))
}

fn slices() -> Result<Outcome> {
    let opts = CheckOptions::default();
    let res = [32, 64, 128];
    let flat = ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, 128, product());
    let curved = ShapeSpec::warped(ShapeKind::Slice { t0: 0.0 }, 128, cosh());
    let a = check_theorem(TheoremId::T12, "product-slice", &flat, &res, &opts)?;
    let b = check_theorem(TheoremId::T13, "cosh-slice", &curved, &res, &opts)?;
    let target = cosh().slice_lambda2(0.0)?;
    let pass = (a.lambda2_extrapolated - 2.0).abs() <= 1e-3 && (b.lambda2_extrapolated - target).abs() <= 1e-3;
    Ok(outcome(
        pass,
        format!(
            "product slice -> {:.6}, cosh slice -> {:.6} (target {target})",
            a.lambda2_extrapolated, b.lambda2_extrapolated
        ),
    ))
}

fn geodesic_sphere() -> Result<Outcome> {
    let spec = ShapeSpec::sphere3(ShapeKind::GeodesicSphere { rho: FRAC_PI_2 }, 128);
    let t = convergence_study(&spec, &[32, 64, 128], &CheckOptions::default())?;
    let v = t.extrapolation.value;
    Ok(outcome(v.abs() <= 1e-3, format!("lambda2 -> {v:.3e}")))
}

fn graph_strictness() -> Result<Outcome> {
    let amps = [0.0, 0.02, 0.05, 0.1];
    let y20 = Perturbation::Harmonic { l: 2, m: 0 };
    let mut reps = Vec::new();
    for (_, r) in harness::graph_amplitude_sweep(&product(), 0.0, &y20, &amps, &[32, 64, 128], &CheckOptions::default())
    {
        reps.push(r?);
    }
    let margins: Vec<f64> = reps.iter().map(|r| r.margin).collect();
    let pass = reps[0].margin.abs() <= reps[0].tol_report
        && margins[1..].iter().all(|&m| m > 0.0)
        && margins.windows(2).skip(1).all(|w| w[1] > w[0]);
    Ok(outcome(
        pass,
        format!(
            "margins {:?} at amplitudes {amps:?}, tol_report(0) = {:.2e}",
            margins.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>(),
            reps[0].tol_report
        ),
    ))
}

fn structural_identities() -> Result<Outcome> {
    let mut gauss = 0.0f64;
    let mut bonnet = 0.0f64;
    let mut willmore = f64::INFINITY;
    for spec in sphere3_catalog(96).into_iter().chain(warped_catalog(96)) {
        let s = build(&spec)?;
        let f = compute_geometry(&s)?;
        if s.ambient.is_sphere3() {
            gauss = gauss.max(gauss_equation_residual(&s, &f)?);
        }
        let chi = match spec.kind.topology() {
            Topology::Torus => 0.0,
            Topology::Sphere => 2.0,
        };
        bonnet = bonnet.max((f.total_curvature() - 2.0 * PI * chi).abs());
        for (s2, h) in f.sigma_sq.iter().zip(&f.mean_curv) {
            willmore = willmore.min(s2 - 2.0 * h * h);
        }
    }
    let pass = gauss <= 1e-4 && bonnet <= 1e-3 && willmore >= -1e-10;
    Ok(outcome(
        pass,
        format!("gauss residual {gauss:.2e}, |int K - 2 pi chi| {bonnet:.2e}, min(|s|^2 - 2H^2) {willmore:.2e}"),
    ))
}

fn conformal_suite() -> Result<Outcome> {
    let dir = [0.5, 0.5, 0.5, 0.5];
    let params: Vec<MobiusParam> =
        [0.0, 0.2, 0.4].iter().map(|&t| MobiusParam::new(dir.map(|d| t * d))).collect::<Result<_>>()?;
    let clifford = build(&ShapeSpec::sphere3(ShapeKind::CliffordTorus, 96))?;
    let base = conformal_willmore_invariant(&clifford, &params[0])?;
    let mut invariant = 0.0f64;
    let mut energy = 0.0f64;
    for m in &params {
        invariant = invariant.max(((conformal_willmore_invariant(&clifford, m)? - base) / base).abs());
        let (e, twice_area) = dirichlet_energy_check(&clifford, m)?;
        energy = energy.max(((e - twice_area) / twice_area).abs());
    }
    let mut inequality = f64::INFINITY;
    for spec in sphere3_catalog(96) {
        let s = build(&spec)?;
        for m in &params {
            let (lhs, area) = willmore_type_inequality_check(&s, m)?;
            inequality = inequality.min(lhs - area);
        }
    }
    let pass = invariant <= 1e-3 && energy <= 1e-3 && inequality >= -1e-10;
    Ok(outcome(
        pass,
        format!("invariant drift {invariant:.2e}, energy vs 2A {energy:.2e}, min(int(H^2+1) - A) {inequality:.3e}"),
    ))
}

fn hersch() -> Result<Outcome> {
    let opts = CheckOptions::default();
    let mut pass = true;
    let mut worst_residual = 0.0f64;
    let mut worst_bound = f64::INFINITY;
    let mut gaps = Vec::new();
    for spec in sphere3_catalog(96) {
        let rep = balance_bound(&spec, &opts)?;
        let s = build(&spec)?;
        let f = compute_geometry(&s)?;
        let p = assemble(&s, &f, PotentialMode::Jacobi)?;
        let sp = jacobi_spectrum::eigen::smallest_eigenpairs(&p, 2, opts.solver_tol)?;
        let clipped: Vec<f64> = sp.eigenvectors[0].iter().map(|x| x.max(0.0)).collect();
        let mass: f64 = p.mass.matvec(&clipped).iter().sum();
        for c in &rep.candidates {
            worst_residual = worst_residual.max(c.residual / mass);
            worst_bound = worst_bound.min(c.bound - rep.lambda2);
        }
        if matches!(spec.kind, ShapeKind::CliffordTorus | ShapeKind::GeodesicSphere { .. }) {
            gaps.push((spec.kind.label(), rep.gap));
            pass &= rep.gap <= 1e-3;
        }
    }
    pass &= worst_residual <= 1e-9 && worst_bound >= -1e-8;
    let gaps: Vec<String> = gaps.iter().map(|(n, g)| format!("{n}: {g:.2e}")).collect();
    Ok(outcome(
        pass,
        format!(
            "residual/mass {worst_residual:.1e}, min(bound - lambda2) {worst_bound:.2e}, gaps [{}]",
            gaps.join(", ")
        ),
    ))
}

fn max_abs(a: &CsrMatrix) -> f64 {
    (0..a.n).flat_map(|i| a.row(i).map(|(_, v)| v.abs())).fold(0.0, f64::max)
}

fn solver_hygiene() -> Result<Outcome> {
    let tol = 1e-10;
    let mut residual = 0.0f64;
    let mut ortho = 0.0f64;
    let mut signed = true;
    let mut shift = 0.0f64;
    let mut dense_gap = 0.0f64;
    let c = 0.37;
    for spec in sphere3_catalog(48).into_iter().chain(warped_catalog(48)) {
        let s = build(&spec)?;
        let f = compute_geometry(&s)?;
        let p = assemble(&s, &f, PotentialMode::Jacobi)?;
        let sp = jacobi_spectrum::eigen::smallest_eigenpairs(&p, 6, tol)?;
        residual = residual.max(sp.max_residual());
        ortho = ortho.max(sp.orthonormality_defect(&p));
        signed &= sp.first_vector_single_signed();

        let shifted = assemble(&s, &f, PotentialMode::Shifted(c))?;
        let expected = p.stiffness_minus_potential.add_scaled(-c, &p.mass);
        let diff = shifted.stiffness_minus_potential.add_scaled(-1.0, &expected);
        shift = shift.max(max_abs(&diff) / max_abs(&expected));

        let coarse = build(&spec.with_resolution(24))?;
        let cf = compute_geometry(&coarse)?;
        let cp = assemble(&coarse, &cf, PotentialMode::Jacobi)?;
        let run = |method| smallest_eigenpairs_with(&cp, 6, tol, &SolverOptions { method, ..Default::default() });
        let (d, sparse) = (run(SolverMethod::Dense)?, run(SolverMethod::ShiftInvert)?);
        for (x, y) in d.eigenvalues.iter().zip(&sparse.eigenvalues) {
            dense_gap = dense_gap.max((x - y).abs());
        }
    }
    let pass = residual <= 1e-9 && ortho <= 1e-10 && signed && shift <= 1e-12 && dense_gap <= 1e-8;
    Ok(outcome(
        pass,
        format!(
            "residual {residual:.1e}, M-orthonormality {ortho:.1e}, single-signed {signed}, shift identity {shift:.1e}, dense vs sparse {dense_gap:.1e}"
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("1 clifford torus spectrum", clifford_spectrum),
        ("2 flat torus family", flat_torus_family),
        ("3 slice eigenvalues", slices),
        ("4 equatorial sphere", geodesic_sphere),
        ("5 graph strictness", graph_strictness),
        ("6 structural identities", structural_identities),
        ("7 conformal suite", conformal_suite),
        ("8 balanced bound", hersch),
        ("9 solver hygiene", solver_hygiene),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
