use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use jacobi_spectrum::catalog::{ShapeKind, ShapeSpec};
use jacobi_spectrum::config::{self, ConfigFile, Settings};
use jacobi_spectrum::harness::{self, CheckOptions, Scenario, TheoremId, TheoremReport};
use jacobi_spectrum::report::{self, SummaryRow};
use jacobi_spectrum::warping::{harmonic_multiplicity, WarpingFunction};
use jacobi_spectrum::{Error, Result};

#[derive(Parser)]
#[command(name = "jacobi", version, about = "Second eigenvalue of the Jacobi operator on test surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    T11,
    T12,
    T13,
    Esi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    FlatTorus,
    GraphAmplitude,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// key=value scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set shape=clifford`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Directory for JSON reports and the CSV summary.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form Jacobi spectrum of the slice {t} × Sⁿ of a warped product.
    SliceSpectrum {
        #[arg(long)]
        warping: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 4)]
        degrees: usize,
    },
    /// Check an eigenvalue inequality on shipped or configured scenarios.
    Check {
        #[arg(value_enum)]
        which: Check,
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Run a one-parameter family of checks.
    Sweep {
        #[arg(value_enum)]
        which: Sweep,
        #[arg(long, value_delimiter = ',')]
        resolutions: Option<Vec<usize>>,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Refinement study of λ₂ for configured shapes.
    Converge {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Upper bound on λ₂ from balanced conformal coordinates (surfaces of S³).
    BalanceBound {
        #[command(flatten)]
        args: ScenarioArgs,
    },
}

fn theorem(c: Check) -> TheoremId {
    match c {
        Check::T11 => TheoremId::T11,
        Check::T12 => TheoremId::T12,
        Check::T13 => TheoremId::T13,
        Check::Esi => TheoremId::Esi,
    }
}

fn load(args: &ScenarioArgs) -> Result<(ConfigFile, Settings)> {
    let cfg = match &args.config {
        Some(p) => config::parse_config(&fs::read_to_string(p)?)?,
        None => ConfigFile::default(),
    };
    Ok((cfg, config::parse_overrides(&args.set)?))
}

fn configured(args: &ScenarioArgs, check: Option<TheoremId>) -> Result<Vec<Scenario>> {
    let (cfg, overrides) = load(args)?;
    config::scenarios(&cfg, &overrides, check)
}

fn write_reports(out: &Path, results: &[(String, Result<TheoremReport>)]) -> Result<()> {
    fs::create_dir_all(out)?;
    let mut rows: Vec<SummaryRow> = Vec::new();
    for (name, r) in results {
        match r {
            Ok(rep) => {
                report::write_json(&out.join(format!("{name}.json")), rep)?;
                rows.extend(report::summary_rows(rep));
                println!(
                    "{:<28} {:<4} lambda2={} bound={} margin={} tol={} {}{}",
                    name,
                    rep.theorem_id.name(),
                    report::fmt12(rep.lambda2_extrapolated),
                    report::fmt12(rep.bound),
                    report::fmt12(rep.margin),
                    report::fmt12(rep.tol_report),
                    if rep.pass { "PASS" } else { "VIOLATED" },
                    if rep.equality { " (equality)" } else { "" },
                );
            }
            Err(e) => println!("{name:<28} error: {e}"),
        }
    }
    report::write_csv(&rows, fs::File::create(out.join("summary.csv"))?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::SliceSpectrum { warping, dim, t, degrees } => {
            let w = WarpingFunction::named(&warping, dim).or_else(|_| {
                let p = jacobi_spectrum::warping::Profile::from_spec(&warping)?;
                let interval = p.default_interval();
                WarpingFunction::new(p, interval, dim)
            })?;
            println!("condition: {:?} (value {})", w.condition_status(t)?, report::fmt12(w.convexity_condition(t)?));
            println!("lambda2(L_t) = {}", report::fmt12(w.slice_lambda2(t)?));
            for k in 0..=degrees {
                println!(
                    "k={k} eigenvalue={} multiplicity={}",
                    report::fmt12(w.slice_harmonic_eigenvalue(t, k)?),
                    harmonic_multiplicity(dim, k)
                );
            }
            Ok(harness::EXIT_PASS)
        }
        Command::Check { which, args } => {
            let id = theorem(which);
            let scenarios = if args.config.is_none() && args.set.is_empty() {
                harness::default_scenarios(id)
            } else {
                configured(&args, Some(id))?.into_iter().map(|s| Scenario { theorem: id, ..s }).collect()
            };
            let results = harness::run_scenarios(&scenarios);
            write_reports(&args.out, &results)?;
            Ok(harness::exit_code(results.iter().map(|(_, r)| r)))
        }
        Command::Sweep { which, resolutions, out } => {
            let opts = CheckOptions::default();
            let results = match which {
                Sweep::FlatTorus => {
                    let res = resolutions.unwrap_or_else(|| vec![48, 96]);
                    harness::flat_torus_sweep(&harness::FLAT_TORUS_RADII, &res, &opts)
                }
                Sweep::GraphAmplitude => {
                    let res = resolutions.unwrap_or_else(|| harness::DEFAULT_RESOLUTIONS.to_vec());
                    let w = WarpingFunction::named("product", 2)?;
                    let y20 = jacobi_spectrum::catalog::Perturbation::Harmonic { l: 2, m: 0 };
                    harness::graph_amplitude_sweep(&w, 0.0, &y20, &harness::GRAPH_AMPLITUDES, &res, &opts)
                }
            };
            write_reports(&out, &results)?;
            Ok(harness::exit_code(results.iter().map(|(_, r)| r)))
        }
        Command::Converge { args } => {
            let scenarios = configured(&args, Some(TheoremId::T11))?;
            fs::create_dir_all(&args.out)?;
            let mut rows = Vec::new();
            for sc in &scenarios {
                let table = harness::convergence_study(&sc.shape, &sc.resolutions, &sc.options)?;
                for r in &table.rows {
                    println!(
                        "{} N={} h={} lambda2={} order={}",
                        sc.name,
                        r.resolution,
                        report::fmt12(r.spacing),
                        report::fmt12(r.lambda2),
                        r.observed_order.map(report::fmt12).unwrap_or_else(|| "-".into())
                    );
                }
                for w in &table.extrapolation.warnings {
                    eprintln!("warning: {}: {w}", sc.name);
                }
                report::write_json(&args.out.join(format!("{}-convergence.json", sc.name)), &table)?;
                rows.extend(report::convergence_rows(&sc.name, &table));
            }
            report::write_csv(&rows, fs::File::create(args.out.join("convergence.csv"))?)?;
            Ok(harness::EXIT_PASS)
        }
        Command::BalanceBound { args } => {
            let scenarios = configured(&args, Some(TheoremId::T11))?;
            fs::create_dir_all(&args.out)?;
            for sc in &scenarios {
                let spec = ShapeSpec { resolution: *sc.resolutions.last().expect("nonempty"), ..sc.shape.clone() };
                if !matches!(spec.kind, ShapeKind::GraphOverSlice { .. } | ShapeKind::Slice { .. }) {
                    let rep = harness::balance_bound(&spec, &sc.options)?;
                    println!(
                        "{} lambda2={} bound={} gap={}",
                        sc.name,
                        report::fmt12(rep.lambda2),
                        report::fmt12(rep.bound),
                        report::fmt12(rep.gap)
                    );
                    report::write_json(&args.out.join(format!("{}-balance.json", sc.name)), &rep)?;
                } else {
                    return Err(Error::UnsupportedAmbient("balancing acts on surfaces of S³".into()));
                }
            }
            Ok(harness::EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Hypothesis(_) => harness::EXIT_HYPOTHESIS,
                Error::NonConvergence { .. } => harness::EXIT_NONCONVERGENCE,
                _ => 1,
            };
            ExitCode::from(code as u8)
        }
    }
}
