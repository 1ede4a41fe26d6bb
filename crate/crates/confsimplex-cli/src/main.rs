//! Command-line front end: single-simplex computations, randomized
//! definiteness sweeps, rank scans along radii paths, and the prescribed
//! solid-angle solver, with machine-readable reports.
//!
//! Exit codes: 0 success, 1 sweep found a violation, 2 invalid input,
//! 3 geometric degeneracy or non-realizability, 4 solver non-convergence.

mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use confsimplex::analysis::{
    DEFAULT_KERNEL_ANGLE_TOL, DEFAULT_RANK_TOL, SolveError, SolveOptions, SweepConfig,
    analyze_hessian, path_rank_scan, solve_prescribed_solid_angles, verify_euclidean_definiteness,
    verify_hyperbolic_definiteness,
};
use confsimplex::euclidean::{cayley_menger_det, solid_angles, volume_euclidean};
use confsimplex::functionals::{
    dihedral_angles, eval_r, eval_s, grad_s, hessian_r, hessian_s, map_i,
};
use confsimplex::hyperbolic::{mc_volume_klein, volume_hyperbolic};
use confsimplex::{EdgeLengths, Geometry, GeometryError, Radii};
use report::{ComputeReport, Format, InputEcho, McVolume, PathReport, ReportDoc, SolveReport, VerifyReport};

#[derive(Parser)]
#[command(
    name = "confsimplex",
    version,
    about = "Conformal tetrahedra in E3 and H3: curvature functionals, Hessian certification, prescribed solid angles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Angles, volumes, S, R, gradients, and Hessian reports for one simplex
    Compute(ComputeArgs),
    /// Randomized definiteness sweeps of H(S) over conformal simplices
    Verify(VerifyArgs),
    /// Rank of H(S) along a straight segment in radii space
    Path(PathArgs),
    /// Newton solve of the prescribed solid-angle problem
    Solve(SolveArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GeometryArg {
    Euclidean,
    Hyperbolic,
    Both,
}

#[derive(Args)]
struct CommonArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Omit the timestamp so reruns are byte-identical
    #[arg(long)]
    deterministic: bool,
    /// Override a named tolerance (repeatable): rank, kernel_angle, newton, scale
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("simplex").required(true).multiple(false))]
struct ComputeArgs {
    #[arg(long, value_enum)]
    geometry: GeometryArg,
    /// Four vertex radii r1,r2,r3,r4 (conformal input)
    #[arg(long, group = "simplex", value_name = "R1,R2,R3,R4", allow_hyphen_values = true)]
    radii: Option<String>,
    /// Six edge lengths l12,l13,l14,l23,l24,l34
    #[arg(long, group = "simplex", value_name = "L12,...,L34", allow_hyphen_values = true)]
    lengths: Option<String>,
    /// Monte Carlo sample count for the hyperbolic volume cross-estimate
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Monte Carlo seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    geometry: GeometryArg,
    /// Random conformal simplices per sweep (probes come on top)
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Radii range lo,hi (defaults: 0.1,10 euclidean; 0.1,3 hyperbolic)
    #[arg(long, value_name = "LO,HI")]
    range: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long, value_enum)]
    geometry: GeometryArg,
    /// Segment start radii
    #[arg(long, value_name = "R1,R2,R3,R4", allow_hyphen_values = true)]
    from: String,
    /// Segment end radii
    #[arg(long, value_name = "R1,R2,R3,R4", allow_hyphen_values = true)]
    to: String,
    /// Points along the segment, endpoints included
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    geometry: GeometryArg,
    /// Prescribed solid angles s1,s2,s3,s4
    #[arg(long, value_name = "S1,S2,S3,S4", allow_hyphen_values = true)]
    targets: String,
    /// Starting radii (default 1,1,1,1)
    #[arg(long, value_name = "R1,R2,R3,R4", allow_hyphen_values = true)]
    start: Option<String>,
    /// Record the iterate path in the report
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    common: CommonArgs,
}

/// Failure that maps to a process exit code, with a message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure { code: 3, message: e.to_string() }
    }
}

#[derive(Clone, Copy)]
struct Tolerances {
    rank: f64,
    kernel_angle: f64,
    newton: f64,
    scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let solve = SolveOptions::default();
        Tolerances {
            rank: DEFAULT_RANK_TOL,
            kernel_angle: DEFAULT_KERNEL_ANGLE_TOL,
            newton: solve.tol,
            scale: solve.scale_tol,
        }
    }
}

impl Tolerances {
    fn parse(overrides: &[String]) -> Result<Self, Failure> {
        let mut tols = Tolerances::default();
        for entry in overrides {
            let Some((name, value)) = entry.split_once('=') else {
                return Err(Failure::invalid(format!(
                    "--tol expects NAME=VALUE, got '{entry}'"
                )));
            };
            let value: f64 = value
                .parse()
                .map_err(|_| Failure::invalid(format!("--tol {name}: '{value}' is not a number")))?;
            if !(value.is_finite() && value > 0.0) {
                return Err(Failure::invalid(format!(
                    "--tol {name}: value must be positive and finite"
                )));
            }
            match name {
                "rank" => tols.rank = value,
                "kernel_angle" => tols.kernel_angle = value,
                "newton" => tols.newton = value,
                "scale" => tols.scale = value,
                other => {
                    return Err(Failure::invalid(format!(
                        "unknown tolerance '{other}' (known: rank, kernel_angle, newton, scale)"
                    )));
                }
            }
        }
        Ok(tols)
    }

    fn echo(&self) -> BTreeMap<&'static str, f64> {
        BTreeMap::from([
            ("rank", self.rank),
            ("kernel_angle", self.kernel_angle),
            ("newton", self.newton),
            ("scale", self.scale),
        ])
    }
}

fn parse_list<const N: usize>(flag: &str, raw: &str) -> Result<[f64; N], Failure> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != N {
        return Err(Failure::invalid(format!(
            "--{flag} expects {N} comma-separated values, got {}",
            parts.len()
        )));
    }
    let mut out = [0.0; N];
    for (k, part) in parts.iter().enumerate() {
        out[k] = part.trim().parse().map_err(|_| {
            Failure::invalid(format!("--{flag}: '{part}' is not a number"))
        })?;
    }
    Ok(out)
}

fn parse_radii(flag: &str, raw: &str) -> Result<Radii, Failure> {
    let values = parse_list::<4>(flag, raw)?;
    Radii::new(values).map_err(|e| Failure::invalid(format!("--{flag}: {e}")))
}

fn single_geometry(arg: GeometryArg, command: &str) -> Result<Geometry, Failure> {
    match arg {
        GeometryArg::Euclidean => Ok(Geometry::Euclidean),
        GeometryArg::Hyperbolic => Ok(Geometry::Hyperbolic),
        GeometryArg::Both => Err(Failure::invalid(format!(
            "--geometry both is only valid for 'verify', not '{command}'"
        ))),
    }
}

fn timestamp(deterministic: bool) -> Option<f64> {
    (!deterministic).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0)
    })
}

fn emit(doc: &ReportDoc, common: &CommonArgs) -> Result<(), Failure> {
    let rendered = doc.render(common.format);
    match &common.output {
        Some(path) => std::fs::write(path, rendered).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            if rendered.ends_with('\n') {
                print!("{rendered}");
            } else {
                println!("{rendered}");
            }
            Ok(())
        }
    }
}

fn cmd_compute(args: &ComputeArgs) -> Result<u8, Failure> {
    let geometry = single_geometry(args.geometry, "compute")?;
    if args.samples == 0 {
        return Err(Failure::invalid("--samples must be at least 1"));
    }
    let tols = Tolerances::parse(&args.common.tol)?;

    let (radii, lengths) = match (&args.radii, &args.lengths) {
        (Some(r), None) => {
            let radii = parse_radii("radii", r)?;
            (Some(radii), map_i(&radii))
        }
        (None, Some(l)) => {
            let values = parse_list::<6>("lengths", l)?;
            let lengths = EdgeLengths::new(values)
                .map_err(|e| Failure::invalid(format!("--lengths: {e}")))?;
            (None, lengths)
        }
        _ => unreachable!("clap group enforces exactly one of --radii/--lengths"),
    };

    let angles = dihedral_angles(&lengths, geometry)?;
    let solids = solid_angles(&angles);
    let r_value = eval_r(&lengths, geometry)?;

    let (volume_euclidean_value, volume_hyperbolic_value, volume_monte_carlo) = match geometry {
        Geometry::Euclidean => (Some(volume_euclidean(&lengths)?), None, None),
        Geometry::Hyperbolic => {
            let quad = volume_hyperbolic(&lengths)?;
            let mc = mc_volume_klein(&lengths, args.samples, args.seed)?;
            (
                None,
                Some(quad),
                Some(McVolume {
                    value: mc.value,
                    abs_error_estimate: mc.abs_error_estimate,
                    samples: args.samples,
                    seed: args.seed,
                }),
            )
        }
    };

    let hessian_r_matrix = hessian_r(&lengths, geometry)?;
    let length_array = lengths.as_array();
    let hessian_r_report = analyze_hessian(
        &hessian_r_matrix,
        match geometry {
            Geometry::Euclidean => Some(&length_array),
            Geometry::Hyperbolic => None,
        },
        tols.rank,
    );

    let (s_value, grad_s_value, hessian_s_matrix, hessian_s_report) = match &radii {
        Some(radii) => {
            let h = hessian_s(radii, geometry)?;
            let radii_array = radii.as_array();
            let report = analyze_hessian(
                &h,
                match geometry {
                    Geometry::Euclidean => Some(&radii_array),
                    Geometry::Hyperbolic => None,
                },
                tols.rank,
            );
            (
                Some(eval_s(radii, geometry)?),
                Some(grad_s(radii, geometry)?),
                Some(h),
                Some(report),
            )
        }
        None => (None, None, None, None),
    };

    let doc = ReportDoc::Compute(Box::new(ComputeReport {
        command: "compute",
        timestamp: timestamp(args.common.deterministic),
        geometry,
        input: InputEcho { radii, lengths },
        tolerances: tols.echo(),
        cayley_menger_det: cayley_menger_det(&lengths),
        volume_euclidean: volume_euclidean_value,
        volume_hyperbolic: volume_hyperbolic_value,
        volume_monte_carlo,
        angles,
        solid_angles: solids,
        s_value,
        r_value,
        grad_s: grad_s_value,
        grad_r: angles,
        hessian_s: hessian_s_matrix,
        hessian_r: hessian_r_matrix,
        hessian_s_report,
        hessian_r_report,
    }));
    emit(&doc, &args.common)?;
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    if args.samples == 0 {
        return Err(Failure::invalid("--samples must be at least 1"));
    }
    let tols = Tolerances::parse(&args.common.tol)?;
    let range = match &args.range {
        Some(raw) => {
            let [lo, hi] = parse_list::<2>("range", raw)?;
            if !(lo > 0.0 && lo < hi) {
                return Err(Failure::invalid("--range expects 0 < lo < hi"));
            }
            Some((lo, hi))
        }
        None => None,
    };

    let geometries: Vec<Geometry> = match args.geometry {
        GeometryArg::Euclidean => vec![Geometry::Euclidean],
        GeometryArg::Hyperbolic => vec![Geometry::Hyperbolic],
        GeometryArg::Both => vec![Geometry::Euclidean, Geometry::Hyperbolic],
    };

    let sweeps: Vec<_> = geometries
        .into_iter()
        .map(|geometry| {
            let mut cfg = match geometry {
                Geometry::Euclidean => SweepConfig::euclidean(args.samples, args.seed),
                Geometry::Hyperbolic => SweepConfig::hyperbolic(args.samples, args.seed),
            };
            if let Some(r) = range {
                cfg.range = r;
            }
            cfg.rank_tol = tols.rank;
            cfg.kernel_angle_tol = tols.kernel_angle;
            match geometry {
                Geometry::Euclidean => verify_euclidean_definiteness(&cfg),
                Geometry::Hyperbolic => verify_hyperbolic_definiteness(&cfg),
            }
        })
        .collect();

    let passed = sweeps.iter().all(|s| s.passed());
    let doc = ReportDoc::Verify(VerifyReport {
        command: "verify",
        timestamp: timestamp(args.common.deterministic),
        samples: args.samples,
        seed: args.seed,
        tolerances: tols.echo(),
        sweeps,
        passed,
    });
    emit(&doc, &args.common)?;
    Ok(if passed { 0 } else { 1 })
}

fn cmd_path(args: &PathArgs) -> Result<u8, Failure> {
    let geometry = single_geometry(args.geometry, "path")?;
    let tols = Tolerances::parse(&args.common.tol)?;
    let from = parse_radii("from", &args.from)?;
    let to = parse_radii("to", &args.to)?;
    let rows = path_rank_scan(&from, &to, args.steps, geometry, tols.rank)?;

    let doc = ReportDoc::Path(PathReport {
        command: "path",
        timestamp: timestamp(args.common.deterministic),
        geometry,
        from,
        to,
        steps: args.steps,
        tolerances: tols.echo(),
        rows,
    });
    emit(&doc, &args.common)?;
    Ok(0)
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, Failure> {
    let geometry = single_geometry(args.geometry, "solve")?;
    let tols = Tolerances::parse(&args.common.tol)?;
    let targets = parse_list::<4>("targets", &args.targets)?;
    let start = match &args.start {
        Some(raw) => parse_radii("start", raw)?,
        None => Radii::new([1.0; 4]).expect("unit radii"),
    };

    let opts = SolveOptions {
        tol: tols.newton,
        scale_tol: tols.scale,
        trace: args.trace,
        ..SolveOptions::default()
    };

    let (result, error, code) =
        match solve_prescribed_solid_angles(&targets, geometry, &start, &opts) {
            Ok(result) => (result, None, 0),
            Err(SolveError::Geometry(e)) => return Err(e.into()),
            Err(e) => {
                let message = e.to_string();
                let best = e.best().expect("solver failures carry the best iterate");
                let mut best = best.clone();
                if !args.trace {
                    best.path = None;
                }
                (best, Some(message), 4)
            }
        };

    let doc = ReportDoc::Solve(SolveReport {
        command: "solve",
        timestamp: timestamp(args.common.deterministic),
        geometry,
        targets,
        start,
        tolerances: tols.echo(),
        result,
        error,
    });
    emit(&doc, &args.common)?;
    Ok(code)
}

fn init_threads() {
    if let Ok(raw) = std::env::var("CONFSIMPLEX_THREADS")
        && let Ok(n) = raw.parse::<usize>()
        && n >= 1
    {
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute(args) => cmd_compute(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Path(args) => cmd_path(args),
        Command::Solve(args) => cmd_solve(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
