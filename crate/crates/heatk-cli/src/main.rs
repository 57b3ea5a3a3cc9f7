//! Command-line front end: point evaluations of the kernels and
//! envelopes, ratio sweeps with CSV/JSON reports, and the verification
//! battery (identities, asymptotic rate, tail domination).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heatk::envelopes;
use heatk::jacobi_kernel::{EndpointProfile, KernelEvaluator};
use heatk::model_spaces::{self, SpaceDescriptor, SpaceFamily};
use heatk::sweep::{self, SweepSpec, SweepTarget};
use heatk::{HeatkError, JacobiParams, T_MIN_DEFAULT};

#[derive(Parser)]
#[command(name = "heatk", about = "Heat kernel envelopes and verification", version)]
struct Cli {
    /// Worker threads for sweeps (overrides HEATK_WORKERS; default: all
    /// cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Sphere,
    RealProjective,
    ComplexProjective,
    QuaternionicProjective,
    CayleyPlane,
}

impl From<Family> for SpaceFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Sphere => SpaceFamily::Sphere,
            Family::RealProjective => SpaceFamily::RealProjective,
            Family::ComplexProjective => SpaceFamily::ComplexProjective,
            Family::QuaternionicProjective => SpaceFamily::QuaternionicProjective,
            Family::CayleyPlane => SpaceFamily::CayleyPlane,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetKind {
    JacobiGeneral,
    JacobiEndpoint,
    Symmetric,
    SymmetricDeriv,
    Ball,
    Simplex,
    LongTime,
}

#[derive(Args)]
struct CommonEval {
    /// Diffusion time.
    #[arg(long)]
    t: f64,
    /// Reject times below this floor.
    #[arg(long, default_value_t = T_MIN_DEFAULT)]
    t_min: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a Jacobi heat kernel and its envelope at one point pair.
    EvalJacobi {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// First angle in [0, pi] (the kernel argument is cos(phi)).
        #[arg(long)]
        phi: f64,
        /// Second angle in [0, pi].
        #[arg(long, default_value_t = 0.0)]
        psi: f64,
        #[command(flatten)]
        common: CommonEval,
    },
    /// Evaluate a symmetric-space heat kernel and its envelope.
    EvalSpace {
        #[arg(long)]
        family: Family,
        /// Real dimension of the space.
        #[arg(long)]
        d: u32,
        /// Geodesic distance (scaled model: in [0, pi]).
        #[arg(long)]
        dist: f64,
        /// Diameter of the original space (with --volume: evaluate the
        /// unscaled kernel).
        #[arg(long)]
        diam: Option<f64>,
        /// Total Riemannian volume of the original space.
        #[arg(long)]
        volume: Option<f64>,
        #[command(flatten)]
        common: CommonEval,
    },
    /// Evaluate the unit-ball heat kernel and its envelope.
    EvalBall {
        #[arg(long)]
        mu: f64,
        /// Comma-separated coordinates of the first point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Comma-separated coordinates of the second point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<f64>,
        /// Quadrature nodes per axis.
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[command(flatten)]
        common: CommonEval,
    },
    /// Evaluate the unit-simplex heat kernel and its envelope.
    EvalSimplex {
        /// Comma-separated weight exponents (one more than the dimension).
        #[arg(long, value_delimiter = ',')]
        kappa: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        y: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        nodes: usize,
        #[command(flatten)]
        common: CommonEval,
    },
    /// Run a kernel/envelope ratio sweep over a deterministic grid.
    Sweep {
        #[arg(long)]
        target: TargetKind,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        kappa: Option<Vec<f64>>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long)]
        d: Option<u32>,
        /// Grid points per axis.
        #[arg(long, default_value_t = 9)]
        grid: usize,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.1,1.0")]
        times: Vec<f64>,
        #[arg(long, default_value_t = T_MIN_DEFAULT)]
        t_min: f64,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the verification battery; exits nonzero if any check fails.
    Verify {
        /// Tolerance for the short-time asymptotic rate.
        #[arg(long, default_value_t = 0.05)]
        varadhan_tol: f64,
        #[arg(long, default_value_t = T_MIN_DEFAULT)]
        t_min: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// List the catalog of symmetric-space families.
    Spaces,
}

fn parse_times_positive(times: &[f64]) -> Result<(), HeatkError> {
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(HeatkError::Domain("all times must be positive".into()));
    }
    Ok(())
}

fn run() -> Result<bool, HeatkError> {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .or_else(|| std::env::var("HEATK_WORKERS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| HeatkError::Domain(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::EvalJacobi { alpha, beta, phi, psi, common } => {
            let params = JacobiParams::new(alpha, beta)?;
            let eval = KernelEvaluator::new(params, common.t, common.t_min)?;
            let ln_kernel = eval.ln_kernel(phi.cos(), psi.cos())?;
            let env = envelopes::env_jac_gen(params, phi, psi, common.t)?;
            print_eval(ln_kernel, env.ln_value);
            Ok(true)
        }
        Command::EvalSpace { family, d, dist, diam, volume, common } => {
            let desc = SpaceDescriptor::new(family.into(), d)?;
            let (ln_kernel, ln_env) = match (diam, volume) {
                (Some(diam), Some(vol)) => {
                    if !(vol > 0.0) {
                        return Err(HeatkError::Domain("volume must be positive".into()));
                    }
                    let lk = desc.kernel_ln(common.t, dist, diam, vol.ln(), common.t_min)?;
                    let scale = std::f64::consts::PI / diam;
                    let ts = scale * scale * common.t;
                    let le = if ts <= 1.0 {
                        envelopes::env_symmetric(desc.d, desc.d_tilde, scale * dist, ts)?
                            .ln_value
                            - vol.ln()
                    } else {
                        -vol.ln()
                    };
                    (lk, le)
                }
                (None, None) => {
                    let lk = desc.scaled_kernel_ln(common.t, dist, common.t_min)?;
                    let le = if common.t <= 1.0 {
                        envelopes::env_symmetric(desc.d, desc.d_tilde, dist, common.t)?.ln_value
                    } else {
                        0.0
                    };
                    (lk, le)
                }
                _ => {
                    return Err(HeatkError::MissingInput(
                        "--diam and --volume must be given together".into(),
                    ))
                }
            };
            print_eval(ln_kernel, ln_env);
            Ok(true)
        }
        Command::EvalBall { mu, x, y, nodes, common } => {
            let d = x.len();
            let lam = mu + (d as f64 - 1.0) / 2.0;
            let pp = JacobiParams::new(lam - 0.5, lam - 0.5)?;
            let profile = EndpointProfile::build(pp, common.t, 220, common.t_min)?;
            let lk = model_spaces::ball_heat_kernel_ln(mu, &x, &y, common.t, &profile, nodes)?;
            let le = envelopes::env_ball(mu, &x, &y, common.t)?.ln_value;
            print_eval(lk, le);
            Ok(true)
        }
        Command::EvalSimplex { kappa, x, y, nodes, common } => {
            let d = x.len();
            let total: f64 = kappa.iter().sum();
            let lam = total + (d as f64 - 1.0) / 2.0;
            let pp = JacobiParams::new(lam - 0.5, lam - 0.5)?;
            let profile = EndpointProfile::build(pp, common.t / 4.0, 220, common.t_min)?;
            let lk =
                model_spaces::simplex_heat_kernel_ln(&kappa, &x, &y, common.t, &profile, nodes)?;
            let le = envelopes::env_simplex(&kappa, &x, &y, common.t)?.ln_value;
            print_eval(lk, le);
            Ok(true)
        }
        Command::Sweep {
            target,
            alpha,
            beta,
            lambda,
            mu,
            kappa,
            family,
            d,
            grid,
            times,
            t_min,
            out,
            format,
        } => {
            parse_times_positive(&times)?;
            let need = |v: Option<f64>, n: &str| {
                v.ok_or_else(|| HeatkError::MissingInput(format!("--{n} is required")))
            };
            let target = match target {
                TargetKind::JacobiGeneral => SweepTarget::JacobiGeneral {
                    alpha: need(alpha, "alpha")?,
                    beta: need(beta, "beta")?,
                },
                TargetKind::JacobiEndpoint => {
                    SweepTarget::JacobiEndpoint { lambda: need(lambda, "lambda")? }
                }
                TargetKind::Symmetric | TargetKind::SymmetricDeriv => {
                    let fam = family
                        .ok_or_else(|| HeatkError::MissingInput("--family is required".into()))?;
                    let d =
                        d.ok_or_else(|| HeatkError::MissingInput("--d is required".into()))?;
                    let descriptor = SpaceDescriptor::new(fam.into(), d)?;
                    if matches!(target, TargetKind::Symmetric) {
                        SweepTarget::Symmetric { descriptor }
                    } else {
                        SweepTarget::SymmetricDerivative { descriptor }
                    }
                }
                TargetKind::Ball => SweepTarget::Ball {
                    d: d.ok_or_else(|| HeatkError::MissingInput("--d is required".into()))?
                        as usize,
                    mu: need(mu, "mu")?,
                },
                TargetKind::Simplex => {
                    let kappa = kappa
                        .ok_or_else(|| HeatkError::MissingInput("--kappa is required".into()))?;
                    SweepTarget::Simplex { d: kappa.len().saturating_sub(1), kappa }
                }
                TargetKind::LongTime => SweepTarget::LongTime {
                    alpha: need(alpha, "alpha")?,
                    beta: need(beta, "beta")?,
                },
            };
            let spec = SweepSpec { target, grid, times, t_min };
            let report = sweep::run_ratio_sweep(&spec)?;
            let rendered = match format {
                Format::Csv => report.to_csv(),
                Format::Json => serde_json::to_string_pretty(&report)
                    .map_err(|e| HeatkError::Numerical(format!("serialization: {e}")))?,
            };
            match out {
                Some(path) => std::fs::write(&path, rendered)
                    .map_err(|e| HeatkError::Domain(format!("writing {}: {e}", path.display())))?,
                None => print!("{rendered}"),
            }
            eprintln!(
                "{}: {} cells, ln-ratio in [{:.6}, {:.6}] (spread {:.6})",
                report.target,
                report.cells.len(),
                report.min_ln_ratio,
                report.max_ln_ratio,
                report.spread_ln()
            );
            Ok(true)
        }
        Command::Verify { varadhan_tol, t_min, format } => {
            let mut checks = sweep::run_identity_checks(t_min)?;
            checks.push(sweep::run_varadhan_check(varadhan_tol, t_min)?);
            checks.push(sweep::run_varadhan_simplex_check(varadhan_tol, t_min)?);
            for g in [-2.0, 0.0, 1.5] {
                checks.push(sweep::run_est_z_sweep(g, 48)?);
            }
            let all_pass = checks.iter().all(|c| c.pass);
            match format {
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&checks)
                            .map_err(|e| HeatkError::Numerical(format!("serialization: {e}")))?
                    );
                }
                Format::Csv => {
                    for c in &checks {
                        println!(
                            "{}: {} (max_err {:.3e}, tol {:.3e})",
                            c.name,
                            if c.pass { "PASS" } else { "FAIL" },
                            c.max_err,
                            c.tol
                        );
                    }
                }
            }
            Ok(all_pass)
        }
        Command::Spaces => {
            println!("family d_range d_tilde alpha beta");
            let rows = [
                ("sphere", "d >= 1", "0", "d/2-1", "d/2-1"),
                ("real-projective", "d >= 2", "d-1", "d/2-1", "-1/2"),
                ("complex-projective", "d = 4, 6, ...", "d-2", "d/2-1", "0"),
                ("quaternionic-projective", "d = 8, 12, ...", "d-4", "d/2-1", "1"),
                ("cayley-plane", "d = 16", "8", "7", "3"),
            ];
            for (f, dr, dt, a, b) in rows {
                println!("{f} {dr} {dt} {a} {b}");
            }
            Ok(true)
        }
    }
}

fn print_eval(ln_kernel: f64, ln_envelope: f64) {
    println!(
        "{}",
        serde_json::json!({
            "ln_kernel": ln_kernel,
            "kernel": ln_kernel.exp(),
            "ln_envelope": ln_envelope,
            "ln_ratio": ln_kernel - ln_envelope,
        })
    );
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
