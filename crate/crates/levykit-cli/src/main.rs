//! Command-line front end: triplet validation, h/K evaluation, exponent
//! evaluation, condition audits, density inversion, envelope bounds,
//! decomposition diagnostics and Monte Carlo estimates.
//!
//! Exit codes: 0 pass, 1 verified fail (a family fails consistently),
//! 2 invalid input, 3 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use levykit::concentration::ConcentrationFn;
use levykit::conditions::{self, AuditOptions};
use levykit::config::TripletConfig;
use levykit::decompose;
use levykit::density::{self, GridRequest, LowerVariant};
use levykit::error::LevyError;
use levykit::exponent::CharExponent;
use levykit::measure::{zoo, GeneratingTriplet};
use levykit::report::Verdict;
use levykit::simulate::{self, SamplerConfig, SmallJumpPolicy};

#[derive(Parser)]
#[command(name = "levykit", version, about = "Lévy process numerics: exponents, concentration functions, densities and envelope audits")]
struct Cli {
    /// Worker threads for internal parallelism (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TripletArgs {
    /// Zoo member, e.g. `cauchy`, `isotropic_stable:2,1.5`,
    /// `product_stable:0.5,1.0,1.5`, `example61:1.0`.
    #[arg(long)]
    zoo: Option<String>,
    /// TOML triplet configuration file.
    #[arg(long)]
    triplet: Option<PathBuf>,
}

impl TripletArgs {
    fn build(&self) -> Result<GeneratingTriplet, LevyError> {
        match (&self.zoo, &self.triplet) {
            (Some(z), None) => Ok(zoo::make_zoo(z)?.triplet),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| LevyError::InvalidConfig(format!("{}: {e}", path.display())))?;
                TripletConfig::from_toml(&text)?.build()
            }
            _ => Err(LevyError::InvalidConfig(
                "provide exactly one of --zoo or --triplet".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Triplet-level operations.
    Triplet {
        #[command(subcommand)]
        cmd: TripletCmd,
    },
    /// Concentration function h and its inverse.
    H {
        #[command(subcommand)]
        cmd: HCmd,
    },
    /// Characteristic exponent evaluation.
    Exponent {
        #[command(subcommand)]
        cmd: ExponentCmd,
    },
    /// Scaling and equivalence condition audits.
    Conditions {
        #[command(subcommand)]
        cmd: ConditionsCmd,
    },
    /// Transition densities by Fourier inversion.
    Density {
        #[command(subcommand)]
        cmd: DensityCmd,
    },
    /// Envelope verification (upper and shifted lower bounds).
    Bounds {
        #[command(subcommand)]
        cmd: BoundsCmd,
    },
    /// Small-jump decomposition diagnostics.
    Decompose {
        #[command(subcommand)]
        cmd: DecomposeCmd,
    },
    /// Monte Carlo estimates.
    Simulate {
        #[command(subcommand)]
        cmd: SimulateCmd,
    },
    /// Zoo utilities.
    Zoo {
        #[command(subcommand)]
        cmd: ZooCmd,
    },
}

#[derive(Subcommand)]
enum TripletCmd {
    /// Validate symmetry, definiteness, integrability and h(0⁺) = ∞.
    Validate {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HCmd {
    /// Evaluate h, K and h⁻¹(h) on one or more radii (CSV: r,h,K,hinv).
    Eval {
        #[command(flatten)]
        triplet: TripletArgs,
        /// Radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invert h at one or more levels (CSV: u,hinv).
    Invert {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long, value_delimiter = ',')]
        u: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExponentCmd {
    /// Evaluate ψ at a point (prints re, im, ψ* at |x|).
    Eval {
        #[command(flatten)]
        triplet: TripletArgs,
        /// Point coordinates, comma separated.
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum ConditionsCmd {
    /// Run the full small-time/large-time equivalence audit.
    Audit {
        #[command(flatten)]
        triplet: TripletArgs,
        /// Small-time horizon T (grid [2^-10 T, T]).
        #[arg(long, default_value_t = 1.0)]
        small_t: f64,
        /// Large-time base T (grid [T, 2^10 T]).
        #[arg(long, default_value_t = 1.0)]
        large_t: f64,
        /// Skip the density-backed C1/D1 checks.
        #[arg(long)]
        no_density: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DensityCmd {
    /// Invert the density on a lattice (CSV: coordinates, value).
    Fft {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Direct quadrature at a single point.
    Point {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// sup p(t,·)·[h⁻¹(1/t)]^d within a band over a dyadic grid.
    VerifyUpper {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long, default_value_t = 9.765625e-4)]
        tmin: f64,
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
        /// Acceptable max/min ratio band.
        #[arg(long, default_value_t = 1.5)]
        band: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot-ready ratio series.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Shifted lower bound inf over |x| ≤ θ·L(t).
    VerifyLower {
        #[command(flatten)]
        triplet: TripletArgs,
        /// gaussian | symmetric-minorant | alpha-ge-one
        #[arg(long)]
        variant: String,
        /// Zoo spec of the symmetric minorant ν_s (symmetric-minorant only).
        #[arg(long)]
        nu_zoo: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        a1: f64,
        #[arg(long, default_value_t = 5.0)]
        theta: f64,
        #[arg(long, default_value_t = 3.90625e-3)]
        tmin: f64,
        #[arg(long, default_value_t = 0.25)]
        tmax: f64,
        /// Skip the variant preconditions (counterexample mode).
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DecomposeCmd {
    /// Class diagnostics for the small-jump component.
    Diag {
        #[command(flatten)]
        triplet: TripletArgs,
        /// Zoo spec of the auxiliary measure ν.
        #[arg(long)]
        nu_zoo: String,
        #[arg(long, default_value_t = 1.0)]
        a1: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// E[S(r)]·h(r) for the exit time from the moving ball.
    ExitTime {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100000)]
        paths: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// P(X_t ∈ O·C_λ).
    Cone {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long, default_value_t = 0.25)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Rotation angle in radians (d = 2 only).
        #[arg(long)]
        angle: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000000)]
        paths: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// P(Y_t < 0) in d = 1.
    HalfLine {
        #[command(flatten)]
        triplet: TripletArgs,
        #[arg(long, default_value_t = 0.25)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000000)]
        paths: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ZooCmd {
    /// List the zoo constructors.
    List,
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), LevyError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| LevyError::InvalidConfig(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization")
}

fn gnuplot_series(header: &str, series: &[(f64, f64)]) -> String {
    let mut s = format!("# {header}\n# t ratio\n");
    for (t, v) in series {
        s.push_str(&format!("{t:.17e} {v:.17e}\n"));
    }
    s
}

fn run(cli: Cli) -> Result<u8, LevyError> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::Triplet { cmd: TripletCmd::Validate { triplet, out } } => {
            let t = triplet.build()?;
            let report = levykit::measure::validate_triplet(&t)?;
            write_or_print(&out, &json(&report))?;
            Ok(0)
        }
        Command::H { cmd } => match cmd {
            HCmd::Eval { triplet, r, out } => {
                let t = triplet.build()?;
                let c = ConcentrationFn::new(&t)?;
                let mut csv = String::from("r,h,K,hinv\n");
                for radius in r {
                    let h = c.h(radius)?;
                    let k = c.k(radius)?;
                    let hinv = c.h_inverse(h)?;
                    csv.push_str(&format!("{radius:.17e},{h:.17e},{k:.17e},{hinv:.17e}\n"));
                }
                write_or_print(&out, csv.trim_end())?;
                Ok(0)
            }
            HCmd::Invert { triplet, u, out } => {
                let t = triplet.build()?;
                let c = ConcentrationFn::new(&t)?;
                let mut csv = String::from("u,hinv\n");
                for level in u {
                    csv.push_str(&format!("{level:.17e},{:.17e}\n", c.h_inverse(level)?));
                }
                write_or_print(&out, csv.trim_end())?;
                Ok(0)
            }
        },
        Command::Exponent { cmd: ExponentCmd::Eval { triplet, x } } => {
            let t = triplet.build()?;
            let e = CharExponent::new(&t);
            let p = e.psi(&x)?;
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let star = e.psi_star(r.max(1e-12))?;
            println!(
                "{}",
                json(&serde_json::json!({
                    "schema": 1,
                    "x": x,
                    "re_psi": p.re,
                    "im_psi": p.im,
                    "psi_star_at_norm": star.value,
                    "closed_form": e.has_closed_form(),
                }))
            );
            Ok(0)
        }
        Command::Conditions { cmd: ConditionsCmd::Audit { triplet, small_t, large_t, no_density, out } } => {
            let t = triplet.build()?;
            let opts = AuditOptions { small_t, large_t, with_density: !no_density };
            match conditions::audit(&t, &opts) {
                Ok(report) => {
                    write_or_print(&out, &json(&report))?;
                    let failed = report.small_time_verdict == Verdict::Fail
                        || report.large_time_verdict == Verdict::Fail;
                    Ok(if failed { 1 } else { 0 })
                }
                Err(LevyError::InconsistentVerdicts(detail)) => {
                    eprintln!("inconsistent verdicts: {detail}");
                    Ok(2)
                }
                Err(e) => Err(e),
            }
        }
        Command::Density { cmd } => match cmd {
            DensityCmd::Fft { triplet, t, out } => {
                let tr = triplet.build()?;
                let grid = density::density_grid(&tr, t, &GridRequest::default())?;
                let d = grid.dim();
                let mut csv = String::new();
                csv.push_str(&format!(
                    "# t={} mass_error={:.3e} wrap_mass={:.3e}\n",
                    grid.t, grid.mass_error, grid.wrap_mass
                ));
                for a in 0..d {
                    csv.push_str(&format!("x{a},"));
                }
                csv.push_str("p\n");
                let dims = grid.lattice.points.clone();
                let mut idx = vec![0usize; d];
                loop {
                    for a in 0..d {
                        csv.push_str(&format!("{:.10e},", grid.coordinate(a, idx[a])));
                    }
                    let mut f = 0usize;
                    for (a, i) in idx.iter().enumerate() {
                        f = f * dims[a] + i;
                    }
                    csv.push_str(&format!("{:.10e}\n", grid.values[f]));
                    let mut a = d;
                    let mut done = true;
                    while a > 0 {
                        a -= 1;
                        idx[a] += 1;
                        if idx[a] < dims[a] {
                            done = false;
                            break;
                        }
                        idx[a] = 0;
                    }
                    if done {
                        break;
                    }
                }
                write_or_print(&out, csv.trim_end())?;
                Ok(0)
            }
            DensityCmd::Point { triplet, t, x } => {
                let tr = triplet.build()?;
                let v = density::density_point(&tr, t, &x)?;
                println!(
                    "{}",
                    json(&serde_json::json!({ "schema": 1, "t": t, "x": x, "p": v }))
                );
                Ok(0)
            }
        },
        Command::Bounds { cmd } => match cmd {
            BoundsCmd::VerifyUpper { triplet, tmin, tmax, band, out, plot } => {
                let t = triplet.build()?;
                let grid = dyadic_range(tmin, tmax);
                let cert = density::verify_upper_envelope(&t, &grid, band)?;
                if let Some(p) = plot {
                    let series: Vec<(f64, f64)> = cert
                        .t_grid
                        .iter()
                        .copied()
                        .zip(cert.ratios.iter().copied())
                        .collect();
                    fs::write(&p, gnuplot_series("upper envelope ratio", &series))
                        .map_err(|e| LevyError::InvalidConfig(format!("{e}")))?;
                }
                write_or_print(&out, &json(&cert))?;
                Ok(if cert.verdict == Verdict::Pass { 0 } else { 1 })
            }
            BoundsCmd::VerifyLower {
                triplet,
                variant,
                nu_zoo,
                a1,
                theta,
                tmin,
                tmax,
                force,
                out,
                plot,
            } => {
                let t = triplet.build()?;
                let var = match variant.as_str() {
                    "gaussian" => LowerVariant::Gaussian,
                    "alpha-ge-one" => LowerVariant::AlphaGeOne,
                    "symmetric-minorant" => {
                        let spec = nu_zoo.ok_or_else(|| {
                            LevyError::InvalidConfig(
                                "symmetric-minorant needs --nu-zoo".into(),
                            )
                        })?;
                        LowerVariant::SymmetricMinorant {
                            nu_s: zoo::make_zoo(&spec)?.triplet.levy().clone(),
                            a1,
                        }
                    }
                    other => {
                        return Err(LevyError::InvalidConfig(format!(
                            "unknown variant {other:?}"
                        )))
                    }
                };
                let grid = dyadic_range(tmin, tmax);
                let cert = density::verify_lower_envelope(&t, &grid, theta, &var, force)?;
                if let Some(p) = plot {
                    let series: Vec<(f64, f64)> = cert
                        .t_grid
                        .iter()
                        .copied()
                        .zip(cert.ratios.iter().copied())
                        .collect();
                    fs::write(&p, gnuplot_series("lower envelope ratio", &series))
                        .map_err(|e| LevyError::InvalidConfig(format!("{e}")))?;
                }
                write_or_print(&out, &json(&cert))?;
                Ok(if cert.verdict == Verdict::Pass { 0 } else { 1 })
            }
        },
        Command::Decompose { cmd: DecomposeCmd::Diag { triplet, nu_zoo, a1, out } } => {
            let t = triplet.build()?;
            let nu = zoo::make_zoo(&nu_zoo)?.triplet.levy().clone();
            let t_lattice: Vec<f64> = (1..=16).map(|k| 2f64.powi(-k)).collect();
            let a0 = decompose::calibrate_a0(&t, &nu, a1, &t_lattice[..8])?;
            let mut char_integrals = Vec::new();
            let mut ball_masses = Vec::new();
            for tt in &t_lattice {
                let member = decompose::classx_member(
                    &t,
                    &nu,
                    a1,
                    *tt,
                    a0,
                    vec![0.0; t.dim()],
                    f64::INFINITY,
                    1.0,
                )?;
                char_integrals.push((*tt, decompose::classx_char_integral(&member)?));
                ball_masses.push((*tt, decompose::classx_ball_mass(&member, 1.0)?));
            }
            let report = serde_json::json!({
                "schema": 1,
                "a0": a0,
                "a1": a1,
                "char_integrals": char_integrals,
                "ball_masses": ball_masses,
            });
            write_or_print(&out, &json(&report))?;
            Ok(0)
        }
        Command::Simulate { cmd } => match cmd {
            SimulateCmd::ExitTime { triplet, r, seed, paths, out } => {
                let t = triplet.build()?;
                let cfg = SamplerConfig {
                    epsilon: 0.05,
                    policy: SmallJumpPolicy::GaussianSubstitute,
                    seed,
                    paths,
                };
                let est = simulate::exit_time(&t, r, &cfg)?;
                let report = serde_json::json!({
                    "schema": 1,
                    "r": r,
                    "mean_exit": est.mean_exit,
                    "product_with_h": est.product_with_h,
                    "step": est.step,
                    "seed": seed,
                });
                write_or_print(&out, &json(&report))?;
                Ok(0)
            }
            SimulateCmd::Cone { triplet, t, lambda, angle, seed, paths, out } => {
                let tr = triplet.build()?;
                let cfg = SamplerConfig {
                    epsilon: 0.05,
                    policy: SmallJumpPolicy::GaussianSubstitute,
                    seed,
                    paths,
                };
                let rot = angle.map(|th: f64| vec![th.cos(), -th.sin(), th.sin(), th.cos()]);
                let est =
                    simulate::cone_probability(&tr, t, lambda, rot.as_deref(), &cfg)?;
                let report = serde_json::json!({
                    "schema": 1, "t": t, "lambda": lambda, "estimate": est, "seed": seed,
                });
                write_or_print(&out, &json(&report))?;
                Ok(0)
            }
            SimulateCmd::HalfLine { triplet, t, seed, paths, out } => {
                let tr = triplet.build()?;
                let cfg = SamplerConfig {
                    epsilon: 0.05,
                    policy: SmallJumpPolicy::GaussianSubstitute,
                    seed,
                    paths,
                };
                let est = simulate::half_line_probability(&tr, t, &cfg)?;
                let report = serde_json::json!({
                    "schema": 1, "t": t, "estimate": est, "seed": seed,
                });
                write_or_print(&out, &json(&report))?;
                Ok(0)
            }
        },
        Command::Zoo { cmd: ZooCmd::List } => {
            for (name, usage) in zoo::constructors() {
                println!("{name:22} {usage}");
            }
            println!();
            println!("aliases: cauchy (= isotropic_stable:1,1), example61[:alpha], gauss_cauchy");
            Ok(0)
        }
    }
}

fn dyadic_range(tmin: f64, tmax: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = tmax;
    while t >= tmin * 0.999 {
        out.push(t);
        t *= 0.5;
    }
    out.reverse();
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                LevyError::InvalidConfig(_)
                | LevyError::BadParameter(_)
                | LevyError::NonSymmetricMatrix { .. }
                | LevyError::NegativeDefinite { .. }
                | LevyError::CompoundPoisson { .. }
                | LevyError::NonIntegrableMeasure { .. }
                | LevyError::VariantPreconditionFailed(_) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}
