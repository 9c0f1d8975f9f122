//! Command-line driver: kink constants, force sweeps, n-body runs, PDE
//! evolutions, cluster construction and law verification.
//!
//! Exit code 0 iff every requested check passes.

use clap::{Args, Parser, Subcommand};
use kinklab::experiments;
use kinklab::io::{self, ExperimentConfig};
use kinklab::kink::KinkProfile;
use kinklab::potential::Potential;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kinklab", about = "Numerical laboratory for kink clusters", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print kappa, the rest mass and the profile identity report.
    Kink(KinkArgs),
    /// Sweep the kink-antikink force over a range of gaps (CSV output).
    Forces(ForcesArgs),
    /// Integrate the attractive-Toda n-body system from a config file.
    Toda(ConfigArgs),
    /// Evolve a multikink initial condition from a config file.
    Evolve(ConfigArgs),
    /// Construct a kink cluster with prescribed initial gaps (config file).
    Cluster(ConfigArgs),
    /// Verify a tracked modulation series against the separation law.
    Verify(VerifyArgs),
    /// Parameter sweeps: pair energy vs expansion, or solver convergence.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct KinkArgs {
    /// Model identifier (phi4 | sine_gordon).
    #[arg(long, default_value = "phi4")]
    model: String,
    /// Half-width of the profile table.
    #[arg(long, default_value_t = 15.0)]
    x_max: f64,
    /// Number of table points.
    #[arg(long, default_value_t = 4096)]
    points: usize,
    /// Write the (x, H, dH) table to this CSV file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct ForcesArgs {
    #[arg(long, default_value = "phi4")]
    model: String,
    #[arg(long, default_value_t = 8.0)]
    y_min: f64,
    #[arg(long, default_value_t = 14.0)]
    y_max: f64,
    #[arg(long, default_value_t = 13)]
    steps: usize,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config file (key = value lines).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Modulation series CSV produced by a tracked run.
    #[arg(long)]
    series: PathBuf,
    #[arg(long, default_value = "phi4")]
    model: String,
    /// Write the JSON report here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep kind: energy | convergence.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value = "phi4")]
    model: String,
    #[arg(long, default_value_t = 8.0)]
    y_min: f64,
    #[arg(long, default_value_t = 12.0)]
    y_max: f64,
    #[arg(long, default_value_t = 9)]
    steps: usize,
    /// Boost for the convergence sweep.
    #[arg(long, default_value_t = 0.5)]
    velocity: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build(model: &str) -> kinklab::Result<(KinkProfile, Potential)> {
    let p = Potential::builtin(model)?;
    let prof = KinkProfile::build(&p, 15.0, 4096)?;
    Ok((prof, p))
}

fn emit(path: &Option<PathBuf>, text: &str) -> kinklab::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_config(path: &PathBuf) -> kinklab::Result<bool> {
    let cfg = ExperimentConfig::from_file(path)?;
    let summary = io::run(&cfg)?;
    for check in &summary.checks {
        println!(
            "{:<28} {}  (value {:.3e}, threshold {:.3e})",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.value,
            check.threshold
        );
    }
    if cfg.out_summary.is_none() {
        println!("{}", serde_json::to_string_pretty(&summary.json)?);
    }
    Ok(summary.all_passed())
}

fn dispatch(cli: Cli) -> kinklab::Result<bool> {
    match cli.command {
        Command::Kink(args) => {
            let p = Potential::builtin(&args.model)?;
            let report = p.validate(256, 1e-10);
            let prof = KinkProfile::build(&p, args.x_max, args.points)?;
            let identities = prof.check_identities();
            println!("model                 {}", args.model);
            println!("potential valid       {}", report.passes());
            println!("kappa                 {:.12}", prof.kappa);
            println!("mass                  {:.12}", prof.mass);
            println!("tail-fit kappa        {:.12}", prof.tail_fit_kappa());
            println!("bogomolny residual    {:.3e}", prof.bogomolny_residual());
            println!(
                "reduced-force         {:.9} (expected {:.9})",
                identities.reduced_force, identities.reduced_force_expected
            );
            println!("zero-mode max-norm    {:.3e}", identities.zero_mode_max);
            println!("tail residual slope   {:.4}", identities.tail_slope);
            if let Some(path) = args.dump {
                std::fs::write(&path, io::profile_csv(&prof))?;
                println!("profile table         {}", path.display());
            }
            let ok = report.passes()
                && (identities.reduced_force - identities.reduced_force_expected).abs() <= 1e-6
                && identities.tail_slope <= -2.9;
            Ok(ok)
        }
        Command::Forces(args) => {
            let (prof, _) = build(&args.model)?;
            let gaps: Vec<f64> = (0..args.steps)
                .map(|i| {
                    args.y_min
                        + (args.y_max - args.y_min) * i as f64 / (args.steps - 1).max(1) as f64
                })
                .collect();
            let rows = experiments::force_sweep(&prof, &gaps);
            emit(&args.out, &io::force_sweep_csv(&rows))?;
            Ok(true)
        }
        Command::Toda(args) => run_config(&args.config),
        Command::Evolve(args) => run_config(&args.config),
        Command::Cluster(args) => run_config(&args.config),
        Command::Verify(args) => {
            let (prof, _) = build(&args.model)?;
            let text = std::fs::read_to_string(&args.series)?;
            let series = io::parse_series_csv(&text)?;
            let report = experiments::verify_asymptotics(&series, prof.mass, prof.kappa);
            let json = serde_json::to_string_pretty(&report)?;
            match args.summary {
                Some(path) => std::fs::write(path, &json)?,
                None => println!("{json}"),
            }
            Ok(report.monotone_gaps
                && report.max_gap_deviation <= 0.1
                && report.max_velocity_deviation <= 0.1)
        }
        Command::Sweep(args) => {
            let (prof, p) = build(&args.model)?;
            match args.kind.as_str() {
                "energy" => {
                    let gaps: Vec<f64> = (0..args.steps)
                        .map(|i| {
                            args.y_min
                                + (args.y_max - args.y_min) * i as f64
                                    / (args.steps - 1).max(1) as f64
                        })
                        .collect();
                    let rows = experiments::energy_sweep(&prof, &p, &gaps, 0.01);
                    emit(&args.out, &io::energy_sweep_csv(&rows))?;
                    Ok(true)
                }
                "convergence" => {
                    let rows = experiments::convergence_study(
                        &prof,
                        &p,
                        &[0.1, 0.05, 0.025],
                        args.velocity,
                        10.0,
                    );
                    emit(&args.out, &io::convergence_csv(&rows))?;
                    let order = (rows[0].error / rows[1].error).log2();
                    println!("# measured order between first two levels: {order:.3}");
                    Ok(order >= 1.9)
                }
                other => Err(kinklab::Error::Config(format!("unknown sweep kind `{other}`"))),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
