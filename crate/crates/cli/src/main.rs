use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use degenlab::plot::{plot_report, Schema};
use degenlab::{exit, load_for, run_experiment, CliError, Manifest, RunOptions, THREADS_ENV};

#[derive(Parser)]
#[command(name = "degenlab", version, about = "Numerical experiments on degenerate elliptic operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; the built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies the torus grid and the Mellin frequency count.
    #[arg(long, default_value_t = 1)]
    grid_scale: usize,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Report CSV written by a run.
    #[arg(long)]
    report: PathBuf,
    /// Expected schema; detected from the header when omitted.
    #[arg(long, value_enum)]
    kind: Option<Schema>,
    /// SVG destination (defaults to the report path with `.svg`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Dirichlet roots and exceptional Sobolev exponents of a profile.
    Spectrum(RunArgs),
    /// Manufactured-solution run of the model Dirichlet problem.
    Model(RunArgs),
    /// Singular solutions and their Sobolev scan.
    Singular(RunArgs),
    /// Rescaling probe of exact regularity on the torus.
    Probe(RunArgs),
    /// Heat semigroup, growth windows and spectral gap.
    Heat(RunArgs),
    /// Renders a report CSV as SVG.
    Plot(PlotArgs),
    /// Fast sanity checks.
    Selftest(SelftestArgs),
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    let (name, args) = match cli.command {
        Command::Spectrum(a) => ("spectrum", a),
        Command::Model(a) => ("model", a),
        Command::Singular(a) => ("singular", a),
        Command::Probe(a) => ("probe", a),
        Command::Heat(a) => ("heat", a),
        Command::Plot(a) => return plot(a),
        Command::Selftest(a) => return selftest(a.seed),
    };
    let cfg = load_for(name, args.config.as_deref())?;
    let opts = RunOptions { out: args.out, grid_scale: args.grid_scale, seed: args.seed };
    let report = run_experiment(&cfg, &opts)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    println!("wrote {} files to {}", report.manifest.files.len() + 1, report.out_dir.display());
    Ok(())
}

fn plot(a: PlotArgs) -> anyhow::Result<()> {
    let sha = a.report.parent().and_then(Manifest::read).map(|m| m.config_sha256).unwrap_or_else(|| "unknown".into());
    let (_, svg) = plot_report(&a.report, a.kind, &sha)?;
    let out = a.out.unwrap_or_else(|| a.report.with_extension("svg"));
    std::fs::write(&out, svg).map_err(|e| CliError::io(&out, e))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn selftest(seed: u64) -> anyhow::Result<()> {
    let checks = degenlab::selftest::run_checks(seed);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Selftest { failed }.into());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(exit::OTHER, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
