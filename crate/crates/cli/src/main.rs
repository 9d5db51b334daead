use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toponogov::experiment::{emit_plot_data, run_experiment, ExperimentConfig, Suite, OUT_DIR_ENV};
use toponogov::warping::FAMILIES;
use toponogov::Error;

/// Verify comparison inequalities on synthetic surfaces with boundary.
#[derive(Parser)]
#[command(name = "toponogov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write CSV reports plus summary.json.
    Run(RunArgs),
    /// Turn suite reports into plot-ready residual and trace series.
    PlotData(PlotArgs),
    /// List the warping families accepted as model or testbed.
    ListModels,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for the randomized suites.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides the configuration.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suite to run; repeatable, replaces the configured list.
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<Suite>,
    /// Warping spec of the model surface.
    #[arg(long, value_name = "SPEC")]
    model: Option<String>,
    /// Warping spec of the testbed, or cylinder:C:L.
    #[arg(long, value_name = "SPEC")]
    testbed: Option<String>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding the suite reports.
    #[arg(long, value_name = "DIR", env = OUT_DIR_ENV, default_value = "toponogov-out")]
    reports: PathBuf,
    /// Output directory; defaults to `<reports>/plot`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suite to convert; repeatable, all reports found if absent.
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<Suite>,
}

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_REFUSED: u8 = 3;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) => ExitCode::from(EXIT_USAGE),
        _ => ExitCode::from(EXIT_REFUSED),
    }
}

fn run(args: RunArgs) -> ExitCode {
    let mut config = match &args.config {
        Some(path) => match ExperimentConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => ExperimentConfig::default(),
    };
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if !args.suites.is_empty() {
        config.suites = args.suites;
    }
    if let Some(m) = args.model {
        config.model = m;
    }
    if let Some(t) = args.testbed {
        config.testbed = t;
    }
    if args.out.is_some() {
        config.output_dir = args.out;
    }
    let out = config.resolved_output_dir();
    let outcome = match run_experiment(&config, &out) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    for s in &outcome.suites {
        let verdict = s.verdict.as_deref().map(|v| format!(" verdict={v}")).unwrap_or_default();
        let worst = s.worst_residual.map(|r| format!("{r:e}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<16} {:>4}/{:<4} worst_residual={worst} runtime={:.2}s{verdict}",
            s.suite, s.passes, s.cases, s.runtime_seconds
        );
    }
    if outcome.passed {
        println!("all cases passed; reports in {}", out.display());
        return ExitCode::SUCCESS;
    }
    eprintln!("failing cases in:");
    for s in outcome.suites.iter().filter(|s| !s.passed()) {
        eprintln!("  {}", out.join(s.suite.report_file()).display());
    }
    eprintln!("  {}", out.join("summary.json").display());
    ExitCode::from(EXIT_FAILED)
}

fn plot(args: PlotArgs) -> ExitCode {
    let out = args.out.unwrap_or_else(|| args.reports.join("plot"));
    match emit_plot_data(&args.reports, &out, &args.suites) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::PlotData(args) => plot(args),
        Command::ListModels => {
            for (name, about) in FAMILIES {
                println!("{name:<20} {about}");
            }
            println!("{:<20} flat cylinder testbed of circumference C and height L", "cylinder:C:L");
            ExitCode::SUCCESS
        }
    }
}
