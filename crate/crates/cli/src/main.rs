mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use io::parse_rate_arg;

#[derive(Parser)]
#[command(name = "xrtraffic", version, about = "Cloud-XR video traffic model, analysis and link simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic frame trace.
    Synthesize(SynthesizeArgs),
    /// Print statistics and fixed-location logistic fits of a trace.
    Analyze(AnalyzeArgs),
    /// Fit an application profile to a set of traces.
    Calibrate(CalibrateArgs),
    /// Encode a trace's frames as fragment bursts.
    Fragment(FragmentArgs),
    /// Run a single-point campaign.
    Simulate(RunArgs),
    /// Run a campaign over its swept variable.
    Sweep(RunArgs),
    /// Turn results files into throughput / delay / p95 delay series.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct SynthesizeArgs {
    /// Built-in application name or profile file.
    #[arg(long)]
    pub app: String,
    /// Frame rate: 30 or 60.
    #[arg(long)]
    pub fps: u32,
    /// Target data rate in bit/s; k, M, G suffixes accepted.
    #[arg(long, value_parser = parse_rate_arg)]
    pub rate: f64,
    /// Seconds of traffic.
    #[arg(long)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Drive the model with this measured rate instead of the target.
    #[arg(long, value_parser = parse_rate_arg, conflicts_with = "empirical_factor")]
    pub empirical_rate: Option<f64>,
    /// Measured rate as a multiple of the target.
    #[arg(long)]
    pub empirical_factor: Option<f64>,
    /// Multiplier on the dispersion laws (0 gives a constant stream).
    #[arg(long, default_value_t = 1.0)]
    pub dispersion_scale: f64,
    /// Output trace CSV.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    pub trace: PathBuf,
    /// Emit JSON instead of key=value lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Glob matching trace CSV files.
    #[arg(long)]
    pub traces: String,
    /// Name of the fitted profile; defaults to the traces' app.
    #[arg(long)]
    pub name: Option<String>,
    /// Output profile file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// JSON report with per-trace fits.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Plot-ready CSV of dispersion points and fitted curves.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args)]
pub struct FragmentArgs {
    pub trace: PathBuf,
    /// Output fragment stream file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Read the stream back and verify every frame reassembles.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args)]
pub struct RunArgs {
    /// Campaign TOML file.
    pub config: PathBuf,
    /// Directory for results.csv and summary.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Comma-separated seeds overriding the campaign's.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Results CSV files, one series each.
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// Series labels, in the order of the files; default is the file stem.
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
    #[arg(long, short)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Fragment(a) => commands::fragment(a),
        Command::Simulate(a) => commands::run_campaign(a, false),
        Command::Sweep(a) => commands::run_campaign(a, true),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = if e.downcast_ref::<io::Invalid>().is_some() {
                ("validation", 2)
            } else {
                ("runtime", 1)
            };
            eprintln!("ERROR kind={kind} message={:#}", e);
            ExitCode::from(code)
        }
    }
}
