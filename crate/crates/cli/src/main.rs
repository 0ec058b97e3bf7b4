//! `ecmid`: identify Randles circuit parameters from EIS spectra or pulse
//! records, simulate pulse experiments, and score parameter sets.
//!
//! Exit codes:
//!
//! | code | family |
//! |------|--------|
//! | 0 | success |
//! | 1 | I/O |
//! | 2 | usage, validation, configuration |
//! | 3 | parse |
//! | 4 | frequency selection / range |
//! | 5 | solver (non-physical or degenerate) |
//! | 6 | dsp (insufficient data, low signal) |

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ecmid", version, about = "Closed-form Randles circuit identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit an EIS spectrum (or every *.csv in a directory).
    FitEis(FitEisArgs),
    /// Fit three pulse records taken at different frequencies.
    FitPulse(FitPulseArgs),
    /// Simulate a square-wave pulse experiment and write a time-series CSV.
    Simulate(SimulateArgs),
    /// Score a parameter set against an EIS spectrum.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HighRuleArg {
    MinImag,
    ZeroSlope,
}

#[derive(Debug, Args)]
struct SelectionArgs {
    /// Low probe frequency; default is the grid point nearest 0.1 Hz.
    #[arg(long)]
    f_low_hz: Option<f64>,
    /// Mid probe frequency; default is one point above the semicircle apex.
    #[arg(long)]
    f_mid_hz: Option<f64>,
    /// High probe frequency; overrides --f-high-rule.
    #[arg(long)]
    f_high_hz: Option<f64>,
    #[arg(long, value_enum, default_value = "min-imag")]
    f_high_rule: HighRuleArg,
    #[arg(long, default_value_t = 10.0)]
    min_separation_ratio: f64,
}

#[derive(Debug, Args)]
struct FitEisArgs {
    /// EIS CSV file, or a directory of them.
    input: PathBuf,
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for directory input.
    #[arg(long, default_value_t = 4)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Band-pass damping gain.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Number of cascaded band-pass sections (1 or 2).
    #[arg(long, default_value_t = 2)]
    cascade: usize,
}

#[derive(Debug, Args)]
struct FitPulseArgs {
    /// Three time-series CSVs (t_s,i_a,v_v).
    #[arg(required = true)]
    records: Vec<PathBuf>,
    /// Excitation frequency of each record, in the same order.
    #[arg(long, value_delimiter = ',', required = true)]
    freqs_hz: Vec<f64>,
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(long, default_value_t = 10.0)]
    min_separation_ratio: f64,
    /// EIS spectrum to score the identified parameters against.
    #[arg(long)]
    reference_eis: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Key-value parameter file (a previous report works too).
    #[arg(long, conflicts_with_all = ["r0_ohm", "r1_ohm", "c1_farad", "aw_ohm_sqrt_rad_s"])]
    params: Option<PathBuf>,
    #[arg(long)]
    r0_ohm: Option<f64>,
    #[arg(long)]
    r1_ohm: Option<f64>,
    #[arg(long)]
    c1_farad: Option<f64>,
    #[arg(long)]
    aw_ohm_sqrt_rad_s: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    freq_hz: f64,
    #[arg(long, default_value_t = 50.0)]
    amplitude_a: f64,
    #[arg(long, default_value_t = 0.5)]
    duty: f64,
    /// Default: enough periods for settling plus three measured cycles.
    #[arg(long)]
    n_periods: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    dc_bias_a: f64,
    #[arg(long, default_value_t = 3.7)]
    ocv_v: f64,
    #[arg(long, default_value_t = 50)]
    n_harmonics: usize,
    /// Default: 200 samples per period.
    #[arg(long)]
    sample_rate_hz: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    noise_rms_v: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Filter the record is meant for; sets the default period count.
    #[command(flatten)]
    filter: FilterArgs,
    /// Output CSV; ground truth goes to `<out>.truth.txt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    eis: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::FitEis(a) => commands::fit_eis(a),
        Command::FitPulse(a) => commands::fit_pulse(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
