use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hrbeam::baselines::SchemeId;
use hrbeam::io::{
    load_oracle_request, load_scenario, run_oracle, run_pattern, run_solve, run_sweep, ExitStatus, OracleRequest,
    Scenario,
};

#[derive(Parser)]
#[command(name = "hrbeam", version, about = "Worst-case beam coverage with rotatable arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Only log errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Worker threads for the outer search; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario's schemes and write a JSON report.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Override the scenario's scheme list.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<SchemeId>,
    },
    /// Same as `solve` with all six schemes.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Solve on symmetric regions of several widths and write a CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Region widths, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,60,80,100")]
        widths: Vec<f64>,
        /// Interpret widths as radians instead of degrees.
        #[arg(long)]
        radians: bool,
    },
    /// Solve, then write each scheme's beam pattern as CSV.
    Pattern {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
        theta_min: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
        theta_max: f64,
        #[arg(long, default_value_t = 1801)]
        samples: usize,
    },
    /// Exhaustive lattice search for a small array.
    Oracle {
        /// Oracle request JSON; omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn scenario(path: Option<&Path>) -> Result<Scenario, ExitStatus> {
    match path {
        None => Ok(Scenario::default()),
        Some(p) => load_scenario(p).map_err(|e| {
            log::error!("{e}");
            ExitStatus::ConfigError
        }),
    }
}

fn run(cli: Cli) -> ExitStatus {
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            log::error!("cannot configure {} threads: {e}", cli.threads);
            return ExitStatus::ConfigError;
        }
    }
    let outcome = match cli.command {
        Command::Solve { common, schemes } => scenario(common.config.as_deref()).map(|mut s| {
            if !schemes.is_empty() {
                s.schemes = schemes;
            }
            run_solve(&s, &common.out)
        }),
        Command::Compare { common } => scenario(common.config.as_deref()).map(|mut s| {
            s.schemes = SchemeId::ALL.to_vec();
            run_solve(&s, &common.out)
        }),
        Command::Sweep { common, widths, radians } => scenario(common.config.as_deref()).map(|s| {
            let widths: Vec<f64> = widths.iter().map(|&w| if radians { w } else { w.to_radians() }).collect();
            run_sweep(&s, &widths, &common.out)
        }),
        Command::Pattern {
            common,
            theta_min,
            theta_max,
            samples,
        } => scenario(common.config.as_deref()).map(|s| run_pattern(&s, theta_min, theta_max, samples, &common.out)),
        Command::Oracle { config, out } => {
            let request = match config {
                None => Ok(OracleRequest::default()),
                Some(p) => load_oracle_request(&p).map_err(|e| {
                    log::error!("{e}");
                    ExitStatus::ConfigError
                }),
            };
            request.map(|r| run_oracle(&r, &out))
        }
    };
    outcome.unwrap_or_else(|status| status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    ExitCode::from(run(cli).code() as u8)
}
