use std::path::PathBuf;
use std::process::ExitCode;

use bell3::commands::{self, CsvOrJson, Family, TextOrJson, ThresholdMode};
use bell3::CliError;
use clap::{Parser, Subcommand};

/// CH/CHSH analysis of two-qutrit Bell scenarios.
///
/// Exit codes: 0 success, 1 domain error, 2 input or parse error,
/// 3 invalid distribution, 4 no-signaling violation.
#[derive(Parser)]
#[command(name = "bell3", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the no-signaling constraints for 12 probabilities.
    Derive {
        /// Twelve flat indices (1..=36), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<i64>,
        /// Print only these solved probabilities.
        #[arg(long, value_delimiter = ',')]
        show: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
    },
    /// Test whether two functionals agree up to scale and offset on
    /// no-signaling distributions.
    Equivalence {
        /// Built-in label (I3, K3, W3, CGLMP(…), W(…)) or JSON file.
        f: String,
        g: String,
        /// Elimination set for the residual report.
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<i64>>,
        /// Exit with code 1 when the functionals are not equivalent.
        #[arg(long)]
        expect_equivalent: bool,
    },
    /// Classical bounds of a family of functionals, as CSV.
    Bounds {
        #[arg(long, value_enum)]
        family: Family,
    },
    /// I3 and K3 of the family state over a θ range, as CSV.
    Scan {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 180.0, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        step: f64,
        /// Read --from/--to/--step as radians instead of degrees.
        #[arg(long)]
        radians: bool,
    },
    /// Noise and detector-efficiency thresholds.
    Thresholds {
        #[arg(long, value_enum)]
        mode: ThresholdMode,
        /// θ step in degrees for eta-curve.
        #[arg(long, default_value_t = commands::ETA_CURVE_STEP_DEG, allow_negative_numbers = true)]
        step: f64,
        /// Optimize all four phases instead of the tied family (optimum only).
        #[arg(long)]
        free_phases: bool,
        #[arg(long, value_enum, default_value_t = CsvOrJson::Csv)]
        format: CsvOrJson,
    },
    /// Print the maximally nonlocal no-signaling box.
    Prbox {
        #[arg(long, value_enum, default_value_t = TextOrJson::Json)]
        format: TextOrJson,
    },
    /// Decide whether a distribution in JSON admits a local model.
    Lpcheck {
        file: PathBuf,
        /// List the strategies and weights of a local decomposition.
        #[arg(long)]
        weights: bool,
        #[arg(long, default_value_t = bell3_core::DEFAULT_TOL)]
        tol: f64,
    },
}

fn run(cli: Cli) -> Result<(String, Option<CliError>), CliError> {
    Ok(match cli.command {
        Command::Derive { targets, show, format } => (commands::derive(&targets, show.as_deref(), format)?, None),
        Command::Equivalence { f, g, targets, expect_equivalent } => {
            let (out, related) = commands::equivalence(&f, &g, targets.as_deref())?;
            let failure = (expect_equivalent && !related)
                .then(|| CliError::Domain(format!("{f} and {g} are not equivalent")));
            (out, failure)
        }
        Command::Bounds { family } => (commands::bounds(family), None),
        Command::Scan { from, to, step, radians } => (commands::scan(from, to, step, radians)?, None),
        Command::Thresholds { mode, step, free_phases, format } => {
            (commands::thresholds(mode, step, free_phases, format)?, None)
        }
        Command::Prbox { format } => (commands::prbox(format), None),
        Command::Lpcheck { file, weights, tol } => (commands::lpcheck(&file, weights, tol)?, None),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, failure) = match run(cli) {
        Ok(r) => r,
        Err(e) => (String::new(), Some(e)),
    };
    print!("{out}");
    match failure {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
