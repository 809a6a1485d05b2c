mod commands;
mod error;
mod record;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gbs_core::analysis::{KRule, LimitSchedule};
use gbs_core::verify::DEFAULT_SEED;
use gbs_core::{GbsParams, RootPolicy, C64};

use commands::Output;
use error::CliError;

/// Environment variable that scales every verification tolerance.
const TOLERANCE_ENV: &str = "GBS_TOLERANCE_OVERRIDE";

#[derive(Parser)]
#[command(
    name = "gbs",
    version,
    about = "Generalized binomial states: closed-form solver, oracle checks, limit scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Binomial state amplitudes, photon statistics and ladder residual.
    Binomial {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve one parameter set in closed form and check it against the dense oracle.
    #[command(alias = "solve")]
    Gbs {
        #[command(flatten)]
        mu_nu: MuNu,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "principal")]
        root: RootPolicy,
        /// Also emit eigenstate `k`.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Limit scans; CSV rows are `m_or_eta, fidelity, residual`.
    #[command(subcommand)]
    Limit(LimitCommand),
    /// Free evolution of the `nu = 0`, `mu = e^{i phi}` eigenstate `k`.
    Evolve {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the acceptance battery and print a pass/fail table.
    Verify {
        /// Criterion ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Table)]
        format: VerifyFormat,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Subcommand)]
enum LimitCommand {
    /// Fidelity with `|k>` along a schedule of eta values.
    Number {
        #[command(flatten)]
        mu_nu: MuNu,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        etas: Vec<f64>,
        #[command(flatten)]
        out: ScanOutputArgs,
    },
    /// Eigenstate `floor(M/2) + offset` against the squeezed reference, `eta = alpha^2/M`.
    Squeezed {
        #[command(flatten)]
        mu_nu: MuNu,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        ms: Vec<usize>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
        #[command(flatten)]
        out: ScanOutputArgs,
    },
    /// `nu = 0`, `mu = e^{i phi}`: top states against `|alpha e^{-i phi}>`, bottom states against `|0>`.
    Coherent {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        ms: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Edge::Top)]
        rule: Edge,
        #[arg(long, default_value_t = 0)]
        offset: usize,
        #[command(flatten)]
        out: ScanOutputArgs,
    },
}

#[derive(Args)]
struct MuNu {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    mu_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu_im: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    nu_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    nu_im: f64,
}

impl MuNu {
    fn mu(&self) -> C64 {
        C64::new(self.mu_re, self.mu_im)
    }

    fn nu(&self) -> C64 {
        C64::new(self.nu_re, self.nu_im)
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path, `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct ScanOutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyFormat {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Edge {
    Top,
    Bottom,
}

fn tolerance_scale() -> Result<f64, CliError> {
    match std::env::var(TOLERANCE_ENV) {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
            _ => Err(CliError::Input(format!(
                "{TOLERANCE_ENV}={s:?} is not a positive number"
            ))),
        },
    }
}

fn emit(output: &Output, format: Format, out: &str) -> Result<(), CliError> {
    match format {
        Format::Json => record::write_json(&output.record, out),
        Format::Csv => record::write_csv(&output.table, out),
    }
}

fn execute(command: Command) -> Result<Option<String>, CliError> {
    let scale = tolerance_scale()?;
    let (output, format, out) = match command {
        Command::Binomial { eta, m, out } => (commands::binomial(eta, m)?, out.format, out.out),
        Command::Gbs {
            mu_nu,
            eta,
            m,
            root,
            k,
            out,
        } => {
            let p = GbsParams::new(mu_nu.mu(), mu_nu.nu(), eta, m)?;
            (commands::gbs(p, root, k, scale)?, out.format, out.out)
        }
        Command::Limit(LimitCommand::Number { mu_nu, m, k, etas, out }) => (
            commands::limit_number(mu_nu.mu(), mu_nu.nu(), m, k, &etas)?,
            out.format,
            out.out,
        ),
        Command::Limit(LimitCommand::Squeezed {
            mu_nu,
            alpha,
            ms,
            offset,
            out,
        }) => {
            let schedule = LimitSchedule::new(alpha, ms, KRule::Center(offset))?;
            (
                commands::limit_squeezed(mu_nu.mu(), mu_nu.nu(), schedule)?,
                out.format,
                out.out,
            )
        }
        Command::Limit(LimitCommand::Coherent {
            phi,
            alpha,
            ms,
            rule,
            offset,
            out,
        }) => {
            let rule = match rule {
                Edge::Top => KRule::TopOffset(offset),
                Edge::Bottom => KRule::Bottom(offset),
            };
            let schedule = LimitSchedule::new(alpha, ms, rule)?;
            (commands::limit_coherent(phi, schedule)?, out.format, out.out)
        }
        Command::Evolve {
            eta,
            m,
            k,
            phi,
            omega,
            t,
            out,
        } => (commands::evolve(eta, m, k, phi, omega, t, scale)?, out.format, out.out),
        Command::Verify {
            criteria,
            seed,
            format,
            out,
        } => {
            let output = commands::verify(&criteria, seed, scale)?;
            match format {
                VerifyFormat::Table => print_table(&output, &out)?,
                VerifyFormat::Json => emit(&output, Format::Json, &out)?,
                VerifyFormat::Csv => emit(&output, Format::Csv, &out)?,
            }
            return Ok(output.failure);
        }
    };
    emit(&output, format, &out)?;
    Ok(output.failure)
}

fn print_table(output: &Output, out: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut text = String::new();
    for row in &output.table.rows {
        if let Some(record::Cell::Text(line)) = row.last() {
            text.push_str(line);
            text.push('\n');
        }
    }
    if out == "-" {
        std::io::stdout().lock().write_all(text.as_bytes())?;
    } else {
        std::fs::write(out, text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("gbs: {}", CliError::Verification(failure));
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("gbs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
