use clap::{Parser, Subcommand, ValueEnum};
use halodiff::cli::{self, CliError};
use halodiff::config::OutputFormat;
use std::path::PathBuf;
use std::process::ExitCode;

/// Diffraction of weakly bound dimers by transmission gratings.
#[derive(Parser)]
#[command(name = "halodiff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to the config's output.path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; defaults to the config's output.format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads for k₂ sampling (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Full diffraction pattern with peak reports and regime warnings.
    Pattern(CommonArgs),
    /// Single-bar intensities |t_mol|² and |t_pp|² (no grating function).
    Bar(CommonArgs),
    /// Molecular form factor F(q) over the sampling range.
    Formfactor(CommonArgs),
    /// Peak comparison table at the grating orders.
    Peaks {
        #[command(flatten)]
        common: CommonArgs,
        /// Highest order to report (defaults to all inside k2_max).
        #[arg(long)]
        max_order: Option<u32>,
    },
    /// Print diffraction-regime warnings for the configuration.
    Check {
        /// Run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Validate the fast amplitude path against 3D brute-force quadrature.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Comparison points k₂ in nm⁻¹ (comma separated).
        #[arg(long, value_delimiter = ',')]
        k2: Vec<f64>,
        /// Peak orders to compare at (comma separated).
        #[arg(long, value_delimiter = ',')]
        orders: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Pattern(args) => {
            let artifacts = cli::run_pattern(
                &args.config,
                args.out.as_deref(),
                args.format.map(Into::into),
                args.threads,
            )?;
            for w in &artifacts.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", artifacts.data_path.display());
            if let Some(sidecar) = &artifacts.sidecar_path {
                println!("wrote {}", sidecar.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bar(args) => {
            let path = cli::run_bar(
                &args.config,
                args.out.as_deref(),
                args.format.map(Into::into),
                args.threads,
            )?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Formfactor(args) => {
            let path = cli::run_formfactor(
                &args.config,
                args.out.as_deref(),
                args.format.map(Into::into),
                args.threads,
            )?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Peaks { common, max_order } => {
            let path = cli::run_peaks(
                &common.config,
                common.out.as_deref(),
                common.format.map(Into::into),
                max_order,
                common.threads,
            )?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { config } => {
            let warnings = cli::run_check(&config)?;
            if warnings.is_empty() {
                println!("ok: no regime warnings");
            } else {
                for w in &warnings {
                    println!("warning: {w}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { common, k2, orders } => {
            let outcome = cli::run_oracle(
                &common.config,
                &k2,
                &orders,
                common.out.as_deref(),
                common.threads,
            )?;
            println!("k2_per_nm        fast (re, im)                brute (re, im)               rel_diff");
            for r in &outcome.rows {
                println!(
                    "{:<16.10} ({:+.6e}, {:+.6e}) ({:+.6e}, {:+.6e}) {:.3e}",
                    r.k2_per_nm, r.fast_re, r.fast_im, r.brute_re, r.brute_im, r.rel_diff
                );
            }
            if let Some(path) = &outcome.csv_path {
                println!("wrote {}", path.display());
            }
            if outcome.passed {
                println!(
                    "oracle: PASS (worst relative difference {:.3e})",
                    outcome.worst_rel_diff
                );
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "oracle: FAIL (worst relative difference {:.3e} > {:.0e})",
                    outcome.worst_rel_diff,
                    cli::ORACLE_FAIL_THRESHOLD
                );
                Ok(ExitCode::from(4))
            }
        }
    }
}
