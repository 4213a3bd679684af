use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hermitize_core::acceptance::{run_acceptance, AcceptanceOptions, DEFAULT_SEED};
use hermitize_core::flow::Scheme;
use hermitize_cli::config::{load, OutputFormat};
use hermitize_cli::report::{emit, render};
use hermitize_cli::scenario::run_scenario;
use hermitize_cli::sweep::{render_summary, run_sweep};
use hermitize_cli::CliError;

/// Hermitize non-Hermitian Hamiltonians through vielbein frames.
#[derive(Parser)]
#[command(name = "hermitize", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// JSON scenario file; a built-in two-level scenario is used without it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set model.gamma=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write one diagnostic record per grid node.
    Run {
        #[command(flatten)]
        args: ConfigArgs,
        /// Diagnostic file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the scenario once per value of a model parameter.
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        /// Model parameter, e.g. `gamma` or `model.g`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Summary file; stdout when absent. Per-value diagnostics go to
        /// numbered siblings of the config's `output` key when it is set.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Check {
        /// Report file (CSV or JSON).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long, default_value_t = DEFAULT_SEED, hide = true)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Rk4, hide = true)]
        scheme: SchemeArg,
        #[arg(long, hide = true)]
        no_projection: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Rk4,
    Euler,
}

fn with_flags(args: &ConfigArgs, output: Option<&PathBuf>) -> Vec<String> {
    let mut set = args.set.clone();
    if let Some(f) = args.format {
        set.push(format!("format={}", f.to_possible_value().expect("named").get_name()));
    }
    if let Some(o) = output {
        set.push(format!("output={}", serde_json::Value::from(o.to_string_lossy().into_owned())));
    }
    set
}

fn run(args: ConfigArgs, output: Option<PathBuf>) -> Result<ExitCode, CliError> {
    let (config, _) = load(args.config.as_deref(), &with_flags(&args, output.as_ref()))?;
    let out = run_scenario(&config)?;
    emit(&render(&config, &out, config.format), config.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: ConfigArgs, axis: String, values: Vec<f64>, output: Option<PathBuf>) -> Result<ExitCode, CliError> {
    let (config, doc) = load(args.config.as_deref(), &with_flags(&args, None))?;
    let rows = run_sweep(&doc, &axis, &values)?;
    emit(&render_summary(&axis, &rows, config.format), output.as_deref())?;
    for r in rows.iter().filter(|r| !r.ok()) {
        eprintln!("hermitize: sweep value {} failed: {}", r.value, r.message);
    }
    Ok(if rows.iter().all(|r| r.ok()) { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn check(output: Option<PathBuf>, format: OutputFormat, opts: AcceptanceOptions) -> Result<ExitCode, CliError> {
    let report = run_acceptance(&opts);
    print!("{}", report.table());
    if let Some(path) = output {
        let text = match format {
            OutputFormat::Csv => report.to_csv(),
            OutputFormat::Json => {
                let rows: Vec<_> = report
                    .results
                    .iter()
                    .map(|r| {
                        serde_json::json!({
                            "id": r.id, "name": r.name, "passed": r.passed,
                            "measured": r.measured, "tolerance": r.tolerance, "detail": r.detail,
                        })
                    })
                    .collect();
                serde_json::to_string_pretty(&serde_json::json!({ "results": rows })).expect("finite") + "\n"
            }
        };
        emit(&text, Some(&path))?;
    }
    let failed: Vec<u8> = report.results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("all {} criteria pass", report.results.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("hermitize: acceptance criteria failed: {failed:?}");
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { args, output } => run(args, output),
        Command::Sweep { args, axis, values, output } => sweep(args, axis, values, output),
        Command::Check { output, format, seed, scheme, no_projection } => {
            let scheme = match scheme {
                SchemeArg::Rk4 => Scheme::Rk4,
                SchemeArg::Euler => Scheme::Euler,
            };
            check(output, format, AcceptanceOptions { seed, scheme, project: !no_projection })
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("hermitize: {e}");
        ExitCode::from(e.exit_code() as u8)
    })
}
