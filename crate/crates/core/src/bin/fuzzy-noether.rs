use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fuzzy_noether::batch::{
    catalog, catalog_entry, run_config, ProblemConfig, RunError, RunOptions, Stage, EXIT_ERROR,
    EXIT_OK,
};
use fuzzy_noether::noether::DelayedNoetherVariant;

/// Fuzzy variational problems: solve, check invariance, verify Noether
/// conservation.
#[derive(Parser)]
#[command(name = "fuzzy-noether", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline on a config file or a catalog entry.
    Run(RunArgs),
    /// List the built-in problems.
    Catalog,
}

#[derive(Args)]
struct RunArgs {
    /// Problem configuration file.
    #[arg(required_unless_present = "catalog", conflicts_with = "catalog")]
    config: Option<PathBuf>,
    /// Use a built-in problem instead of a file.
    #[arg(long)]
    catalog: Option<String>,
    /// Comma-separated subset of solve,invariance,noether,conservation.
    #[arg(long, value_delimiter = ',')]
    stages: Vec<Stage>,
    /// Fail the run when an invariance slope fit fails.
    #[arg(long)]
    require_invariance: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the number of subintervals.
    #[arg(long, value_name = "N")]
    nodes: Option<usize>,
    /// Override the number of levels.
    #[arg(long, value_name = "M")]
    levels: Option<usize>,
    /// Pair the upper advanced term with zeta_upper in delayed problems.
    #[arg(long)]
    literal_delayed_noether: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_ERROR as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    match cli.command {
        Command::Catalog => {
            for entry in catalog() {
                println!("{:<14} {}", entry.name, entry.description);
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(args) {
            Ok(code) => ExitCode::from(code as u8),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}

fn run(args: RunArgs) -> Result<i32, RunError> {
    let mut options = RunOptions {
        require_invariance: args.require_invariance,
        out: args.out,
        nodes: args.nodes,
        levels: args.levels,
        variant: if args.literal_delayed_noether {
            DelayedNoetherVariant::Literal
        } else {
            DelayedNoetherVariant::Symmetric
        },
        ..RunOptions::default()
    };
    if !args.stages.is_empty() {
        options.stages = args.stages;
    }
    let config = match (&args.config, &args.catalog) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Read {
                path: path.clone(),
                source,
            })?;
            ProblemConfig::parse(&text).map_err(|source| RunError::Config {
                path: path.clone(),
                source,
            })?
        }
        (None, Some(name)) => {
            let entry = catalog_entry(name)
                .ok_or_else(|| RunError::Options(format!("no catalog entry named `{name}`")))?;
            entry.problem()
        }
        (None, None) => unreachable!("clap requires a config or --catalog"),
    };
    if args.dump_config {
        print!("{}", options.effective(&config).dump());
        return Ok(EXIT_OK);
    }
    let report = run_config(&config, &options)?;
    for v in &report.stages {
        let status = if v.passed { "PASS" } else { "FAIL" };
        let counted = if v.counted { "" } else { " (not counted)" };
        println!("{:<13} {status}{counted}  {}", v.stage.name(), v.detail);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "wrote {} to {}",
        report.files.join(", "),
        report.output_dir.display()
    );
    Ok(report.exit_status)
}
