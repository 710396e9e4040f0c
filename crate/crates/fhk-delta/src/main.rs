use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fhk_delta::cli::{
    cmd_converge, cmd_divide, cmd_integrate, cmd_validate, CmdOutput, OutputFormat, RunOptions,
};

/// Fuzzy Henstock-Kurzweil delta integrals on time scales.
#[derive(Parser)]
#[command(name = "fhk-delta", version, about)]
struct Cli {
    /// Cauchy tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Membership level count override.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Refinement round budget override.
    #[arg(long, global = true)]
    max_rounds: Option<u32>,
    /// Report format for experiments (converge defaults to csv, other
    /// commands to json).
    #[arg(long, global = true, value_enum)]
    output: Option<OutputArg>,
    /// Worker count for per-cell table evaluation (1 = sequential;
    /// results are identical either way).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seed override for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit with code 2 when an experiment hypothesis fails.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scene's function over its bounds.
    Integrate {
        /// Scene file path, or `-` for standard input.
        config: String,
    },
    /// Print the fine tagged division the scan builds.
    Divide {
        config: String,
        /// Uniform gauge base width.
        #[arg(long)]
        gauge: f64,
    },
    /// Run a sequence-convergence experiment.
    Converge {
        config: String,
        /// Family: power_scaled, shrinking_spread, constant,
        /// monotone_power, or dominated_power.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 9)]
        n_max: usize,
    },
    /// Check the stacking conditions of a fuzzy number file.
    Validate {
        /// Fuzzy number file path, or `-` for standard input.
        path: String,
    },
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        tol: cli.tol,
        levels: cli.levels,
        max_rounds: cli.max_rounds,
        output: cli.output.map(|o| match o {
            OutputArg::Json => OutputFormat::Json,
            OutputArg::Csv => OutputFormat::Csv,
        }),
        threads: cli.threads,
        seed: cli.seed,
        strict: cli.strict,
    };
    let with_input = |path: &str, run: &dyn Fn(&str) -> CmdOutput| match read_input(path) {
        Ok(text) => run(&text),
        Err(e) => CmdOutput {
            stdout: String::new(),
            stderr: format!("error: cannot read `{path}`: {e}\n"),
            code: 1,
        },
    };
    let out = match &cli.command {
        Command::Integrate { config } => with_input(config, &|text| cmd_integrate(text, &opts)),
        Command::Divide { config, gauge } => {
            with_input(config, &|text| cmd_divide(text, *gauge, &opts))
        }
        Command::Converge {
            config,
            family,
            n_max,
        } => with_input(config, &|text| cmd_converge(text, family, *n_max, &opts)),
        Command::Validate { path } => with_input(path, &|text| cmd_validate(text, &opts)),
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
