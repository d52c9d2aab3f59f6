//! `fmkernel run <scenario>` and `fmkernel verify <suite>`.
//!
//! Exit codes: 0 all verdicts pass, 1 any failure, 2 hypothesis violations
//! only, 3 input error.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use fmkernel::cli::{parse_scenario, run_tasks, suite_scenario, Format, Scenario, SuiteParams};
use fmkernel::slices::TruncationBox;
use std::process::ExitCode;

const INPUT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fmkernel",
    version,
    about = "Slice-by-slice verification of wall-crossing kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a scenario file.
    Run {
        /// Path to a TOML scenario file.
        scenario: String,
    },
    /// Run a canned suite: mukai, twopoints, qnotasheaf or affine-base.
    Verify {
        /// Suite name.
        suite: String,
        /// Rank of the Mukai datum.
        #[arg(long, default_value_t = 2)]
        l: usize,
    },
}

#[derive(Args)]
struct Options {
    /// Exponent budget E.
    #[arg(long, global = true)]
    budget: Option<u32>,
    /// Lowest homological degree.
    #[arg(long, global = true, allow_negative_numbers = true)]
    hmin: Option<i64>,
    /// Internal degree range, `LO..HI`.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_range)]
    degrees: Option<(i64, i64)>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report format: `text` or `structured` (JSON lines).
    #[arg(long, global = true, value_parser = |s: &str| s.parse::<Format>())]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound `{hi}`"))?;
    Ok((lo, hi))
}

fn apply(opts: &Options, s: &mut Scenario) -> Result<(), String> {
    let t = &s.truncation;
    let range = opts.degrees.unwrap_or(t.degree_range[0]);
    s.truncation = TruncationBox::new(
        opts.budget.unwrap_or(t.budget),
        opts.hmin.unwrap_or(t.hmin),
        vec![range],
    )
    .map_err(|e| e.to_string())?;
    if let Some(f) = opts.format {
        s.output.format = f;
    }
    if let Some(o) = &opts.out {
        s.output.path = Some(o.clone());
    }
    Ok(())
}

fn load(cli: &Cli) -> Result<Scenario, String> {
    let mut s = match &cli.command {
        Command::Run { scenario } => {
            let text = std::fs::read_to_string(scenario).map_err(|e| format!("{scenario}: {e}"))?;
            parse_scenario(&text).map_err(|e| format!("{scenario}: {e}"))?
        }
        Command::Verify { suite, l } => {
            if suite == "mukai" && *l == 0 {
                return Err(
                    "--l must be at least 1: the rank-0 datum has no positive variables".into(),
                );
            }
            suite_scenario(
                suite,
                &SuiteParams {
                    l: *l,
                    ..SuiteParams::default()
                },
            )
            .map_err(|e| e.to_string())?
        }
    };
    apply(&cli.opts, &mut s)?;
    Ok(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(INPUT_ERROR),
            };
        }
    };
    if let Some(n) = cli.opts.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    }
    let scenario = match load(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let report = run_tasks(&scenario);
    let text = report.render(scenario.output.format);
    match &scenario.output.path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: {path}: {e}");
                return ExitCode::from(INPUT_ERROR);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
