use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photon_echo::harness::{
    compare_files, run_scenario, validate_config, ScenarioConfig, ScenarioKind,
};
use photon_echo::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_COMPARISON: u8 = 3;

#[derive(Parser)]
#[command(
    name = "photon-echo",
    version,
    about = "Photon-echo quantum memory scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs and manifest.
    Run {
        scenario: String,
        /// TOML configuration; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a configuration and print it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare a run report against expected metrics.
    Compare {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// List the built-in scenarios.
    ListScenarios,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::InvalidParameter { .. } => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    validate_config(&text)
}

fn run(
    scenario: &str,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<(), (u8, Error)> {
    let kind = ScenarioKind::parse(scenario).ok_or_else(|| {
        (
            EXIT_VALIDATION,
            Error::Config(vec![format!(
                "unknown scenario `{scenario}`; see `list-scenarios`"
            )]),
        )
    })?;
    let mut cfg = match &config {
        Some(path) => load(path).map_err(|e| {
            let code = match e {
                Error::Io(_) => EXIT_RUNTIME,
                _ => EXIT_VALIDATION,
            };
            (code, e)
        })?,
        None => {
            let text = format!("scenario = \"{}\"", kind.name());
            validate_config(&text).map_err(|e| (EXIT_VALIDATION, e))?
        }
    };
    if cfg.scenario != kind {
        return Err((
            EXIT_VALIDATION,
            Error::Config(vec![format!(
                "scenario: configuration is for `{}`, command asks for `{kind}`",
                cfg.scenario
            )]),
        ));
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let report = run_scenario(&cfg, &out).map_err(|e| (exit_code(&e), e))?;
    println!("scenario {} seed {} -> {}", kind, cfg.seed, out.display());
    for (name, value) in &report.metrics {
        println!("  {name} = {value:.6e}");
    }
    for (name, pass) in &report.checks {
        println!("  check {name}: {}", if *pass { "pass" } else { "FAIL" });
    }
    for note in &report.notes {
        println!("  note: {note}");
    }
    println!("  wall clock {:.2} s", report.wall_clock_s);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            config,
            out,
            seed,
        } => run(&scenario, config, out, seed),
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&cfg).expect("config serializes")
                );
                Ok(())
            }
            Err(e @ Error::Io(_)) => Err((EXIT_RUNTIME, e)),
            Err(e) => Err((EXIT_VALIDATION, e)),
        },
        Command::Compare { report, reference } => match compare_files(&report, &reference) {
            Ok(c) => {
                print!("{}", c.render());
                if c.pass {
                    Ok(())
                } else {
                    return ExitCode::from(EXIT_COMPARISON);
                }
            }
            Err(e) => Err((EXIT_RUNTIME, e)),
        },
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<16} {}", k.name(), k.summary());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
