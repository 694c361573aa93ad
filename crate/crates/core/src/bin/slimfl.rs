use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slimfl::experiment::{analyze, run, sweep_analyze, sweep_run, ExperimentConfig};
use slimfl::Error;

#[derive(Parser)]
#[command(name = "slimfl", version, about = "Slimmable federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment and write metrics CSVs and a summary.
    Run { config: PathBuf },
    /// Print the analysis report of a config as JSON.
    Analyze {
        config: PathBuf,
        /// Skip the non-IIDness estimate (no dataset needed).
        #[arg(long)]
        no_delta: bool,
    },
    /// Vary one config parameter over a list of values.
    Sweep {
        /// Base config.
        #[arg(long, default_value = "slimfl.toml")]
        config: PathBuf,
        /// Dotted parameter name, e.g. `channel.power_split`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; commas inside brackets stay with
        /// their array, e.g. `[0.5, 0.5],[0.3, 0.7]`.
        #[arg(long)]
        values: String,
        /// Train at every value instead of only evaluating the analysis.
        #[arg(long)]
        run: bool,
    },
}

fn split_values(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in list.chars() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur.trim().to_string());
    out.retain(|v| !v.is_empty());
    out
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => ExperimentConfig::load(&config).and_then(|cfg| {
            let summary = run(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(())
        }),
        Command::Analyze { config, no_delta } => ExperimentConfig::load(&config).and_then(|cfg| {
            let report = analyze(&cfg, !no_delta)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }),
        Command::Sweep { config, param, values, run } => fs::read_to_string(&config)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", config.display())))
            .and_then(|text| {
                let values = split_values(&values);
                let json = if run {
                    serde_json::to_string_pretty(&sweep_run(&text, &param, &values)?)
                } else {
                    serde_json::to_string_pretty(&sweep_analyze(&text, &param, &values)?)
                };
                println!("{}", json.expect("rows serialize"));
                Ok(())
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
