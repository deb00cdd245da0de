use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cli::{AxisSpec, CliError, ParamValue, ScenarioConfig};

/// Reproducible closed-timelike-curve experiments with JSON/CSV output.
#[derive(Parser)]
#[command(name = "ctclab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Scenario name (see `list`)
    scenario: String,
    /// Parameter override, repeatable: --set key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Flat key = value config file; command-line flags win
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for stochastic scenarios
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for JSON/CSV artifacts
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its JSON result
    Run(CommonOpts),
    /// Run a scenario across a numeric axis and print the merged CSV
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Axis specification: key=lo:hi:step (omit for a single run)
        #[arg(long, value_name = "KEY=LO:HI:STEP")]
        axis: Option<String>,
    },
    /// Print the scenario registry
    List,
}

fn parse_sets(raw: &[String]) -> Result<BTreeMap<String, ParamValue>, CliError> {
    let mut map = BTreeMap::new();
    for item in raw {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            CliError::InvalidConfig(format!("--set expects key=value, got '{item}'"))
        })?;
        map.insert(key.trim().to_string(), ParamValue::parse(value.trim()));
    }
    Ok(map)
}

fn build_config(common: &CommonOpts) -> Result<ScenarioConfig, CliError> {
    let mut overrides = BTreeMap::new();
    if let Some(path) = &common.config {
        let contents = std::fs::read_to_string(path)?;
        overrides.extend(cli::parse_config_file(&contents)?);
    }
    // command-line flags win over the config file
    overrides.extend(parse_sets(&common.set)?);
    Ok(ScenarioConfig {
        scenario: common.scenario.clone(),
        overrides,
        seed: common.seed,
        out_dir: common.out.clone(),
    })
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Run(common) => {
            let result = cli::run(&build_config(common)?)?;
            println!("{}", result.to_json_string());
        }
        Command::Sweep { common, axis } => {
            let config = build_config(common)?;
            let axis = axis.as_deref().map(AxisSpec::parse).transpose()?;
            let output = cli::sweep(&config, axis.as_ref())?;
            print!("{}", output.csv);
        }
        Command::List => {
            for spec in cli::registry() {
                println!("{:<16} {}", spec.name, spec.summary);
                for p in &spec.params {
                    let default = match &p.default {
                        ParamValue::Real(f) => f.to_string(),
                        ParamValue::Int(i) => i.to_string(),
                        ParamValue::Text(s) => s.clone(),
                    };
                    println!("    {:<12} {} (default {})", p.key, p.help, default);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(&args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
