use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use paritysr::experiment::{self, ExperimentConfig};
use paritysr::Error;

#[derive(Parser)]
#[command(name = "paritysr", version, about = "Parity super-resolution experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write CSV tables plus a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output root; runs land in <out>/<mode>/<timestamp>/ unless --flat.
        #[arg(long, env = "PARITYSR_OUT", default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Write files directly into --out.
        #[arg(long)]
        flat: bool,
        /// Override a config key, e.g. `--set repeats=50 --set roc.snr_db=45.9`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List violated config invariants without running.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Sets a dotted key in the JSON tree; the value is parsed as JSON and falls
/// back to a plain string.
fn apply_override(root: &mut Value, arg: &str) -> Result<(), Error> {
    let (key, raw) = arg
        .split_once('=')
        .ok_or_else(|| config_error(arg, "override must look like key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_error(key, format!("`{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one part")
}

fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut tree: Value = serde_json::from_str(&text).map_err(|e| config_error("<config>", e.to_string()))?;
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    if let Some(s) = seed {
        apply_override(&mut tree, &format!("seed={s}"))?;
    }
    experiment::parse_config(&tree.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::FitFailure { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed, flat, overrides } => load(&config, &overrides, seed)
            .and_then(|c| experiment::run(&c, &out, flat))
            .map(|m| {
                println!("{}", m.output_dir.display());
                for f in &m.files {
                    println!("  {f}");
                }
            }),
        Command::Validate { config, overrides } => load(&config, &overrides, None).and_then(|c| {
            let v = experiment::validate(&c);
            if v.is_empty() {
                println!("ok");
                Ok(())
            } else {
                for x in &v {
                    println!("{x}");
                }
                Err(config_error(&v[0].field, format!("{} violation(s)", v.len())))
            }
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
