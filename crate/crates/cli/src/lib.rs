//! `pebblemark` command-line driver.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod plot;

use std::io::Write;
use std::path::Path;

use clap::Parser;
use pebblemark::Seed;

pub use args::Cli;
pub use commands::{execute, report_text, CliError, Outcome};
pub use manifest::ExperimentManifest;
pub use plot::{plot_emit, PlotKind};

use manifest::{sha256_hex, TOOL, VERSION};

pub const SEED_ENV: &str = "PEBBLEMARK_SEED";

/// Flag, then environment, then a fresh random seed (`true` when generated).
pub fn resolve_seed(flag: Option<&str>, env: Option<&str>) -> Result<(Seed, bool), String> {
    match flag.or(env) {
        Some(s) => s.parse().map(|seed| (seed, false)).map_err(|e| format!("{e}")),
        None => Ok((Seed(rand::random()), true)),
    }
}

/// Parses `argv` (program name first) and computes the outcome without
/// writing anything.
pub fn dispatch(argv: &[String], env_seed: Option<&str>) -> Result<(Cli, Seed, bool, Outcome), CliError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    let (seed, generated) = if matches!(cli.command, args::Command::Repro { .. }) {
        (Seed::default(), false)
    } else {
        resolve_seed(cli.seed.as_deref(), env_seed).map_err(CliError::Usage)?
    };
    let out = match cli.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| execute(&cli, seed))?,
        None => execute(&cli, seed)?,
    };
    Ok((cli, seed, generated, out))
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), String> {
    std::fs::write(path, content).map_err(|e| format!("{}: {e}", path.display()))
}

/// Full run: parse, compute, write artifacts, report and manifest. Returns
/// the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    let (cli, seed, generated, out) = match dispatch(&argv, env_seed.as_deref()) {
        Ok(v) => v,
        Err(CliError::Usage(m)) => {
            // clap errors already carry their own formatting and help hint
            match Cli::try_parse_from(&argv) {
                Err(e) => {
                    let code = if e.use_stderr() { 2 } else { 0 };
                    let _ = e.print();
                    return code;
                }
                Ok(_) => {
                    eprintln!("error: {m}");
                    return 2;
                }
            }
        }
        Err(CliError::Contract(m)) => {
            eprintln!("error: {m}");
            return 1;
        }
    };
    if generated {
        eprintln!("seed: {}", seed.to_hex());
    }
    if let Err(m) = write_outputs(&cli, &argv, seed, &out) {
        eprintln!("error: {m}");
        return 1;
    }
    out.exit
}

fn write_outputs(cli: &Cli, argv: &[String], seed: Seed, out: &Outcome) -> Result<(), String> {
    let mut outputs: Vec<&Path> = out.artifacts.iter().filter_map(|a| a.path.as_deref()).collect();
    outputs.extend(cli.report.as_deref());
    outputs.extend(cli.manifest.as_deref());
    for o in &outputs {
        if out.inputs.keys().any(|i| same_file(Path::new(i), o)) {
            return Err(format!("refusing to overwrite input file {}", o.display()));
        }
    }
    let report = report_text(&out.report);
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let mut stdout_taken = false;
    for a in &out.artifacts {
        match &a.path {
            Some(p) => write_file(p, &a.content)?,
            None => {
                stdout_taken = true;
                let _ = lock.write_all(a.content.as_bytes());
            }
        }
    }
    if cli.json {
        let _ = lock.write_all(report.as_bytes());
    } else if !stdout_taken && !out.summary.is_empty() {
        let _ = writeln!(lock, "{}", out.summary);
    }
    if let Some(p) = &cli.report {
        write_file(p, &report)?;
    }
    if let Some(p) = &cli.manifest {
        let mut args: Vec<String> = argv[1..].to_vec();
        if cli.seed.is_none() {
            args.push("--seed".into());
            args.push(seed.to_hex());
        }
        let m = ExperimentManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: out.command.clone(),
            argv: args,
            seed: seed.to_hex(),
            inputs: out.inputs.clone(),
            report_sha256: sha256_hex(report.as_bytes()),
            artifacts: out.artifacts.iter().map(|a| (a.role.clone(), sha256_hex(a.content.as_bytes()))).collect(),
        };
        write_file(p, &m.to_json())?;
    }
    Ok(())
}
