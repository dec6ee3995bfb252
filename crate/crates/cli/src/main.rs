// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};
use commands::{execute, read_text, Output};
use config::ExperimentConfig;
use error::{CliError, CliResult};
use output::{write_artifact, Invocation};

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fractal: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(argv: Vec<OsString>) -> CliResult<()> {
    let root = Cli::command();
    // help and version exit 0, usage errors exit 2
    let matches = root.clone().try_get_matches_from(argv).unwrap_or_else(|e| e.exit());
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    init_threads(cli.threads.map(|t| t.to_string()).as_deref())?;
    match &cli.command {
        Command::Run(r) => run_config(&r.config),
        command => {
            let inv = Invocation::from_matches(&root, &matches);
            emit(&inv, execute(command)?, None)
        }
    }
}

fn init_threads(threads: Option<&str>) -> CliResult<()> {
    let Some(t) = threads else { return Ok(()) };
    let n: usize = t
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("threads: `{t}` is not a positive integer")))?;
    // a second request keeps the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Writes the files, prints stdout, and turns a failed check into an error.
fn emit(inv: &Invocation, out: Output, stdout_copy: Option<&Path>) -> CliResult<()> {
    for (path, body) in &out.files {
        write_artifact(path, inv, body)?;
    }
    if !out.stdout.is_empty() {
        print!("{}{}", inv.header(), out.stdout);
    }
    if let Some(path) = stdout_copy {
        write_artifact(path, inv, &out.stdout)?;
    }
    match out.failed {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

fn run_config(path: &Path) -> CliResult<()> {
    let cfg = ExperimentConfig::parse(&read_text(path)?)?;
    cfg.check_keys()?;
    let config_dir = std::path::absolute(path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")))
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let root = Cli::command();
    let unknown = |what: &str| CliError::Usage(format!("config: unknown {what}"));
    let mut leaf = root
        .find_subcommand(&cfg.pipeline)
        .ok_or_else(|| unknown(&format!("pipeline `{}`", cfg.pipeline)))?;
    if let Some(op) = &cfg.op {
        leaf = leaf.find_subcommand(op).ok_or_else(|| unknown(&format!("op `{op}`")))?;
    }
    let accepts_out = leaf.get_arguments().any(|a| a.get_id() == "out");
    let ext = match cfg.pipeline.as_str() {
        "family" => "",
        "analyze" if cfg.op.as_deref() != Some("levelset") => ".csv",
        _ => ".txt",
    };
    let argv = cfg.argv(&config_dir, accepts_out, ext);
    let matches = root.clone().try_get_matches_from(argv).map_err(|e| {
        if e.kind() == ErrorKind::UnknownArgument {
            if let Some(ContextValue::String(arg)) = e.get(ContextKind::InvalidArg) {
                let key = arg.trim_start_matches('-').replace('-', "_");
                return CliError::Usage(format!("config {}: unknown key `{key}`", path.display()));
            }
        }
        let msg = e.render().to_string();
        let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
        CliError::Usage(format!("config {}: {first}", path.display()))
    })?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    init_threads(cfg.threads.as_deref())?;
    let inv = Invocation::from_matches(&root, &matches);

    let out_dir = cfg.output_dir_from(&config_dir);
    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let mut resolved = format!("pipeline={}\n", cfg.pipeline);
    if let Some(op) = &cfg.op {
        resolved.push_str(&format!("op={op}\n"));
    }
    resolved.push_str(&format!("output_dir={}\n", out_dir.display()));
    resolved.push_str(&inv.params_text());
    write_artifact(&out_dir.join(format!("{}.config", cfg.stem())), &inv, &resolved)?;
    let result = execute(&cli.command)?;
    emit(&inv, result, Some(&out_dir.join(format!("{}.stdout", cfg.stem()))))
}
