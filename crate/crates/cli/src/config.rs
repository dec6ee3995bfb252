//! Experiment configs: flat `key=value` files naming one pipeline.
//!
//! `pipeline` picks the command and `op` the subcommand where one is needed.
//! `output_dir` receives every artifact: the pipeline's files, its stdout and
//! the resolved config. Remaining keys are the command's flags with `-`
//! spelled `_`. Relative input paths resolve against the config file's
//! directory, relative output paths against `output_dir`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub const NESTED: &[&str] = &["ifs", "construct", "analyze", "dist"];
const RESERVED: &[&str] = &["pipeline", "op", "output_dir", "threads"];
const INPUT_KEYS: &[&str] = &["set", "k", "e", "mu", "nu", "mu0", "system", "curve"];
const OUTPUT_KEYS: &[&str] = &["out", "cover"];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub pipeline: String,
    pub op: Option<String>,
    pub output_dir: PathBuf,
    pub threads: Option<String>,
    /// Flag keys in `_` spelling.
    pub flags: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", idx + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if entries.insert(k.clone(), v).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key `{k}`", idx + 1)));
            }
        }
        let mut take = |k: &str| entries.remove(k);
        let pipeline = take("pipeline").ok_or_else(|| CliError::Usage("config: missing `pipeline`".into()))?;
        let op = take("op");
        let output_dir = take("output_dir")
            .map(PathBuf::from)
            .ok_or_else(|| CliError::Usage("config: missing `output_dir`".into()))?;
        let threads = take("threads");
        if pipeline == "run" {
            return Err(CliError::Usage("config: pipeline `run` cannot be nested".into()));
        }
        match (NESTED.contains(&pipeline.as_str()), &op) {
            (true, None) => return Err(CliError::Usage(format!("config: pipeline `{pipeline}` needs `op`"))),
            (false, Some(_)) => return Err(CliError::Usage(format!("config: pipeline `{pipeline}` takes no `op`"))),
            _ => {}
        }
        Ok(ExperimentConfig {
            pipeline,
            op,
            output_dir,
            threads,
            flags: entries,
        })
    }

    /// Artifact stem, e.g. `construct_spray`.
    pub fn stem(&self) -> String {
        match &self.op {
            Some(op) => format!("{}_{op}", self.pipeline),
            None => self.pipeline.clone(),
        }
    }

    /// The output directory as seen from the working directory.
    pub fn output_dir_from(&self, config_dir: &Path) -> PathBuf {
        config_dir.join(&self.output_dir)
    }

    /// Command line for the pipeline. `accepts_out` tells whether the leaf
    /// command has an `--out` flag, which then defaults into the output
    /// directory.
    pub fn argv(&self, config_dir: &Path, accepts_out: bool, out_ext: &str) -> Vec<OsString> {
        let out_dir = self.output_dir_from(config_dir);
        let mut argv: Vec<OsString> = vec!["fractal".into()];
        if let Some(t) = &self.threads {
            argv.extend(["--threads".into(), t.into()]);
        }
        argv.push(self.pipeline.clone().into());
        if let Some(op) = &self.op {
            argv.push(op.clone().into());
        }
        for (k, v) in &self.flags {
            argv.push(format!("--{}", k.replace('_', "-")).into());
            argv.push(if INPUT_KEYS.contains(&k.as_str()) {
                config_dir.join(v).into_os_string()
            } else if k == "measures" {
                v.split(',')
                    .map(|p| config_dir.join(p.trim()).to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join(",")
                    .into()
            } else if OUTPUT_KEYS.contains(&k.as_str()) {
                out_dir.join(v).into_os_string()
            } else {
                v.into()
            });
        }
        if accepts_out && !self.flags.contains_key("out") {
            argv.push("--out".into());
            argv.push(out_dir.join(format!("{}{out_ext}", self.stem())).into_os_string());
        }
        argv
    }

    /// Rejects keys that collide with the reserved ones once spelled as flags.
    pub fn check_keys(&self) -> CliResult<()> {
        match self.flags.keys().find(|k| RESERVED.contains(&k.as_str()) || k.contains('-')) {
            Some(k) => Err(CliError::Usage(format!("config: unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}
