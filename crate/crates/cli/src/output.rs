//! Parameter hashing and artifact headers.

use std::fs;
use std::path::Path;

use clap::{ArgMatches, Command as ClapCommand};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// The leaf operation of a parsed command line and its resolved arguments,
/// defaults included.
#[derive(Clone, Debug, PartialEq)]
pub struct Invocation {
    /// Subcommand path, e.g. `["construct", "spray"]`.
    pub path: Vec<String>,
    /// Sorted `(id, value)` pairs; list values are comma-joined.
    pub params: Vec<(String, String)>,
}

impl Invocation {
    pub fn from_matches(root: &ClapCommand, matches: &ArgMatches) -> Self {
        let (mut cmd, mut m) = (root, matches);
        let mut path = Vec::new();
        while let Some((name, sub)) = m.subcommand() {
            path.push(name.to_string());
            cmd = cmd.find_subcommand(name).expect("parsed subcommand exists");
            m = sub;
        }
        let mut params: Vec<(String, String)> = cmd
            .get_arguments()
            .filter(|a| !a.is_global_set() && !matches!(a.get_id().as_str(), "help" | "version" | "threads"))
            .filter_map(|a| {
                let id = a.get_id().as_str();
                let raw = m.get_raw(id)?;
                let value: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
                Some((id.to_string(), value.join(",")))
            })
            .collect();
        params.sort();
        Invocation { path, params }
    }

    /// `construct.spray`
    pub fn op(&self) -> String {
        self.path.join(".")
    }

    /// `key=value` lines in key order.
    pub fn params_text(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.op().as_bytes());
        h.update(b"\n");
        h.update(self.params_text().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn header(&self) -> String {
        format!("# op={} params={}\n", self.op(), self.hash())
    }
}

/// Writes `body` under the invocation header, creating parent directories.
pub fn write_artifact(path: &Path, inv: &Invocation, body: &str) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, format!("{}{body}", inv.header())).map_err(io)
}
