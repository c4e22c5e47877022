use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// One output file, held in memory until the run succeeds.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn text(name: &str, contents: String) -> Self {
        Self {
            name: name.to_string(),
            contents,
        }
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self, CliError> {
        let mut contents = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("cannot serialize {name}: {e}")))?;
        contents.push('\n');
        Ok(Self::text(name, contents))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<String>,
    pub output_directory: String,
    pub tool_version: String,
    pub config_digest: String,
    pub overrides: BTreeMap<String, String>,
    pub files: Vec<String>,
    pub timestamp: String,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn config_digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

impl RunManifest {
    pub fn new(subcommand: &str, config_path: Option<&Path>, out: &Path, config_text: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            output_directory: out.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: config_digest(config_text),
            overrides: BTreeMap::new(),
            files: Vec::new(),
            timestamp: String::new(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes the artifacts and the manifest into `out`. Each file goes through
/// a temporary name and a rename, so readers never see a half-written file.
pub fn write_run(out: &Path, mut manifest: RunManifest, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    for a in artifacts {
        let p = Path::new(&a.name);
        if p.components().count() != 1 || p.is_absolute() || a.name.starts_with('.') {
            return Err(CliError::Config(format!("refusing to write '{}' outside the output directory", a.name)));
        }
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    manifest.files = artifacts.iter().map(|a| a.name.clone()).collect();
    manifest.timestamp = humantime::format_rfc3339_seconds(SystemTime::now()).to_string();
    let manifest = Artifact::json(MANIFEST_NAME, &manifest)?;
    let mut written = Vec::new();
    for a in artifacts.iter().chain(std::iter::once(&manifest)) {
        let target = out.join(&a.name);
        let tmp = out.join(format!(".{}.tmp", a.name));
        fs::write(&tmp, &a.contents).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &target).map_err(io_err(&target))?;
        written.push(target);
    }
    Ok(written)
}

/// CSV number format: 16 significant digits, exponent notation.
pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let line: Vec<String> = row.into_iter().map(num).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}
