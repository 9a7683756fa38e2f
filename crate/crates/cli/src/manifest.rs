use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qmem_core::experiments::{
    run_fidelity_sweep, run_mzi, run_mzi_memory_comparison, run_token, run_truncation_sweep, to_csv, to_json,
    ComparisonConfig, ExperimentRecord, FidelityConfig, MziConfig, TokenConfig, TruncationConfig, TAIL_WARNING,
};
use qmem_core::memory::Registry;

use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Fully resolved settings of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "config", rename_all = "lowercase")]
pub enum RunConfig {
    Mzi(MziConfig),
    Compare(ComparisonConfig),
    Token(TokenConfig),
    Truncation(TruncationConfig),
    Fidelity(FidelityConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Mzi(_) => "mzi",
            RunConfig::Compare(_) => "compare",
            RunConfig::Token(_) => "token",
            RunConfig::Truncation(_) => "truncation",
            RunConfig::Fidelity(_) => "fidelity",
        }
    }

    /// Runs the experiment and returns its table.
    pub fn execute(&self, registry: &Registry) -> Result<Vec<ExperimentRecord>, Failure> {
        Ok(match self {
            RunConfig::Mzi(cfg) => {
                let run = run_mzi(cfg, registry)?;
                if run.truncation_warning() {
                    eprintln!(
                        "warning: coherent input loses {:.3e} of its norm at truncation {} (threshold {TAIL_WARNING:e}); \
                         raise --trunc for a closer match",
                        run.input_tail_mass, cfg.truncation
                    );
                }
                run.records()
            }
            RunConfig::Compare(cfg) => run_mzi_memory_comparison(cfg, registry)?
                .iter()
                .map(|p| p.record())
                .collect(),
            RunConfig::Token(cfg) => run_token(cfg, registry)?.iter().map(|p| p.record()).collect(),
            RunConfig::Truncation(cfg) => run_truncation_sweep(cfg, registry)?.records(),
            RunConfig::Fidelity(cfg) => run_fidelity_sweep(cfg, registry)?.records(),
        })
    }
}

/// Registry file supplied with `--memory-file`, kept verbatim so a replay
/// does not depend on the file still existing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryFile {
    pub path: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub data: String,
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(flatten)]
    pub run: RunConfig,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_file: Option<MemoryFile>,
    pub outputs: Outputs,
}

/// Manifest location for a data file: `out.csv` → `out.manifest.json`.
pub fn manifest_path(data: &Path) -> PathBuf {
    data.with_extension("manifest.json")
}

/// Builtin registry extended by an optional memory file.
pub fn registry_with(file: Option<&MemoryFile>) -> Result<Registry, Failure> {
    let mut reg = Registry::builtin();
    if let Some(f) = file {
        reg.merge(Registry::from_toml_str(&f.content)?);
    }
    Ok(reg)
}

pub fn read_memory_file(path: &Path) -> Result<MemoryFile, Failure> {
    let content = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read memory file {}: {e}", path.display())))?;
    Ok(MemoryFile {
        path: path.display().to_string(),
        content,
    })
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("invalid manifest {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Internal(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

/// Runs `run`, writes the table to `data` and the manifest next to it.
pub fn run_and_write(
    run: RunConfig,
    format: Format,
    memory_file: Option<MemoryFile>,
    data: &Path,
) -> Result<RunManifest, Failure> {
    let registry = registry_with(memory_file.as_ref())?;
    let records = run.execute(&registry)?;
    let table = match format {
        Format::Csv => to_csv(&records)?,
        Format::Json => to_json(&records)?,
    };
    let manifest_file = manifest_path(data);
    let manifest = RunManifest {
        version: VERSION.into(),
        run,
        format,
        memory_file,
        outputs: Outputs {
            data: data.display().to_string(),
            manifest: manifest_file.display().to_string(),
        },
    };
    write(data, &table)?;
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    write(&manifest_file, &text)?;
    Ok(manifest)
}
