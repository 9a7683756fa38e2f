//! `qmem`: registry inspection and experiment runs for the quantum memory
//! digital twin. Every run writes its table and a replayable manifest.

mod grid;
mod manifest;
mod show;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmem_core::experiments::{
    log_grid, phase_grid, ComparisonConfig, DetectorParams, FidelityConfig, InputKind, MemoryChoice, MziConfig,
    TokenConfig, TruncationConfig,
};
use qmem_core::memory::TEST_CLASS;

use grid::GridSpec;
use manifest::{read_manifest, read_memory_file, registry_with, run_and_write, Format, MemoryFile, RunConfig};

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unknown memory, incompatible input: exit 2.
    Config(String),
    /// Anything else: exit 1.
    Internal(String),
}

impl From<qmem_core::Error> for Failure {
    fn from(e: qmem_core::Error) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "qmem", version, about = "Digital twin of atomic-ensemble quantum memories")]
struct Cli {
    /// Registry file (same format as the bundled registry) merged over the
    /// builtin entries; a record with class_name = "Test" sets the test memory.
    #[arg(long, global = true, value_name = "PATH")]
    memory_file: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Output {
    /// Data file; defaults to `<subcommand>.<format>`. The manifest is
    /// written next to it as `<stem>.manifest.json`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Output {
    fn path(&self, subcommand: &str) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{subcommand}.{}", self.format.extension())))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the memory registry.
    Registry {
        #[command(subcommand)]
        action: RegistryAction,
    },
    /// Interferometer with a memory in one arm and a phase in the other.
    Mzi {
        #[arg(long, default_value = "Lambda895")]
        memory: String,
        /// Storage time, s.
        #[arg(long, default_value_t = 0.0)]
        storage_time: f64,
        /// `single` or `coherent:<alpha>`.
        #[arg(long, default_value = "single")]
        input: InputKind,
        #[arg(long, default_value_t = 7)]
        trunc: usize,
        /// Number of phases over [0, 2π].
        #[arg(long, default_value_t = 41)]
        phases: usize,
        /// Remove the second beamsplitter.
        #[arg(long)]
        no_recombine: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Single-photon visibility against storage time across memories.
    Compare {
        /// Repeatable; defaults to every registry memory.
        #[arg(long)]
        memory: Vec<String>,
        /// Storage time, s: `value` or `start:stop[:points][:lin|log]`.
        /// Defaults to 0 plus 20 log-spaced points from 1 ns to ten lifetimes.
        #[arg(long)]
        storage_time: Option<GridSpec>,
        #[arg(long, default_value_t = 3)]
        trunc: usize,
        #[arg(long, default_value_t = 9)]
        phases: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Dual-rail quantum token stored in two memories.
    Token {
        #[arg(long, default_value = "Lambda895")]
        memory: String,
        /// Emission probability: `value`, `sweep` (0 to 1, 11 points) or a range.
        #[arg(long, default_value = "1")]
        mu_emission: GridSpec,
        /// Storage time, s: `value`, `sweep` (1 ns to 600 μs, 20 log points) or a range.
        #[arg(long, default_value = "0")]
        storage_time: GridSpec,
        #[arg(long, default_value_t = 3)]
        trunc: usize,
        /// Detector efficiency.
        #[arg(long, default_value_t = DetectorParams::default().kappa)]
        detector_efficiency: f64,
        /// Detector thermal photon number.
        #[arg(long, default_value_t = DetectorParams::default().n_bar_b)]
        detector_noise: f64,
        /// Time added to the storage time for the retrigger check, s.
        #[arg(long, default_value_t = 0.0)]
        overhead: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Late-bin mean photon number against truncation.
    Truncation {
        #[arg(long, default_value = "Lambda895")]
        memory: String,
        #[arg(long, default_value = "coherent:1")]
        input: InputKind,
        /// Truncations 1..=N are swept.
        #[arg(long, default_value_t = 10)]
        max_trunc: usize,
        #[arg(long, default_value_t = 0.0)]
        storage_time: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Fidelity against efficiency, noise, and across the registry.
    Fidelity {
        #[arg(long, default_value_t = FidelityConfig::default().alpha)]
        alpha: f64,
        #[arg(long, default_value_t = FidelityConfig::default().truncation)]
        trunc: usize,
        /// Grid size of the efficiency and noise sweeps.
        #[arg(long, default_value_t = FidelityConfig::default().points)]
        points: usize,
        /// Late-bin transmissivity for the noise sweep.
        #[arg(long, default_value_t = FidelityConfig::default().kappa)]
        kappa: f64,
        /// Upper end of the noise sweep's thermal photon number.
        #[arg(long, default_value_t = FidelityConfig::default().n_bar_max)]
        n_bar_max: f64,
        /// Storage time of the registry study, s.
        #[arg(long, default_value_t = 0.0)]
        storage_time: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Re-run the experiment recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Write the data here instead of the manifest's recorded path.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RegistryAction {
    /// Print every class name.
    List,
    /// Print every field of one memory, with units.
    Show { class: String },
}

/// Resolves a memory name; a test memory gets its parameters written out so
/// the manifest stands alone.
fn choose(name: &str, memory_file: Option<&MemoryFile>) -> Result<MemoryChoice, Failure> {
    let registry = registry_with(memory_file)?;
    Ok(MemoryChoice::named(name).materialized(&registry)?)
}

fn registry_command(action: RegistryAction, memory_file: Option<&MemoryFile>) -> Result<(), Failure> {
    let registry = registry_with(memory_file)?;
    match action {
        RegistryAction::List => {
            for name in registry.names() {
                println!("{name}");
            }
            if registry.test_params().is_some() {
                println!("{TEST_CLASS}");
            }
        }
        RegistryAction::Show { class } => {
            if class == TEST_CLASS {
                if let Some(p) = registry.test_params() {
                    print!("{}", show::test_table(p));
                    return Ok(());
                }
            }
            print!("{}", show::spec_table(registry.lookup(&class)?));
        }
    }
    Ok(())
}

fn experiment(command: Command, memory_file: Option<&MemoryFile>) -> Result<(RunConfig, Format, PathBuf), Failure> {
    let (run, output) = match command {
        Command::Mzi {
            memory,
            storage_time,
            input,
            trunc,
            phases,
            no_recombine,
            output,
        } => {
            let cfg = MziConfig {
                storage_time,
                phases: phase_grid(phases),
                recombine: !no_recombine,
                ..MziConfig::new(input, choose(&memory, memory_file)?, trunc)
            };
            (RunConfig::Mzi(cfg), output)
        }
        Command::Compare {
            memory,
            storage_time,
            trunc,
            phases,
            output,
        } => {
            let registry = registry_with(memory_file)?;
            let mut cfg = ComparisonConfig::registry_wide(&registry);
            if !memory.is_empty() {
                cfg.memories = memory
                    .iter()
                    .map(|m| choose(m, memory_file))
                    .collect::<Result<_, _>>()?;
            }
            if let Some(spec) = storage_time {
                cfg.storage_times = spec.resolve(Vec::new);
            }
            cfg.truncation = trunc;
            cfg.phases = phases;
            (RunConfig::Compare(cfg), output)
        }
        Command::Token {
            memory,
            mu_emission,
            storage_time,
            trunc,
            detector_efficiency,
            detector_noise,
            overhead,
            output,
        } => {
            let cfg = TokenConfig {
                mu_emissions: mu_emission.resolve(|| qmem_core::experiments::lin_grid(0.0, 1.0, 11)),
                storage_times: storage_time.resolve(|| log_grid(1e-9, 6e-4, 20).expect("fixed positive range")),
                truncation: trunc,
                detector: DetectorParams {
                    kappa: detector_efficiency,
                    n_bar_b: detector_noise,
                },
                overhead,
                ..TokenConfig::new(choose(&memory, memory_file)?)
            };
            (RunConfig::Token(cfg), output)
        }
        Command::Truncation {
            memory,
            input,
            max_trunc,
            storage_time,
            output,
        } => {
            let cfg = TruncationConfig {
                memory: choose(&memory, memory_file)?,
                input,
                truncations: (1..=max_trunc).collect(),
                storage_time,
            };
            (RunConfig::Truncation(cfg), output)
        }
        Command::Fidelity {
            alpha,
            trunc,
            points,
            kappa,
            n_bar_max,
            storage_time,
            output,
        } => {
            let cfg = FidelityConfig {
                alpha,
                truncation: trunc,
                points,
                kappa,
                n_bar_max,
                storage_time,
            };
            (RunConfig::Fidelity(cfg), output)
        }
        Command::Registry { .. } | Command::Replay { .. } => unreachable!("handled before dispatch"),
    };
    let path = output.path(run.name());
    Ok((run, output.format, path))
}

fn report(manifest: &manifest::RunManifest) {
    eprintln!("wrote {} and {}", manifest.outputs.data, manifest.outputs.manifest);
}

fn run(cli: Cli) -> Result<(), Failure> {
    let memory_file = cli.memory_file.as_deref().map(read_memory_file).transpose()?;
    match cli.command {
        Command::Registry { action } => registry_command(action, memory_file.as_ref()),
        Command::Replay { manifest, out } => {
            let recorded = read_manifest(&manifest)?;
            let data = out.unwrap_or_else(|| PathBuf::from(&recorded.outputs.data));
            // a memory file given now takes precedence over the recorded one
            let file = memory_file.or(recorded.memory_file);
            report(&run_and_write(recorded.run, recorded.format, file, Path::new(&data))?);
            Ok(())
        }
        command => {
            let (run, format, data) = experiment(command, memory_file.as_ref())?;
            report(&run_and_write(run, format, memory_file, &data)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
