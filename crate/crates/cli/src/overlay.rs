//! Config resolution: compiled defaults under config-file keys under
//! command-line flags.
//!
//! Flags never merge with file values; each present flag replaces its
//! config key outright before the map is read. A single `--seed` replaces
//! every `seed.*` key through tagged derivation, so one number pins every
//! random stream of a run.

use crate::fail::{CliResult, Failure};
use gldpc_core::config::ConfigMap;
use gldpc_core::harness::{BaseSource, ComponentSource, ExperimentConfig};
use gldpc_core::seeds::{derive, domain};
use std::path::{Path, PathBuf};

/// Flags every subcommand accepts.
#[derive(Debug, clap::Args)]
pub struct Common {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Master seed; replaces all seed.* keys via tagged derivation.
    #[arg(long, global = true, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Output directory (config key `output_dir`, default "runs").
    #[arg(long, global = true, env = "GLDPC_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Log per-chunk and per-phase progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

/// Code-selection flags shared by construct, train, and sweep. Each flag
/// overrides the config key of the same meaning.
#[derive(Debug, clap::Args)]
pub struct CodeFlags {
    /// Variable-node degree of a generated regular base graph.
    #[arg(long, value_name = "GAMMA")]
    pub gamma: Option<usize>,

    /// Check-node degree of the base graph.
    #[arg(long, value_name = "P")]
    pub p: Option<usize>,

    /// Number of variable nodes.
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,

    /// Base graph from an alist file instead of seeded generation.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["gamma", "p", "n"])]
    pub alist: Option<PathBuf>,

    /// Fraction of check nodes generalized to component constraints.
    #[arg(long, value_name = "MU", conflicts_with = "zeta")]
    pub mu: Option<f64>,

    /// Explicit generalized row indices, space-separated.
    #[arg(long, value_name = "LIST")]
    pub zeta: Option<String>,

    /// Component code: a built-in name, or a path to a component file.
    #[arg(long, value_name = "NAME|FILE")]
    pub component: Option<String>,
}

/// Turns present code flags into config-key overrides.
pub fn code_overrides(flags: &CodeFlags) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if let Some(gamma) = flags.gamma {
        out.push(("base.gamma", gamma.to_string()));
    }
    if let Some(p) = flags.p {
        out.push(("base.p", p.to_string()));
    }
    if let Some(n) = flags.n {
        out.push(("base.n", n.to_string()));
    }
    if let Some(path) = &flags.alist {
        out.push(("base.alist", path.display().to_string()));
    }
    if let Some(mu) = flags.mu {
        out.push(("mu", mu.to_string()));
    }
    if let Some(zeta) = &flags.zeta {
        out.push(("zeta", zeta.clone()));
    }
    if let Some(component) = &flags.component {
        out.push(component_override(component));
    }
    out
}

/// A component argument is a file if such a file exists, else a built-in
/// name.
pub fn component_override(spec: &str) -> (&'static str, String) {
    if Path::new(spec).exists() {
        ("component.file", spec.to_string())
    } else {
        ("component.builtin", spec.to_string())
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Errors with the file-system exit code when the path cannot be read.
pub fn readable(path: &Path) -> CliResult<()> {
    std::fs::metadata(path).map(|_| ()).map_err(|e| Failure::io(path, e))
}

/// Loads the config file (if any), applies flag overrides, and resolves
/// the experiment configuration.
pub fn resolve(common: &Common, overrides: &[(&'static str, String)]) -> CliResult<ExperimentConfig> {
    let (text, origin) = match &common.config {
        Some(path) => (read_text(path)?, path.display().to_string()),
        None => (String::new(), "<flags>".to_string()),
    };
    let mut map = ConfigMap::parse(&text, &origin).map_err(Failure::from)?;
    for (key, value) in overrides {
        map.set(key, value.clone());
    }
    if let Some(dir) = &common.out_dir {
        map.set("output_dir", dir.display().to_string());
    }
    if let Some(workers) = common.workers {
        map.set("workers", workers.to_string());
    }
    if let Some(seed) = common.seed {
        map.set("seed.construct", derive(seed, domain::CONSTRUCT, 0).to_string());
        map.set("seed.noise", derive(seed, domain::FRAME_NOISE, 0).to_string());
        map.set("seed.schedule", derive(seed, domain::SCHEDULE, 0).to_string());
        map.set("seed.train", derive(seed, domain::TRAIN_NOISE, 0).to_string());
        map.set("seed.explore", derive(seed, domain::EXPLORE, 0).to_string());
    }
    let cfg = ExperimentConfig::from_map(map)?;
    precheck_inputs(&cfg)?;
    Ok(cfg)
}

/// Separates unreadable input files (exit 3) from malformed contents
/// (exit 4) before the core parsers run.
fn precheck_inputs(cfg: &ExperimentConfig) -> CliResult<()> {
    if let BaseSource::Alist(path) = &cfg.base {
        readable(path)?;
    }
    if let ComponentSource::File(path) = &cfg.component {
        readable(path)?;
    }
    Ok(())
}
