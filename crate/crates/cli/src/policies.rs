//! Q-table files on disk: naming, provenance metadata, and checkpointed
//! training that an interrupted run resumes bitwise.
//!
//! Every table file carries a `.meta` sidecar holding the keys that pin
//! its provenance (graph, grid, streams, hyperparameters) plus their
//! hash. Training toward a larger `train.size` resumes an existing file;
//! any identity mismatch is an incompatibility error, never a silent
//! retrain.

use crate::fail::{CliResult, Failure};
use gldpc_core::config::{self, ConfigMap};
use gldpc_core::harness::{
    mixed_training_set, per_snr_hyper, per_snr_training_set, write_text_atomic, ExperimentConfig,
    SchedulerKind, TrainKind, TrainedPolicies,
};
use gldpc_core::rl::{resume_train, Hyperparams, TrainingSet};
use gldpc_core::{GeneralizedTannerGraph, QTable};
use std::path::{Path, PathBuf};

/// `q-mixed.gqt1`, or `q-snr<k>.gqt1` for the table of grid point `k`.
pub fn table_path(out_dir: &Path, mode: TrainKind, k: usize) -> PathBuf {
    match mode {
        TrainKind::Mixed => out_dir.join("q-mixed.gqt1"),
        TrainKind::PerSnr => out_dir.join(format!("q-snr{k}.gqt1")),
    }
}

fn meta_path(table: &Path) -> PathBuf {
    let mut name = table.file_name().unwrap_or_default().to_os_string();
    name.push(".meta");
    table.with_file_name(name)
}

/// Keys pinning a table's provenance. `train.size` is deliberately absent
/// so a file can later be resumed toward a larger target.
fn identity_pairs(cfg: &ExperimentConfig, mode: TrainKind) -> Vec<(&'static str, String)> {
    const KEYS: &[&str] = &[
        "base.alist",
        "base.gamma",
        "base.p",
        "base.n",
        "component.builtin",
        "component.file",
        "mu",
        "zeta",
        "seed.construct",
        "seed.train",
        "seed.explore",
        "snr.grid",
        "hyper.alpha",
        "hyper.beta",
        "hyper.epsilon",
        "hyper.ell_max",
    ];
    let mut pairs: Vec<(&'static str, String)> =
        cfg.to_pairs().into_iter().filter(|(k, _)| KEYS.contains(k)).collect();
    pairs.push(("train.mode", mode.name().to_string()));
    pairs
}

fn identity_hash(cfg: &ExperimentConfig, mode: TrainKind) -> String {
    format!("{:016x}", config::hash_pairs(&identity_pairs(cfg, mode)))
}

fn write_meta(table: &Path, cfg: &ExperimentConfig, mode: TrainKind) -> CliResult<()> {
    let mut pairs = identity_pairs(cfg, mode);
    pairs.push(("train.identity", identity_hash(cfg, mode)));
    write_text_atomic(&meta_path(table), &config::serialize(&pairs))?;
    Ok(())
}

fn check_meta(table: &Path, cfg: &ExperimentConfig, mode: TrainKind) -> CliResult<()> {
    let meta = meta_path(table);
    let text = std::fs::read_to_string(&meta).map_err(|e| {
        Failure::incompatible(format!(
            "{}: table exists without readable metadata ({e}); remove the table or use a fresh output dir",
            meta.display()
        ))
    })?;
    let mut map = ConfigMap::parse(&text, &meta.display().to_string()).map_err(|e| {
        Failure::incompatible(format!("{}: corrupt metadata: {e}", meta.display()))
    })?;
    let stored = map
        .take("train.identity")
        .ok_or_else(|| Failure::incompatible(format!("{}: metadata lacks train.identity", meta.display())))?;
    let expected = identity_hash(cfg, mode);
    if stored != expected {
        return Err(Failure::incompatible(format!(
            "{}: trained under a different configuration (identity {stored}, expected {expected}); \
             use a fresh output dir or remove the table",
            table.display()
        )));
    }
    Ok(())
}

/// Outcome of [`ensure_table`] for one file.
pub struct TrainProgress {
    pub path: PathBuf,
    pub episodes: u64,
    pub newly_run: u64,
    pub last_mean_reward: Option<f64>,
}

/// Creates or resumes the table for `mode` (grid point `k` in per-SNR
/// mode) and trains it to `cfg.train_size` episodes, saving at every
/// chunk boundary. A fully trained compatible file is left untouched.
pub fn ensure_table(
    cfg: &ExperimentConfig,
    graph: &GeneralizedTannerGraph,
    rate: f64,
    mode: TrainKind,
    k: usize,
    checkpoint_every: usize,
    progress: bool,
) -> CliResult<(QTable, TrainProgress)> {
    let path = table_path(&cfg.output_dir, mode, k);
    let (ts, hyper): (TrainingSet, Hyperparams) = match mode {
        TrainKind::Mixed => (mixed_training_set(cfg), cfg.hyper),
        TrainKind::PerSnr => (per_snr_training_set(cfg, k), per_snr_hyper(cfg, k)),
    };
    ts.validate()?;
    let mut table = if path.exists() {
        check_meta(&path, cfg, mode)?;
        let table = QTable::load(&path)?;
        table.matches_graph(graph)?;
        if table.mode() != ts.table_mode() {
            return Err(Failure::incompatible(format!(
                "{}: table mode {:?} does not match the requested {:?}",
                path.display(),
                table.mode(),
                ts.table_mode()
            )));
        }
        if table.hyper() != hyper {
            return Err(Failure::incompatible(format!(
                "{}: trained with different hyperparameters",
                path.display()
            )));
        }
        table
    } else {
        let table = QTable::new(graph.m(), graph.base().cn_degree(), ts.table_mode(), hyper)?;
        write_meta(&path, cfg, mode)?;
        table
    };
    let target = ts.size as u64;
    if table.episodes() > target {
        return Err(Failure::incompatible(format!(
            "{}: already holds {} episodes, beyond the requested {}; raise train.size or remove the file",
            path.display(),
            table.episodes(),
            target
        )));
    }
    let newly_run = target - table.episodes();
    let grid_len = cfg.snr_grid.len();
    let mut last_mean_reward = None;
    while table.episodes() < target {
        let done = table.episodes() as usize;
        let mut next = if checkpoint_every == 0 {
            ts.size
        } else {
            done.saturating_add(checkpoint_every).min(ts.size)
        };
        if matches!(mode, TrainKind::Mixed) {
            // Mixed chunks must close out whole grid cycles.
            next = (next.div_ceil(grid_len) * grid_len).min(ts.size);
            if next <= done {
                next = ts.size;
            }
        }
        let chunk = TrainingSet { size: next, ..ts.clone() };
        let rewards = resume_train(&mut table, graph, rate, &chunk)?;
        if !rewards.is_empty() {
            last_mean_reward = Some(rewards.iter().sum::<f64>() / rewards.len() as f64);
        }
        table.save(&path)?;
        if progress {
            eprintln!(
                "  {}: {}/{} episodes, mean episode reward {:.4}",
                path.display(),
                table.episodes(),
                target,
                last_mean_reward.unwrap_or(f64::NAN)
            );
        }
    }
    let episodes = table.episodes();
    Ok((table, TrainProgress { path, episodes, newly_run, last_mean_reward }))
}

/// Ensures every table the configured schedules need, training or
/// resuming as required.
pub fn ensure_policies(
    cfg: &ExperimentConfig,
    graph: &GeneralizedTannerGraph,
    rate: f64,
    checkpoint_every: usize,
    progress: bool,
) -> CliResult<(TrainedPolicies<f64>, Vec<TrainProgress>)> {
    let mut policies = TrainedPolicies::default();
    let mut outcomes = Vec::new();
    if cfg.schedules.contains(&SchedulerKind::RlMixed) {
        let (table, done) =
            ensure_table(cfg, graph, rate, TrainKind::Mixed, 0, checkpoint_every, progress)?;
        policies.mixed = Some(table);
        outcomes.push(done);
    }
    if cfg.schedules.contains(&SchedulerKind::RlPerSnr) {
        for k in 0..cfg.snr_grid.len() {
            let (table, done) =
                ensure_table(cfg, graph, rate, TrainKind::PerSnr, k, checkpoint_every, progress)?;
            policies.per_snr.push(table);
            outcomes.push(done);
        }
    }
    Ok((policies, outcomes))
}
