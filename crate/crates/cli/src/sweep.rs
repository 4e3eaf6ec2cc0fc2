//! `sweep`: construct, train whatever policies the schedules need, run
//! the full comparison, and write fer.csv, complexity.csv, and per-run
//! records into the output directory.

use crate::construct::{component_label, report_pairs, warn_rank_deficiency};
use crate::fail::{CliResult, Failure};
use crate::overlay::{self, Common};
use crate::policies::ensure_policies;
use gldpc_core::alist;
use gldpc_core::config;
use gldpc_core::harness::{
    compare_schedulers, complexity_csv, complexity_report, construct_code, fer_csv,
    run_record_pairs, write_text_atomic, ExperimentConfig,
};
use std::path::Path;

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub code: overlay::CodeFlags,

    /// Save a training checkpoint every N episodes (0 = only on completion).
    #[arg(long, default_value_t = 5000, value_name = "N")]
    pub checkpoint_every: usize,
}

/// Hash of every result-relevant key: `output_dir` and `workers` are
/// excluded because neither changes any output byte.
fn result_identity(cfg: &ExperimentConfig) -> u64 {
    let pairs: Vec<(&'static str, String)> = cfg
        .to_pairs()
        .into_iter()
        .filter(|(key, _)| *key != "output_dir" && *key != "workers")
        .collect();
    config::hash_pairs(&pairs)
}

/// A directory only ever holds one configuration's results: reruns must
/// match the stored manifest, so partial results are finished in place
/// and never merged across configs.
fn guard_manifest(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let path = out_dir.join("config.txt");
    if !path.exists() {
        return Ok(());
    }
    let text = overlay::read_text(&path)?;
    let existing = ExperimentConfig::from_text(&text, &path.display().to_string()).map_err(|_| {
        Failure::incompatible(format!(
            "{}: unreadable config.txt; use a fresh --out-dir or remove the directory",
            out_dir.display()
        ))
    })?;
    if result_identity(&existing) != result_identity(cfg) {
        return Err(Failure::incompatible(format!(
            "{}: holds results for a different configuration; use a fresh --out-dir or remove it",
            out_dir.display()
        )));
    }
    Ok(())
}

pub fn run(common: &Common, args: &SweepArgs) -> CliResult<()> {
    let cfg = overlay::resolve(common, &overlay::code_overrides(&args.code))?;
    let out_dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&out_dir).map_err(|e| Failure::io(&out_dir, e))?;
    guard_manifest(&cfg, &out_dir)?;
    write_text_atomic(&out_dir.join("config.txt"), &cfg.to_text())?;

    eprintln!("constructing {}", cfg.code_id());
    let built = construct_code(&cfg)?;
    warn_rank_deficiency(&built);
    write_text_atomic(&out_dir.join("code.alist"), &alist::serialize(built.graph.base()))?;
    write_text_atomic(
        &out_dir.join("code.plan"),
        &built.graph.plan().to_sidecar(&component_label(&cfg)),
    )?;
    write_text_atomic(&out_dir.join("rate.txt"), &config::serialize(&report_pairs(&cfg, &built)))?;

    let rate = built.rate.as_f64();
    let (policies, trained) =
        ensure_policies(&cfg, &built.graph, rate, args.checkpoint_every, common.verbose)?;
    for done in &trained {
        eprintln!("table {} ready ({} episodes, {} new)", done.path.display(), done.episodes, done.newly_run);
    }

    eprintln!("sweeping {} schedule(s) over {} point(s)", cfg.schedules.len(), cfg.snr_grid.len());
    let comparison = compare_schedulers(&cfg, &built.graph, rate, &policies)?;

    let fer_path = out_dir.join("fer.csv");
    write_text_atomic(&fer_path, &fer_csv(&comparison.code_id, &comparison.runs))?;
    let complexity = complexity_report(&comparison.runs)?;
    let complexity_path = out_dir.join("complexity.csv");
    write_text_atomic(&complexity_path, &complexity_csv(&complexity))?;
    for run in &comparison.runs {
        let record = config::serialize(&run_record_pairs(&cfg, &built, run));
        write_text_atomic(&out_dir.join(format!("run-{}.txt", run.schedule.name())), &record)?;
    }

    for run in &comparison.runs {
        let frames: u64 = run.points.iter().map(|p| p.frames).sum();
        println!(
            "schedule {} points {} frames {} wall_clock_secs {:.2}",
            run.schedule.name(),
            run.points.len(),
            frames,
            run.wall_clock_secs
        );
    }
    println!("wrote {}", fer_path.display());
    println!("wrote {}", complexity_path.display());
    Ok(())
}
