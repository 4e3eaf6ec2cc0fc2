//! `construct`: build a code and write its alist, plan sidecar, and rate
//! report.

use crate::fail::{CliResult, Failure};
use crate::overlay::{self, Common};
use gldpc_core::alist;
use gldpc_core::config;
use gldpc_core::harness::{construct_code, write_text_atomic, ComponentSource, ConstructedCode, ExperimentConfig};
use std::path::Path;

#[derive(Debug, clap::Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub code: overlay::CodeFlags,
}

/// The rate report's keys; `report.full_rank = false` flags a deficient
/// parity-check matrix, whose rate then reflects the actual rank.
pub fn report_pairs(cfg: &ExperimentConfig, built: &ConstructedCode) -> Vec<(&'static str, String)> {
    let graph = &built.graph;
    vec![
        ("report.code_id", cfg.code_id()),
        ("report.n", graph.n().to_string()),
        ("report.m", graph.m().to_string()),
        ("report.g", graph.plan().g().to_string()),
        ("report.mu", graph.plan().gcn_fraction().to_string()),
        ("report.component", graph.component().name().to_string()),
        ("report.rows", graph.total_rows().to_string()),
        ("report.rank", built.rank.to_string()),
        ("report.full_rank", built.full_rank.to_string()),
        ("report.rate", built.rate.to_string()),
        ("report.rate_3dp", format!("{:.3}", built.rate.rounded_3dp())),
        ("report.attempts", built.attempts.to_string()),
    ]
}

/// The component label a plan sidecar stores: the built-in name or the
/// file path, so a later decode can resolve it the same way.
pub fn component_label(cfg: &ExperimentConfig) -> String {
    match &cfg.component {
        ComponentSource::Builtin(name) => name.clone(),
        ComponentSource::File(path) => path.display().to_string(),
    }
}

pub fn warn_rank_deficiency(built: &ConstructedCode) {
    if !built.full_rank {
        eprintln!(
            "warning: parity-check matrix is rank deficient (rank {} of {} rows) after {} attempt(s); \
             the reported rate reflects the actual rank",
            built.rank,
            built.graph.total_rows(),
            built.attempts
        );
    }
}

pub fn run(common: &Common, args: &ConstructArgs) -> CliResult<()> {
    let cfg = overlay::resolve(common, &overlay::code_overrides(&args.code))?;
    let built = construct_code(&cfg)?;
    warn_rank_deficiency(&built);

    let out_dir: &Path = &cfg.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;
    let stem = cfg.code_id();
    let alist_path = out_dir.join(format!("{stem}.alist"));
    let plan_path = out_dir.join(format!("{stem}.plan"));
    let report_path = out_dir.join(format!("{stem}.rate.txt"));
    write_text_atomic(&alist_path, &alist::serialize(built.graph.base()))?;
    write_text_atomic(&plan_path, &built.graph.plan().to_sidecar(&component_label(&cfg)))?;
    write_text_atomic(&report_path, &config::serialize(&report_pairs(&cfg, &built)))?;

    println!("code {stem}");
    println!(
        "rate {} (rank {} of {} rows, full_rank {}, attempts {})",
        built.rate,
        built.rank,
        built.graph.total_rows(),
        built.full_rank,
        built.attempts
    );
    println!("wrote {}", alist_path.display());
    println!("wrote {}", plan_path.display());
    println!("wrote {}", report_path.display());
    Ok(())
}
