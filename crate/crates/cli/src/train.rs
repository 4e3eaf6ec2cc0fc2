//! `train`: construct the configured code and train its Q-table file(s),
//! checkpointing so an interrupted run resumes where it stopped.

use crate::construct::warn_rank_deficiency;
use crate::fail::{CliResult, Failure};
use crate::overlay::{self, Common};
use crate::policies::{ensure_table, TrainProgress};
use gldpc_core::harness::{construct_code, TrainKind};

#[derive(Clone, Copy, Debug, PartialEq, clap::ValueEnum)]
pub enum ModeArg {
    /// One table trained across the whole SNR grid.
    Mixed,
    /// One table per grid point, on split streams.
    PerSnr,
}

impl ModeArg {
    fn key(self) -> &'static str {
        match self {
            ModeArg::Mixed => "mixed",
            ModeArg::PerSnr => "per-snr",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub code: overlay::CodeFlags,

    /// Training mode (config key `train.mode`).
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Episodes per table (config key `train.size`); must be positive.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: Option<u64>,

    /// Save a checkpoint every N episodes (0 = only on completion).
    #[arg(long, default_value_t = 5000, value_name = "N")]
    pub checkpoint_every: usize,
}

fn print_done(done: &TrainProgress) {
    let reward = match done.last_mean_reward {
        Some(r) => format!(" mean_reward {r:.4}"),
        None => String::new(),
    };
    println!(
        "table {} episodes {} new {}{reward}",
        done.path.display(),
        done.episodes,
        done.newly_run
    );
}

pub fn run(common: &Common, args: &TrainArgs) -> CliResult<()> {
    let mut overrides = overlay::code_overrides(&args.code);
    if let Some(mode) = args.mode {
        overrides.push(("train.mode", mode.key().to_string()));
    }
    if let Some(size) = args.size {
        overrides.push(("train.size", size.to_string()));
    }
    let cfg = overlay::resolve(common, &overrides)?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Failure::io(&cfg.output_dir, e))?;

    let built = construct_code(&cfg)?;
    warn_rank_deficiency(&built);
    let rate = built.rate.as_f64();
    match cfg.train_kind {
        TrainKind::Mixed => {
            let (_, done) =
                ensure_table(&cfg, &built.graph, rate, TrainKind::Mixed, 0, args.checkpoint_every, true)?;
            print_done(&done);
        }
        TrainKind::PerSnr => {
            for k in 0..cfg.snr_grid.len() {
                let (_, done) = ensure_table(
                    &cfg,
                    &built.graph,
                    rate,
                    TrainKind::PerSnr,
                    k,
                    args.checkpoint_every,
                    true,
                )?;
                print_done(&done);
            }
        }
    }
    Ok(())
}
