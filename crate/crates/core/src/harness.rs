//! Monte-Carlo FER sweeps, scheduler comparisons, complexity accounting,
//! and the experiment configuration driving them.
//!
//! Frames are embarrassingly parallel. Every frame derives its own noise
//! and schedule seeds from (seed, point index, frame index), batches are
//! collected in frame order, and the stopping rule is evaluated only at
//! batch boundaries; results are therefore bitwise independent of the
//! worker count. Paired comparisons reuse one noise stream across
//! schedules (common random numbers), so per-frame error flags can be
//! differenced directly.

use crate::alist::{self, AlistError};
use crate::channel::{channel_llr, noiseless_llr, transmit, ChannelError, SnrPoint};
use crate::component::{ComponentCode, ComponentError};
use crate::config::{self, ConfigError, ConfigMap};
use crate::decoder::{BpDecoder, Schedule};
use crate::graph::{
    CodeRate, GeneralizationPlan, GeneralizedTannerGraph, GraphError,
};
use crate::random::generate_regular_base;
use crate::rl::{
    policy_schedule, Hyperparams, QTable, RlError, TableMode, TrainMode, TrainingSet,
};
use crate::scalar::LlrScalar;
use crate::seeds::{derive, domain};
use rayon::prelude::*;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

/// Frames simulated between stopping-rule checks; the rule is applied only
/// at batch boundaries so worker count cannot change where a sweep stops.
pub const FRAME_BATCH: u64 = 512;

/// Reseed attempts before construction gives up on full rank.
pub const RESEED_LIMIT: u32 = 16;

const Z95: f64 = 1.96;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Component(#[from] ComponentError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Alist(#[from] AlistError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("schedule {0} needs a trained policy table")]
    MissingPolicy(&'static str),
    #[error("per-SNR policy set has {tables} tables for a {points}-point grid")]
    PolicyGrid { tables: usize, points: usize },
    #[error("per-SNR table {index} is tagged {tag} dB, grid expects {expected} dB")]
    PolicyTag { index: usize, tag: f64, expected: f64 },
    #[error("policy table mode {0} does not suit schedule {1}")]
    PolicyMode(&'static str, &'static str),
    #[error("complexity table needs identical SNR grids across schedules")]
    MismatchedGrids,
    #[error("{origin}:{line}: {msg}")]
    Csv { origin: String, line: usize, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

/// Writes a file atomically: temp file in the same directory, then rename.
pub fn write_text_atomic(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, text).map_err(io_err(path))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

// ---------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------

/// The decoding schedules a sweep can compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    Flooding,
    RandomSequential,
    /// Greedy policy from the single table trained over the whole grid.
    RlMixed,
    /// Greedy policy from the table trained at each grid point.
    RlPerSnr,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::Flooding,
        SchedulerKind::RandomSequential,
        SchedulerKind::RlMixed,
        SchedulerKind::RlPerSnr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Flooding => "flooding",
            SchedulerKind::RandomSequential => "random",
            SchedulerKind::RlMixed => "rl-mixed",
            SchedulerKind::RlPerSnr => "rl-per-snr",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|kind| kind.name() == s)
            .ok_or_else(|| format!("unknown schedule {s:?}"))
    }
}

/// Report axis for SNR columns (both are always present in fer.csv).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisMode {
    EbN0,
    EsN0,
}

impl AxisMode {
    pub fn name(self) -> &'static str {
        match self {
            AxisMode::EbN0 => "ebn0",
            AxisMode::EsN0 => "esn0",
        }
    }
}

impl FromStr for AxisMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ebn0" => Ok(AxisMode::EbN0),
            "esn0" => Ok(AxisMode::EsN0),
            other => Err(format!("unknown axis {other:?}")),
        }
    }
}

/// How many tables a training run produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainKind {
    Mixed,
    PerSnr,
}

impl TrainKind {
    pub fn name(self) -> &'static str {
        match self {
            TrainKind::Mixed => "mixed",
            TrainKind::PerSnr => "per-snr",
        }
    }
}

impl FromStr for TrainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mixed" => Ok(TrainKind::Mixed),
            "per-snr" => Ok(TrainKind::PerSnr),
            other => Err(format!("unknown training mode {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaseSource {
    Alist(PathBuf),
    Generate { gamma: usize, p: usize, n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComponentSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneralizationSource {
    Fraction(f64),
    Explicit(Vec<usize>),
}

/// Per-SNR-point stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoppingRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self { min_frame_errors: 100, max_frames: 1_000_000 }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.min_frame_errors < 1 {
            return Err(HarnessError::Invalid("min_frame_errors must be at least 1".into()));
        }
        if self.max_frames < self.min_frame_errors {
            return Err(HarnessError::Invalid(
                "max_frames must be at least min_frame_errors".into(),
            ));
        }
        Ok(())
    }
}

/// Everything a sweep needs, mirrored one-to-one by the config-file keys
/// documented in [`ExperimentConfig::from_map`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub base: BaseSource,
    pub component: ComponentSource,
    pub generalization: GeneralizationSource,
    pub construct_seed: u64,
    pub noise_seed: u64,
    pub schedule_seed: u64,
    pub train_seed: u64,
    /// Eb/N0 dB grid; Es/N0 is derived from the code rate.
    pub snr_grid: Vec<f64>,
    pub axis: AxisMode,
    pub schedules: Vec<SchedulerKind>,
    pub i_max: usize,
    pub stopping: StoppingRule,
    pub train_kind: TrainKind,
    /// Episodes per table: the whole budget in mixed mode, the per-point
    /// budget in per-SNR mode.
    pub train_size: usize,
    /// `hyper.seed` drives exploration.
    pub hyper: Hyperparams,
    pub output_dir: PathBuf,
    /// 0 picks the global thread pool.
    pub workers: usize,
}

impl ExperimentConfig {
    /// Documented keys (defaults in parentheses):
    /// `base.alist` or `base.gamma`/`base.p`/`base.n`;
    /// `component.builtin` ("hamming74") or `component.file`;
    /// `mu` (1.0) or `zeta` (index list);
    /// `seed.construct`/`seed.noise`/`seed.schedule`/`seed.train`/
    /// `seed.explore` (all 0);
    /// `snr.grid` ("1 2 3 4 4.5 5"), `snr.axis` ("esn0");
    /// `schedules` ("flooding random rl-mixed rl-per-snr");
    /// `i_max` (50); `stop.min_errors` (100), `stop.max_frames` (1000000);
    /// `train.mode` ("mixed"), `train.size` (180000);
    /// `hyper.alpha` (0.1), `hyper.beta` (0.9), `hyper.epsilon` (0.6),
    /// `hyper.ell_max` (50);
    /// `output_dir` ("runs"); `workers` (0 = all cores).
    pub fn from_map(mut map: ConfigMap) -> Result<Self, HarnessError> {
        let alist = map.take("base.alist");
        let gamma = map.take_parsed::<usize>("base.gamma", "integer")?;
        let p = map.take_parsed::<usize>("base.p", "integer")?;
        let n = map.take_parsed::<usize>("base.n", "integer")?;
        let base = match (alist, gamma, p, n) {
            (Some(_), Some(_), _, _) | (Some(_), _, Some(_), _) | (Some(_), _, _, Some(_)) => {
                return Err(map.exclusive("base.alist", "base.gamma/base.p/base.n").into())
            }
            (Some(path), None, None, None) => BaseSource::Alist(PathBuf::from(path)),
            (None, Some(gamma), Some(p), Some(n)) => BaseSource::Generate { gamma, p, n },
            (None, None, None, None) => return Err(map.missing("base.gamma (or base.alist)").into()),
            (None, _, _, _) => {
                let key = if gamma.is_none() {
                    "base.gamma"
                } else if p.is_none() {
                    "base.p"
                } else {
                    "base.n"
                };
                return Err(map.missing(key).into());
            }
        };
        let component = match (map.take("component.builtin"), map.take("component.file")) {
            (Some(_), Some(_)) => {
                return Err(map.exclusive("component.builtin", "component.file").into())
            }
            (_, Some(path)) => ComponentSource::File(PathBuf::from(path)),
            (Some(name), None) => ComponentSource::Builtin(name),
            (None, None) => ComponentSource::Builtin("hamming74".into()),
        };
        let mu = map.take_parsed::<f64>("mu", "float")?;
        let zeta = map.take_list::<usize>("zeta", "index list")?;
        let generalization = match (mu, zeta) {
            (Some(_), Some(_)) => return Err(map.exclusive("mu", "zeta").into()),
            (_, Some(indices)) => GeneralizationSource::Explicit(indices),
            (Some(mu), None) => GeneralizationSource::Fraction(mu),
            (None, None) => GeneralizationSource::Fraction(1.0),
        };
        let hyper = Hyperparams {
            alpha: map.take_parsed("hyper.alpha", "float")?.unwrap_or(0.1),
            beta: map.take_parsed("hyper.beta", "float")?.unwrap_or(0.9),
            epsilon: map.take_parsed("hyper.epsilon", "float")?.unwrap_or(0.6),
            ell_max: map.take_parsed("hyper.ell_max", "integer")?.unwrap_or(50),
            seed: map.take_parsed("seed.explore", "integer")?.unwrap_or(0),
        };
        let cfg = Self {
            base,
            component,
            generalization,
            construct_seed: map.take_parsed("seed.construct", "integer")?.unwrap_or(0),
            noise_seed: map.take_parsed("seed.noise", "integer")?.unwrap_or(0),
            schedule_seed: map.take_parsed("seed.schedule", "integer")?.unwrap_or(0),
            train_seed: map.take_parsed("seed.train", "integer")?.unwrap_or(0),
            snr_grid: map
                .take_list("snr.grid", "float list")?
                .unwrap_or_else(|| vec![1.0, 2.0, 3.0, 4.0, 4.5, 5.0]),
            axis: map.take_parsed("snr.axis", "ebn0|esn0")?.unwrap_or(AxisMode::EsN0),
            schedules: map
                .take_list("schedules", "schedule list")?
                .unwrap_or_else(|| SchedulerKind::ALL.to_vec()),
            i_max: map.take_parsed("i_max", "integer")?.unwrap_or(50),
            stopping: StoppingRule {
                min_frame_errors: map.take_parsed("stop.min_errors", "integer")?.unwrap_or(100),
                max_frames: map.take_parsed("stop.max_frames", "integer")?.unwrap_or(1_000_000),
            },
            train_kind: map.take_parsed("train.mode", "mixed|per-snr")?.unwrap_or(TrainKind::Mixed),
            train_size: map.take_parsed("train.size", "integer")?.unwrap_or(180_000),
            hyper,
            output_dir: PathBuf::from(map.take("output_dir").unwrap_or_else(|| "runs".into())),
            workers: map.take_parsed("workers", "integer")?.unwrap_or(0),
        };
        map.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self, HarnessError> {
        Self::from_map(ConfigMap::parse(text, origin)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.stopping.validate()?;
        if self.snr_grid.is_empty() {
            return Err(HarnessError::Invalid("snr.grid must be non-empty".into()));
        }
        if self.schedules.is_empty() {
            return Err(HarnessError::Invalid("schedules must be non-empty".into()));
        }
        for (i, &kind) in self.schedules.iter().enumerate() {
            if self.schedules[..i].contains(&kind) {
                return Err(HarnessError::Invalid(format!("schedule {kind} listed twice")));
            }
        }
        if let GeneralizationSource::Fraction(mu) = self.generalization {
            if !(0.0..=1.0).contains(&mu) {
                return Err(HarnessError::Invalid(format!("mu = {mu} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Every key, explicitly, in documented order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs: Vec<(&'static str, String)> = Vec::new();
        match &self.base {
            BaseSource::Alist(path) => pairs.push(("base.alist", path.display().to_string())),
            BaseSource::Generate { gamma, p, n } => {
                pairs.push(("base.gamma", gamma.to_string()));
                pairs.push(("base.p", p.to_string()));
                pairs.push(("base.n", n.to_string()));
            }
        }
        match &self.component {
            ComponentSource::Builtin(name) => pairs.push(("component.builtin", name.clone())),
            ComponentSource::File(path) => {
                pairs.push(("component.file", path.display().to_string()))
            }
        }
        match &self.generalization {
            GeneralizationSource::Fraction(mu) => pairs.push(("mu", mu.to_string())),
            GeneralizationSource::Explicit(indices) => {
                pairs.push(("zeta", join_display(indices)))
            }
        }
        pairs.push(("seed.construct", self.construct_seed.to_string()));
        pairs.push(("seed.noise", self.noise_seed.to_string()));
        pairs.push(("seed.schedule", self.schedule_seed.to_string()));
        pairs.push(("seed.train", self.train_seed.to_string()));
        pairs.push(("seed.explore", self.hyper.seed.to_string()));
        pairs.push(("snr.grid", join_display(&self.snr_grid)));
        pairs.push(("snr.axis", self.axis.name().into()));
        let schedules: Vec<String> = self.schedules.iter().map(|s| s.name().into()).collect();
        pairs.push(("schedules", schedules.join(" ")));
        pairs.push(("i_max", self.i_max.to_string()));
        pairs.push(("stop.min_errors", self.stopping.min_frame_errors.to_string()));
        pairs.push(("stop.max_frames", self.stopping.max_frames.to_string()));
        pairs.push(("train.mode", self.train_kind.name().into()));
        pairs.push(("train.size", self.train_size.to_string()));
        pairs.push(("hyper.alpha", self.hyper.alpha.to_string()));
        pairs.push(("hyper.beta", self.hyper.beta.to_string()));
        pairs.push(("hyper.epsilon", self.hyper.epsilon.to_string()));
        pairs.push(("hyper.ell_max", self.hyper.ell_max.to_string()));
        pairs.push(("output_dir", self.output_dir.display().to_string()));
        pairs.push(("workers", self.workers.to_string()));
        pairs
    }

    pub fn to_text(&self) -> String {
        config::serialize(&self.to_pairs())
    }

    /// Order-independent hash of the full key set.
    pub fn hash(&self) -> u64 {
        config::hash_pairs(&self.to_pairs())
    }

    /// Stable identifier naming the code family this config constructs.
    pub fn code_id(&self) -> String {
        let base = match &self.base {
            BaseSource::Generate { gamma, p, n } => format!("n{n}-g{gamma}-p{p}"),
            BaseSource::Alist(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "alist".into()),
        };
        let plan = match &self.generalization {
            GeneralizationSource::Fraction(mu) => format!("mu{mu:.3}"),
            GeneralizationSource::Explicit(indices) => format!("z{}", indices.len()),
        };
        format!("{base}-{plan}-s{}", self.construct_seed)
    }
}

fn join_display<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------

/// A constructed code plus its rank diagnostics.
#[derive(Clone, Debug)]
pub struct ConstructedCode {
    pub graph: GeneralizedTannerGraph,
    pub rate: CodeRate,
    pub rank: usize,
    pub full_rank: bool,
    /// Construction attempts consumed (1 = first seed worked).
    pub attempts: u32,
}

/// Builds the graph from a config, reseeding deterministically until the
/// expanded parity matrix reaches full rank or the attempt budget runs
/// out; the best-rank candidate is returned either way, flagged via
/// `full_rank`. Sources with nothing to reseed get a single attempt.
pub fn construct_code(cfg: &ExperimentConfig) -> Result<ConstructedCode, HarnessError> {
    let component = match &cfg.component {
        ComponentSource::Builtin(name) => ComponentCode::builtin(name)?,
        ComponentSource::File(path) => ComponentCode::from_file(path)?,
    };
    let fixed_base = match &cfg.base {
        BaseSource::Alist(path) => Some(alist::from_file(path)?),
        BaseSource::Generate { .. } => None,
    };
    let reseedable = !(fixed_base.is_some()
        && matches!(cfg.generalization, GeneralizationSource::Explicit(_)));
    let mut best: Option<ConstructedCode> = None;
    let mut attempts_run = 0;
    for attempt in 0..RESEED_LIMIT {
        attempts_run = attempt + 1;
        let base = match (&cfg.base, &fixed_base) {
            (_, Some(base)) => base.clone(),
            (&BaseSource::Generate { gamma, p, n }, None) => generate_regular_base(
                gamma,
                p,
                n,
                derive(cfg.construct_seed, domain::CONSTRUCT, 2 * u64::from(attempt)),
            )?,
            (BaseSource::Alist(_), None) => unreachable!("alist base is preloaded"),
        };
        let plan = match &cfg.generalization {
            GeneralizationSource::Fraction(mu) => GeneralizationPlan::select(
                base.m(),
                *mu,
                derive(cfg.construct_seed, domain::CONSTRUCT, 2 * u64::from(attempt) + 1),
            )?,
            GeneralizationSource::Explicit(indices) => {
                GeneralizationPlan::from_indices(base.m(), indices.clone())?
            }
        };
        let graph = GeneralizedTannerGraph::new(base, component.clone(), plan)?;
        let matrix = graph.expand_parity_matrix();
        let candidate = ConstructedCode {
            rate: matrix.rate(),
            rank: matrix.rank(),
            full_rank: matrix.is_full_rank(),
            attempts: attempt + 1,
            graph,
        };
        if candidate.full_rank {
            return Ok(candidate);
        }
        best = match best {
            Some(prev) if prev.rank >= candidate.rank => Some(prev),
            _ => Some(candidate),
        };
        if !reseedable {
            break;
        }
    }
    let mut best = best.expect("at least one attempt ran");
    best.attempts = attempts_run;
    Ok(best)
}

// ---------------------------------------------------------------------
// FER sweeps
// ---------------------------------------------------------------------

/// Accumulated results at one SNR point.
#[derive(Clone, Debug, PartialEq)]
pub struct FerPoint {
    pub point: SnrPoint,
    pub frames: u64,
    pub frame_errors: u64,
    pub iters_sum: u64,
    pub msgs_sum: u64,
    /// Per-frame error flags in frame order, for paired comparisons.
    pub error_flags: Vec<bool>,
    /// Order-sensitive digest of the raw channel outputs, independent of
    /// the schedule; equal digests certify common random numbers.
    pub noise_digest: u64,
}

impl FerPoint {
    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }

    pub fn ci(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames)
    }

    pub fn mean_iters(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.iters_sum as f64 / self.frames as f64
        }
    }

    pub fn mean_msgs(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.msgs_sum as f64 / self.frames as f64
        }
    }
}

/// Wilson 95% score interval for `errors` out of `frames`.
pub fn wilson_interval(errors: u64, frames: u64) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn make_pool(workers: usize) -> Result<Option<rayon::ThreadPool>, HarnessError> {
    if workers == 0 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(Some)
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))
}

fn digest_frame(received: &[f64]) -> u64 {
    let mut bytes = Vec::with_capacity(received.len() * 8);
    for &y in received {
        bytes.extend_from_slice(&y.to_le_bytes());
    }
    config::fnv1a64(&bytes)
}

/// Runs all-zero-codeword frames at each point until the stopping rule
/// fires. `schedule_for(point_idx, frame_seed)` builds each frame's
/// schedule; a frame errors iff it fails to converge or outputs a nonzero
/// bit.
pub fn fer_sweep<'p, T, F>(
    decoder: &BpDecoder<T>,
    points: &[SnrPoint],
    i_max: usize,
    stopping: &StoppingRule,
    noise_seed: u64,
    schedule_seed: u64,
    workers: usize,
    schedule_for: F,
) -> Result<Vec<FerPoint>, HarnessError>
where
    T: LlrScalar,
    F: Fn(usize, u64) -> Schedule<'p> + Sync,
{
    stopping.validate()?;
    let pool = make_pool(workers)?;
    let zeros = vec![0u8; decoder.n()];
    let mut out = Vec::with_capacity(points.len());
    for (pt_idx, &point) in points.iter().enumerate() {
        let noise_base = derive(noise_seed, domain::FRAME_NOISE, pt_idx as u64);
        let sched_base = derive(schedule_seed, domain::SCHEDULE, pt_idx as u64);
        let mut acc = FerPoint {
            point,
            frames: 0,
            frame_errors: 0,
            iters_sum: 0,
            msgs_sum: 0,
            error_flags: Vec::new(),
            noise_digest: 0,
        };
        while acc.frames < stopping.max_frames && acc.frame_errors < stopping.min_frame_errors {
            let start = acc.frames;
            let end = (start + FRAME_BATCH).min(stopping.max_frames);
            let run_frame = |frame: u64| -> (bool, u64, u64, u64) {
                let (llr, digest): (Vec<T>, u64) = if point.sigma() == 0.0 {
                    (noiseless_llr(&zeros), 0)
                } else {
                    let received =
                        transmit(&zeros, point, derive(noise_base, domain::FRAME_NOISE, frame));
                    let digest = digest_frame(&received);
                    let llr =
                        channel_llr(&received, point).expect("sigma is positive on this path");
                    (llr, digest)
                };
                let mut schedule =
                    schedule_for(pt_idx, derive(sched_base, domain::SCHEDULE, frame));
                let res = decoder.decode(&llr, &mut schedule, i_max);
                let error = !res.converged || res.bits.iter().any(|&b| b != 0);
                (error, res.iterations_used as u64, res.spcn_to_vn_messages, digest)
            };
            let batch: Vec<(bool, u64, u64, u64)> = match &pool {
                Some(pool) => pool.install(|| (start..end).into_par_iter().map(run_frame).collect()),
                None => (start..end).into_par_iter().map(run_frame).collect(),
            };
            for (error, iters, msgs, digest) in batch {
                acc.frames += 1;
                acc.frame_errors += u64::from(error);
                acc.iters_sum += iters;
                acc.msgs_sum += msgs;
                acc.error_flags.push(error);
                acc.noise_digest = acc.noise_digest.wrapping_mul(0x0000_0100_0000_01b3) ^ digest;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Policies and scheduler comparison
// ---------------------------------------------------------------------

/// Trained tables a comparison may draw on; only the schedules actually
/// requested need theirs present.
#[derive(Clone, Debug)]
pub struct TrainedPolicies<T> {
    pub mixed: Option<QTable<T>>,
    pub per_snr: Vec<QTable<T>>,
}

impl<T> Default for TrainedPolicies<T> {
    fn default() -> Self {
        Self { mixed: None, per_snr: Vec::new() }
    }
}

impl<T: LlrScalar> TrainedPolicies<T> {
    /// Checks shape, mode, and grid tags for the schedules in `cfg`.
    pub fn validate_for(
        &self,
        cfg: &ExperimentConfig,
        graph: &GeneralizedTannerGraph,
    ) -> Result<(), HarnessError> {
        if cfg.schedules.contains(&SchedulerKind::RlMixed) {
            let table =
                self.mixed.as_ref().ok_or(HarnessError::MissingPolicy("rl-mixed"))?;
            table.matches_graph(graph)?;
            if !matches!(table.mode(), TableMode::Mixed) {
                return Err(HarnessError::PolicyMode("per-snr", "rl-mixed"));
            }
        }
        if cfg.schedules.contains(&SchedulerKind::RlPerSnr) {
            if self.per_snr.is_empty() {
                return Err(HarnessError::MissingPolicy("rl-per-snr"));
            }
            if self.per_snr.len() != cfg.snr_grid.len() {
                return Err(HarnessError::PolicyGrid {
                    tables: self.per_snr.len(),
                    points: cfg.snr_grid.len(),
                });
            }
            for (index, table) in self.per_snr.iter().enumerate() {
                table.matches_graph(graph)?;
                let expected = cfg.snr_grid[index];
                match table.mode() {
                    TableMode::PerSnr { ebn0_db } if (ebn0_db - expected).abs() < 1e-9 => {}
                    TableMode::PerSnr { ebn0_db } => {
                        return Err(HarnessError::PolicyTag { index, tag: ebn0_db, expected })
                    }
                    TableMode::Mixed => {
                        return Err(HarnessError::PolicyMode("mixed", "rl-per-snr"))
                    }
                }
            }
        }
        Ok(())
    }
}

/// Training set for the mixed table of `cfg`.
pub fn mixed_training_set(cfg: &ExperimentConfig) -> TrainingSet {
    TrainingSet {
        mode: TrainMode::Mixed,
        snr_grid: cfg.snr_grid.clone(),
        size: cfg.train_size,
        seed: cfg.train_seed,
    }
}

/// Training set for the per-SNR table at grid index `k`; the noise stream
/// is split per table so the K runs stay independent.
pub fn per_snr_training_set(cfg: &ExperimentConfig, k: usize) -> TrainingSet {
    TrainingSet {
        mode: TrainMode::PerSnr(k),
        snr_grid: cfg.snr_grid.clone(),
        size: cfg.train_size,
        seed: derive(cfg.train_seed, domain::TRAIN_NOISE, k as u64),
    }
}

/// Exploration hyperparameters for the per-SNR table at grid index `k`.
pub fn per_snr_hyper(cfg: &ExperimentConfig, k: usize) -> Hyperparams {
    Hyperparams { seed: derive(cfg.hyper.seed, domain::EXPLORE, k as u64), ..cfg.hyper }
}

/// Trains whichever tables the configured schedules require.
pub fn train_policies<T: LlrScalar>(
    cfg: &ExperimentConfig,
    graph: &GeneralizedTannerGraph,
    rate: f64,
) -> Result<TrainedPolicies<T>, HarnessError> {
    let mut policies = TrainedPolicies::default();
    if cfg.schedules.contains(&SchedulerKind::RlMixed) {
        let outcome = crate::rl::train(graph, rate, &mixed_training_set(cfg), cfg.hyper)?;
        policies.mixed = Some(outcome.table);
    }
    if cfg.schedules.contains(&SchedulerKind::RlPerSnr) {
        for k in 0..cfg.snr_grid.len() {
            let outcome = crate::rl::train(
                graph,
                rate,
                &per_snr_training_set(cfg, k),
                per_snr_hyper(cfg, k),
            )?;
            policies.per_snr.push(outcome.table);
        }
    }
    Ok(policies)
}

fn schedule_of<'p, T: LlrScalar>(
    kind: SchedulerKind,
    seed: u64,
    policies: &'p TrainedPolicies<T>,
    point_idx: usize,
) -> Schedule<'p> {
    match kind {
        SchedulerKind::Flooding => Schedule::Flooding,
        SchedulerKind::RandomSequential => Schedule::RandomPerIteration(seed),
        SchedulerKind::RlMixed => {
            policy_schedule(policies.mixed.as_ref().expect("validated before sweeping"))
        }
        SchedulerKind::RlPerSnr => policy_schedule(&policies.per_snr[point_idx]),
    }
}

/// One schedule's sweep results.
#[derive(Clone, Debug)]
pub struct ScheduleRun {
    pub schedule: SchedulerKind,
    pub points: Vec<FerPoint>,
    pub wall_clock_secs: f64,
}

/// A full comparison across the configured schedules.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub code_id: String,
    pub config_hash: u64,
    pub runs: Vec<ScheduleRun>,
}

/// Runs every configured schedule over the same frames (identical
/// per-frame noise seeds: common random numbers).
pub fn compare_schedulers<T: LlrScalar>(
    cfg: &ExperimentConfig,
    graph: &GeneralizedTannerGraph,
    rate: f64,
    policies: &TrainedPolicies<T>,
) -> Result<Comparison, HarnessError> {
    cfg.validate()?;
    policies.validate_for(cfg, graph)?;
    let decoder: BpDecoder<T> = BpDecoder::new(graph);
    let points: Vec<SnrPoint> = cfg
        .snr_grid
        .iter()
        .map(|&db| SnrPoint::from_ebn0(db, rate))
        .collect::<Result<_, _>>()?;
    let mut runs = Vec::with_capacity(cfg.schedules.len());
    for &kind in &cfg.schedules {
        let started = std::time::Instant::now();
        let swept = fer_sweep(
            &decoder,
            &points,
            cfg.i_max,
            &cfg.stopping,
            cfg.noise_seed,
            cfg.schedule_seed,
            cfg.workers,
            |point_idx, seed| schedule_of(kind, seed, policies, point_idx),
        )?;
        runs.push(ScheduleRun {
            schedule: kind,
            points: swept,
            wall_clock_secs: started.elapsed().as_secs_f64(),
        });
    }
    Ok(Comparison { code_id: cfg.code_id(), config_hash: cfg.hash(), runs })
}

// ---------------------------------------------------------------------
// Paired statistics
// ---------------------------------------------------------------------

/// Paired FER difference (a − b) over the common frame prefix, with a
/// 95% interval built from the discordant-pair counts.
#[derive(Clone, Copy, Debug)]
pub struct PairedDiff {
    pub n: u64,
    /// Frames where a erred and b did not.
    pub n10: u64,
    /// Frames where b erred and a did not.
    pub n01: u64,
    pub d_hat: f64,
    pub half_width: f64,
}

pub fn paired_fer_diff(a: &FerPoint, b: &FerPoint) -> PairedDiff {
    let n = a.error_flags.len().min(b.error_flags.len());
    let mut n10 = 0u64;
    let mut n01 = 0u64;
    for i in 0..n {
        match (a.error_flags[i], b.error_flags[i]) {
            (true, false) => n10 += 1,
            (false, true) => n01 += 1,
            _ => {}
        }
    }
    if n == 0 {
        return PairedDiff { n: 0, n10, n01, d_hat: 0.0, half_width: 1.0 };
    }
    let nf = n as f64;
    let diff = n10 as f64 - n01 as f64;
    let d_hat = diff / nf;
    let var = ((n10 + n01) as f64 - diff * diff / nf).max(0.0);
    let half_width = Z95 * var.sqrt() / nf;
    PairedDiff { n: n as u64, n10, n01, d_hat, half_width }
}

/// Half-width of the unpaired 95% interval on the same FER difference.
pub fn unpaired_diff_half_width(a: &FerPoint, b: &FerPoint) -> f64 {
    let (pa, na) = (a.fer(), a.frames.max(1) as f64);
    let (pb, nb) = (b.fer(), b.frames.max(1) as f64);
    Z95 * (pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb).sqrt()
}

// ---------------------------------------------------------------------
// Complexity accounting
// ---------------------------------------------------------------------

/// Mean messages per frame, schedules × SNR points.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityTable {
    pub esn0_db: Vec<f64>,
    pub rows: Vec<(SchedulerKind, Vec<f64>)>,
}

pub fn complexity_report(runs: &[ScheduleRun]) -> Result<ComplexityTable, HarnessError> {
    let Some(first) = runs.first() else {
        return Err(HarnessError::MismatchedGrids);
    };
    let esn0_db: Vec<f64> = first.points.iter().map(|p| p.point.esn0_db()).collect();
    let mut rows = Vec::with_capacity(runs.len());
    for run in runs {
        let grid: Vec<f64> = run.points.iter().map(|p| p.point.esn0_db()).collect();
        if grid != esn0_db {
            return Err(HarnessError::MismatchedGrids);
        }
        rows.push((run.schedule, run.points.iter().map(FerPoint::mean_msgs).collect()));
    }
    Ok(ComplexityTable { esn0_db, rows })
}

// ---------------------------------------------------------------------
// Training-set streaming
// ---------------------------------------------------------------------

/// One labeled training frame.
#[derive(Clone, Debug)]
pub struct TrainingFrame<T> {
    pub episode: usize,
    pub ebn0_db: f64,
    pub llr: Vec<T>,
}

/// Streams the exact LLR frames the trainer consumes: episode `e` of the
/// returned iterator uses the same derived noise seed as training episode
/// `e` on the same set.
pub fn generate_training_set<'a, T: LlrScalar>(
    ts: &'a TrainingSet,
    rate: f64,
    n: usize,
) -> Result<impl Iterator<Item = TrainingFrame<T>> + 'a, HarnessError> {
    ts.validate()?;
    let points: Vec<SnrPoint> = ts
        .snr_grid
        .iter()
        .map(|&db| SnrPoint::from_ebn0(db, rate))
        .collect::<Result<_, _>>()?;
    let zeros = vec![0u8; n];
    Ok((0..ts.size).map(move |episode| {
        let k = match ts.mode {
            TrainMode::Mixed => episode % points.len(),
            TrainMode::PerSnr(k) => k,
        };
        let received =
            transmit(&zeros, points[k], derive(ts.seed, domain::TRAIN_NOISE, episode as u64));
        let llr = channel_llr(&received, points[k]).expect("finite SNR has positive sigma");
        TrainingFrame { episode, ebn0_db: ts.snr_grid[k], llr }
    }))
}

// ---------------------------------------------------------------------
// CSV schemas
// ---------------------------------------------------------------------

pub const FER_CSV_HEADER: &str =
    "code_id,schedule,ebn0_db,esn0_db,frames,frame_errors,fer,ci_lo,ci_hi,mean_iters,mean_msgs";
pub const COMPLEXITY_CSV_HEADER: &str = "schedule,esn0_db,mean_msgs";

/// Renders fer.csv; floats print in shortest round-trip form.
pub fn fer_csv(code_id: &str, runs: &[ScheduleRun]) -> String {
    let mut out = String::from(FER_CSV_HEADER);
    out.push('\n');
    for run in runs {
        for pt in &run.points {
            let (ci_lo, ci_hi) = pt.ci();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                code_id,
                run.schedule,
                pt.point.ebn0_db(),
                pt.point.esn0_db(),
                pt.frames,
                pt.frame_errors,
                pt.fer(),
                ci_lo,
                ci_hi,
                pt.mean_iters(),
                pt.mean_msgs(),
            ));
        }
    }
    out
}

pub fn complexity_csv(table: &ComplexityTable) -> String {
    let mut out = String::from(COMPLEXITY_CSV_HEADER);
    out.push('\n');
    for (schedule, row) in &table.rows {
        for (esn0, msgs) in table.esn0_db.iter().zip(row) {
            out.push_str(&format!("{schedule},{esn0},{msgs}\n"));
        }
    }
    out
}

/// One parsed fer.csv row.
#[derive(Clone, Debug, PartialEq)]
pub struct FerCsvRow {
    pub code_id: String,
    pub schedule: String,
    pub ebn0_db: f64,
    pub esn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_iters: f64,
    pub mean_msgs: f64,
}

fn csv_err(origin: &str, line: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Csv { origin: origin.into(), line, msg: msg.into() }
}

fn split_csv_line<'a, const N: usize>(
    raw: &'a str,
    origin: &str,
    line: usize,
) -> Result<[&'a str; N], HarnessError> {
    let fields: Vec<&str> = raw.split(',').collect();
    fields
        .try_into()
        .map_err(|_| csv_err(origin, line, format!("expected {N} comma-separated fields")))
}

fn parse_field<T: FromStr>(s: &str, origin: &str, line: usize) -> Result<T, HarnessError> {
    s.parse::<T>().map_err(|_| csv_err(origin, line, format!("cannot parse field {s:?}")))
}

pub fn parse_fer_csv(text: &str, origin: &str) -> Result<Vec<FerCsvRow>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == FER_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(csv_err(origin, 1, format!("unexpected header {header:?}")))
        }
        None => return Err(csv_err(origin, 1, "empty file")),
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let line = idx + 1;
        let f: [&str; 11] = split_csv_line(raw, origin, line)?;
        rows.push(FerCsvRow {
            code_id: f[0].into(),
            schedule: f[1].into(),
            ebn0_db: parse_field(f[2], origin, line)?,
            esn0_db: parse_field(f[3], origin, line)?,
            frames: parse_field(f[4], origin, line)?,
            frame_errors: parse_field(f[5], origin, line)?,
            fer: parse_field(f[6], origin, line)?,
            ci_lo: parse_field(f[7], origin, line)?,
            ci_hi: parse_field(f[8], origin, line)?,
            mean_iters: parse_field(f[9], origin, line)?,
            mean_msgs: parse_field(f[10], origin, line)?,
        });
    }
    Ok(rows)
}

/// One parsed complexity.csv row.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityCsvRow {
    pub schedule: String,
    pub esn0_db: f64,
    pub mean_msgs: f64,
}

pub fn parse_complexity_csv(
    text: &str,
    origin: &str,
) -> Result<Vec<ComplexityCsvRow>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == COMPLEXITY_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(csv_err(origin, 1, format!("unexpected header {header:?}")))
        }
        None => return Err(csv_err(origin, 1, "empty file")),
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let line = idx + 1;
        let f: [&str; 3] = split_csv_line(raw, origin, line)?;
        rows.push(ComplexityCsvRow {
            schedule: f[0].into(),
            esn0_db: parse_field(f[1], origin, line)?,
            mean_msgs: parse_field(f[2], origin, line)?,
        });
    }
    Ok(rows)
}

/// Flat-text run record for a completed schedule run.
pub fn run_record_pairs(
    cfg: &ExperimentConfig,
    code: &ConstructedCode,
    run: &ScheduleRun,
) -> Vec<(&'static str, String)> {
    vec![
        ("record.version", env!("CARGO_PKG_VERSION").into()),
        ("record.config_hash", format!("{:016x}", cfg.hash())),
        ("record.code_id", cfg.code_id()),
        ("record.rate", code.rate.to_string()),
        ("record.rank", code.rank.to_string()),
        ("record.full_rank", code.full_rank.to_string()),
        ("record.schedule", run.schedule.name().into()),
        ("record.wall_clock_secs", run.wall_clock_secs.to_string()),
        ("record.points", run.points.len().to_string()),
        ("record.fer", join_display(&run.points.iter().map(FerPoint::fer).collect::<Vec<_>>())),
        (
            "record.frames",
            join_display(&run.points.iter().map(|p| p.frames).collect::<Vec<_>>()),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::ComponentCode;
    use crate::graph::{BaseGraph, GeneralizationPlan};

    fn hamming_graph() -> GeneralizedTannerGraph {
        let base = BaseGraph::new(7, 1, 7, vec![vec![0, 1, 2, 3, 4, 5, 6]]).unwrap();
        let plan = GeneralizationPlan::from_indices(1, vec![0]).unwrap();
        let component = ComponentCode::builtin("hamming74").unwrap();
        GeneralizedTannerGraph::new(base, component, plan).unwrap()
    }

    fn toy_graph() -> GeneralizedTannerGraph {
        let base = BaseGraph::new(
            6,
            2,
            3,
            vec![vec![0, 1, 2], vec![0, 3, 4], vec![1, 3, 5], vec![2, 4, 5]],
        )
        .unwrap();
        let plan = GeneralizationPlan::from_indices(4, vec![]).unwrap();
        let spc = ComponentCode::new("spc-3", 3, 2, vec![vec![1, 1, 1]]).unwrap();
        GeneralizedTannerGraph::new(base, spc, plan).unwrap()
    }

    fn base_cfg() -> ExperimentConfig {
        ExperimentConfig::from_text("base.gamma = 2\nbase.p = 7\nbase.n = 49\n", "test").unwrap()
    }

    // 1. Defaults fill in, and the canonical text round-trips.
    #[test]
    fn config_defaults_and_round_trip() {
        let cfg = base_cfg();
        assert_eq!(cfg.base, BaseSource::Generate { gamma: 2, p: 7, n: 49 });
        assert_eq!(cfg.component, ComponentSource::Builtin("hamming74".into()));
        assert_eq!(cfg.generalization, GeneralizationSource::Fraction(1.0));
        assert_eq!(cfg.snr_grid, vec![1.0, 2.0, 3.0, 4.0, 4.5, 5.0]);
        assert_eq!(cfg.schedules, SchedulerKind::ALL.to_vec());
        assert_eq!(cfg.stopping, StoppingRule { min_frame_errors: 100, max_frames: 1_000_000 });
        assert_eq!(cfg.i_max, 50);
        assert_eq!(cfg.train_size, 180_000);
        assert_eq!(cfg.hyper.alpha, 0.1);
        let text = cfg.to_text();
        let back = ExperimentConfig::from_text(&text, "round").unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    // 2. The hash ignores line order but tracks values.
    #[test]
    fn config_hash_is_canonical() {
        let a = ExperimentConfig::from_text(
            "base.gamma = 2\nbase.p = 7\nbase.n = 49\nmu = 0.5\n",
            "a",
        )
        .unwrap();
        let b = ExperimentConfig::from_text(
            "mu = 0.5\nbase.n = 49\nbase.p = 7\nbase.gamma = 2\n",
            "b",
        )
        .unwrap();
        let c = ExperimentConfig::from_text(
            "base.gamma = 2\nbase.p = 7\nbase.n = 49\nmu = 0.25\n",
            "c",
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    // 3. Unknown, conflicting, and missing keys are all rejected.
    #[test]
    fn config_rejects_bad_inputs() {
        let err = ExperimentConfig::from_text("base.gamma = 2\nbase.p = 7\n", "t").unwrap_err();
        assert!(matches!(err, HarnessError::Config(ConfigError::Missing { .. })));
        let err = ExperimentConfig::from_text(
            "base.alist = x.alist\nbase.gamma = 2\nbase.p = 7\nbase.n = 49\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Config(ConfigError::Exclusive { .. })));
        let err = ExperimentConfig::from_text(
            "base.gamma = 2\nbase.p = 7\nbase.n = 49\nmu = 0.5\nzeta = 0 1\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Config(ConfigError::Exclusive { .. })));
        let err = ExperimentConfig::from_text(
            "base.gamma = 2\nbase.p = 7\nbase.n = 49\nsnr.gird = 1 2\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Config(ConfigError::Unknown { .. })));
        let err = ExperimentConfig::from_text(
            "base.gamma = 2\nbase.p = 7\nbase.n = 49\nschedules = flooding warp\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Config(ConfigError::BadValue { .. })));
        let err = ExperimentConfig::from_text(
            "base.gamma = 2\nbase.p = 7\nbase.n = 49\nmu = 1.5\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Invalid(_)));
    }

    // 4. Wilson interval reference values and containment.
    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-12);
        assert!((hi - 0.0370).abs() < 2e-4, "hi {hi}");
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.0552).abs() < 2e-3, "lo {lo}");
        assert!((hi - 0.1744).abs() < 2e-3, "hi {hi}");
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        for (e, n) in [(0u64, 7u64), (3, 9), (9, 9), (50, 1000)] {
            let (lo, hi) = wilson_interval(e, n);
            let p = e as f64 / n as f64;
            assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    // 5. A noiseless point never errors and converges in one iteration.
    #[test]
    fn noiseless_sweep_is_error_free() {
        let graph = toy_graph();
        let decoder: BpDecoder<f64> = BpDecoder::new(&graph);
        let point = SnrPoint::from_sigma(0.0, 0.5).unwrap();
        let stopping = StoppingRule { min_frame_errors: 5, max_frames: 50 };
        let pts = fer_sweep(&decoder, &[point], 10, &stopping, 1, 2, 0, |_, _| {
            Schedule::Flooding
        })
        .unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].frames, 50);
        assert_eq!(pts[0].frame_errors, 0);
        assert_eq!(pts[0].fer(), 0.0);
        assert_eq!(pts[0].mean_iters(), 1.0);
        assert_eq!(pts[0].msgs_sum, 50 * graph.total_row_edges());
        assert!(pts[0].error_flags.iter().all(|&e| !e));
    }

    // 6. Identical configs agree bitwise across repeats and worker counts.
    #[test]
    fn sweep_is_worker_independent() {
        let graph = hamming_graph();
        let decoder: BpDecoder<f64> = BpDecoder::new(&graph);
        let point = SnrPoint::from_ebn0(1.0, 4.0 / 7.0).unwrap();
        let stopping = StoppingRule { min_frame_errors: 30, max_frames: 2000 };
        let sweep = |workers: usize| {
            fer_sweep(&decoder, &[point], 20, &stopping, 7, 8, workers, |_, seed| {
                Schedule::RandomPerIteration(seed)
            })
            .unwrap()
        };
        let one = sweep(1);
        assert!(one[0].frame_errors >= 30, "real noise should produce errors");
        assert_eq!(one, sweep(2));
        assert_eq!(one, sweep(4));
        assert_eq!(one, sweep(1));
    }

    // 7. Flooding counters satisfy msgs = total_row_edges × iterations.
    #[test]
    fn flooding_counter_identity() {
        let graph = hamming_graph();
        let decoder: BpDecoder<f64> = BpDecoder::new(&graph);
        let point = SnrPoint::from_ebn0(2.0, 4.0 / 7.0).unwrap();
        let stopping = StoppingRule { min_frame_errors: 10, max_frames: 500 };
        let pts =
            fer_sweep(&decoder, &[point], 15, &stopping, 3, 4, 0, |_, _| Schedule::Flooding)
                .unwrap();
        assert_eq!(pts[0].msgs_sum, graph.total_row_edges() * pts[0].iters_sum);
        assert!(
            (pts[0].mean_msgs() - graph.total_row_edges() as f64 * pts[0].mean_iters()).abs()
                < 1e-9
        );
    }

    // 8. Common random numbers: schedules share the channel stream.
    #[test]
    fn schedules_share_noise_streams() {
        let graph = hamming_graph();
        let decoder: BpDecoder<f64> = BpDecoder::new(&graph);
        let points = [
            SnrPoint::from_ebn0(1.0, 4.0 / 7.0).unwrap(),
            SnrPoint::from_ebn0(3.0, 4.0 / 7.0).unwrap(),
        ];
        // min = max forces exactly max_frames on both runs.
        let stopping = StoppingRule { min_frame_errors: 300, max_frames: 300 };
        let flood =
            fer_sweep(&decoder, &points, 15, &stopping, 9, 10, 0, |_, _| Schedule::Flooding)
                .unwrap();
        let random = fer_sweep(&decoder, &points, 15, &stopping, 9, 10, 0, |_, seed| {
            Schedule::RandomPerIteration(seed)
        })
        .unwrap();
        for (a, b) in flood.iter().zip(&random) {
            assert_eq!(a.frames, b.frames);
            assert_ne!(a.noise_digest, 0);
            assert_eq!(a.noise_digest, b.noise_digest);
        }
    }

    // 9. Pairing on common noise narrows the difference interval.
    #[test]
    fn paired_interval_is_narrower() {
        let graph = hamming_graph();
        let decoder: BpDecoder<f64> = BpDecoder::new(&graph);
        let point = SnrPoint::from_ebn0(2.0, 4.0 / 7.0).unwrap();
        let stopping = StoppingRule { min_frame_errors: 1000, max_frames: 1000 };
        let flood =
            fer_sweep(&decoder, &[point], 15, &stopping, 5, 6, 0, |_, _| Schedule::Flooding)
                .unwrap();
        let random = fer_sweep(&decoder, &[point], 15, &stopping, 5, 6, 0, |_, seed| {
            Schedule::RandomPerIteration(seed)
        })
        .unwrap();
        let paired = paired_fer_diff(&flood[0], &random[0]);
        let unpaired = unpaired_diff_half_width(&flood[0], &random[0]);
        assert_eq!(paired.n, 1000);
        assert!(paired.half_width <= unpaired, "{} vs {unpaired}", paired.half_width);
        let self_diff = paired_fer_diff(&flood[0], &flood[0]);
        assert_eq!(self_diff.d_hat, 0.0);
        assert_eq!(self_diff.half_width, 0.0);
    }

    // 10. Complexity tables require matching grids.
    #[test]
    fn complexity_table_shapes() {
        let graph = toy_graph();
        let decoder: BpDecoder<f64> = BpDecoder::new(&graph);
        let stopping = StoppingRule { min_frame_errors: 1, max_frames: 20 };
        let mk = |dbs: &[f64]| {
            let pts: Vec<SnrPoint> =
                dbs.iter().map(|&db| SnrPoint::from_ebn0(db, 0.5).unwrap()).collect();
            let swept =
                fer_sweep(&decoder, &pts, 5, &stopping, 1, 2, 0, |_, _| Schedule::Flooding)
                    .unwrap();
            ScheduleRun { schedule: SchedulerKind::Flooding, points: swept, wall_clock_secs: 0.0 }
        };
        let a = mk(&[1.0, 2.0]);
        let mut b = mk(&[1.0, 2.0]);
        b.schedule = SchedulerKind::RandomSequential;
        let table = complexity_report(&[a.clone(), b]).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.esn0_db.len(), 2);
        let c = mk(&[1.0, 3.0]);
        assert!(matches!(
            complexity_report(&[a, c]),
            Err(HarnessError::MismatchedGrids)
        ));
        assert!(matches!(complexity_report(&[]), Err(HarnessError::MismatchedGrids)));
    }

    // 11. CSV writers and parsers round-trip losslessly.
    #[test]
    fn csv_round_trips() {
        let graph = hamming_graph();
        let decoder: BpDecoder<f64> = BpDecoder::new(&graph);
        let points = [
            SnrPoint::from_ebn0(1.0, 4.0 / 7.0).unwrap(),
            SnrPoint::from_ebn0(2.0, 4.0 / 7.0).unwrap(),
        ];
        let stopping = StoppingRule { min_frame_errors: 5, max_frames: 200 };
        let swept =
            fer_sweep(&decoder, &points, 15, &stopping, 11, 12, 0, |_, _| Schedule::Flooding)
                .unwrap();
        let runs = [ScheduleRun {
            schedule: SchedulerKind::Flooding,
            points: swept,
            wall_clock_secs: 1.0,
        }];
        let text = fer_csv("code-x", &runs);
        let rows = parse_fer_csv(&text, "mem").unwrap();
        assert_eq!(rows.len(), 2);
        for (row, pt) in rows.iter().zip(&runs[0].points) {
            assert_eq!(row.code_id, "code-x");
            assert_eq!(row.schedule, "flooding");
            assert_eq!(row.ebn0_db, pt.point.ebn0_db());
            assert_eq!(row.esn0_db, pt.point.esn0_db());
            assert_eq!(row.frames, pt.frames);
            assert_eq!(row.frame_errors, pt.frame_errors);
            assert_eq!(row.fer, pt.fer());
            assert_eq!((row.ci_lo, row.ci_hi), pt.ci());
            assert_eq!(row.mean_iters, pt.mean_iters());
            assert_eq!(row.mean_msgs, pt.mean_msgs());
        }
        let table = complexity_report(&runs).unwrap();
        let ctext = complexity_csv(&table);
        let crows = parse_complexity_csv(&ctext, "mem").unwrap();
        assert_eq!(crows.len(), 2);
        assert_eq!(crows[0].mean_msgs, table.rows[0].1[0]);
        assert!(parse_fer_csv("bogus\n", "mem").is_err());
        assert!(parse_complexity_csv("", "mem").is_err());
    }

    // 12. Construction reaches full rank on the desk family and reports
    // honest deficiency where full rank is impossible.
    #[test]
    fn construct_code_rank_handling() {
        let mut cfg = base_cfg();
        let built = construct_code(&cfg).unwrap();
        assert!(built.full_rank);
        assert_eq!(built.rank, 42);
        assert_eq!(built.rate.rounded_3dp(), 0.143);
        // Every column has even weight with gamma = 2, so the plain LDPC
        // rows always sum to zero: full rank is unreachable at mu = 0.
        cfg.generalization = GeneralizationSource::Fraction(0.0);
        let built = construct_code(&cfg).unwrap();
        assert!(!built.full_rank);
        assert_eq!(built.attempts, RESEED_LIMIT);
        assert_eq!(built.rank, 13);
        assert!((built.rate.as_f64() - 36.0 / 49.0).abs() < 1e-12);
    }

    // 13. The streamed training set is exactly what training consumes.
    #[test]
    fn training_set_stream_matches_trainer() {
        let ts = TrainingSet {
            mode: TrainMode::Mixed,
            snr_grid: vec![1.0, 3.0, 5.0],
            size: 6,
            seed: 13,
        };
        let frames: Vec<TrainingFrame<f64>> =
            generate_training_set(&ts, 0.5, 6).unwrap().collect();
        assert_eq!(frames.len(), 6);
        let mut per_label = [0usize; 3];
        for frame in &frames {
            let k = ts.snr_grid.iter().position(|&g| g == frame.ebn0_db).unwrap();
            per_label[k] += 1;
            let point = SnrPoint::from_ebn0(frame.ebn0_db, 0.5).unwrap();
            let received = transmit(
                &[0u8; 6],
                point,
                derive(ts.seed, domain::TRAIN_NOISE, frame.episode as u64),
            );
            let expect: Vec<f64> = channel_llr(&received, point).unwrap();
            assert_eq!(frame.llr, expect);
        }
        assert_eq!(per_label, [2, 2, 2]);
        let per = TrainingSet { mode: TrainMode::PerSnr(2), ..ts.clone() };
        let labels: Vec<f64> =
            generate_training_set::<f64>(&per, 0.5, 6).unwrap().map(|f| f.ebn0_db).collect();
        assert!(labels.iter().all(|&db| db == 5.0));
        let bad = TrainingSet { size: 5, ..ts };
        assert!(generate_training_set::<f64>(&bad, 0.5, 6).is_err());
    }

    // 14. Scheduler comparison trains, validates, and sweeps end to end.
    #[test]
    fn compare_schedulers_smoke() {
        let graph = toy_graph();
        let mut cfg = base_cfg();
        cfg.base = BaseSource::Generate { gamma: 2, p: 3, n: 6 };
        cfg.snr_grid = vec![2.0, 4.0];
        cfg.schedules = vec![
            SchedulerKind::Flooding,
            SchedulerKind::RandomSequential,
            SchedulerKind::RlMixed,
            SchedulerKind::RlPerSnr,
        ];
        cfg.i_max = 8;
        cfg.hyper.ell_max = 8;
        cfg.train_size = 40;
        cfg.stopping = StoppingRule { min_frame_errors: 10, max_frames: 400 };
        let missing: TrainedPolicies<f64> = TrainedPolicies::default();
        assert!(matches!(
            compare_schedulers(&cfg, &graph, 0.5, &missing),
            Err(HarnessError::MissingPolicy(_))
        ));
        let policies: TrainedPolicies<f64> = train_policies(&cfg, &graph, 0.5).unwrap();
        assert!(policies.mixed.is_some());
        assert_eq!(policies.per_snr.len(), 2);
        let cmp = compare_schedulers(&cfg, &graph, 0.5, &policies).unwrap();
        assert_eq!(cmp.runs.len(), 4);
        for run in &cmp.runs {
            assert_eq!(run.points.len(), 2);
            for pt in &run.points {
                assert!(pt.frames > 0);
                assert!(pt.msgs_sum > 0);
                assert_eq!(pt.error_flags.len() as u64, pt.frames);
            }
        }
        // Common random numbers across all four schedules.
        for pt_idx in 0..2 {
            let digest = cmp.runs[0].points[pt_idx].noise_digest;
            let frames = cmp.runs[0].points[pt_idx].frames;
            for run in &cmp.runs[1..] {
                let other = &run.points[pt_idx];
                let common = other.frames.min(frames);
                // Digests only comparable when frame counts align.
                if other.frames == frames {
                    assert_eq!(other.noise_digest, digest);
                }
                assert!(common > 0);
            }
        }
        let csv = fer_csv(&cmp.code_id, &cmp.runs);
        assert_eq!(csv.lines().count(), 1 + 4 * 2);
    }

    // 15. Policy validation catches grid and tag mismatches.
    #[test]
    fn policy_validation_errors() {
        let graph = toy_graph();
        let mut cfg = base_cfg();
        cfg.base = BaseSource::Generate { gamma: 2, p: 3, n: 6 };
        cfg.snr_grid = vec![2.0, 4.0];
        cfg.schedules = vec![SchedulerKind::RlPerSnr];
        cfg.train_size = 4;
        cfg.hyper.ell_max = 2;
        let policies: TrainedPolicies<f64> = train_policies(&cfg, &graph, 0.5).unwrap();
        let mut short = policies.clone();
        short.per_snr.pop();
        assert!(matches!(
            short.validate_for(&cfg, &graph),
            Err(HarnessError::PolicyGrid { tables: 1, points: 2 })
        ));
        let mut swapped = policies.clone();
        swapped.per_snr.swap(0, 1);
        assert!(matches!(
            swapped.validate_for(&cfg, &graph),
            Err(HarnessError::PolicyTag { index: 0, .. })
        ));
        let mut wrong_mode = policies;
        wrong_mode.per_snr.clear();
        cfg.schedules = vec![SchedulerKind::RlMixed];
        cfg.train_size = 4;
        let mixed_ts = mixed_training_set(&cfg);
        let outcome: crate::rl::TrainOutcome<f64> =
            crate::rl::train(&graph, 0.5, &mixed_ts, cfg.hyper).unwrap();
        wrong_mode.mixed = Some(outcome.table);
        assert!(wrong_mode.validate_for(&cfg, &graph).is_ok());
    }

    // 16. Atomic writes land complete files.
    #[test]
    fn atomic_write_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_text_atomic(&path, "hello\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "hello\n");
        write_text_atomic(&path, "replaced\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "replaced\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
