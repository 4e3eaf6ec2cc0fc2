//! Tabular Q-learning of check-node schedules.
//!
//! A state is one check node's view of the current hard decisions: the bits
//! of its subgraph variables folded big-endian into an index below 2^p. The
//! agent picks which CN to update next; the reward is the fraction of that
//! CN's bits that match the transmitted word after the update. Training
//! runs on all-zero codewords (channel symmetry makes that sufficient) with
//! a fixed learning rate, discount, and exploration probability.
//!
//! Determinism contract: episode `e` draws its channel noise from the
//! training-set seed and its exploration stream from the hyperparameter
//! seed, both under per-episode derived sub-seeds. Training in chunks via
//! [`resume_train`] is therefore bitwise identical to one uninterrupted
//! run, and a saved table records how many episodes produced it.

use crate::channel::{channel_llr, transmit, ChannelError, SnrPoint};
use crate::decoder::BpDecoder;
use crate::graph::GeneralizedTannerGraph;
use crate::scalar::LlrScalar;
use crate::seeds::{below, derive, domain, rng_for, unit_open};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use thiserror::Error;

/// Hard cap on q/visit entries per table (m·2^p), keeping files under a
/// few hundred megabytes.
const MAX_ENTRIES: u128 = 1 << 24;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("hyperparameters out of range: {0}")]
    HyperRange(String),
    #[error("training set must be non-empty")]
    EmptyTrainingSet,
    #[error("SNR grid must be non-empty")]
    EmptyGrid,
    #[error("mixed-mode size {size} is not divisible by the grid size {k}")]
    SizeNotDivisible { size: usize, k: usize },
    #[error("per-SNR index {index} out of range for a grid of {k}")]
    SnrIndexRange { index: usize, k: usize },
    #[error("subgraph width {p} exceeds the 24-bit state-index limit")]
    StateSpaceTooLarge { p: usize },
    #[error("table of {entries} entries exceeds the size cap")]
    TableTooLarge { entries: u128 },
    #[error("table needs at least one check node")]
    NoActions,
    #[error("every check node has been scheduled")]
    AllScheduled,
    #[error(
        "table shape (m={table_m}, p={table_p}) does not match the graph (m={graph_m}, p={graph_p})"
    )]
    ShapeMismatch { table_m: usize, table_p: usize, graph_m: usize, graph_p: usize },
    #[error("table mode {table:?} does not match the training-set mode {training:?}")]
    ModeMismatch { table: TableMode, training: TableMode },
    #[error("table already holds {done} episodes, beyond the requested {target}")]
    AlreadyTrained { done: u64, target: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("q-table data from {origin}: {msg}")]
    Format { origin: String, msg: String },
    #[error("q-table data from {origin}: checksum mismatch")]
    Checksum { origin: String },
    #[error("q-table file {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Q-learning hyperparameters. `seed` drives the exploration stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub ell_max: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { alpha: 0.1, beta: 0.9, epsilon: 0.6, ell_max: 50, seed: 0 }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |msg: &str| Err(RlError::HyperRange(msg.into()));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.epsilon >= 0.0 && self.epsilon <= 1.0) {
            return bad("epsilon must lie in [0, 1]");
        }
        if self.ell_max == 0 {
            return bad("ell_max must be at least 1");
        }
        Ok(())
    }
}

/// What a table was trained on: the whole grid, or one operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TableMode {
    Mixed,
    PerSnr { ebn0_db: f64 },
}

/// Which episodes a training run generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainMode {
    /// Round-robin over the grid; every point gets size/K episodes.
    Mixed,
    /// All episodes at grid index k.
    PerSnr(usize),
}

/// Training-set description: grid (Eb/N0 dB), episode count, noise seed.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub mode: TrainMode,
    pub snr_grid: Vec<f64>,
    pub size: usize,
    pub seed: u64,
}

impl TrainingSet {
    pub fn validate(&self) -> Result<(), RlError> {
        if self.snr_grid.is_empty() {
            return Err(RlError::EmptyGrid);
        }
        if self.size == 0 {
            return Err(RlError::EmptyTrainingSet);
        }
        let k = self.snr_grid.len();
        match self.mode {
            TrainMode::Mixed if self.size % k != 0 => {
                Err(RlError::SizeNotDivisible { size: self.size, k })
            }
            TrainMode::PerSnr(index) if index >= k => Err(RlError::SnrIndexRange { index, k }),
            _ => Ok(()),
        }
    }

    /// Eb/N0 of episode `e`.
    pub fn episode_ebn0(&self, episode: usize) -> f64 {
        match self.mode {
            TrainMode::Mixed => self.snr_grid[episode % self.snr_grid.len()],
            TrainMode::PerSnr(k) => self.snr_grid[k],
        }
    }

    /// Mode tag for tables produced from this set.
    pub fn table_mode(&self) -> TableMode {
        match self.mode {
            TrainMode::Mixed => TableMode::Mixed,
            TrainMode::PerSnr(k) => TableMode::PerSnr { ebn0_db: self.snr_grid[k] },
        }
    }
}

/// Dense action-value table: one entry per (state below 2^p, CN index).
///
/// Stored state-major in memory (the per-state action row is contiguous);
/// the file format is action-major. Visit counts ride along as diagnostics
/// and are persisted so a round-trip is lossless.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable<T> {
    m: usize,
    p: usize,
    mode: TableMode,
    hyper: Hyperparams,
    episodes: u64,
    q: Vec<T>,
    visits: Vec<u64>,
}

impl<T: LlrScalar> QTable<T> {
    pub fn new(m: usize, p: usize, mode: TableMode, hyper: Hyperparams) -> Result<Self, RlError> {
        hyper.validate()?;
        if m == 0 {
            return Err(RlError::NoActions);
        }
        if p > 24 {
            return Err(RlError::StateSpaceTooLarge { p });
        }
        let entries = (m as u128) << p;
        if entries > MAX_ENTRIES {
            return Err(RlError::TableTooLarge { entries });
        }
        let count = m << p;
        Ok(Self {
            m,
            p,
            mode,
            hyper,
            episodes: 0,
            q: vec![T::zero(); count],
            visits: vec![0; count],
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn state_count(&self) -> usize {
        1 << self.p
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    pub fn hyper(&self) -> Hyperparams {
        self.hyper
    }

    /// Completed training episodes baked into this table.
    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn get(&self, s: usize, a: usize) -> T {
        self.q[s * self.m + a]
    }

    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.visits[s * self.m + a]
    }

    pub fn values(&self) -> &[T] {
        &self.q
    }

    /// Largest action value at state `s`.
    pub fn max_over_actions(&self, s: usize) -> T {
        let row = &self.q[s * self.m..(s + 1) * self.m];
        row.iter().copied().fold(row[0], T::max)
    }

    /// Lowest-index argmax over the eligible actions at per-action states.
    fn argmax<F: Fn(usize) -> bool>(&self, states: &[usize], eligible: F) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for a in 0..self.m {
            if !eligible(a) {
                continue;
            }
            let value = self.get(states[a], a);
            match best {
                Some((_, v)) if value <= v => {}
                _ => best = Some((a, value)),
            }
        }
        best.map(|(a, _)| a)
    }

    /// One Q-learning step:
    /// G(s,a) ← (1−α)·G(s,a) + α·(r + β·max over all actions at s_next).
    pub fn update(&mut self, s: usize, a: usize, reward: f64, s_next: usize) {
        let alpha = T::from_f64_c(self.hyper.alpha);
        let beta = T::from_f64_c(self.hyper.beta);
        let target = T::from_f64_c(reward) + beta * self.max_over_actions(s_next);
        let entry = &mut self.q[s * self.m + a];
        *entry = (T::one() - alpha) * *entry + alpha * target;
        self.visits[s * self.m + a] += 1;
    }

    pub fn matches_graph(&self, graph: &GeneralizedTannerGraph) -> Result<(), RlError> {
        let (graph_m, graph_p) = (graph.m(), graph.base().cn_degree());
        if self.m != graph_m || self.p != graph_p {
            return Err(RlError::ShapeMismatch {
                table_m: self.m,
                table_p: self.p,
                graph_m,
                graph_p,
            });
        }
        Ok(())
    }
}

/// Fraction of positions where the reconstruction matches the truth.
///
/// Both slices must have equal length; unlike file parsing this is a
/// programming contract, so it panics rather than returning an error.
pub fn reward(x_true: &[u8], x_hat: &[u8]) -> f64 {
    assert_eq!(x_true.len(), x_hat.len(), "reward over mismatched lengths");
    assert!(!x_true.is_empty(), "reward over empty vectors");
    let matches = x_true.iter().zip(x_hat).filter(|(t, h)| t == h).count();
    matches as f64 / x_true.len() as f64
}

/// ε-greedy action choice over per-CN states.
///
/// Stream layout per call: one uniform draw decides exploration (explore
/// iff it is ≤ ε, so ε=0 never explores and ε=1 always does); an exploring
/// call draws one more uniform for the action. Exploitation takes the
/// lowest-index argmax of G(s_a, a) over all CNs.
pub fn select_action_egreedy<T: LlrScalar>(
    table: &QTable<T>,
    states: &[usize],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> usize {
    assert_eq!(states.len(), table.m(), "one state per check node");
    if unit_open(rng) <= epsilon {
        below(rng, table.m())
    } else {
        table.argmax(states, |_| true).expect("table has at least one action")
    }
}

/// Greedy inference policy: lowest-index argmax of G(s_a, a) over the CNs
/// not yet scheduled this iteration.
pub fn policy_next_cn<T: LlrScalar>(
    table: &QTable<T>,
    states: &[usize],
    scheduled: &[bool],
) -> Result<usize, RlError> {
    assert_eq!(states.len(), table.m(), "one state per check node");
    assert_eq!(scheduled.len(), table.m(), "one flag per check node");
    table.argmax(states, |a| !scheduled[a]).ok_or(RlError::AllScheduled)
}

/// Wraps a table as a decode schedule.
pub fn policy_schedule<T: LlrScalar>(table: &QTable<T>) -> crate::decoder::Schedule<'_> {
    crate::decoder::Schedule::PolicyDriven(Box::new(move |states, scheduled| {
        policy_next_cn(table, states, scheduled).expect("decode exhausted the CN set")
    }))
}

/// A trained table plus the mean reward of every episode, in order.
#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub table: QTable<T>,
    pub episode_rewards: Vec<f64>,
}

/// Trains a fresh table on `ts` (all-zero codewords at rate `rate`).
pub fn train<T: LlrScalar>(
    graph: &GeneralizedTannerGraph,
    rate: f64,
    ts: &TrainingSet,
    hyper: Hyperparams,
) -> Result<TrainOutcome<T>, RlError> {
    ts.validate()?;
    let mut table = QTable::new(graph.m(), graph.base().cn_degree(), ts.table_mode(), hyper)?;
    let episode_rewards = resume_train(&mut table, graph, rate, ts)?;
    Ok(TrainOutcome { table, episode_rewards })
}

/// Continues training `table` up to `ts.size` episodes, returning the mean
/// rewards of the newly run episodes. Chunked runs reproduce a single run
/// bitwise because every episode derives its own streams.
pub fn resume_train<T: LlrScalar>(
    table: &mut QTable<T>,
    graph: &GeneralizedTannerGraph,
    rate: f64,
    ts: &TrainingSet,
) -> Result<Vec<f64>, RlError> {
    ts.validate()?;
    table.matches_graph(graph)?;
    if table.mode() != ts.table_mode() {
        return Err(RlError::ModeMismatch { table: table.mode(), training: ts.table_mode() });
    }
    let done = table.episodes();
    if done > ts.size as u64 {
        return Err(RlError::AlreadyTrained { done, target: ts.size });
    }
    let hyper = table.hyper();
    let points: Vec<SnrPoint> = ts
        .snr_grid
        .iter()
        .map(|&db| SnrPoint::from_ebn0(db, rate))
        .collect::<Result<_, _>>()?;
    let decoder: BpDecoder<T> = BpDecoder::new(graph);
    let zero_codeword = vec![0u8; graph.n()];
    let zero_subgraph = vec![0u8; graph.base().cn_degree()];
    let mut rewards = Vec::with_capacity(ts.size - done as usize);
    for episode in done as usize..ts.size {
        let point = match ts.mode {
            TrainMode::Mixed => points[episode % points.len()],
            TrainMode::PerSnr(k) => points[k],
        };
        let received =
            transmit(&zero_codeword, point, derive(ts.seed, domain::TRAIN_NOISE, episode as u64));
        let llr: Vec<T> = channel_llr(&received, point)?;
        let mut state = decoder.init_state(&llr);
        let mut explore = rng_for(hyper.seed, domain::EXPLORE, episode as u64);
        let mut reward_sum = 0.0;
        for _step in 0..hyper.ell_max {
            let states = decoder.cn_state_indices(&state);
            let a = select_action_egreedy(table, &states, hyper.epsilon, &mut explore);
            let s = states[a];
            decoder.cn_update(&mut state, a);
            let s_next = decoder.cn_state_index(&state, a);
            let r = reward(&zero_subgraph, &decoder.cn_hard_bits(&state, a));
            table.update(s, a, r, s_next);
            reward_sum += r;
        }
        rewards.push(reward_sum / hyper.ell_max as f64);
        table.episodes += 1;
    }
    Ok(rewards)
}

// ---------------------------------------------------------------------
// Persistence: magic "GQT1", fixed 64-byte header, action-major q entries
// as little-endian f64, action-major visit counts as little-endian u64,
// CRC-32 (IEEE) of the two payload blocks.
// ---------------------------------------------------------------------

const MAGIC: &[u8; 4] = b"GQT1";
/// Identifies the state-bit convention (big-endian fold over ascending
/// variable indices). Tables with another id must not be reused.
const STATE_CONVENTION: u8 = 1;
const HEADER_LEN: usize = 64;

fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in bytes {
        crc ^= u32::from(b);
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xedb8_8320 & mask);
        }
    }
    !crc
}

impl<T: LlrScalar> QTable<T> {
    /// Serializes the table into the versioned binary layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let count = self.q.len();
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * count + 4);
        out.extend_from_slice(MAGIC);
        let (mode_byte, tag_present, tag) = match self.mode {
            TableMode::PerSnr { ebn0_db } => (0u8, 1u8, ebn0_db),
            TableMode::Mixed => (1u8, 0u8, 0.0),
        };
        out.push(mode_byte);
        out.push(STATE_CONVENTION);
        out.push(tag_present);
        out.push(0);
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        out.extend_from_slice(&(self.p as u32).to_le_bytes());
        out.extend_from_slice(&tag.to_le_bytes());
        out.extend_from_slice(&self.hyper.alpha.to_le_bytes());
        out.extend_from_slice(&self.hyper.beta.to_le_bytes());
        out.extend_from_slice(&self.hyper.epsilon.to_le_bytes());
        out.extend_from_slice(&(self.hyper.ell_max as u32).to_le_bytes());
        let episodes = u32::try_from(self.episodes).expect("episode count fits in u32");
        out.extend_from_slice(&episodes.to_le_bytes());
        out.extend_from_slice(&self.hyper.seed.to_le_bytes());
        debug_assert_eq!(out.len(), HEADER_LEN);
        for a in 0..self.m {
            for s in 0..self.state_count() {
                out.extend_from_slice(&self.get(s, a).to_f64_c().to_le_bytes());
            }
        }
        for a in 0..self.m {
            for s in 0..self.state_count() {
                out.extend_from_slice(&self.visits[s * self.m + a].to_le_bytes());
            }
        }
        let crc = crc32(&out[HEADER_LEN..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Parses and validates the binary layout; `origin` labels errors.
    pub fn from_bytes(bytes: &[u8], origin: &str) -> Result<Self, RlError> {
        let fail = |msg: &str| RlError::Format { origin: origin.into(), msg: msg.into() };
        if bytes.len() < HEADER_LEN + 4 {
            return Err(fail("file is shorter than the header"));
        }
        if &bytes[0..4] != MAGIC {
            return Err(fail("bad magic, not a q-table file"));
        }
        let mode_byte = bytes[4];
        if bytes[5] != STATE_CONVENTION {
            return Err(fail("unsupported state-index convention"));
        }
        let tag_present = bytes[6];
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let m = u32_at(8) as usize;
        let p = u32_at(12) as usize;
        if m == 0 {
            return Err(RlError::NoActions);
        }
        if p > 24 {
            return Err(RlError::StateSpaceTooLarge { p });
        }
        let entries = (m as u128) << p;
        if entries > MAX_ENTRIES {
            return Err(RlError::TableTooLarge { entries });
        }
        let mode = match (mode_byte, tag_present) {
            (0, 1) => TableMode::PerSnr { ebn0_db: f64_at(16) },
            (1, 0) => TableMode::Mixed,
            _ => return Err(fail("inconsistent mode and SNR-tag bytes")),
        };
        let hyper = Hyperparams {
            alpha: f64_at(24),
            beta: f64_at(32),
            epsilon: f64_at(40),
            ell_max: u32_at(48) as usize,
            seed: u64_at(56),
        };
        hyper.validate()?;
        let count = m << p;
        let expect = HEADER_LEN + 16 * count + 4;
        if bytes.len() != expect {
            return Err(fail(&format!("expected {expect} bytes, found {}", bytes.len())));
        }
        let payload = &bytes[HEADER_LEN..HEADER_LEN + 16 * count];
        let stored_crc = u32_at(HEADER_LEN + 16 * count);
        if crc32(payload) != stored_crc {
            return Err(RlError::Checksum { origin: origin.into() });
        }
        let mut q = vec![T::zero(); count];
        let mut visits = vec![0u64; count];
        let states = 1usize << p;
        for a in 0..m {
            for s in 0..states {
                let o = HEADER_LEN + 8 * (a * states + s);
                q[s * m + a] = T::from_f64_c(f64_at(o));
                let vo = HEADER_LEN + 8 * count + 8 * (a * states + s);
                visits[s * m + a] = u64_at(vo);
            }
        }
        Ok(Self { m, p, mode, hyper, episodes: u64::from(u32_at(52)), q, visits })
    }

    /// Writes atomically (temp file in the target directory, then rename).
    pub fn save(&self, path: &Path) -> Result<(), RlError> {
        let io_err = |source| RlError::Io { path: path.display().to_string(), source };
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(format!(".tmp{}", std::process::id()));
        let tmp = std::path::PathBuf::from(tmp);
        std::fs::write(&tmp, self.to_bytes()).map_err(io_err)?;
        std::fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<Self, RlError> {
        let bytes = std::fs::read(path)
            .map_err(|source| RlError::Io { path: path.display().to_string(), source })?;
        Self::from_bytes(&bytes, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::ComponentCode;
    use crate::graph::{BaseGraph, GeneralizationPlan, GeneralizedTannerGraph};

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

    fn small_table(m: usize, p: usize) -> QTable<f64> {
        QTable::new(m, p, TableMode::Mixed, Hyperparams::default()).unwrap()
    }

    // 1. Reward is the exact match fraction.
    #[test]
    fn reward_counts_matches() {
        assert_eq!(reward(&[0, 1, 0], &[0, 1, 0]), 1.0);
        assert_eq!(reward(&[0, 1, 0], &[1, 0, 1]), 0.0);
        assert_eq!(reward(&[0; 7], &[0, 0, 0, 0, 1, 1, 1]), 4.0 / 7.0);
    }

    // 2. Hand-iterated Q recursion: 0.1, then 0.19 against a zero s_next.
    #[test]
    fn q_update_matches_hand_iteration() {
        let mut t = small_table(2, 3);
        t.update(2, 1, 1.0, 3);
        assert!((t.get(2, 1) - 0.1).abs() < 1e-15);
        t.update(2, 1, 1.0, 3);
        assert!((t.get(2, 1) - 0.19).abs() < 1e-12);
        let mut z = small_table(2, 3);
        z.update(0, 0, 0.0, 1);
        assert_eq!(z.get(0, 0), 0.0);
        assert_eq!(z.visits(0, 0), 1);
    }

    // 3. The s_next max ranges over all actions, including better ones.
    #[test]
    fn q_update_uses_next_state_max() {
        let mut t = small_table(3, 2);
        t.update(1, 2, 1.0, 1);
        // G(1,2) = 0.1. Updating (1,0) now bootstraps from that max.
        t.update(1, 0, 0.0, 1);
        assert!((t.get(1, 0) - 0.1 * 0.9 * 0.1).abs() < 1e-15);
    }

    // 4. ε=1 explores uniformly (3σ multinomial bounds over 1e5 draws).
    #[test]
    fn full_exploration_is_uniform() {
        let t = small_table(10, 2);
        let states = vec![0usize; 10];
        let mut rng = rng_for(9, domain::EXPLORE, 0);
        let mut counts = [0u32; 10];
        let draws = 100_000;
        for _ in 0..draws {
            counts[select_action_egreedy(&t, &states, 1.0, &mut rng)] += 1;
        }
        let expected = draws as f64 / 10.0;
        let sigma = (draws as f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((f64::from(c) - expected).abs() < 3.0 * sigma, "count {c}");
        }
    }

    // 5. ε=0 is pure exploitation with the lowest-index tie rule.
    #[test]
    fn zero_epsilon_exploits() {
        let mut t = small_table(4, 2);
        let mut rng = rng_for(10, domain::EXPLORE, 0);
        assert_eq!(select_action_egreedy(&t, &[0, 0, 0, 0], 0.0, &mut rng), 0);
        t.update(1, 2, 1.0, 0);
        for _ in 0..20 {
            assert_eq!(select_action_egreedy(&t, &[1, 1, 1, 1], 0.0, &mut rng), 2);
        }
        // Per-action states: each CN is scored at its own state.
        for _ in 0..20 {
            assert_eq!(select_action_egreedy(&t, &[1, 1, 0, 0], 0.0, &mut rng), 0);
        }
    }

    // 6. Greedy scheduling over exclusion sets, checked exhaustively.
    #[test]
    fn policy_matches_brute_force_argmax() {
        let mut t = small_table(3, 2);
        t.update(0, 0, 0.4, 0);
        t.update(0, 1, 0.9, 0);
        t.update(0, 2, 0.6, 0);
        t.update(3, 2, 1.0, 0);
        let states = [0, 0, 3];
        for mask in 0u8..7 {
            let scheduled: Vec<bool> = (0..3).map(|a| mask & (1 << a) != 0).collect();
            let want = (0..3)
                .filter(|&a| !scheduled[a])
                .max_by(|&a, &b| {
                    t.get(states[a], a)
                        .partial_cmp(&t.get(states[b], b))
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            let got = policy_next_cn(&t, &states, &scheduled).unwrap();
            assert_eq!(got, want, "mask {mask:03b}");
        }
        assert!(matches!(
            policy_next_cn(&t, &states, &[true, true, true]),
            Err(RlError::AllScheduled)
        ));
        assert_eq!(policy_next_cn(&t, &states, &[true, false, true]).unwrap(), 1);
        assert_eq!(policy_next_cn(&small_table(3, 2), &states, &[false; 3]).unwrap(), 0);
    }

    // 7. Positive scaling of all entries never changes the greedy choice.
    #[test]
    fn policy_is_scale_invariant() {
        let mut a = small_table(4, 3);
        let mut rng = rng_for(11, domain::EXPLORE, 1);
        for _ in 0..50 {
            let s = below(&mut rng, 8);
            let act = below(&mut rng, 4);
            let r = unit_open(&mut rng);
            a.update(s, act, r, below(&mut rng, 8));
        }
        let mut b = a.clone();
        for v in &mut b.q {
            *v *= 3.5;
        }
        for trial in 0..100 {
            let mut rng = rng_for(12, domain::EXPLORE, trial);
            let states: Vec<usize> = (0..4).map(|_| below(&mut rng, 8)).collect();
            let mask = below(&mut rng, 15) as u8;
            let scheduled: Vec<bool> = (0..4).map(|i| mask & (1 << i) != 0).collect();
            assert_eq!(
                policy_next_cn(&a, &states, &scheduled).unwrap(),
                policy_next_cn(&b, &states, &scheduled).unwrap()
            );
        }
    }

    // 8. A noiseless episode earns reward 1 everywhere it goes.
    #[test]
    fn noiseless_episode_rewards_are_perfect() {
        let graph = toy_graph();
        let ts = TrainingSet {
            mode: TrainMode::PerSnr(0),
            snr_grid: vec![200.0],
            size: 1,
            seed: 3,
        };
        let out: TrainOutcome<f64> =
            train(&graph, 0.5, &ts, Hyperparams { ell_max: 10, ..Default::default() }).unwrap();
        assert_eq!(out.episode_rewards, vec![1.0]);
        assert_eq!(out.table.episodes(), 1);
        let visited: u64 = (0..out.table.state_count())
            .flat_map(|s| (0..4).map(move |a| (s, a)))
            .map(|(s, a)| out.table.visits(s, a))
            .sum();
        assert_eq!(visited, 10);
        for s in 0..out.table.state_count() {
            for a in 0..4 {
                if out.table.visits(s, a) > 0 {
                    assert!(out.table.get(s, a) > 0.0);
                }
            }
        }
    }

    // 9. Invalid training sets are rejected.
    #[test]
    fn training_set_validation() {
        let grid = vec![1.0, 2.0, 3.0, 4.0, 4.5, 5.0];
        let ts =
            TrainingSet { mode: TrainMode::Mixed, snr_grid: grid.clone(), size: 0, seed: 0 };
        assert!(matches!(ts.validate(), Err(RlError::EmptyTrainingSet)));
        let ts = TrainingSet { mode: TrainMode::Mixed, snr_grid: grid.clone(), size: 5, seed: 0 };
        assert!(matches!(ts.validate(), Err(RlError::SizeNotDivisible { size: 5, k: 6 })));
        let ts = TrainingSet { mode: TrainMode::PerSnr(6), snr_grid: grid, size: 10, seed: 0 };
        assert!(matches!(ts.validate(), Err(RlError::SnrIndexRange { index: 6, k: 6 })));
        let ts = TrainingSet { mode: TrainMode::Mixed, snr_grid: vec![], size: 6, seed: 0 };
        assert!(matches!(ts.validate(), Err(RlError::EmptyGrid)));
    }

    // 10. Mixed mode spends exactly size/K episodes on each grid point.
    #[test]
    fn mixed_mode_quotas_are_exact() {
        let ts = TrainingSet {
            mode: TrainMode::Mixed,
            snr_grid: vec![1.0, 2.0, 3.0],
            size: 12,
            seed: 0,
        };
        let mut counts = [0; 3];
        for e in 0..ts.size {
            let db = ts.episode_ebn0(e);
            counts[ts.snr_grid.iter().position(|&g| g == db).unwrap()] += 1;
        }
        assert_eq!(counts, [4, 4, 4]);
    }

    // 11. Chunked training reproduces a single run bitwise.
    #[test]
    fn resume_is_bitwise_identical() {
        let graph = toy_graph();
        let grid = vec![1.0, 3.0];
        let hyper = Hyperparams { ell_max: 8, seed: 5, ..Default::default() };
        let full = TrainingSet { mode: TrainMode::Mixed, snr_grid: grid.clone(), size: 8, seed: 7 };
        let whole: TrainOutcome<f64> = train(&graph, 0.5, &full, hyper).unwrap();
        let half = TrainingSet { size: 4, ..full.clone() };
        let mut chunked: TrainOutcome<f64> = train(&graph, 0.5, &half, hyper).unwrap();
        let more = resume_train(&mut chunked.table, &graph, 0.5, &full).unwrap();
        assert_eq!(chunked.table, whole.table);
        let mut rewards = chunked.episode_rewards.clone();
        rewards.extend(more);
        assert_eq!(rewards, whole.episode_rewards);
    }

    // 12. Entries stay inside the contraction bound [0, 1/(1-beta)].
    #[test]
    fn entries_respect_contraction_bound() {
        let graph = toy_graph();
        let ts = TrainingSet {
            mode: TrainMode::Mixed,
            snr_grid: vec![1.0, 4.0],
            size: 40,
            seed: 2,
        };
        let out: TrainOutcome<f64> =
            train(&graph, 0.5, &ts, Hyperparams { ell_max: 20, ..Default::default() }).unwrap();
        let cap = 1.0 / (1.0 - 0.9);
        for &v in out.table.values() {
            assert!(v.is_finite() && (0.0..=cap).contains(&v), "entry {v}");
        }
    }

    // 13. Round-trip through bytes and files is lossless.
    #[test]
    fn persistence_round_trip() {
        let graph = toy_graph();
        let ts = TrainingSet {
            mode: TrainMode::PerSnr(1),
            snr_grid: vec![1.0, 2.5],
            size: 3,
            seed: 11,
        };
        let out: TrainOutcome<f64> = train(&graph, 0.5, &ts, Hyperparams::default()).unwrap();
        let bytes = out.table.to_bytes();
        let back: QTable<f64> = QTable::from_bytes(&bytes, "mem").unwrap();
        assert_eq!(back, out.table);
        assert_eq!(back.mode(), TableMode::PerSnr { ebn0_db: 2.5 });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.gqt");
        out.table.save(&path).unwrap();
        let loaded: QTable<f64> = QTable::load(&path).unwrap();
        assert_eq!(loaded, out.table);
    }

    // 14. Corruption, truncation, and bad headers are rejected.
    #[test]
    fn persistence_rejects_damage() {
        let table = small_table(2, 3);
        let bytes = table.to_bytes();
        let truncated = &bytes[..bytes.len() - 3];
        assert!(matches!(
            QTable::<f64>::from_bytes(truncated, "mem"),
            Err(RlError::Format { .. })
        ));
        let mut flipped = bytes.clone();
        let mid = HEADER_LEN + 5;
        flipped[mid] ^= 0x40;
        assert!(matches!(
            QTable::<f64>::from_bytes(&flipped, "mem"),
            Err(RlError::Checksum { .. })
        ));
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            QTable::<f64>::from_bytes(&bad_magic, "mem"),
            Err(RlError::Format { .. })
        ));
        let mut bad_convention = bytes;
        bad_convention[5] = 2;
        assert!(matches!(
            QTable::<f64>::from_bytes(&bad_convention, "mem"),
            Err(RlError::Format { .. })
        ));
    }

    // 15. Tables refuse graphs of another shape.
    #[test]
    fn shape_mismatch_is_rejected() {
        let graph = toy_graph();
        let table = small_table(14, 7);
        assert!(matches!(
            table.matches_graph(&graph),
            Err(RlError::ShapeMismatch { table_m: 14, table_p: 7, graph_m: 4, graph_p: 3 })
        ));
        assert!(small_table(4, 3).matches_graph(&graph).is_ok());
    }

    // 16. CRC-32 reference vector.
    #[test]
    fn crc32_reference_vector() {
        assert_eq!(crc32(b"123456789"), 0xcbf4_3926);
    }

    // 17. Q-learning on an enumerable deterministic MDP converges to the
    // value-iteration fixed point through the library's own update and
    // action-selection entry points.
    #[test]
    fn q_learning_matches_value_iteration() {
        // 4 global states, 2 actions; both CNs observe the global state.
        let transition = [[1usize, 2], [2, 3], [3, 0], [0, 1]];
        let reward_of = [[0.0, 0.5], [0.2, 0.1], [0.9, 0.0], [0.3, 0.8]];
        let beta = 0.9;
        let mut oracle = [[0.0f64; 2]; 4];
        loop {
            let mut next = oracle;
            let mut delta: f64 = 0.0;
            for s in 0..4 {
                for a in 0..2 {
                    let t = transition[s][a];
                    let max_next = oracle[t][0].max(oracle[t][1]);
                    next[s][a] = reward_of[s][a] + beta * max_next;
                    delta = delta.max((next[s][a] - oracle[s][a]).abs());
                }
            }
            oracle = next;
            if delta < 1e-12 {
                break;
            }
        }
        let hyper = Hyperparams { epsilon: 0.6, seed: 21, ..Default::default() };
        let mut table: QTable<f64> = QTable::new(2, 2, TableMode::Mixed, hyper).unwrap();
        let mut rng = rng_for(hyper.seed, domain::EXPLORE, 0);
        let mut s = 0usize;
        for _ in 0..100_000 {
            let a = select_action_egreedy(&table, &[s, s], hyper.epsilon, &mut rng);
            let s_next = transition[s][a];
            table.update(s, a, reward_of[s][a], s_next);
            s = s_next;
        }
        for s in 0..4 {
            for a in 0..2 {
                assert!(
                    (table.get(s, a) - oracle[s][a]).abs() < 1e-3,
                    "state {s} action {a}: {} vs {}",
                    table.get(s, a),
                    oracle[s][a]
                );
            }
        }
    }
}
