//! Belief propagation on the generalized Tanner graph.
//!
//! Two scheduling families share one message engine. Flooding recomputes
//! every check row from the previous iteration's inputs, then updates all
//! variables simultaneously, checking the syndrome once per iteration.
//! Sequential schedules visit each check node exactly once per iteration
//! via [`BpDecoder::cn_update`]: the node's rows send, then every variable
//! of the subgraph re-sends to all of its rows (border rows included, which
//! do not recompute until scheduled) and refreshes its posterior; the
//! syndrome is checked after every such update, never before the first.
//!
//! Messages, posteriors and channel values are kept within ±[`L_MAX`]. A
//! message at the rail is treated as certainty by the check kernel, so the
//! saturated algebra is closed: certainty ⊞ x = x, certainty ⊞ certainty
//! stays at the rail.

use crate::graph::GeneralizedTannerGraph;
use crate::scalar::LlrScalar;
use crate::seeds::{domain, rng_for, shuffle};
use crate::L_MAX;

/// Clamps one LLR to ±[`L_MAX`]; infinities collapse to the rail.
pub fn clamp_llr<T: LlrScalar>(x: T) -> T {
    let lim = T::from_f64_c(L_MAX);
    x.min(lim).max(-lim)
}

/// Check-node kernel without the final clamp: 2·atanh(∏ tanh(m/2)).
///
/// Inputs at ±L_MAX contribute tanh = ±1 exactly, so an all-certain input
/// set yields ±infinity here (the clamped variant returns the rail) and a
/// single certain input passes the rest of the product through unchanged.
/// An empty input set is vacuous certainty: +infinity.
///
/// Sign and magnitude travel separately, making the kernel odd by
/// construction: negating any one input negates the output bitwise. The
/// library atanh does not guarantee that on its own.
pub fn check_to_var_raw<T: LlrScalar>(incoming: &[T]) -> T {
    let lim = T::from_f64_c(L_MAX);
    let half = T::from_f64_c(0.5);
    let mut negative = false;
    let mut mag = T::one();
    for &m in incoming {
        negative ^= m < T::zero();
        let a = m.abs();
        let t = if a >= lim { T::one() } else { (a * half).tanh() };
        mag = mag * t;
    }
    let out = T::from_f64_c(2.0) * mag.atanh();
    if negative {
        -out
    } else {
        out
    }
}

/// Check-node kernel: 2·atanh(∏ tanh(m/2)), clamped to ±L_MAX.
pub fn check_to_var<T: LlrScalar>(incoming: &[T]) -> T {
    clamp_llr(check_to_var_raw(incoming))
}

fn sum_clamped<T: LlrScalar>(channel: T, incoming: &[T]) -> T {
    let mut acc = channel;
    for &m in incoming {
        acc = acc + m;
    }
    clamp_llr(acc)
}

/// Variable-node kernel: channel LLR plus extrinsic inputs, clamped.
pub fn var_to_check<T: LlrScalar>(channel: T, incoming: &[T]) -> T {
    sum_clamped(channel, incoming)
}

/// A posteriori LLR: channel LLR plus all incoming messages, clamped.
pub fn posterior<T: LlrScalar>(channel: T, incoming: &[T]) -> T {
    sum_clamped(channel, incoming)
}

/// Hard decision: 0 for non-negative posteriors (ties and -0.0 included).
pub fn hard_decision<T: LlrScalar>(posterior: T) -> u8 {
    u8::from(posterior < T::zero())
}

/// Per-decode message state: one flat slot per (row, variable) edge of the
/// expanded graph, plus posterior bookkeeping and the running syndrome.
#[derive(Clone, Debug)]
pub struct MessageState<T> {
    m_vc: Vec<T>,
    m_cv: Vec<T>,
    channel: Vec<T>,
    posterior: Vec<T>,
    hard: Vec<u8>,
    row_parity: Vec<u8>,
    unsat: usize,
    iteration: usize,
    messages_sent: u64,
    scratch: Vec<T>,
}

impl<T: LlrScalar> MessageState<T> {
    pub fn posteriors(&self) -> &[T] {
        &self.posterior
    }

    pub fn hard_bits(&self) -> &[u8] {
        &self.hard
    }

    pub fn channel(&self) -> &[T] {
        &self.channel
    }

    /// Variable-to-check messages, one per expanded-row edge.
    pub fn var_to_check_messages(&self) -> &[T] {
        &self.m_vc
    }

    /// Check-to-variable messages, one per expanded-row edge.
    pub fn check_to_var_messages(&self) -> &[T] {
        &self.m_cv
    }

    /// Iterations started so far (0 before the first).
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Check-to-variable messages sent so far.
    pub fn messages_sent(&self) -> u64 {
        self.messages_sent
    }

    /// True iff every expanded row has even parity under the current bits.
    pub fn syndrome_ok(&self) -> bool {
        self.unsat == 0
    }
}

/// Outcome of one decode call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Hard decisions at exit.
    pub bits: Vec<u8>,
    /// True iff the syndrome was satisfied before the iteration cap.
    pub converged: bool,
    /// Iterations started (a converged run counts its final, possibly
    /// partial, iteration; the trace length exposes partial sweeps).
    pub iterations_used: usize,
    /// Check-to-variable messages computed across the whole run.
    pub spcn_to_vn_messages: u64,
    /// Scheduled CN indices in order, when tracing a sequential schedule.
    pub schedule_trace: Option<Vec<usize>>,
}

/// Policy callback for [`Schedule::PolicyDriven`]: given the per-CN state
/// indices and the already-scheduled flags for the current iteration, picks
/// an unscheduled CN index.
pub type PolicyFn<'a> = Box<dyn FnMut(&[usize], &[bool]) -> usize + 'a>;

/// Scheduling discipline for [`BpDecoder::decode`].
pub enum Schedule<'a> {
    /// All rows, then all variables, once per iteration.
    Flooding,
    /// The same CN permutation every iteration.
    FixedOrder(Vec<usize>),
    /// A fresh uniform CN permutation each iteration, derived from the seed
    /// and the iteration index.
    RandomPerIteration(u64),
    /// CN choice delegated to a policy after every update.
    PolicyDriven(PolicyFn<'a>),
}

impl std::fmt::Debug for Schedule<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Schedule::Flooding => write!(f, "Flooding"),
            Schedule::FixedOrder(o) => f.debug_tuple("FixedOrder").field(o).finish(),
            Schedule::RandomPerIteration(s) => {
                f.debug_tuple("RandomPerIteration").field(s).finish()
            }
            Schedule::PolicyDriven(_) => write!(f, "PolicyDriven(..)"),
        }
    }
}

/// Message-passing engine bound to one expanded graph topology.
///
/// The decoder itself is immutable after construction; all mutable decode
/// state lives in [`MessageState`], so one decoder may serve any number of
/// concurrent decode calls.
#[derive(Clone, Debug)]
pub struct BpDecoder<T> {
    n: usize,
    m: usize,
    row_start: Vec<usize>,
    row_vns: Vec<usize>,
    cn_rows: Vec<(usize, usize)>,
    cn_vns: Vec<Vec<usize>>,
    vn_slots: Vec<Vec<(usize, usize)>>,
    messages_per_update: Vec<u64>,
    total_row_edges: u64,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: LlrScalar> BpDecoder<T> {
    pub fn new(graph: &GeneralizedTannerGraph) -> Self {
        let n = graph.n();
        let m = graph.m();
        let total_rows = graph.total_rows();
        let mut row_start = Vec::with_capacity(total_rows + 1);
        let mut row_vns = Vec::new();
        row_start.push(0);
        for r in 0..total_rows {
            row_vns.extend_from_slice(&graph.rows()[r]);
            row_start.push(row_vns.len());
        }
        let mut vn_slots = vec![Vec::new(); n];
        for r in 0..total_rows {
            for (pos, &v) in graph.rows()[r].iter().enumerate() {
                vn_slots[v].push((row_start[r] + pos, r));
            }
        }
        Self {
            n,
            m,
            row_start,
            row_vns,
            cn_rows: (0..m).map(|a| (graph.row_range(a).start, graph.row_range(a).end)).collect(),
            cn_vns: (0..m).map(|a| graph.cn_neighbors(a).to_vec()).collect(),
            vn_slots,
            messages_per_update: (0..m).map(|a| graph.messages_per_update(a)).collect(),
            total_row_edges: graph.total_row_edges(),
            _scalar: std::marker::PhantomData,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of check nodes (actions).
    pub fn cn_count(&self) -> usize {
        self.m
    }

    pub fn total_row_edges(&self) -> u64 {
        self.total_row_edges
    }

    /// Check-to-variable messages one update of CN `a` sends.
    pub fn messages_per_update(&self, a: usize) -> u64 {
        self.messages_per_update[a]
    }

    /// Fresh state: edge messages seeded with the (clamped) channel values,
    /// check messages zero, posteriors equal to the channel.
    pub fn init_state(&self, channel: &[T]) -> MessageState<T> {
        assert_eq!(channel.len(), self.n, "LLR length {} != n {}", channel.len(), self.n);
        let channel: Vec<T> = channel.iter().map(|&l| clamp_llr(l)).collect();
        let m_vc: Vec<T> = self.row_vns.iter().map(|&v| channel[v]).collect();
        let posterior = channel.clone();
        let hard: Vec<u8> = posterior.iter().map(|&l| hard_decision(l)).collect();
        let total_rows = self.row_start.len() - 1;
        let mut row_parity = vec![0u8; total_rows];
        for r in 0..total_rows {
            let mut parity = 0u8;
            for e in self.row_start[r]..self.row_start[r + 1] {
                parity ^= hard[self.row_vns[e]];
            }
            row_parity[r] = parity;
        }
        let unsat = row_parity.iter().filter(|&&p| p == 1).count();
        let max_degree =
            (0..total_rows).map(|r| self.row_start[r + 1] - self.row_start[r]).max().unwrap_or(0);
        MessageState {
            m_vc,
            m_cv: vec![T::zero(); self.row_vns.len()],
            channel,
            posterior,
            hard,
            row_parity,
            unsat,
            iteration: 0,
            messages_sent: 0,
            scratch: Vec::with_capacity(max_degree),
        }
    }

    /// Row `r` sends to every neighbor: leave-one-out applications of the
    /// check kernel over the incoming messages in ascending edge order, so
    /// engine messages are bitwise what [`check_to_var`] returns.
    fn row_send(&self, state: &mut MessageState<T>, r: usize) {
        let (lo, hi) = (self.row_start[r], self.row_start[r + 1]);
        let mut scratch = std::mem::take(&mut state.scratch);
        for e in lo..hi {
            scratch.clear();
            scratch.extend((lo..hi).filter(|&e2| e2 != e).map(|e2| state.m_vc[e2]));
            state.m_cv[e] = check_to_var(&scratch);
        }
        state.scratch = scratch;
    }

    /// Variable `v` refreshes its posterior (maintaining the running
    /// syndrome) and re-sends to all of its rows.
    fn vn_send(&self, state: &mut MessageState<T>, v: usize) {
        let slots = &self.vn_slots[v];
        let mut scratch = std::mem::take(&mut state.scratch);
        scratch.clear();
        scratch.extend(slots.iter().map(|&(e, _)| state.m_cv[e]));
        let post = posterior(state.channel[v], &scratch);
        state.posterior[v] = post;
        let bit = hard_decision(post);
        if bit != state.hard[v] {
            state.hard[v] = bit;
            for &(_, r) in slots {
                state.unsat = if state.row_parity[r] == 1 {
                    state.unsat - 1
                } else {
                    state.unsat + 1
                };
                state.row_parity[r] ^= 1;
            }
        }
        for i in 0..slots.len() {
            scratch.clear();
            scratch.extend(
                slots.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &(e, _))| state.m_cv[e]),
            );
            state.m_vc[slots[i].0] = var_to_check(state.channel[v], &scratch);
        }
        state.scratch = scratch;
    }

    /// One sequential update of CN `a`: its rows send, then every variable
    /// of the subgraph re-sends to all of its rows and refreshes its
    /// posterior. Border CNs receive fresh inputs but do not recompute.
    pub fn cn_update(&self, state: &mut MessageState<T>, a: usize) {
        assert!(a < self.m, "CN index {a} out of range 0..{}", self.m);
        let (r0, r1) = self.cn_rows[a];
        for r in r0..r1 {
            self.row_send(state, r);
        }
        for i in 0..self.cn_vns[a].len() {
            self.vn_send(state, self.cn_vns[a][i]);
        }
        state.messages_sent += self.messages_per_update[a];
    }

    /// One flooding iteration: every row sends from the previous
    /// iteration's inputs, then every variable updates simultaneously.
    pub fn flood_iteration(&self, state: &mut MessageState<T>) {
        let total_rows = self.row_start.len() - 1;
        for r in 0..total_rows {
            self.row_send(state, r);
        }
        for v in 0..self.n {
            self.vn_send(state, v);
        }
        state.messages_sent += self.total_row_edges;
    }

    /// Hard decisions of CN `a`'s subgraph variables, ascending by index.
    pub fn cn_hard_bits(&self, state: &MessageState<T>, a: usize) -> Vec<u8> {
        self.cn_vns[a].iter().map(|&v| state.hard[v]).collect()
    }

    /// State index of CN `a`: its subgraph hard bits folded big-endian (the
    /// bit of the smallest variable index is the most significant).
    pub fn cn_state_index(&self, state: &MessageState<T>, a: usize) -> usize {
        self.cn_vns[a].iter().fold(0, |s, &v| (s << 1) | state.hard[v] as usize)
    }

    /// State indices of all CNs under the current hard decisions.
    pub fn cn_state_indices(&self, state: &MessageState<T>) -> Vec<usize> {
        (0..self.m).map(|a| self.cn_state_index(state, a)).collect()
    }

    /// Runs BP to convergence or `i_max` iterations.
    pub fn decode(&self, channel: &[T], schedule: &mut Schedule<'_>, i_max: usize) -> DecodeResult {
        self.decode_impl(channel, schedule, i_max, false)
    }

    /// As [`decode`](Self::decode), recording the scheduled CN order for
    /// sequential schedules (flooding has no order to record).
    pub fn decode_traced(
        &self,
        channel: &[T],
        schedule: &mut Schedule<'_>,
        i_max: usize,
    ) -> DecodeResult {
        self.decode_impl(channel, schedule, i_max, true)
    }

    fn decode_impl(
        &self,
        channel: &[T],
        schedule: &mut Schedule<'_>,
        i_max: usize,
        want_trace: bool,
    ) -> DecodeResult {
        if let Schedule::FixedOrder(order) = schedule {
            let mut seen = vec![false; self.m];
            assert_eq!(order.len(), self.m, "fixed order must cover all {} CNs", self.m);
            for &a in order.iter() {
                assert!(a < self.m && !seen[a], "fixed order is not a permutation");
                seen[a] = true;
            }
        }
        let mut state = self.init_state(channel);
        if let Schedule::Flooding = schedule {
            // No syndrome check before the first iteration.
            while state.iteration < i_max {
                state.iteration += 1;
                self.flood_iteration(&mut state);
                if state.unsat == 0 {
                    break;
                }
            }
            let converged = state.unsat == 0 && state.iteration > 0;
            return DecodeResult {
                converged,
                iterations_used: state.iteration,
                spcn_to_vn_messages: state.messages_sent,
                bits: state.hard,
                schedule_trace: None,
            };
        }

        let mut trace = want_trace.then(Vec::new);
        let mut converged = false;
        'sweeps: while state.iteration < i_max {
            state.iteration += 1;
            let order: Option<Vec<usize>> = match schedule {
                Schedule::FixedOrder(o) => Some(o.clone()),
                Schedule::RandomPerIteration(seed) => {
                    let mut o: Vec<usize> = (0..self.m).collect();
                    shuffle(
                        &mut rng_for(*seed, domain::SCHEDULE, (state.iteration - 1) as u64),
                        &mut o,
                    );
                    Some(o)
                }
                Schedule::PolicyDriven(_) => None,
                Schedule::Flooding => unreachable!(),
            };
            let mut scheduled = vec![false; self.m];
            for step in 0..self.m {
                let a = match (&order, &mut *schedule) {
                    (Some(o), _) => o[step],
                    (None, Schedule::PolicyDriven(pick)) => {
                        let states = self.cn_state_indices(&state);
                        let a = pick(&states, &scheduled);
                        assert!(
                            a < self.m && !scheduled[a],
                            "policy returned an invalid CN index {a}"
                        );
                        a
                    }
                    _ => unreachable!(),
                };
                scheduled[a] = true;
                self.cn_update(&mut state, a);
                if let Some(t) = trace.as_mut() {
                    t.push(a);
                }
                if state.unsat == 0 {
                    converged = true;
                    break 'sweeps;
                }
            }
        }
        DecodeResult {
            converged,
            iterations_used: state.iteration,
            spcn_to_vn_messages: state.messages_sent,
            bits: state.hard,
            schedule_trace: trace,
        }
    }
}
