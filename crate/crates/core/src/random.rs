//! Seeded random construction of (γ,p)-regular base graphs.
//!
//! Start from a shuffled configuration model (every VN contributes γ slots,
//! chopped into m rows of p), then repair conflicts by swapping slots
//! between rows: first duplicate VNs inside a row (mandatory), then VN
//! pairs shared by two rows, which are length-4 cycles (best effort within
//! the retry budget). Slot swaps preserve both regularity invariants, so
//! the result is always (γ,p)-regular when construction succeeds.

use crate::graph::{BaseGraph, GraphError};
use crate::seeds;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Conflict score: duplicate slots inside rows, then duplicated VN pairs
/// across rows (each extra occurrence of a pair is one 4-cycle witness).
fn conflict_score(rows: &[Vec<usize>]) -> (usize, usize) {
    let mut dups = 0;
    let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
    for row in rows {
        let mut sorted = row.clone();
        sorted.sort_unstable();
        dups += sorted.windows(2).filter(|w| w[0] == w[1]).count();
        for i in 0..row.len() {
            for j in i + 1..row.len() {
                let key = (row[i].min(row[j]), row[i].max(row[j]));
                *pairs.entry(key).or_insert(0) += 1;
            }
        }
    }
    let cycles = pairs.values().map(|&c| c - 1).sum();
    (dups, cycles)
}

/// Slots (row, position) involved in the worst conflict class present.
fn offending_slots(rows: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut dup_slots = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        for i in 0..row.len() {
            if row.iter().filter(|&&v| v == row[i]).count() > 1 {
                dup_slots.push((r, i));
            }
        }
    }
    if !dup_slots.is_empty() {
        return dup_slots;
    }
    let mut pair_rows: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (r, row) in rows.iter().enumerate() {
        for i in 0..row.len() {
            for j in i + 1..row.len() {
                let key = (row[i].min(row[j]), row[i].max(row[j]));
                pair_rows.entry(key).or_default().push(r);
            }
        }
    }
    let mut cycle_slots = Vec::new();
    for ((v1, v2), rs) in pair_rows {
        if rs.len() > 1 {
            for &r in &rs {
                for (i, &v) in rows[r].iter().enumerate() {
                    if v == v1 || v == v2 {
                        cycle_slots.push((r, i));
                    }
                }
            }
        }
    }
    // Map iteration order is unstable; canonicalize so the repair search
    // is a pure function of the seed.
    cycle_slots.sort_unstable();
    cycle_slots.dedup();
    cycle_slots
}

fn shuffled_rows(n: usize, gamma: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut slots: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(gamma)).collect();
    seeds::shuffle(rng, &mut slots);
    slots.chunks(p).map(|c| c.to_vec()).collect()
}

/// Builds a (γ,p)-regular base graph on n VNs, deterministic per seed.
///
/// Repeated edges never survive; 4-cycles are removed when the repair
/// search finds a way within its budget, which it reliably does for the
/// sparse graphs this toolkit targets.
pub fn generate_regular_base(
    gamma: usize,
    p: usize,
    n: usize,
    seed: u64,
) -> Result<BaseGraph, GraphError> {
    if gamma == 0 || p == 0 || n == 0 {
        return Err(GraphError::Infeasible("gamma, p, n must be positive".into()));
    }
    if (n * gamma) % p != 0 {
        return Err(GraphError::Infeasible(format!(
            "n*gamma = {} not divisible by p = {p}",
            n * gamma
        )));
    }
    let m = n * gamma / p;
    if p > n {
        // Equivalently gamma > m: a row cannot hold p distinct VNs.
        return Err(GraphError::Infeasible(format!("row degree p = {p} exceeds n = {n}")));
    }
    let mut rng = seeds::rng_for(seed, seeds::domain::CONSTRUCT, 0);
    // Girth 6 needs every row pair to share at most one VN. A degree-γ VN
    // occupies γ(γ−1)/2 row pairs and a degree-p row p(p−1)/2 VN pairs, so
    // n·C(γ,2) ≤ C(m,2) and m·C(p,2) ≤ C(n,2) are necessary; when either
    // fails, settle for a simple graph instead of burning the full budget.
    let cycle_free_possible = n * gamma * (gamma - 1) <= m * (m - 1)
        && m * p * (p - 1) <= n * (n - 1);
    let done = |score: (usize, usize)| score.0 == 0 && (score.1 == 0 || !cycle_free_possible);
    let budget = 20_000 + 400 * n * gamma;
    let restarts = 20;
    let mut best_simple: Option<Vec<Vec<usize>>> = None;
    for _ in 0..restarts {
        let mut rows = shuffled_rows(n, gamma, p, &mut rng);
        let mut score = conflict_score(&rows);
        let mut stale = 0usize;
        for _ in 0..budget {
            if done(score) {
                break;
            }
            let bad = offending_slots(&rows);
            let &(r1, i1) = &bad[seeds::below(&mut rng, bad.len())];
            let r2 = seeds::below(&mut rng, m);
            if r2 == r1 {
                continue;
            }
            let i2 = seeds::below(&mut rng, p);
            let (a, b) = (rows[r1][i1], rows[r2][i2]);
            rows[r1][i1] = b;
            rows[r2][i2] = a;
            let new_score = conflict_score(&rows);
            if new_score <= score {
                stale = if new_score == score { stale + 1 } else { 0 };
                score = new_score;
            } else {
                rows[r1][i1] = a;
                rows[r2][i2] = b;
                stale += 1;
            }
            if stale > 5_000 {
                break;
            }
        }
        if score.0 == 0 && (best_simple.is_none() || score.1 == 0) {
            best_simple = Some(rows.clone());
        }
        if done(score) {
            break;
        }
    }
    match best_simple {
        Some(mut rows) => {
            for row in &mut rows {
                row.sort_unstable();
            }
            BaseGraph::new(n, gamma, p, rows)
        }
        None => Err(GraphError::RetryBudget { gamma, p, n }),
    }
}
