//! Independent oracles for the acceptance gate. Everything here
//! recomputes its answer from first principles (dense GF(2) algebra,
//! literal probability-domain enumeration, exhaustive search, fixed-point
//! iteration) so the library is checked against a second route, not
//! against itself.

use gldpc_core::GeneralizedTannerGraph;
use std::collections::BTreeMap;

/// Reduced row echelon form over GF(2): (reduced rows, pivot columns).
fn rref(rows: &[Vec<u8>], n: usize) -> (Vec<Vec<u8>>, Vec<usize>) {
    let mut m: Vec<Vec<u8>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), n, "ragged row");
            r.clone()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..n {
        if r == m.len() {
            break;
        }
        let Some(pr) = (r..m.len()).find(|&i| m[i][c] == 1) else {
            continue;
        };
        m.swap(r, pr);
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] == 1 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x ^= p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn gf2_rank(rows: &[Vec<u8>], n: usize) -> usize {
    rref(rows, n).1.len()
}

/// Basis of the right nullspace: one vector per free column.
pub fn gf2_nullspace(rows: &[Vec<u8>], n: usize) -> Vec<Vec<u8>> {
    let (reduced, pivots) = rref(rows, n);
    let mut basis = Vec::with_capacity(n - pivots.len());
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u8; n];
        v[f] = 1;
        for (row, &pc) in reduced.iter().zip(&pivots) {
            if row[f] == 1 {
                v[pc] = 1;
            }
        }
        basis.push(v);
    }
    basis
}

/// The span element selected by the bits of `mask`.
pub fn gf2_combination(basis: &[Vec<u8>], mask: u64, n: usize) -> Vec<u8> {
    let mut word = vec![0u8; n];
    for (i, v) in basis.iter().enumerate() {
        if mask >> i & 1 == 1 {
            for (w, b) in word.iter_mut().zip(v) {
                *w ^= b;
            }
        }
    }
    word
}

/// Every vector in the span of `basis`, in mask order.
pub fn gf2_span(basis: &[Vec<u8>], n: usize) -> Vec<Vec<u8>> {
    assert!(basis.len() <= 20, "span of 2^{} words is too large to enumerate", basis.len());
    (0..1u64 << basis.len()).map(|mask| gf2_combination(basis, mask, n)).collect()
}

/// Even parity on every raw row.
pub fn in_nullspace(rows: &[Vec<u8>], word: &[u8]) -> bool {
    rows.iter().all(|row| row.iter().zip(word).fold(0u8, |acc, (&h, &w)| acc ^ (h & w)) == 0)
}

/// Parity rows rebuilt by walking the base graph, plan, and component
/// directly: component column t binds to the t-th smallest VN neighbor,
/// and a plain check contributes its single even-parity row.
pub fn expanded_rows(graph: &GeneralizedTannerGraph) -> Vec<Vec<u8>> {
    let n = graph.n();
    let mut out = Vec::new();
    for a in 0..graph.m() {
        let neighbors = graph.cn_neighbors(a);
        if graph.plan().is_gcn(a) {
            for crow in graph.component().rows() {
                let mut row = vec![0u8; n];
                for (&v, &bit) in neighbors.iter().zip(crow) {
                    if bit == 1 {
                        row[v] = 1;
                    }
                }
                out.push(row);
            }
        } else {
            let mut row = vec![0u8; n];
            for &v in neighbors {
                row[v] = 1;
            }
            out.push(row);
        }
    }
    out
}

/// Extrinsic check-node output by literal enumeration: log of the
/// even-parity probability mass over the odd-parity mass across all 2^d
/// bit patterns of the incoming messages.
pub fn boxplus_enumeration(incoming: &[f64]) -> f64 {
    let p_one: Vec<f64> = incoming.iter().map(|&l| 1.0 / (1.0 + l.exp())).collect();
    let mut even = 0.0;
    let mut odd = 0.0;
    for pattern in 0u32..1 << p_one.len() {
        let mut prob = 1.0;
        let mut parity = 0u32;
        for (i, &p) in p_one.iter().enumerate() {
            if pattern >> i & 1 == 1 {
                prob *= p;
                parity ^= 1;
            } else {
                prob *= 1.0 - p;
            }
        }
        if parity == 0 {
            even += prob;
        } else {
            odd += prob;
        }
    }
    (even / odd).ln()
}

/// Exhaustive maximum-likelihood decision: the codeword with the highest
/// correlation against the LLR vector.
pub fn map_decode<'c>(codebook: &'c [Vec<u8>], llr: &[f64]) -> &'c [u8] {
    let correlation = |word: &[u8]| -> f64 {
        word.iter().zip(llr).map(|(&b, &l)| if b == 0 { l } else { -l }).sum()
    };
    codebook
        .iter()
        .max_by(|a, b| correlation(a).total_cmp(&correlation(b)))
        .expect("codebook is non-empty")
        .as_slice()
}

/// One deterministic step of a toy decoding process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub reward: f64,
    pub next_state: usize,
}

/// Solves G(s,a) = r(s,a) + beta * max_b G(s'(s,a), b) by fixed-point
/// iteration. Pairs outside the map are pinned at zero, matching a
/// zero-initialized table that never visits them.
pub fn value_iterate(
    transitions: &BTreeMap<(usize, usize), Transition>,
    actions: usize,
    beta: f64,
) -> BTreeMap<(usize, usize), f64> {
    let mut values: BTreeMap<(usize, usize), f64> =
        transitions.keys().map(|&key| (key, 0.0)).collect();
    for _ in 0..100_000 {
        let mut delta = 0.0f64;
        let snapshot = values.clone();
        for (&(s, a), t) in transitions {
            let best = (0..actions)
                .map(|b| snapshot.get(&(t.next_state, b)).copied().unwrap_or(0.0))
                .fold(f64::NEG_INFINITY, f64::max);
            let updated = t.reward + beta * best;
            delta = delta.max((updated - values[&(s, a)]).abs());
            values.insert((s, a), updated);
        }
        if delta < 1e-12 {
            return values;
        }
    }
    panic!("value iteration did not converge");
}

/// Prints the gate's one-line verdict for a criterion and passes the flag
/// through so the caller can assert on it.
pub fn verdict(number: u32, pass: bool, detail: &str) -> bool {
    println!("criterion {number:02} {} {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
