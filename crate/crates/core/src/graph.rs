//! Generalized Tanner graphs.
//!
//! A base graph is a (γ,p)-regular bipartite graph between n variable nodes
//! (VNs) and m constraint nodes (CNs): every VN touches γ CNs and every CN
//! touches p VNs. A generalization plan picks a subset of CNs and upgrades
//! each from a single parity check (SPCN) to a generalized constraint node
//! (GCN) enforcing a `[p, k]` component code over its p neighbors. A GCN
//! contributes z = p − k parity rows: row j of the component matrix
//! activates the t-th smallest neighbor wherever column t is 1. The
//! expanded parity-check matrix stacks every row of every CN and determines
//! the code rate (n − rank)/n.

use crate::component::ComponentCode;
use crate::gf2::{self, BitRow};
use crate::seeds;
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

/// Construction and validation errors for graphs and plans.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge balance m*p = n*gamma violated: m={m}, p={p}, n={n}, gamma={gamma}")]
    EdgeBalance { n: usize, m: usize, gamma: usize, p: usize },
    #[error("row {row} must list exactly {p} distinct ascending VN indices below {n}")]
    BadRow { row: usize, p: usize, n: usize },
    #[error("VN {vn} appears in {got} rows, expected {expected}")]
    IrregularVn { vn: usize, got: usize, expected: usize },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("retry budget exhausted without a simple graph (gamma={gamma}, p={p}, n={n})")]
    RetryBudget { gamma: usize, p: usize, n: usize },
    #[error("GCN fraction {0} outside [0, 1]")]
    FractionRange(f64),
    #[error("plan index {index} out of range for m={m}")]
    PlanIndexRange { index: usize, m: usize },
    #[error("plan indices must be strictly ascending and distinct")]
    PlanIndexOrder,
    #[error("plan covers m={plan_m} CNs but the base graph has m={base_m}")]
    PlanSizeMismatch { plan_m: usize, base_m: usize },
    #[error("component length {component} does not match CN degree {p}")]
    ComponentLengthMismatch { component: usize, p: usize },
    #[error("plan file {path}: {msg}")]
    PlanFile { path: String, msg: String },
}

/// (γ,p)-regular base graph: m parity rows over n variable nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGraph {
    n: usize,
    m: usize,
    vn_degree: usize,
    cn_degree: usize,
    rows: Vec<Vec<usize>>,
}

impl BaseGraph {
    /// Validates regularity: every row holds `p` distinct ascending VN
    /// indices, every VN appears in exactly `gamma` rows.
    pub fn new(
        n: usize,
        gamma: usize,
        p: usize,
        rows: Vec<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let m = rows.len();
        if n == 0 || gamma == 0 || p == 0 || m == 0 || m * p != n * gamma {
            return Err(GraphError::EdgeBalance { n, m, gamma, p });
        }
        let mut vn_counts = vec![0usize; n];
        for (i, row) in rows.iter().enumerate() {
            let ascending = row.windows(2).all(|w| w[0] < w[1]);
            if row.len() != p || !ascending || row.iter().any(|&v| v >= n) {
                return Err(GraphError::BadRow { row: i, p, n });
            }
            for &v in row {
                vn_counts[v] += 1;
            }
        }
        if let Some(vn) = vn_counts.iter().position(|&c| c != gamma) {
            return Err(GraphError::IrregularVn { vn, got: vn_counts[vn], expected: gamma });
        }
        Ok(BaseGraph { n, m, vn_degree: gamma, cn_degree: p, rows })
    }

    /// Number of variable nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of constraint nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    /// VN degree γ.
    pub fn vn_degree(&self) -> usize {
        self.vn_degree
    }

    /// CN degree p.
    pub fn cn_degree(&self) -> usize {
        self.cn_degree
    }

    /// CN adjacency rows, each ascending.
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Per-VN list of incident CN indices, ascending.
    pub fn vn_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::with_capacity(self.vn_degree); self.n];
        for (c, row) in self.rows.iter().enumerate() {
            for &v in row {
                adj[v].push(c);
            }
        }
        adj
    }

    /// True when two rows share at least two VNs (a length-4 cycle).
    pub fn has_four_cycle(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for row in &self.rows {
            for i in 0..row.len() {
                for j in i + 1..row.len() {
                    if !seen.insert((row[i], row[j])) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Which CNs become generalized constraint nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizationPlan {
    m: usize,
    gcn_indices: Vec<usize>,
    spcn_indices: Vec<usize>,
}

impl GeneralizationPlan {
    /// Plan from an explicit ascending list of GCN indices.
    pub fn from_indices(m: usize, gcn_indices: Vec<usize>) -> Result<Self, GraphError> {
        if let Some(&index) = gcn_indices.iter().find(|&&i| i >= m) {
            return Err(GraphError::PlanIndexRange { index, m });
        }
        if !gcn_indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(GraphError::PlanIndexOrder);
        }
        let spcn_indices = (0..m).filter(|i| gcn_indices.binary_search(i).is_err()).collect();
        Ok(GeneralizationPlan { m, gcn_indices, spcn_indices })
    }

    /// Seeded uniform choice of `round(fraction * m)` GCNs (ties to even),
    /// drawn without replacement.
    pub fn select(m: usize, fraction: f64, seed: u64) -> Result<Self, GraphError> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(GraphError::FractionRange(fraction));
        }
        if m == 0 {
            return Err(GraphError::Infeasible("m = 0".into()));
        }
        let g = (fraction * m as f64).round_ties_even() as usize;
        let mut pool: Vec<usize> = (0..m).collect();
        let mut rng = seeds::rng_for(seed, seeds::domain::CONSTRUCT, 1);
        // Partial Fisher-Yates: the first g slots end up a uniform sample.
        for i in 0..g.min(m.saturating_sub(1)) {
            let j = i + seeds::below(&mut rng, m - i);
            pool.swap(i, j);
        }
        let mut gcn_indices: Vec<usize> = pool[..g].to_vec();
        gcn_indices.sort_unstable();
        Self::from_indices(m, gcn_indices)
    }

    /// Total CN count the plan covers.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of GCNs.
    pub fn g(&self) -> usize {
        self.gcn_indices.len()
    }

    /// Realized GCN fraction g/m.
    pub fn gcn_fraction(&self) -> f64 {
        self.g() as f64 / self.m as f64
    }

    /// Ascending GCN indices.
    pub fn gcn_indices(&self) -> &[usize] {
        &self.gcn_indices
    }

    /// Ascending indices of CNs that stay single parity checks.
    pub fn spcn_indices(&self) -> &[usize] {
        &self.spcn_indices
    }

    /// True when CN `i` is generalized.
    pub fn is_gcn(&self, i: usize) -> bool {
        self.gcn_indices.binary_search(&i).is_ok()
    }

    /// Plan sidecar text (`gldpc-plan v1`).
    pub fn to_sidecar(&self, component_name: &str) -> String {
        let mut out = String::from("gldpc-plan v1\n");
        out.push_str(&format!("m {}\n", self.m));
        out.push_str(&format!("component {component_name}\n"));
        out.push_str(&format!("mu {}\n", self.gcn_fraction()));
        let cells: Vec<String> = self.gcn_indices.iter().map(usize::to_string).collect();
        out.push_str(&format!("zeta {}\n", cells.join(" ")).replace("zeta \n", "zeta\n"));
        out
    }

    /// Parses a plan sidecar; returns the plan and the component-code name.
    pub fn from_sidecar(text: &str, source: &str) -> Result<(Self, String), GraphError> {
        let err = |msg: String| GraphError::PlanFile { path: source.to_string(), msg };
        let mut lines = text.lines();
        let version = lines.next().unwrap_or("").trim();
        if version != "gldpc-plan v1" {
            return Err(err(format!("unsupported version line {version:?}")));
        }
        let mut m = None;
        let mut component = None;
        let mut mu = None;
        let mut zeta = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line.trim(), ""));
            match key {
                "m" => {
                    m = Some(
                        rest.trim()
                            .parse::<usize>()
                            .map_err(|_| err(format!("bad m value {rest:?}")))?,
                    )
                }
                "component" => component = Some(rest.trim().to_string()),
                "mu" => {
                    mu = Some(
                        rest.trim()
                            .parse::<f64>()
                            .map_err(|_| err(format!("bad mu value {rest:?}")))?,
                    )
                }
                "zeta" => {
                    zeta = Some(
                        rest.split_whitespace()
                            .map(|t| t.parse::<usize>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|_| err("bad zeta list".into()))?,
                    )
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let m = m.ok_or_else(|| err("missing m".into()))?;
        let component = component.ok_or_else(|| err("missing component".into()))?;
        let zeta = zeta.ok_or_else(|| err("missing zeta".into()))?;
        let plan = Self::from_indices(m, zeta)
            .map_err(|e| err(format!("invalid zeta list: {e}")))?;
        if let Some(mu) = mu {
            if (mu - plan.gcn_fraction()).abs() > 1e-9 {
                return Err(err(format!(
                    "mu {} inconsistent with zeta ({} of {})",
                    mu,
                    plan.g(),
                    m
                )));
            }
        }
        Ok((plan, component))
    }

    /// Reads a plan sidecar file.
    pub fn load_sidecar(path: &Path) -> Result<(Self, String), GraphError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| GraphError::PlanFile { path: display.clone(), msg: e.to_string() })?;
        Self::from_sidecar(&text, &display)
    }
}

/// Constraint-node kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnKind {
    /// Single parity check: one all-neighbors row.
    Spcn,
    /// Generalized node: z = p − k component-code rows.
    Gcn,
}

/// Base graph plus plan plus component code, with every CN lowered to its
/// parity rows. Row indices are global: CN `a` owns the contiguous range
/// `row_range(a)`.
#[derive(Clone, Debug)]
pub struct GeneralizedTannerGraph {
    base: BaseGraph,
    component: ComponentCode,
    plan: GeneralizationPlan,
    rows: Vec<Vec<usize>>,
    cn_row_start: Vec<usize>,
}

impl GeneralizedTannerGraph {
    /// Lowers each planned CN to its component-code rows; the rest keep a
    /// single all-ones row. Column t of the component matrix maps to the
    /// t-th smallest VN neighbor.
    pub fn new(
        base: BaseGraph,
        component: ComponentCode,
        plan: GeneralizationPlan,
    ) -> Result<Self, GraphError> {
        if plan.m() != base.m() {
            return Err(GraphError::PlanSizeMismatch { plan_m: plan.m(), base_m: base.m() });
        }
        if component.length() != base.cn_degree() {
            return Err(GraphError::ComponentLengthMismatch {
                component: component.length(),
                p: base.cn_degree(),
            });
        }
        let mut rows = Vec::new();
        let mut cn_row_start = Vec::with_capacity(base.m() + 1);
        for (a, neighbors) in base.rows().iter().enumerate() {
            cn_row_start.push(rows.len());
            if plan.is_gcn(a) {
                for hc_row in component.rows() {
                    let active: Vec<usize> = neighbors
                        .iter()
                        .zip(hc_row)
                        .filter(|(_, &bit)| bit == 1)
                        .map(|(&v, _)| v)
                        .collect();
                    rows.push(active);
                }
            } else {
                rows.push(neighbors.clone());
            }
        }
        cn_row_start.push(rows.len());
        Ok(GeneralizedTannerGraph { base, component, plan, rows, cn_row_start })
    }

    /// The underlying base graph.
    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    /// The component code used at GCNs.
    pub fn component(&self) -> &ComponentCode {
        &self.component
    }

    /// The generalization plan.
    pub fn plan(&self) -> &GeneralizationPlan {
        &self.plan
    }

    /// Variable-node count.
    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Constraint-node count.
    pub fn m(&self) -> usize {
        self.base.m()
    }

    /// Kind of CN `a`.
    pub fn cn_kind(&self, a: usize) -> CnKind {
        if self.plan.is_gcn(a) {
            CnKind::Gcn
        } else {
            CnKind::Spcn
        }
    }

    /// All parity rows, globally indexed; each lists its VNs ascending.
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Global row range owned by CN `a`.
    pub fn row_range(&self, a: usize) -> std::ops::Range<usize> {
        self.cn_row_start[a]..self.cn_row_start[a + 1]
    }

    /// The p VN neighbors of CN `a`, ascending.
    pub fn cn_neighbors(&self, a: usize) -> &[usize] {
        &self.base.rows()[a]
    }

    /// Total parity-row count: m + g·(p − k − 1).
    pub fn total_rows(&self) -> usize {
        self.rows.len()
    }

    /// Row→VN messages sent by one update of CN `a`: the summed weight of
    /// its rows.
    pub fn messages_per_update(&self, a: usize) -> u64 {
        self.row_range(a).map(|r| self.rows[r].len() as u64).sum()
    }

    /// Row→VN messages sent by one flooding iteration.
    pub fn total_row_edges(&self) -> u64 {
        self.rows.iter().map(|r| r.len() as u64).sum()
    }

    /// True when every parity row has even parity over `bits`.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        assert_eq!(bits.len(), self.n(), "bit vector length mismatch");
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ bits[v]) == 0)
    }

    /// Stacks every parity row into a bit matrix.
    pub fn expand_parity_matrix(&self) -> ExpandedParityMatrix {
        let n = self.n();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut bits = BitRow::zeros(n);
                for &v in row {
                    bits.set(v);
                }
                bits
            })
            .collect();
        ExpandedParityMatrix { rows, n, rank: OnceLock::new() }
    }
}

/// Dense-rank view of the full parity-check matrix.
#[derive(Clone, Debug)]
pub struct ExpandedParityMatrix {
    rows: Vec<BitRow>,
    n: usize,
    rank: OnceLock<usize>,
}

impl ExpandedParityMatrix {
    /// Parity rows as bit rows.
    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    /// Number of parity rows.
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Codeword length n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// GF(2) row rank, computed on first use.
    pub fn rank(&self) -> usize {
        *self.rank.get_or_init(|| gf2::rank(&self.rows))
    }

    /// True when the rank equals the row count.
    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.row_count()
    }

    /// Exact code rate (n − rank)/n.
    pub fn rate(&self) -> CodeRate {
        CodeRate { numerator: self.n - self.rank(), denominator: self.n }
    }

    /// True when `bits` lies in the nullspace of every row.
    pub fn in_nullspace(&self, bits: &[u8]) -> bool {
        self.rows.iter().all(|r| !r.dot_parity(bits))
    }
}

/// Exact rational code rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeRate {
    pub numerator: usize,
    pub denominator: usize,
}

impl CodeRate {
    /// Rate as a float.
    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Rate rounded to three decimals, the report precision.
    pub fn rounded_3dp(&self) -> f64 {
        (self.as_f64() * 1000.0).round() / 1000.0
    }
}

impl std::fmt::Display for CodeRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{} = {:.3}", self.numerator, self.denominator, self.as_f64())
    }
}
