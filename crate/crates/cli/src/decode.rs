//! `decode`: run one LLR frame through a chosen schedule and dump the
//! diagnostics (convergence, iterations, message count, schedule trace).

use crate::fail::{CliResult, Failure};
use crate::overlay::{self, Common};
use gldpc_core::alist;
use gldpc_core::component::ComponentCode;
use gldpc_core::harness::construct_code;
use gldpc_core::rl::policy_schedule;
use gldpc_core::seeds::{derive, domain};
use gldpc_core::{Decoder, GeneralizationPlan, GeneralizedTannerGraph, QTable, Schedule};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, clap::ValueEnum)]
pub enum ScheduleArg {
    /// All rows, then all variables, each iteration.
    Flooding,
    /// A fresh uniform check-node order each iteration.
    Random,
    /// Greedy order from a trained Q-table (needs --table).
    Policy,
}

impl ScheduleArg {
    fn name(self) -> &'static str {
        match self {
            ScheduleArg::Flooding => "flooding",
            ScheduleArg::Random => "random",
            ScheduleArg::Policy => "policy",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct DecodeArgs {
    /// LLR input file: whitespace-separated floats; `#` lines are comments.
    #[arg(long, value_name = "FILE")]
    pub llr: PathBuf,

    /// Check-node schedule.
    #[arg(long, value_enum, default_value_t = ScheduleArg::Flooding)]
    pub schedule: ScheduleArg,

    /// Q-table file for the policy schedule.
    #[arg(long, value_name = "FILE", required_if_eq("schedule", "policy"))]
    pub table: Option<PathBuf>,

    /// Decode against construct artifacts: the base alist.
    #[arg(long, value_name = "FILE")]
    pub alist: Option<PathBuf>,

    /// Plan sidecar naming the generalized rows and component.
    #[arg(long, value_name = "FILE", requires = "alist")]
    pub plan: Option<PathBuf>,

    /// Component code override: built-in name or file path.
    #[arg(long, value_name = "NAME|FILE")]
    pub component: Option<String>,

    /// Iteration cap (overrides config `i_max`).
    #[arg(long, value_name = "N")]
    pub i_max: Option<usize>,
}

fn parse_llrs(text: &str, path: &Path) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| {
                Failure::validation(format!(
                    "{}:{}: cannot parse {token:?} as a float",
                    path.display(),
                    idx + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(Failure::validation(format!(
                    "{}:{}: LLR values must be finite, got {value}",
                    path.display(),
                    idx + 1
                )));
            }
            out.push(value);
        }
    }
    if out.is_empty() {
        return Err(Failure::validation(format!("{}: no LLR values", path.display())));
    }
    Ok(out)
}

fn resolve_component(spec: &str) -> CliResult<ComponentCode> {
    let path = Path::new(spec);
    if path.exists() {
        overlay::readable(path)?;
        Ok(ComponentCode::from_file(path)?)
    } else {
        Ok(ComponentCode::builtin(spec)?)
    }
}

/// Single-parity-check fallback for plain LDPC decoding without a plan.
fn spc_component(p: usize) -> CliResult<ComponentCode> {
    Ok(ComponentCode::new(format!("spc-{p}"), p, p - 1, vec![vec![1; p]])?)
}

/// Builds the graph from construct artifacts (alist plus optional plan
/// sidecar). The --component flag beats the sidecar's component record.
fn artifact_graph(args: &DecodeArgs) -> CliResult<GeneralizedTannerGraph> {
    let alist_path = args.alist.as_ref().expect("caller checked --alist");
    overlay::readable(alist_path)?;
    let base = alist::from_file(alist_path)?;
    let (plan, sidecar_component) = match &args.plan {
        Some(path) => {
            overlay::readable(path)?;
            let (plan, name) = GeneralizationPlan::load_sidecar(path)?;
            (plan, Some(name))
        }
        None => (GeneralizationPlan::from_indices(base.m(), Vec::new())?, None),
    };
    let component = match (&args.component, sidecar_component) {
        (Some(spec), _) => resolve_component(spec)?,
        (None, Some(name)) => resolve_component(&name)?,
        (None, None) => spc_component(base.cn_degree())?,
    };
    Ok(GeneralizedTannerGraph::new(base, component, plan)?)
}

pub fn run(common: &Common, args: &DecodeArgs) -> CliResult<()> {
    overlay::readable(&args.llr)?;
    let llr = parse_llrs(&overlay::read_text(&args.llr)?, &args.llr)?;

    let (graph, i_max, schedule_seed) = if args.alist.is_some() {
        let graph = artifact_graph(args)?;
        let seed = common.seed.map(|s| derive(s, domain::SCHEDULE, 0)).unwrap_or(0);
        (graph, args.i_max.unwrap_or(50), seed)
    } else if common.config.is_some() {
        let mut overrides = Vec::new();
        if let Some(component) = &args.component {
            overrides.push(overlay::component_override(component));
        }
        let cfg = overlay::resolve(common, &overrides)?;
        let built = construct_code(&cfg)?;
        (built.graph, args.i_max.unwrap_or(cfg.i_max), cfg.schedule_seed)
    } else {
        return Err(Failure::validation(
            "decode needs a graph: pass --alist (with optional --plan) or --config",
        ));
    };

    if llr.len() != graph.n() {
        return Err(Failure::validation(format!(
            "{}: {} LLR values for a length-{} code",
            args.llr.display(),
            llr.len(),
            graph.n()
        )));
    }

    let table: Option<QTable> = match args.schedule {
        ScheduleArg::Policy => {
            let path = args.table.as_ref().expect("clap enforces --table");
            overlay::readable(path)?;
            let table = QTable::load(path)?;
            table.matches_graph(&graph)?;
            Some(table)
        }
        _ => None,
    };
    let mut schedule = match (&args.schedule, &table) {
        (ScheduleArg::Flooding, _) => Schedule::Flooding,
        (ScheduleArg::Random, _) => Schedule::RandomPerIteration(schedule_seed),
        (ScheduleArg::Policy, Some(t)) => policy_schedule(t),
        (ScheduleArg::Policy, None) => unreachable!("table loaded above"),
    };

    let decoder = Decoder::new(&graph);
    let result = decoder.decode_traced(&llr, &mut schedule, i_max);

    println!("source {} ({} values)", args.llr.display(), llr.len());
    println!("schedule {}", args.schedule.name());
    println!("converged {}", result.converged);
    println!("iterations {}", result.iterations_used);
    println!("messages {}", result.spcn_to_vn_messages);
    let bits: String = result.bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
    println!("bits {bits}");
    match &result.schedule_trace {
        Some(trace) => {
            let cells: Vec<String> = trace.iter().map(usize::to_string).collect();
            println!("trace {}", cells.join(" "));
        }
        None => println!("trace -"),
    }
    Ok(())
}
