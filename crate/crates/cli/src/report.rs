//! `report`: render a run directory's fer.csv and complexity.csv as
//! aligned text tables, and emit a gnuplot script with per-schedule data
//! files.

use crate::fail::{CliResult, Failure};
use crate::overlay::{self, Common};
use gldpc_core::harness::{
    parse_complexity_csv, parse_fer_csv, write_text_atomic, ComplexityCsvRow, FerCsvRow,
};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct ReportArgs {
    /// Run directory to render (default: the resolved output dir).
    #[arg(value_name = "DIR")]
    pub dir: Option<PathBuf>,
}

/// First column left-aligned, the rest right-aligned, two-space gutters.
fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let push_row = |cells: &[String], out: &mut String| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if i == 0 {
                out.push_str(&format!("{cell:<width$}", width = widths[i]));
            } else {
                out.push_str(&format!("{cell:>width$}", width = widths[i]));
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    push_row(&header_cells, &mut out);
    for row in rows {
        push_row(row, &mut out);
    }
    out
}

fn fer_table(rows: &[FerCsvRow]) -> String {
    let headers =
        ["schedule", "eb/n0", "es/n0", "frames", "errors", "fer", "ci95_lo", "ci95_hi", "iters", "msgs"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.schedule.clone(),
                format!("{:.2}", r.ebn0_db),
                format!("{:.2}", r.esn0_db),
                r.frames.to_string(),
                r.frame_errors.to_string(),
                format!("{:.3e}", r.fer),
                format!("{:.3e}", r.ci_lo),
                format!("{:.3e}", r.ci_hi),
                format!("{:.2}", r.mean_iters),
                format!("{:.1}", r.mean_msgs),
            ]
        })
        .collect();
    render_table(&headers, &cells)
}

/// Pivot: one row per schedule, one column per Es/N0 point, rows sorted
/// by the cost at the highest point descending, so the cheapest schedule
/// prints last.
fn complexity_table(rows: &[ComplexityCsvRow]) -> String {
    let mut cols: Vec<f64> = Vec::new();
    for row in rows {
        if !cols.contains(&row.esn0_db) {
            cols.push(row.esn0_db);
        }
    }
    cols.sort_by(f64::total_cmp);
    let mut pivot: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    for row in rows {
        if !pivot.iter().any(|(s, _)| *s == row.schedule) {
            pivot.push((row.schedule.clone(), vec![None; cols.len()]));
        }
        let slot = pivot.iter_mut().find(|(s, _)| *s == row.schedule).expect("just inserted");
        let col = cols.iter().position(|&c| c == row.esn0_db).expect("collected above");
        slot.1[col] = Some(row.mean_msgs);
    }
    pivot.sort_by(|a, b| {
        let last = |cells: &[Option<f64>]| cells.last().copied().flatten().unwrap_or(f64::NAN);
        last(&b.1).total_cmp(&last(&a.1))
    });
    let mut headers: Vec<String> = vec!["schedule".into()];
    headers.extend(cols.iter().map(|c| format!("{c:.2}")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let cells: Vec<Vec<String>> = pivot
        .iter()
        .map(|(schedule, row)| {
            let mut out = vec![schedule.clone()];
            out.extend(row.iter().map(|c| match c {
                Some(v) => format!("{v:.1}"),
                None => "-".into(),
            }));
            out
        })
        .collect();
    render_table(&header_refs, &cells)
}

fn plot_script(schedules: &[String]) -> String {
    let mut out = String::from(
        "# Renders fer.png from the fer-<schedule>.dat files in this directory:\n\
         #   gnuplot plot.gp\n\
         set terminal pngcairo size 900,600\n\
         set output \"fer.png\"\n\
         set logscale y\n\
         set grid\n\
         set xlabel \"Es/N0 (dB)\"\n\
         set ylabel \"frame error rate\"\n\
         set key bottom left\n\
         plot \\\n",
    );
    let lines: Vec<String> = schedules
        .iter()
        .map(|s| format!("  \"fer-{s}.dat\" using 1:2:3:4 with yerrorlines title \"{s}\""))
        .collect();
    out.push_str(&lines.join(", \\\n"));
    out.push('\n');
    out
}

fn resolve_dir(common: &Common, args: &ReportArgs) -> CliResult<PathBuf> {
    if let Some(dir) = &args.dir {
        return Ok(dir.clone());
    }
    if let Some(dir) = &common.out_dir {
        return Ok(dir.clone());
    }
    if common.config.is_some() {
        return Ok(overlay::resolve(common, &[])?.output_dir);
    }
    Ok(PathBuf::from("runs"))
}

pub fn run(common: &Common, args: &ReportArgs) -> CliResult<()> {
    let dir = resolve_dir(common, args)?;
    overlay::readable(&dir)?;
    let fer_path = dir.join("fer.csv");
    if !fer_path.exists() {
        return Err(Failure::validation(format!("no runs found in {}", dir.display())));
    }
    let fer = parse_fer_csv(&overlay::read_text(&fer_path)?, &fer_path.display().to_string())?;
    if fer.is_empty() {
        return Err(Failure::validation(format!("no runs found in {}", dir.display())));
    }

    let mut code_ids: Vec<&str> = Vec::new();
    for row in &fer {
        if !code_ids.contains(&row.code_id.as_str()) {
            code_ids.push(&row.code_id);
        }
    }
    if code_ids.len() > 1 {
        eprintln!("warning: fer.csv mixes {} code ids; rendering all rows", code_ids.len());
    }
    println!("code {}", code_ids.join(", "));
    println!();
    println!("frame error rates");
    print!("{}", fer_table(&fer));

    let complexity_path = dir.join("complexity.csv");
    if complexity_path.exists() {
        let rows = parse_complexity_csv(
            &overlay::read_text(&complexity_path)?,
            &complexity_path.display().to_string(),
        )?;
        if !rows.is_empty() {
            println!();
            println!("mean check-to-variable messages per frame");
            print!("{}", complexity_table(&rows));
        }
    } else {
        eprintln!("note: {} not found; message counts omitted", complexity_path.display());
    }

    let mut schedules: Vec<String> = Vec::new();
    for row in &fer {
        if !schedules.contains(&row.schedule) {
            schedules.push(row.schedule.clone());
        }
    }
    for schedule in &schedules {
        let mut points: Vec<&FerCsvRow> = fer.iter().filter(|r| r.schedule == *schedule).collect();
        points.sort_by(|a, b| a.esn0_db.total_cmp(&b.esn0_db));
        let mut dat = String::from("# esn0_db fer ci_lo ci_hi\n");
        for point in points {
            dat.push_str(&format!(
                "{} {} {} {}\n",
                point.esn0_db, point.fer, point.ci_lo, point.ci_hi
            ));
        }
        write_text_atomic(&dir.join(format!("fer-{schedule}.dat")), &dat)?;
    }
    let plot_path = dir.join("plot.gp");
    write_text_atomic(&plot_path, &plot_script(&schedules))?;
    println!();
    println!("wrote {}", plot_path.display());
    Ok(())
}
