use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use comir_diag::io::{fmt_f64, pcc_table, CsvTable, MetricName, RunSummary};
use comir_diag::metrics::median;
use comir_diag::{Error, Result};

use crate::Context;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output directories of earlier runs, in report order.
    #[arg(long = "run", value_name = "DIR", required = true, num_args = 1..)]
    pub runs: Vec<PathBuf>,
}

/// One run's single-row summaries flattened to `file_stem.column` keys,
/// plus `mean_<metric>` from the metric aggregates.
fn collect(dir: &Path) -> Result<(Vec<(String, String)>, RunSummary)> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir)
        .map_err(|e| Error::Domain(format!("cannot read run {}: {e}", dir.display())))?
    {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if name.ends_with("_summary.csv") || name.ends_with("_collapse.csv") {
            names.push(name);
        }
    }
    names.sort();
    let mut cells = Vec::new();
    let mut summary = RunSummary {
        run: dir.display().to_string(),
        ..Default::default()
    };
    for name in names {
        let t = CsvTable::read(&dir.join(&name))?;
        let [row] = t.rows.as_slice() else {
            log::warn!(
                "{}: expected one data row, skipping",
                dir.join(&name).display()
            );
            continue;
        };
        let stem = name.trim_end_matches(".csv");
        for (h, v) in t.header.iter().zip(row) {
            cells.push((format!("{stem}.{h}"), v.clone()));
        }
        if name == "registration_summary.csv" {
            summary.rsr = t.f64_column("rsr")?[0];
        }
    }
    let agg = dir.join("metrics_aggregates.csv");
    if agg.exists() {
        let t = CsvTable::read(&agg)?;
        for r in t.rows.iter().filter(|r| r[0] == "mean") {
            if let Ok(m) = r[1].parse::<MetricName>() {
                let v: f64 = r[2].parse().map_err(|_| {
                    Error::Domain(format!("{}: invalid mean '{}'", agg.display(), r[2]))
                })?;
                summary.metric_means.insert(m, v);
                cells.push((format!("mean_{m}"), r[2].clone()));
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::Domain(format!(
            "{} holds no run summaries",
            dir.display()
        )));
    }
    Ok((cells, summary))
}

pub fn run(ctx: &Context, args: &ReportArgs) -> Result<()> {
    let mut columns: Vec<String> = Vec::new();
    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    for dir in &args.runs {
        let (cells, summary) = collect(dir)?;
        for (k, _) in &cells {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
        runs.push(cells.into_iter().collect::<BTreeMap<_, _>>());
        summaries.push(summary);
    }

    let mut table =
        CsvTable::new(std::iter::once("run".to_string()).chain(columns.iter().cloned()));
    for (dir, cells) in args.runs.iter().zip(&runs) {
        let mut row = vec![dir.display().to_string()];
        row.extend(
            columns
                .iter()
                .map(|c| cells.get(c).cloned().unwrap_or_default()),
        );
        table.push(row);
    }
    table.write(&ctx.out("report_runs.csv"))?;

    // Mean and median across runs of every numeric column.
    let mut across = CsvTable::new(["column", "runs", "mean", "median"]);
    for c in &columns {
        let vals: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.get(c)?.parse::<f64>().ok())
            .collect();
        if vals.is_empty() || vals.len() != runs.iter().filter(|r| r.contains_key(c)).count() {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        across.push(vec![
            c.clone(),
            vals.len().to_string(),
            fmt_f64(mean),
            median(&vals).map(fmt_f64).unwrap_or_default(),
        ]);
    }
    across.write(&ctx.out("report_across_runs.csv"))?;

    let mut pcc = CsvTable::new(["metric", "pcc", "runs"]);
    for r in pcc_table(&summaries) {
        pcc.push(vec![
            r.metric.to_string(),
            fmt_f64(r.pcc),
            r.runs.to_string(),
        ]);
    }
    pcc.write(&ctx.out("report_pcc.csv"))?;
    Ok(())
}
