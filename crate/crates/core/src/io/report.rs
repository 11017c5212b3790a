//! Tabular outputs: CSV tables, per-pair metric reports and the cross-run
//! correlation table.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::atomic::write_atomic;
use super::config::MetricName;
use crate::error::{Error, Result};
use crate::metrics::{median, pcc};

/// Shortest text that parses back to exactly `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// A header row plus string cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = r
            .headers()
            .map_err(|e| Error::parse(1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(i + 2, e.to_string()))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(CsvTable { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        CsvTable::parse(&text).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed values of a numeric column; empty cells become `None`.
    pub fn f64_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let c = self
            .column(name)
            .ok_or_else(|| Error::Domain(format!("CSV has no column '{name}'")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r[c].trim();
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse().map(Some).map_err(|_| {
                        Error::parse(i + 2, format!("column '{name}': invalid number '{cell}'"))
                    })
                }
            })
            .collect()
    }
}

/// One evaluated image pair. Metrics that were not selected, or could not
/// be computed, are `None`; `error` then says why.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairMetrics {
    pub pair_id: usize,
    pub mse: Option<f64>,
    pub correlation: Option<f64>,
    pub ssim: Option<f64>,
    pub alpha_amd: Option<f64>,
    /// Corner error of a successful registration.
    pub registration_error: Option<f64>,
    pub success: Option<bool>,
    pub error: Option<String>,
}

impl PairMetrics {
    pub fn get(&self, m: MetricName) -> Option<f64> {
        match m {
            MetricName::Mse => self.mse,
            MetricName::Correlation => self.correlation,
            MetricName::Ssim => self.ssim,
            MetricName::AlphaAmd => self.alpha_amd,
        }
    }

    pub fn set(&mut self, m: MetricName, v: f64) {
        let slot = match m {
            MetricName::Mse => &mut self.mse,
            MetricName::Correlation => &mut self.correlation,
            MetricName::Ssim => &mut self.ssim,
            MetricName::AlphaAmd => &mut self.alpha_amd,
        };
        *slot = Some(v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub metric: MetricName,
    pub median: f64,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pairs: Vec<PairMetrics>,
    pub aggregates: Vec<MetricAggregate>,
    pub frechet_distance: Option<f64>,
    /// Percentage of pairs with `success == true`, over pairs that carry a
    /// success flag.
    pub rsr: Option<f64>,
}

const PAIR_HEADER: [&str; 8] = [
    "pair_id",
    "mse",
    "correlation",
    "ssim",
    "alpha_amd",
    "registration_error",
    "success",
    "error",
];

impl MetricsReport {
    /// Sorts the rows by pair id and derives the aggregates.
    pub fn from_pairs(mut pairs: Vec<PairMetrics>, frechet_distance: Option<f64>) -> Self {
        pairs.sort_by_key(|p| p.pair_id);
        let aggregates = MetricName::ALL
            .into_iter()
            .filter_map(|m| {
                let vals: Vec<f64> = pairs.iter().filter_map(|p| p.get(m)).collect();
                let med = median(&vals)?;
                Some(MetricAggregate {
                    metric: m,
                    median: med,
                    mean: vals.iter().sum::<f64>() / vals.len() as f64,
                    count: vals.len(),
                })
            })
            .collect();
        let flags: Vec<bool> = pairs.iter().filter_map(|p| p.success).collect();
        let rsr = (!flags.is_empty())
            .then(|| 100.0 * flags.iter().filter(|&&s| s).count() as f64 / flags.len() as f64);
        MetricsReport {
            pairs,
            aggregates,
            frechet_distance,
            rsr,
        }
    }

    pub fn aggregate(&self, m: MetricName) -> Option<&MetricAggregate> {
        self.aggregates.iter().find(|a| a.metric == m)
    }

    pub fn pairs_table(&self) -> CsvTable {
        let mut t = CsvTable::new(PAIR_HEADER);
        for p in &self.pairs {
            t.push(vec![
                p.pair_id.to_string(),
                fmt_opt(p.mse),
                fmt_opt(p.correlation),
                fmt_opt(p.ssim),
                fmt_opt(p.alpha_amd),
                fmt_opt(p.registration_error),
                p.success.map(|s| s.to_string()).unwrap_or_default(),
                p.error.clone().unwrap_or_default(),
            ]);
        }
        t
    }

    /// `statistic,metric,value` rows: medians, means, counts, then the
    /// set-level values.
    pub fn summary_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["statistic", "metric", "value"]);
        for a in &self.aggregates {
            t.push(vec![
                "median".into(),
                a.metric.to_string(),
                fmt_f64(a.median),
            ]);
            t.push(vec!["mean".into(), a.metric.to_string(), fmt_f64(a.mean)]);
            t.push(vec![
                "count".into(),
                a.metric.to_string(),
                a.count.to_string(),
            ]);
        }
        if let Some(f) = self.frechet_distance {
            t.push(vec!["set".into(), "frechet_distance".into(), fmt_f64(f)]);
        }
        if let Some(r) = self.rsr {
            t.push(vec!["set".into(), "rsr".into(), fmt_f64(r)]);
        }
        t
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rebuilds the per-pair rows from [`MetricsReport::pairs_table`] output.
    pub fn pairs_from_table(t: &CsvTable) -> Result<Vec<PairMetrics>> {
        if t.header != PAIR_HEADER {
            return Err(Error::Domain(format!(
                "unexpected metrics header {:?}",
                t.header
            )));
        }
        let cols: Vec<Vec<Option<f64>>> = [
            "mse",
            "correlation",
            "ssim",
            "alpha_amd",
            "registration_error",
        ]
        .iter()
        .map(|c| t.f64_column(c))
        .collect::<Result<_>>()?;
        t.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let pair_id = r[0]
                    .parse()
                    .map_err(|_| Error::parse(i + 2, format!("invalid pair id '{}'", r[0])))?;
                let success =
                    match r[6].as_str() {
                        "" => None,
                        s => Some(s.parse().map_err(|_| {
                            Error::parse(i + 2, format!("invalid success flag '{s}'"))
                        })?),
                    };
                Ok(PairMetrics {
                    pair_id,
                    mse: cols[0][i],
                    correlation: cols[1][i],
                    ssim: cols[2][i],
                    alpha_amd: cols[3][i],
                    registration_error: cols[4][i],
                    success,
                    error: (!r[7].is_empty()).then(|| r[7].clone()),
                })
            })
            .collect()
    }
}

/// Per-run quantities collected for the cross-run table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub run: String,
    pub rsr: Option<f64>,
    pub metric_means: BTreeMap<MetricName, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PccRow {
    pub metric: MetricName,
    pub pcc: f64,
    pub runs: usize,
}

/// Correlation between each metric's per-run mean and the per-run RSR,
/// over the runs that have both. Metrics with fewer than three such runs,
/// or with a constant series, are skipped.
pub fn pcc_table(runs: &[RunSummary]) -> Vec<PccRow> {
    MetricName::ALL
        .into_iter()
        .filter_map(|m| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = runs
                .iter()
                .filter_map(|r| Some((*r.metric_means.get(&m)?, r.rsr?)))
                .unzip();
            if xs.len() < 3 {
                return None;
            }
            let r = pcc(&xs, &ys).ok().filter(|r| r.is_finite())?;
            Some(PccRow {
                metric: m,
                pcc: r,
                runs: xs.len(),
            })
        })
        .collect()
}
