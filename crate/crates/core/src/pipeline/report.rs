use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::Serialize;

use super::manifest::{read_jsonl, SynthesisRecord};
use crate::stats::{mean, percentile};
use crate::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const PARAM_HIST_FILE: &str = "params_hist.csv";
pub const SCATTER_FILE: &str = "scatter.csv";

const PARAM_BINS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

impl SummaryRow {
    fn of(metric: &str, values: &[f64]) -> Option<Self> {
        let pct = |q| percentile(values, q);
        Some(Self {
            metric: metric.to_owned(),
            count: values.len(),
            mean: mean(values.iter().copied()),
            min: pct(0.0)?,
            p05: pct(0.05)?,
            p50: pct(0.5)?,
            p95: pct(0.95)?,
            max: pct(1.0)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub index: u64,
    pub sharpness: f64,
    pub colorfulness: f64,
}

#[derive(Debug, Default)]
pub struct Report {
    pub records: usize,
    pub summary: Vec<SummaryRow>,
    pub param_hist: Vec<HistogramBin>,
    pub scatter: Vec<ScatterPoint>,
    /// `Error::Manifest` entries for lines that failed to parse.
    pub malformed: Vec<Error>,
}

impl Report {
    pub fn row(&self, metric: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.metric == metric)
    }
}

fn column(records: &[SynthesisRecord], f: impl Fn(&SynthesisRecord) -> Option<f64>) -> Vec<f64> {
    records
        .iter()
        .filter_map(f)
        .filter(|v| v.is_finite())
        .collect()
}

fn histogram(parameter: &str, values: &[f64]) -> Vec<HistogramBin> {
    let (Some(lo), Some(hi)) = (percentile(values, 0.0), percentile(values, 1.0)) else {
        return Vec::new();
    };
    if lo == hi {
        return vec![HistogramBin {
            parameter: parameter.to_owned(),
            lo,
            hi,
            count: values.len(),
        }];
    }
    let width = (hi - lo) / PARAM_BINS as f64;
    let mut counts = [0usize; PARAM_BINS];
    for v in values {
        let bin = (((v - lo) / width) as usize).min(PARAM_BINS - 1);
        counts[bin] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            parameter: parameter.to_owned(),
            lo: lo + width * i as f64,
            hi: if i + 1 == PARAM_BINS {
                hi
            } else {
                lo + width * (i + 1) as f64
            },
            count,
        })
        .collect()
}

/// Aggregates a manifest into summary statistics, parameter histograms and
/// a sharpness/colorfulness scatter table.
pub fn summarize(records: &[SynthesisRecord]) -> Report {
    let metrics: [(&str, Vec<f64>); 9] = [
        (
            "mean_brightness",
            column(records, |r| r.metrics.mean_brightness),
        ),
        ("tv", column(records, |r| r.metrics.tv)),
        (
            "color_distance",
            column(records, |r| r.metrics.color_distance),
        ),
        ("psnr", column(records, |r| r.metrics.psnr)),
        ("ssim", column(records, |r| r.metrics.ssim)),
        ("omega_m", column(records, |r| Some(r.blend.omega_m))),
        ("r_g", column(records, |r| Some(r.blend.r_g))),
        (
            "pattern_sharpness",
            column(records, |r| Some(r.pattern_sharpness)),
        ),
        (
            "pattern_colorfulness",
            column(records, |r| Some(r.pattern_colorfulness)),
        ),
    ];
    let summary = metrics
        .iter()
        .filter_map(|(name, values)| SummaryRow::of(name, values))
        .collect();
    let mut param_hist = histogram("omega_m", &metrics[5].1);
    param_hist.extend(histogram("r_g", &metrics[6].1));
    Report {
        records: records.len(),
        summary,
        param_hist,
        scatter: records
            .iter()
            .map(|r| ScatterPoint {
                index: r.index,
                sharpness: r.pattern_sharpness,
                colorfulness: r.pattern_colorfulness,
            })
            .collect(),
        malformed: Vec::new(),
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::from(e).in_file(path))?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `manifest`, writes `summary.csv`, `params_hist.csv` and
/// `scatter.csv` into `out_dir`. Malformed lines are skipped and listed in
/// the returned report.
pub fn report(manifest: &Path, out_dir: &Path) -> Result<Report> {
    let file = File::open(manifest).map_err(|e| Error::from(e).in_file(manifest))?;
    let parsed = read_jsonl::<SynthesisRecord>(BufReader::new(file))?;
    for e in &parsed.malformed {
        log::warn!("{}: {e}", manifest.display());
    }
    if parsed.records.is_empty() {
        log::warn!("{} has no records", manifest.display());
    }
    let mut report = summarize(&parsed.records);
    report.malformed = parsed.malformed;

    std::fs::create_dir_all(out_dir)?;
    write_csv(
        &out_dir.join(SUMMARY_FILE),
        &["metric", "count", "mean", "min", "p05", "p50", "p95", "max"],
        &report.summary,
    )?;
    write_csv(
        &out_dir.join(PARAM_HIST_FILE),
        &["parameter", "lo", "hi", "count"],
        &report.param_hist,
    )?;
    write_csv(
        &out_dir.join(SCATTER_FILE),
        &["index", "sharpness", "colorfulness"],
        &report.scatter,
    )?;
    Ok(report)
}
