use std::path::Path;

use rayon::prelude::*;

use super::manifest::format_psnr;
use crate::metrics::{psnr, ssim};
use crate::{io, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub name: String,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Default)]
pub struct Evaluation {
    pub rows: Vec<EvalRow>,
    /// Prediction files without a same-named reference, and failed pairs.
    pub problems: Vec<String>,
}

impl Evaluation {
    pub fn mean_psnr(&self) -> f64 {
        crate::stats::mean(self.rows.iter().map(|r| r.psnr))
    }

    pub fn mean_ssim(&self) -> f64 {
        crate::stats::mean(self.rows.iter().map(|r| r.ssim))
    }
}

/// PSNR and SSIM of every prediction against the same-named file in
/// `reference`.
pub fn evaluate(pred: &Path, reference: &Path) -> Result<Evaluation> {
    let preds = io::list_images(pred)?;
    let results: Vec<std::result::Result<EvalRow, String>> = preds
        .par_iter()
        .map(|p| {
            let name = p
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let r = reference.join(&name);
            if !r.is_file() {
                return Err(format!("{name}: no reference image"));
            }
            let score = || -> Result<EvalRow> {
                let a = io::load_rgb(p)?;
                let b = io::load_rgb(&r)?;
                Ok(EvalRow {
                    psnr: psnr(&a, &b, 1.0)?,
                    ssim: ssim(&a, &b)?,
                    name: name.clone(),
                })
            };
            score().map_err(|e| format!("{name}: {e}"))
        })
        .collect();
    let mut eval = Evaluation::default();
    for r in results {
        match r {
            Ok(row) => eval.rows.push(row),
            Err(msg) => {
                log::warn!("{msg}");
                eval.problems.push(msg);
            }
        }
    }
    Ok(eval)
}

/// One row per pair, then a `mean` row.
pub fn write_evaluation_csv(eval: &Evaluation, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "psnr", "ssim"])?;
    for row in &eval.rows {
        w.write_record([
            row.name.clone(),
            format_psnr(row.psnr),
            row.ssim.to_string(),
        ])?;
    }
    if !eval.rows.is_empty() {
        w.write_record([
            "mean".to_owned(),
            format_psnr(eval.mean_psnr()),
            eval.mean_ssim().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
