use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::write_jsonl;
use super::{item_rng, run_pool, ItemFailure};
use crate::corpus::{select_patch, PatchOrigin, ScaleTier, Selection, SelectionConfig};
use crate::{io, Error, Result};

pub const PATCH_SIDECAR: &str = "patches.jsonl";

/// Sidecar row for one accepted patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchRecord {
    pub index: u64,
    pub seed: u64,
    pub source_path: String,
    pub output_path: String,
    pub attempt: usize,
    pub scale_tier: ScaleTier,
    pub origin: PatchOrigin,
    pub sharpness: f64,
    pub colorfulness: f64,
}

#[derive(Debug, Default)]
pub struct FilterSummary {
    pub accepted: Vec<PatchRecord>,
    /// Indices of frames whose every attempt failed the thresholds.
    pub rejected: Vec<u64>,
    pub failures: Vec<ItemFailure>,
}

/// Selects at most one patch per frame of `input`, writing accepted patches
/// as PNG plus a JSON-lines sidecar into `output`.
pub fn filter_patterns(
    input: &Path,
    output: &Path,
    cfg: &SelectionConfig,
    seed: u64,
    workers: usize,
) -> Result<FilterSummary> {
    cfg.validate()?;
    let frames = io::list_images(input)?;
    if frames.is_empty() {
        return Err(Error::EmptyCorpus(input.to_path_buf()));
    }
    std::fs::create_dir_all(output)?;

    let outcomes: Vec<Result<Option<PatchRecord>>> = run_pool(workers, || {
        frames
            .par_iter()
            .enumerate()
            .map(|(i, path)| {
                let index = i as u64;
                let frame = io::load_rgb(path)?;
                let mut rng = item_rng(seed, index);
                match select_patch(&frame, cfg, &mut rng).map_err(|e| e.in_file(path))? {
                    Selection::Rejected { .. } => Ok(None),
                    Selection::Accepted { patch, attempt } => {
                        let stem = path
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| format!("frame{index:06}"));
                        let name = format!("{index:06}_{stem}.png");
                        io::save(output.join(&name), &patch.image)?;
                        Ok(Some(PatchRecord {
                            index,
                            seed,
                            source_path: path.display().to_string(),
                            output_path: name,
                            attempt,
                            scale_tier: patch.scale_tier,
                            origin: patch.origin,
                            sharpness: patch.sharpness,
                            colorfulness: patch.colorfulness,
                        }))
                    }
                }
            })
            .collect()
    })?;

    let mut summary = FilterSummary::default();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(Some(rec)) => summary.accepted.push(rec),
            Ok(None) => summary.rejected.push(i as u64),
            Err(e) => {
                log::warn!("frame {i} failed: {e}");
                summary.failures.push(ItemFailure {
                    index: i as u64,
                    message: e.to_string(),
                });
            }
        }
    }
    write_jsonl(
        &summary.accepted,
        BufWriter::new(File::create(output.join(PATCH_SIDECAR))?),
    )?;
    Ok(summary)
}
