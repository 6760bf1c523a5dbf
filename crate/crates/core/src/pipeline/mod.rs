//! Batch orchestration: configuration, pattern filtering, synthesis,
//! evaluation and reporting.
//!
//! Every per-item random decision is drawn from a ChaCha8 stream keyed by
//! `(seed, item index)`, and every output is written in item order, so a run
//! is a pure function of its configuration and input files.

mod config;
mod evaluate;
mod filter;
pub mod manifest;
mod report;
mod synth;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use self::config::{
    load_config, load_config_with_env, save_config, MetricKind, PatternPolicy, PipelineConfig,
    ENV_PREFIX,
};
pub use self::evaluate::{evaluate, write_evaluation_csv, EvalRow, Evaluation};
pub use self::filter::{filter_patterns, FilterSummary, PatchRecord, PATCH_SIDECAR};
pub use self::manifest::SynthesisRecord;
pub use self::report::{
    report, summarize, HistogramBin, Report, ScatterPoint, SummaryRow, PARAM_HIST_FILE,
    SCATTER_FILE, SUMMARY_FILE,
};
pub use self::synth::{
    crop_or_resize, synthesize, SynthesisSummary, IMAGE_DIR, MANIFEST_FILE, RUN_CONFIG_FILE,
};

use crate::{Error, Result};

/// The random stream of item `index` under `seed`.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// An item that was skipped, with the reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemFailure {
    pub index: u64,
    pub message: String,
}

/// Runs `job` on a dedicated pool of `workers` threads (0: one per core).
pub(crate) fn run_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}
