use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;

use super::config::{MetricKind, PatternPolicy, PipelineConfig};
use super::manifest::{write_jsonl, RecordMetrics, SynthesisRecord};
use super::{item_rng, run_pool, ItemFailure};
use crate::blend::{blend_mib, sample_blend_params};
use crate::corpus::{colorfulness, select_patch, sharpness, PatchOrigin, ScaleTier, Selection};
use crate::image::{crop, resize};
use crate::metrics::{
    hellinger_color_distance, psnr, rgbuv_histogram, ssim, tv_loss, HistogramFeature,
};
use crate::tone::apply_tone_matrix;
use crate::{io, CropRect, Error, ImageBuf, Result};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const RUN_CONFIG_FILE: &str = "run.json";
pub const IMAGE_DIR: &str = "images";

#[derive(Debug)]
pub struct SynthesisSummary {
    pub output_dir: PathBuf,
    pub records: Vec<SynthesisRecord>,
    pub failures: Vec<ItemFailure>,
}

impl SynthesisSummary {
    pub fn manifest_path(&self) -> PathBuf {
        self.output_dir.join(MANIFEST_FILE)
    }
}

/// Inputs shared read-only by all workers.
struct Context<'a> {
    cfg: &'a PipelineConfig,
    clean_files: Vec<PathBuf>,
    pattern_files: Vec<PathBuf>,
    tone: Option<ImageBuf>,
    reference: Option<HistogramFeature>,
    output_dir: PathBuf,
}

fn required<'a>(value: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::Config(vec![format!("{name} is not set")]))
}

fn corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let files = io::list_images(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus(dir.to_path_buf()));
    }
    Ok(files)
}

/// Runs the whole synthesis job described by `cfg`.
///
/// Item `i` uses clean image `i / samples_per_clean` and the random stream
/// `(seed, i)`, so results do not depend on worker count or scheduling. The
/// manifest lists successful items in index order; failed items are logged
/// and returned in `failures`.
pub fn synthesize(cfg: &PipelineConfig) -> Result<SynthesisSummary> {
    cfg.validate()?;
    let output_dir = required(&cfg.output_dir, "output_dir")?.to_path_buf();
    let ctx = Context {
        cfg,
        clean_files: corpus(required(&cfg.clean_dir, "clean_dir")?)?,
        pattern_files: corpus(required(&cfg.pattern_dir, "pattern_dir")?)?,
        tone: cfg.tone_matrix.as_deref().map(io::load_rgb).transpose()?,
        reference: match (&cfg.reference_dir, cfg.wants(MetricKind::ColorDistance)) {
            (Some(dir), true) => Some(reference_histogram(dir, cfg)?),
            _ => None,
        },
        output_dir,
    };
    if let Some(tone) = &ctx.tone {
        let [w, h] = cfg.clean_crop;
        if (tone.width(), tone.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                left: tone.dims(),
                right: (w, h, 3),
            });
        }
    }
    std::fs::create_dir_all(ctx.output_dir.join(IMAGE_DIR))?;

    let total = (ctx.clean_files.len() * cfg.samples_per_clean) as u64;
    let results: Vec<Result<SynthesisRecord>> = run_pool(cfg.workers, || {
        (0..total)
            .into_par_iter()
            .map(|i| synthesize_item(&ctx, i))
            .collect()
    })?;

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("item {i} failed: {e}");
                failures.push(ItemFailure {
                    index: i as u64,
                    message: e.to_string(),
                });
            }
        }
    }

    write_jsonl(
        &records,
        BufWriter::new(File::create(ctx.output_dir.join(MANIFEST_FILE))?),
    )?;
    std::fs::write(ctx.output_dir.join(RUN_CONFIG_FILE), cfg.to_json() + "\n")?;
    if !failures.is_empty() {
        log::warn!("{} of {total} items failed", failures.len());
    }
    Ok(SynthesisSummary {
        output_dir: ctx.output_dir,
        records,
        failures,
    })
}

/// Mean of the normalized histograms of every image in `dir`.
fn reference_histogram(dir: &Path, cfg: &PipelineConfig) -> Result<HistogramFeature> {
    let hists = corpus(dir)?
        .par_iter()
        .map(|p| rgbuv_histogram(&io::load_rgb(p)?, &cfg.histogram).map_err(|e| e.in_file(p)))
        .collect::<Result<Vec<_>>>()?;
    HistogramFeature::average(&hists)
}

/// Random `w x h` window of `img`, or a resize when `img` is too small.
pub fn crop_or_resize<R: Rng + ?Sized>(
    img: &ImageBuf,
    w: usize,
    h: usize,
    rng: &mut R,
) -> Result<(ImageBuf, PatchOrigin)> {
    if img.width() >= w && img.height() >= h {
        let x = rng.random_range(0..=img.width() - w);
        let y = rng.random_range(0..=img.height() - h);
        let rect = CropRect::new(x, y, w, h);
        Ok((crop(img, rect)?, PatchOrigin::Crop(rect)))
    } else {
        Ok((resize(img, w, h)?, PatchOrigin::ResizedFullFrame))
    }
}

struct PatternPick {
    path: String,
    draw: usize,
    attempt: usize,
    tier: ScaleTier,
    origin: PatchOrigin,
    image: ImageBuf,
    sharpness: f64,
    colorfulness: f64,
}

fn pick_pattern<R: Rng + ?Sized>(ctx: &Context<'_>, rng: &mut R) -> Result<PatternPick> {
    let cfg = ctx.cfg;
    for draw in 1..=cfg.max_pattern_draws {
        let path = &ctx.pattern_files[rng.random_range(0..ctx.pattern_files.len())];
        let frame = io::load_rgb(path)?;
        match cfg.pattern_policy {
            PatternPolicy::ResizeOnly => {
                return Ok(PatternPick {
                    path: path.display().to_string(),
                    draw,
                    attempt: 1,
                    tier: ScaleTier::DirectResize,
                    origin: PatchOrigin::ResizedFullFrame,
                    sharpness: sharpness(&frame)?,
                    colorfulness: colorfulness(&frame)?,
                    image: frame,
                })
            }
            PatternPolicy::Select => {
                if let Selection::Accepted { patch, attempt } =
                    select_patch(&frame, &cfg.selection, rng).map_err(|e| e.in_file(path))?
                {
                    return Ok(PatternPick {
                        path: path.display().to_string(),
                        draw,
                        attempt,
                        tier: patch.scale_tier,
                        origin: patch.origin,
                        image: patch.image,
                        sharpness: patch.sharpness,
                        colorfulness: patch.colorfulness,
                    });
                }
                log::debug!("pattern {} rejected on draw {draw}", path.display());
            }
        }
    }
    Err(Error::InvalidParameter(format!(
        "no pattern accepted after {} draws",
        cfg.max_pattern_draws
    )))
}

fn synthesize_item(ctx: &Context<'_>, index: u64) -> Result<SynthesisRecord> {
    let cfg = ctx.cfg;
    let mut rng = item_rng(cfg.seed, index);
    let [cw, ch] = cfg.clean_crop;

    let clean_path = &ctx.clean_files[index as usize / cfg.samples_per_clean];
    let clean_full = io::load_rgb(clean_path)?;
    let (clean, clean_origin) = crop_or_resize(&clean_full, cw, ch, &mut rng)?;
    drop(clean_full);

    let pattern = pick_pattern(ctx, &mut rng)?;
    let layer = resize(&pattern.image, cw, ch)?;
    let params = sample_blend_params(&mut rng, &cfg.blend)?;
    let mut out = blend_mib(&layer, &clean, &params)?;
    if let Some(tone) = &ctx.tone {
        out = apply_tone_matrix(&out, tone)?;
    }

    let metrics = RecordMetrics {
        mean_brightness: cfg.wants(MetricKind::Brightness).then(|| out.mean()),
        tv: cfg.wants(MetricKind::Tv).then(|| tv_loss(&out)),
        color_distance: match &ctx.reference {
            Some(r) => Some(hellinger_color_distance(
                &rgbuv_histogram(&out, &cfg.histogram)?,
                r,
            )?),
            None => None,
        },
        psnr: cfg
            .wants(MetricKind::Psnr)
            .then(|| psnr(&out, &clean, 1.0))
            .transpose()?,
        ssim: cfg
            .wants(MetricKind::Ssim)
            .then(|| ssim(&out, &clean))
            .transpose()?,
    };

    let output_path = format!("{IMAGE_DIR}/{index:06}.png");
    io::save(ctx.output_dir.join(&output_path), &out)?;

    Ok(SynthesisRecord {
        index,
        seed: cfg.seed,
        stream: index,
        clean_path: clean_path.display().to_string(),
        clean_origin,
        pattern_path: pattern.path,
        pattern_draw: pattern.draw,
        pattern_attempt: pattern.attempt,
        pattern_tier: pattern.tier,
        pattern_origin: pattern.origin,
        pattern_sharpness: pattern.sharpness,
        pattern_colorfulness: pattern.colorfulness,
        blend: params,
        tone_matrix: cfg.tone_matrix.as_ref().map(|p| p.display().to_string()),
        output_path,
        metrics,
    })
}
