//! Turning raw pattern frames into accepted training patches.
//!
//! Each attempt draws a scale tier (native crop, one of two downscaled tiers,
//! or a direct resize of the whole frame), cuts a patch, and keeps it only if
//! both its sharpness and colorfulness clear their thresholds.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{gray_plane, rgb_to_lab};
use crate::filter::laplacian_plane;
use crate::image::{resize, resize_window};
use crate::stats::std_dev;
use crate::{io, CropRect, Error, ImageBuf, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub patch_width: usize,
    pub patch_height: usize,
    /// Crop attempts per frame before giving up on it.
    pub attempts: usize,
    pub sharpness_threshold: f64,
    pub colorfulness_threshold: f64,
    /// Probability of cropping at native resolution.
    pub native_crop_prob: f64,
    /// Cumulative split points of the second draw between the large tier,
    /// the small tier and the direct resize.
    pub tier_split: [f64; 2],
    /// `[width, height]` of the large and the small resize tier.
    pub tiers: [[usize; 2]; 2],
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            patch_width: 768,
            patch_height: 768,
            attempts: 3,
            sharpness_threshold: 15.0,
            colorfulness_threshold: 2.0,
            native_crop_prob: 0.5,
            tier_split: [0.3333, 0.6666],
            tiers: [[2560, 1440], [1920, 1080]],
        }
    }
}

impl SelectionConfig {
    /// Every violated constraint, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.patch_width == 0 || self.patch_height == 0 {
            out.push("selection.patch_width/patch_height must be >= 1".to_owned());
        }
        if self.patch_width < 3 || self.patch_height < 3 {
            out.push("selection patch must be at least 3x3 to score sharpness".to_owned());
        }
        if self.attempts == 0 {
            out.push("selection.attempts must be >= 1".to_owned());
        }
        for (name, v) in [
            ("sharpness_threshold", self.sharpness_threshold),
            ("colorfulness_threshold", self.colorfulness_threshold),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                out.push(format!(
                    "selection.{name} must be a finite value >= 0, got {v}"
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.native_crop_prob) {
            out.push(format!(
                "selection.native_crop_prob must be in [0, 1], got {}",
                self.native_crop_prob
            ));
        }
        let [s0, s1] = self.tier_split;
        if !(0.0 <= s0 && s0 <= s1 && s1 <= 1.0) {
            out.push(format!(
                "selection.tier_split must satisfy 0 <= a <= b <= 1, got [{s0}, {s1}]"
            ));
        }
        for [w, h] in self.tiers {
            if w < self.patch_width || h < self.patch_height {
                out.push(format!(
                    "selection tier {w}x{h} is smaller than the {}x{} patch",
                    self.patch_width, self.patch_height
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScaleTier {
    #[serde(rename = "native4k")]
    Native,
    #[serde(rename = "r2560x1440")]
    Large,
    #[serde(rename = "r1920x1080")]
    Small,
    #[serde(rename = "direct-resize")]
    DirectResize,
}

impl ScaleTier {
    pub const ALL: [ScaleTier; 4] = [
        ScaleTier::Native,
        ScaleTier::Large,
        ScaleTier::Small,
        ScaleTier::DirectResize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScaleTier::Native => "native4k",
            ScaleTier::Large => "r2560x1440",
            ScaleTier::Small => "r1920x1080",
            ScaleTier::DirectResize => "direct-resize",
        }
    }
}

/// Where a patch came from. Crop rectangles are in the coordinates of the
/// tier's (possibly resized) frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatchOrigin {
    Crop(CropRect),
    ResizedFullFrame,
}

#[derive(Clone, Debug)]
pub struct TierCrop {
    pub image: ImageBuf,
    pub tier: ScaleTier,
    pub origin: PatchOrigin,
}

#[derive(Clone, Debug)]
pub struct PatternPatch {
    pub image: ImageBuf,
    pub sharpness: f64,
    pub colorfulness: f64,
    pub source_path: String,
    pub origin: PatchOrigin,
    pub scale_tier: ScaleTier,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptScores {
    pub tier: ScaleTier,
    pub origin: PatchOrigin,
    pub sharpness: f64,
    pub colorfulness: f64,
}

#[derive(Clone, Debug)]
pub enum Selection {
    /// `attempt` is 1-based.
    Accepted {
        patch: PatternPatch,
        attempt: usize,
    },
    Rejected {
        attempts: Vec<AttemptScores>,
    },
}

impl Selection {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Selection::Accepted { .. })
    }

    pub fn accepted(self) -> Option<PatternPatch> {
        match self {
            Selection::Accepted { patch, .. } => Some(patch),
            Selection::Rejected { .. } => None,
        }
    }
}

/// Standard deviation of the Laplacian response of the 0–255 scaled luma.
///
/// Single-channel inputs are taken as luma already.
pub fn sharpness(img: &ImageBuf) -> Result<f64> {
    img.require_min_size(3, 3)?;
    let gray: Vec<f64> = match img.channels() {
        1 => img.data().iter().map(|&v| v as f64 * 255.0).collect(),
        _ => gray_plane(img)?.into_iter().map(|v| v * 255.0).collect(),
    };
    let response = laplacian_plane(&gray, img.width(), img.height())?;
    Ok(std_dev(&response))
}

/// `sqrt(std(a)^2 + std(b)^2)` over the Lab chroma planes.
pub fn colorfulness(img: &ImageBuf) -> Result<f64> {
    let lab = rgb_to_lab(img)?;
    let sa = std_dev(&lab.a);
    let sb = std_dev(&lab.b);
    Ok((sa * sa + sb * sb).sqrt())
}

/// Draws the two branch probabilities and maps them to a tier.
pub fn pick_tier<R: Rng + ?Sized>(rng: &mut R, cfg: &SelectionConfig) -> ScaleTier {
    let p1: f64 = rng.random();
    let p2: f64 = rng.random();
    if p1 <= cfg.native_crop_prob {
        ScaleTier::Native
    } else if p2 <= cfg.tier_split[0] {
        ScaleTier::Large
    } else if p2 <= cfg.tier_split[1] {
        ScaleTier::Small
    } else {
        ScaleTier::DirectResize
    }
}

/// Cuts a patch for an already chosen tier. Crop positions are drawn
/// uniformly, `x` before `y`.
pub fn crop_tier<R: Rng + ?Sized>(
    frame: &ImageBuf,
    tier: ScaleTier,
    cfg: &SelectionConfig,
    rng: &mut R,
) -> Result<TierCrop> {
    let (pw, ph) = (cfg.patch_width, cfg.patch_height);
    let (tw, th) = match tier {
        ScaleTier::Native => (frame.width(), frame.height()),
        ScaleTier::Large => (cfg.tiers[0][0], cfg.tiers[0][1]),
        ScaleTier::Small => (cfg.tiers[1][0], cfg.tiers[1][1]),
        ScaleTier::DirectResize => {
            return Ok(TierCrop {
                image: resize(frame, pw, ph)?,
                tier,
                origin: PatchOrigin::ResizedFullFrame,
            })
        }
    };
    if tw < pw || th < ph {
        return Err(Error::TooSmall {
            width: tw,
            height: th,
            min_width: pw,
            min_height: ph,
        });
    }
    let x = rng.random_range(0..=tw - pw);
    let y = rng.random_range(0..=th - ph);
    let rect = CropRect::new(x, y, pw, ph);
    Ok(TierCrop {
        image: resize_window(frame, tw, th, rect)?,
        tier,
        origin: PatchOrigin::Crop(rect),
    })
}

pub fn multi_scale_crop<R: Rng + ?Sized>(
    frame: &ImageBuf,
    cfg: &SelectionConfig,
    rng: &mut R,
) -> Result<TierCrop> {
    let tier = pick_tier(rng, cfg);
    crop_tier(frame, tier, cfg, rng)
}

/// Up to `cfg.attempts` crop-and-score rounds; the first patch clearing both
/// thresholds wins.
pub fn select_patch<R: Rng + ?Sized>(
    frame: &ImageBuf,
    cfg: &SelectionConfig,
    rng: &mut R,
) -> Result<Selection> {
    frame.require_channels(3)?;
    let mut tried = Vec::with_capacity(cfg.attempts);
    for attempt in 1..=cfg.attempts {
        let cut = multi_scale_crop(frame, cfg, rng)?;
        let s = sharpness(&cut.image)?;
        let c = colorfulness(&cut.image)?;
        if s >= cfg.sharpness_threshold && c >= cfg.colorfulness_threshold {
            let patch = PatternPatch {
                image: cut.image,
                sharpness: s,
                colorfulness: c,
                source_path: String::new(),
                origin: cut.origin,
                scale_tier: cut.tier,
            };
            debug_assert!(patch.sharpness >= cfg.sharpness_threshold);
            return Ok(Selection::Accepted { patch, attempt });
        }
        tried.push(AttemptScores {
            tier: cut.tier,
            origin: cut.origin,
            sharpness: s,
            colorfulness: c,
        });
    }
    Ok(Selection::Rejected { attempts: tried })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub path: String,
    pub sharpness: f64,
    pub colorfulness: f64,
}

#[derive(Debug, Default)]
pub struct CorpusStats {
    pub rows: Vec<StatsRow>,
    pub failures: Vec<(PathBuf, Error)>,
}

/// Full-frame sharpness and colorfulness of every image in `dir`.
///
/// Undecodable files land in `failures`; rows keep the sorted file order.
pub fn corpus_stats(dir: impl AsRef<Path>) -> Result<CorpusStats> {
    let files = io::list_images(dir.as_ref())?;
    if files.is_empty() {
        log::warn!("no images found in {}", dir.as_ref().display());
    }
    let scored: Vec<_> = files
        .into_par_iter()
        .map(|path| {
            let row = io::load_rgb(&path).and_then(|img| {
                Ok(StatsRow {
                    path: path.display().to_string(),
                    sharpness: sharpness(&img)?,
                    colorfulness: colorfulness(&img)?,
                })
            });
            (path, row)
        })
        .collect();
    let mut stats = CorpusStats::default();
    for (path, row) in scored {
        match row {
            Ok(row) => stats.rows.push(row),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                stats.failures.push((path, e));
            }
        }
    }
    Ok(stats)
}

pub fn write_stats_csv(rows: &[StatsRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::crop;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stripes(w: usize, h: usize) -> ImageBuf {
        let palette = [
            [0.9, 0.1, 0.1],
            [0.1, 0.8, 0.2],
            [0.1, 0.2, 0.9],
            [0.95, 0.95, 0.1],
        ];
        ImageBuf::from_fn(w, h, 3, |x, _, c| palette[(x / 2) % 4][c]).unwrap()
    }

    fn small_cfg() -> SelectionConfig {
        SelectionConfig {
            patch_width: 32,
            patch_height: 24,
            tiers: [[80, 45], [64, 36]],
            ..SelectionConfig::default()
        }
    }

    #[test]
    fn constant_image_scores_zero() {
        let img = ImageBuf::filled(9, 9, 3, 0.6).unwrap();
        assert_eq!(sharpness(&img).unwrap(), 0.0);
        assert!(colorfulness(&img).unwrap() < 1e-9);
    }

    #[test]
    fn impulse_sharpness_matches_closed_form() {
        // Impulse of 255 in a 7x7 zero field: response -1020 at the centre,
        // +255 at four neighbours, zero at the remaining 44 pixels.
        let n = 49.0;
        let values = [-1020.0, 255.0, 255.0, 255.0, 255.0];
        let mu: f64 = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() + (n - 5.0) * mu * mu;
        let expected = (ss / n).sqrt();

        let mut img = ImageBuf::filled(7, 7, 1, 0.0).unwrap();
        img.data_mut()[3 * 7 + 3] = 1.0;
        assert!((sharpness(&img).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn sharpness_symmetries() {
        let img = ImageBuf::from_fn(13, 11, 3, |x, y, c| {
            ((x * x + 3 * y + c) % 11) as f32 / 10.0
        })
        .unwrap();
        let s = sharpness(&img).unwrap();
        let c = colorfulness(&img).unwrap();
        for t in [img.rotate_180(), img.flip_horizontal(), img.flip_vertical()] {
            assert!((sharpness(&t).unwrap() - s).abs() < 1e-9);
            assert!((colorfulness(&t).unwrap() - c).abs() < 1e-9);
        }
    }

    #[test]
    fn colorfulness_needs_color() {
        let gray = ImageBuf::from_fn(6, 6, 3, |x, y, _| ((x + y) % 5) as f32 / 4.0).unwrap();
        assert!(colorfulness(&gray).unwrap() < 1e-6);
        assert!(colorfulness(&ImageBuf::filled(4, 4, 1, 0.5).unwrap()).is_err());
    }

    #[test]
    fn native_branch_is_exact_window() {
        let frame = stripes(120, 70);
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cut = crop_tier(&frame, ScaleTier::Native, &cfg, &mut rng).unwrap();
        let PatchOrigin::Crop(rect) = cut.origin else {
            panic!("native tier must crop")
        };
        assert_eq!((rect.w, rect.h), (32, 24));
        assert_eq!(cut.image, crop(&frame, rect).unwrap());
    }

    #[test]
    fn direct_branch_is_plain_resize() {
        let frame = stripes(120, 70);
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cut = crop_tier(&frame, ScaleTier::DirectResize, &cfg, &mut rng).unwrap();
        assert_eq!(cut.origin, PatchOrigin::ResizedFullFrame);
        assert_eq!(cut.image, resize(&frame, 32, 24).unwrap());
    }

    #[test]
    fn tier_crop_equals_crop_of_resized_frame() {
        let frame = stripes(120, 70);
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cut = crop_tier(&frame, ScaleTier::Large, &cfg, &mut rng).unwrap();
        let PatchOrigin::Crop(rect) = cut.origin else {
            panic!()
        };
        let full = resize(&frame, 80, 45).unwrap();
        assert_eq!(cut.image, crop(&full, rect).unwrap());
    }

    #[test]
    fn frame_smaller_than_patch_errors_on_native_tier() {
        let frame = stripes(20, 20);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(crop_tier(&frame, ScaleTier::Native, &small_cfg(), &mut rng).is_err());
    }

    #[test]
    fn white_frame_is_rejected() {
        let frame = ImageBuf::filled(100, 60, 3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        match select_patch(&frame, &small_cfg(), &mut rng).unwrap() {
            Selection::Rejected { attempts } => assert_eq!(attempts.len(), 3),
            Selection::Accepted { .. } => panic!("white frame accepted"),
        }
    }

    #[test]
    fn stripes_accepted_first_try() {
        let frame = stripes(100, 60);
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let Selection::Accepted { patch, attempt } = select_patch(&frame, &cfg, &mut rng).unwrap()
        else {
            panic!("stripes rejected")
        };
        assert_eq!(attempt, 1);
        assert!(patch.sharpness >= 15.0 && patch.colorfulness >= 2.0);
        assert_eq!(patch.image.dims(), (32, 24, 3));
    }

    #[test]
    fn default_config_is_valid_and_validation_lists_everything() {
        assert!(SelectionConfig::default().validate().is_ok());
        let bad = SelectionConfig {
            attempts: 0,
            sharpness_threshold: -1.0,
            native_crop_prob: 1.5,
            tier_split: [0.7, 0.2],
            ..SelectionConfig::default()
        };
        assert_eq!(bad.violations().len(), 4);
    }
}
