//! Feature-statistics mixing and tone-matrix application.
//!
//! [`mix_statistics`] blends the per-channel mean and standard deviation of
//! two feature maps with a convex weight; [`apply_mixed_stats`] re-styles a
//! standardized map with the mixed statistics. [`apply_tone_matrix`] applies
//! an externally produced per-sample gain to a blended image.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::{Error, ImageBuf, Result};

/// Floor applied to per-channel standard deviations.
pub const STD_FLOOR: f64 = 1e-6;

/// Default concentration of the symmetric Beta distribution for the mixing
/// weight.
pub const DEFAULT_ALPHA: f64 = 0.1;

/// A channel-major stack of 2-D feature planes.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "feature map must be non-empty, got {channels}x{height}x{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::InvalidParameter(format!(
                "feature map of {channels}x{height}x{width} needs {} values, got {}",
                channels * height * width,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "feature map contains non-finite value {v}"
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    /// Planar view of an image: one feature channel per color channel.
    pub fn from_image(img: &ImageBuf) -> Result<Self> {
        let ch = img.channels();
        let n = img.pixel_count();
        let mut data = vec![0.0; ch * n];
        for (i, px) in img.pixels().enumerate() {
            for (c, &v) in px.iter().enumerate() {
                data[c * n + i] = v as f64;
            }
        }
        Self::new(ch, img.height(), img.width(), data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn planes(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.height * self.width)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    /// Population standard deviation, floored at [`STD_FLOOR`].
    pub std: Vec<f64>,
}

/// Per-channel spatial mean and floored standard deviation.
pub fn channel_stats(f: &FeatureMap) -> ChannelStats {
    let mut mean = Vec::with_capacity(f.channels);
    let mut std = Vec::with_capacity(f.channels);
    for plane in f.planes() {
        // Welford's update
        let (mut mu, mut m2) = (0.0f64, 0.0f64);
        for (k, &x) in plane.iter().enumerate() {
            let delta = x - mu;
            mu += delta / (k + 1) as f64;
            m2 += delta * (x - mu);
        }
        mean.push(mu);
        std.push((m2 / plane.len() as f64).sqrt().max(STD_FLOOR));
    }
    ChannelStats { mean, std }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedStats {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda: f64,
}

/// Convex combination of the statistics of `f` (weight `lambda`) and
/// `f_ref` (weight `1 - lambda`).
pub fn mix_statistics(f: &FeatureMap, f_ref: &FeatureMap, lambda: f64) -> Result<MixedStats> {
    if f.channels != f_ref.channels {
        return Err(Error::InvalidParameter(format!(
            "channel mismatch: {} vs {}",
            f.channels, f_ref.channels
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let a = channel_stats(f);
    let b = channel_stats(f_ref);
    let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(y)
            .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
            .collect()
    };
    Ok(MixedStats {
        gamma: mix(&a.std, &b.std),
        beta: mix(&a.mean, &b.mean),
        lambda,
    })
}

/// Standardizes each channel of `f` and rescales it to `(beta, gamma)`.
pub fn apply_mixed_stats(f: &FeatureMap, stats: &MixedStats) -> Result<FeatureMap> {
    if stats.gamma.len() != f.channels || stats.beta.len() != f.channels {
        return Err(Error::InvalidParameter(format!(
            "statistics for {} channels applied to a {}-channel map",
            stats.gamma.len(),
            f.channels
        )));
    }
    let own = channel_stats(f);
    let mut data = Vec::with_capacity(f.data.len());
    for (c, plane) in f.planes().enumerate() {
        let (mu, sigma) = (own.mean[c], own.std[c]);
        let (g, b) = (stats.gamma[c], stats.beta[c]);
        data.extend(plane.iter().map(|&x| g * ((x - mu) / sigma) + b));
    }
    Ok(FeatureMap { data, ..*f })
}

/// One draw from `Beta(alpha, alpha)`.
pub fn sample_lambda<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Beta concentration must be finite and > 0, got {alpha}"
        )));
    }
    let beta = Beta::new(alpha, alpha)
        .map_err(|e| Error::InvalidParameter(format!("Beta({alpha}, {alpha}): {e}")))?;
    Ok(beta.sample(rng).clamp(0.0, 1.0))
}

/// Normalization applied to the blended image before the tone matrix.
pub trait ColorNormalization {
    fn normalize(&self, img: &ImageBuf) -> Result<ImageBuf>;
}

/// Leaves the image unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoNormalization;

impl ColorNormalization for NoNormalization {
    fn normalize(&self, img: &ImageBuf) -> Result<ImageBuf> {
        Ok(img.clone())
    }
}

/// `clamp(img * tone)` element-wise.
pub fn apply_tone_matrix(img: &ImageBuf, tone: &ImageBuf) -> Result<ImageBuf> {
    apply_tone_matrix_with(img, tone, &NoNormalization)
}

pub fn apply_tone_matrix_with(
    img: &ImageBuf,
    tone: &ImageBuf,
    norm: &dyn ColorNormalization,
) -> Result<ImageBuf> {
    img.same_dims(tone)?;
    if let Some(&v) = tone.data().iter().find(|&&v| !(v >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "tone matrix entries must be non-negative, found {v}"
        )));
    }
    let normalized = norm.normalize(img)?;
    normalized.zip_map(tone, |v, m| (v * m).clamp(0.0, 1.0))
}
