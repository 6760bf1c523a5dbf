//! Color, smoothness and fidelity measurements.

mod histogram;
mod ssim;

use serde::{Deserialize, Serialize};

pub use self::histogram::{
    color_distance, hellinger_color_distance, inverse_quadratic, rgbuv_histogram, HistogramConfig,
    HistogramFeature,
};
pub use self::ssim::ssim;

use crate::{Error, ImageBuf, Result};

/// Sum of absolute differences between vertically and horizontally adjacent
/// samples, over all channels.
pub fn tv_loss(img: &ImageBuf) -> f64 {
    let (w, h, ch) = img.dims();
    let d = img.data();
    let mut total = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) * ch;
            for c in 0..ch {
                let v = d[i + c] as f64;
                if x + 1 < w {
                    total += (d[i + ch + c] as f64 - v).abs();
                }
                if y + 1 < h {
                    total += (d[i + w * ch + c] as f64 - v).abs();
                }
            }
        }
    }
    total
}

pub fn mse(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    a.same_dims(b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// PSNR in dB; identical inputs give `f64::INFINITY`.
pub fn psnr(a: &ImageBuf, b: &ImageBuf, max_val: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, max_val))
}

pub fn psnr_from_mse(mse: f64, max_val: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_val * max_val / mse).log10()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub perceptual: f64,
    pub color: f64,
    pub tv: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            perceptual: 1.0,
            color: 1.0,
            tv: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeLoss {
    pub value: f64,
    /// False when no perceptual term was supplied and it contributed zero.
    pub perceptual_included: bool,
}

/// Weighted sum of the perceptual, color and smoothness terms. The
/// perceptual term is computed elsewhere and may be absent.
pub fn composite_loss(
    perceptual: Option<f64>,
    color: f64,
    tv: f64,
    weights: &LossWeights,
) -> Result<CompositeLoss> {
    for (name, w) in [
        ("perceptual weight", weights.perceptual),
        ("color weight", weights.color),
        ("tv weight", weights.tv),
    ] {
        if !(w >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be >= 0, got {w}"
            )));
        }
    }
    for (name, t) in [
        ("perceptual term", perceptual.unwrap_or(0.0)),
        ("color term", color),
        ("tv term", tv),
    ] {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be >= 0, got {t}"
            )));
        }
    }
    Ok(CompositeLoss {
        value: weights.perceptual * perceptual.unwrap_or(0.0)
            + weights.color * color
            + weights.tv * tv,
        perceptual_included: perceptual.is_some(),
    })
}
