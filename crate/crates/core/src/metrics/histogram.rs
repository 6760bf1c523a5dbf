//! Differentiable-style RGB-uv color histograms.
//!
//! Every pixel contributes to every bin of each channel's `h x h` log-chroma
//! grid through a separable inverse-quadratic kernel, weighted by the pixel's
//! RGB norm. The three planes are normalized jointly to unit mass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{pixel_log_chroma, LOG_CHROMA_EPS};
use crate::{Error, ImageBuf, Result};

/// Rows per partial histogram. Fixed so the reduction order, and therefore
/// the result, does not depend on the thread count.
const ROWS_PER_BLOCK: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    /// Bins per axis.
    pub bins: usize,
    /// First and last bin centre along `u`.
    pub u_range: [f64; 2],
    /// First and last bin centre along `v`.
    pub v_range: [f64; 2],
    /// Kernel fall-off.
    pub tau: f64,
    pub eps: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins: 64,
            u_range: [-3.0, 3.0],
            v_range: [-3.0, 3.0],
            tau: 0.02,
            eps: LOG_CHROMA_EPS,
        }
    }
}

impl HistogramConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.bins < 2 {
            out.push(format!("histogram.bins must be >= 2, got {}", self.bins));
        }
        for (name, [lo, hi]) in [("u_range", self.u_range), ("v_range", self.v_range)] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                out.push(format!(
                    "histogram.{name} must satisfy lo < hi, got [{lo}, {hi}]"
                ));
            }
        }
        if !(self.tau > 0.0) {
            out.push(format!("histogram.tau must be > 0, got {}", self.tau));
        }
        if !(self.eps > 0.0) {
            out.push(format!("histogram.eps must be > 0, got {}", self.eps));
        }
        out
    }

    fn centres(&self, [lo, hi]: [f64; 2]) -> Vec<f64> {
        let step = (hi - lo) / (self.bins - 1) as f64;
        (0..self.bins).map(|i| lo + step * i as f64).collect()
    }

    pub fn u_centres(&self) -> Vec<f64> {
        self.centres(self.u_range)
    }

    pub fn v_centres(&self) -> Vec<f64> {
        self.centres(self.v_range)
    }
}

/// Inverse-quadratic fall-off of one coordinate around one bin centre.
#[inline]
pub fn inverse_quadratic(value: f64, centre: f64, tau: f64) -> f64 {
    let d = (value - centre).abs() / tau;
    1.0 / (1.0 + d * d)
}

/// A normalized `3 x h x h` histogram, laid out channel, then `u`, then `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramFeature {
    bins: usize,
    values: Vec<f64>,
}

impl HistogramFeature {
    pub fn from_values(bins: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 3 * bins * bins {
            return Err(Error::InvalidParameter(format!(
                "{} values do not form a 3x{bins}x{bins} histogram",
                values.len()
            )));
        }
        Ok(Self { bins, values })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, channel: usize, u: usize, v: usize) -> f64 {
        self.values[(channel * self.bins + u) * self.bins + v]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.bins * self.bins;
        &self.values[c * n..(c + 1) * n]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Entry-wise mean of several histograms of equal shape. The mean of
    /// unit-mass histograms has unit mass.
    pub fn average<'a>(hists: impl IntoIterator<Item = &'a HistogramFeature>) -> Result<Self> {
        let mut iter = hists.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidParameter("cannot average zero histograms".into()))?;
        let mut acc = first.values.clone();
        let mut n = 1usize;
        for h in iter {
            if h.bins != first.bins {
                return Err(Error::HistogramShape {
                    left: first.bins,
                    right: h.bins,
                });
            }
            acc.iter_mut().zip(&h.values).for_each(|(a, b)| *a += b);
            n += 1;
        }
        acc.iter_mut().for_each(|a| *a /= n as f64);
        Self::from_values(first.bins, acc)
    }
}

pub fn rgbuv_histogram(img: &ImageBuf, cfg: &HistogramConfig) -> Result<HistogramFeature> {
    img.require_channels(3)?;
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    let h = cfg.bins;
    let us = cfg.u_centres();
    let vs = cfg.v_centres();
    let row_len = img.width() * 3;

    let partials: Vec<Vec<f64>> = img
        .data()
        .par_chunks(row_len * ROWS_PER_BLOCK)
        .map(|block| {
            let mut acc = vec![0.0f64; 3 * h * h];
            let mut ku = vec![0.0f64; h];
            let mut kv = vec![0.0f64; h];
            for px in block.chunks_exact(3) {
                let rgb = [px[0] as f64, px[1] as f64, px[2] as f64];
                let y = (rgb[0] * rgb[0] + rgb[1] * rgb[1] + rgb[2] * rgb[2]).sqrt();
                if y == 0.0 {
                    continue;
                }
                for (c, (u, v)) in pixel_log_chroma(rgb, cfg.eps).into_iter().enumerate() {
                    for (k, &centre) in ku.iter_mut().zip(&us) {
                        *k = y * inverse_quadratic(u, centre, cfg.tau);
                    }
                    for (k, &centre) in kv.iter_mut().zip(&vs) {
                        *k = inverse_quadratic(v, centre, cfg.tau);
                    }
                    let plane = &mut acc[c * h * h..(c + 1) * h * h];
                    for (row, &wu) in plane.chunks_exact_mut(h).zip(&ku) {
                        for (cell, &wv) in row.iter_mut().zip(&kv) {
                            *cell += wu * wv;
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let mut values = vec![0.0f64; 3 * h * h];
    for partial in &partials {
        values.iter_mut().zip(partial).for_each(|(a, b)| *a += b);
    }
    let total: f64 = values.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateHistogram);
    }
    values.iter_mut().for_each(|v| *v /= total);
    HistogramFeature::from_values(h, values)
}

/// Euclidean distance between the entry-wise square roots of two histograms.
pub fn hellinger_color_distance(a: &HistogramFeature, b: &HistogramFeature) -> Result<f64> {
    if a.bins != b.bins {
        return Err(Error::HistogramShape {
            left: a.bins,
            right: b.bins,
        });
    }
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| {
            let d = x.max(0.0).sqrt() - y.max(0.0).sqrt();
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Histogram both images and return their Hellinger distance.
pub fn color_distance(a: &ImageBuf, b: &ImageBuf, cfg: &HistogramConfig) -> Result<f64> {
    hellinger_color_distance(&rgbuv_histogram(a, cfg)?, &rgbuv_histogram(b, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> HistogramConfig {
        HistogramConfig {
            bins: 16,
            ..HistogramConfig::default()
        }
    }

    fn textured() -> ImageBuf {
        ImageBuf::from_fn(9, 7, 3, |x, y, c| {
            0.1 + ((x * 3 + y * 5 + c * 11) % 13) as f32 / 16.0
        })
        .unwrap()
    }

    #[test]
    fn unit_mass_and_nonnegative() {
        let h = rgbuv_histogram(&textured(), &HistogramConfig::default()).unwrap();
        assert!((h.total() - 1.0).abs() < 1e-12);
        assert!(h.values().iter().all(|&v| v >= 0.0));
        assert_eq!(h.values().len(), 3 * 64 * 64);
    }

    #[test]
    fn black_image_is_degenerate() {
        let black = ImageBuf::filled(5, 5, 3, 0.0).unwrap();
        assert!(matches!(
            rgbuv_histogram(&black, &small_cfg()),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn single_color_peaks_at_nearest_bin() {
        let rgb = [0.6f32, 0.3, 0.2];
        let img = ImageBuf::from_fn(4, 4, 3, |_, _, c| rgb[c]).unwrap();
        let cfg = small_cfg();
        let h = rgbuv_histogram(&img, &cfg).unwrap();
        let chroma = pixel_log_chroma(rgb.map(|v| v as f64), cfg.eps);
        let nearest = |value: f64, centres: &[f64]| {
            centres
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
                .unwrap()
                .0
        };
        for (c, (u, v)) in chroma.into_iter().enumerate() {
            let plane = h.channel(c);
            let argmax = (0..plane.len())
                .max_by(|&a, &b| plane[a].total_cmp(&plane[b]))
                .unwrap();
            assert_eq!(
                (argmax / cfg.bins, argmax % cfg.bins),
                (nearest(u, &cfg.u_centres()), nearest(v, &cfg.v_centres()))
            );
        }
    }

    #[test]
    fn permutation_invariant() {
        let img = textured();
        let cfg = small_cfg();
        let a = rgbuv_histogram(&img, &cfg).unwrap();
        let b = rgbuv_histogram(&img.rotate_180(), &cfg).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn hellinger_examples() {
        let cfg = small_cfg();
        let h = rgbuv_histogram(&textured(), &cfg).unwrap();
        assert_eq!(hellinger_color_distance(&h, &h).unwrap(), 0.0);

        let n = 3 * 4 * 4;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        a[..n / 2].iter_mut().for_each(|v| *v = 2.0 / n as f64);
        b[n / 2..].iter_mut().for_each(|v| *v = 2.0 / n as f64);
        let ha = HistogramFeature::from_values(4, a).unwrap();
        let hb = HistogramFeature::from_values(4, b).unwrap();
        let d = hellinger_color_distance(&ha, &hb).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(d, hellinger_color_distance(&hb, &ha).unwrap());

        let other = HistogramFeature::from_values(2, vec![1.0 / 12.0; 12]).unwrap();
        assert!(hellinger_color_distance(&ha, &other).is_err());
    }

    #[test]
    fn average_keeps_unit_mass() {
        let cfg = small_cfg();
        let a = rgbuv_histogram(&textured(), &cfg).unwrap();
        let b = rgbuv_histogram(&ImageBuf::filled(3, 3, 3, 0.4).unwrap(), &cfg).unwrap();
        let m = HistogramFeature::average([&a, &b]).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-12);
    }
}
