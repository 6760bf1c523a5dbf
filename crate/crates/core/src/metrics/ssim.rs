//! Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
//! evaluated at every window position that fits inside the image.

use crate::color::gray_plane;
use crate::{Error, ImageBuf, Result};

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;

fn gaussian_taps() -> [f64; WINDOW] {
    let half = (WINDOW / 2) as f64;
    let mut taps = [0.0; WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - half;
        *t = (-(d * d) / (2.0 * SIGMA * SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.map(|t| t / sum)
}

fn luma(img: &ImageBuf) -> Vec<f64> {
    match img.channels() {
        1 => img.data().iter().map(|&v| v as f64).collect(),
        _ => gray_plane(img).expect("3-channel image"),
    }
}

/// Separable 'valid' filtering: output is `(w - 10) x (h - 10)`.
fn filter_valid(plane: &[f64], width: usize, height: usize, taps: &[f64; WINDOW]) -> Vec<f64> {
    let ow = width - WINDOW + 1;
    let oh = height - WINDOW + 1;
    let mut horizontal: Vec<f64> = Vec::with_capacity(ow * height);
    for row in plane.chunks_exact(width) {
        for x in 0..ow {
            horizontal.push(
                row[x..x + WINDOW]
                    .iter()
                    .zip(taps)
                    .map(|(v, t)| v * t)
                    .sum(),
            );
        }
    }
    let mut out: Vec<f64> = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            out.push(
                taps.iter()
                    .enumerate()
                    .map(|(k, t)| horizontal[(y + k) * ow + x] * t)
                    .sum(),
            );
        }
    }
    out
}

/// SSIM on the luma of both images, dynamic range 1.
pub fn ssim(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    a.same_dims(b)?;
    if a.width() < WINDOW || a.height() < WINDOW {
        return Err(Error::TooSmall {
            width: a.width(),
            height: a.height(),
            min_width: WINDOW,
            min_height: WINDOW,
        });
    }
    let (w, h) = (a.width(), a.height());
    let x = luma(a);
    let y = luma(b);
    let taps = gaussian_taps();
    let product =
        |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(u, v)| u * v).collect() };

    let mu_x = filter_valid(&x, w, h, &taps);
    let mu_y = filter_valid(&y, w, h, &taps);
    let xx = filter_valid(&product(&x, &x), w, h, &taps);
    let yy = filter_valid(&product(&y, &y), w, h, &taps);
    let xy = filter_valid(&product(&x, &y), w, h, &taps);

    let c1 = K1 * K1;
    let c2 = K2 * K2;
    let n = mu_x.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = xx[i] - mx * mx;
            let vy = yy[i] - my * my;
            let cov = xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / n as f64)
}
