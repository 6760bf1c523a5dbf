//! Test fixtures and independent reference implementations.
//!
//! Nothing in here calls into the crate's math: the reference routines are
//! written out longhand so they can check the library rather than mirror it.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use moire_core::corpus::SelectionConfig;
use moire_core::{io, ImageBuf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> ImageBuf {
    ImageBuf::from_fn(w, h, 3, |_, _, _| rng.random::<f32>()).unwrap()
}

/// Smooth, natural-looking content: a few low-frequency blobs per channel.
pub fn smooth_image(rng: &mut impl Rng, w: usize, h: usize) -> ImageBuf {
    let waves: Vec<[f64; 4]> = (0..9)
        .map(|_| {
            [
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.05..0.2),
            ]
        })
        .collect();
    let base: [f64; 3] = [
        rng.random_range(0.2..0.8),
        rng.random_range(0.2..0.8),
        rng.random_range(0.2..0.8),
    ];
    ImageBuf::from_fn(w, h, 3, |x, y, c| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        let mut s = base[c];
        for wave in &waves[c * 3..c * 3 + 3] {
            s += wave[3] * (2.0 * PI * (wave[0] * u + wave[1] * v) + wave[2]).sin();
        }
        s.clamp(0.0, 1.0) as f32
    })
    .unwrap()
}

#[derive(Clone, Copy, Debug)]
pub struct Grating {
    pub freq: f64,
    pub angle: f64,
    pub amplitude: f64,
    pub phase: [f64; 3],
}

impl Grating {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            freq: rng.random_range(0.01..0.35),
            angle: rng.random_range(0.0..PI),
            amplitude: rng.random_range(0.0..0.45),
            phase: [
                0.0,
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
            ],
        }
    }

    pub fn strong(rng: &mut impl Rng) -> Self {
        Self {
            freq: rng.random_range(0.1..0.3),
            amplitude: rng.random_range(0.3..0.45),
            phase: [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0],
            ..Self::random(rng)
        }
    }

    pub fn render(&self, w: usize, h: usize) -> ImageBuf {
        let (s, c) = self.angle.sin_cos();
        ImageBuf::from_fn(w, h, 3, |x, y, ch| {
            let t = 2.0 * PI * self.freq * (c * x as f64 + s * y as f64) + self.phase[ch];
            (0.5 + self.amplitude * t.sin()) as f32
        })
        .unwrap()
    }
}

pub fn write_png(dir: &Path, name: &str, img: &ImageBuf) {
    io::save(dir.join(name), img).unwrap();
}

// ---------------------------------------------------------------------------
// Reference color science
// ---------------------------------------------------------------------------

/// sRGB -> Lab with the D65 matrix spelled out; white = row sums.
pub fn reference_lab(rgb: [f64; 3]) -> [f64; 3] {
    let m = [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ];
    let lin: Vec<f64> = rgb
        .iter()
        .map(|&c| {
            if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            }
        })
        .collect();
    let mut xyz = [0.0; 3];
    let mut white = [0.0; 3];
    for r in 0..3 {
        for k in 0..3 {
            xyz[r] += m[r][k] * lin[k];
            white[r] += m[r][k];
        }
    }
    let f = |t: f64| {
        let d: f64 = 6.0 / 29.0;
        if t > d.powi(3) {
            t.powf(1.0 / 3.0)
        } else {
            t / (3.0 * d * d) + 4.0 / 29.0
        }
    };
    let (fx, fy, fz) = (
        f(xyz[0] / white[0]),
        f(xyz[1] / white[1]),
        f(xyz[2] / white[2]),
    );
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// sRGB -> Lab where the RGB->XYZ matrix is derived from the primaries'
/// chromaticities and the D65 white point rather than taken from a table.
pub fn lab_from_primaries(rgb: [f64; 3]) -> [f64; 3] {
    let prim = [(0.64, 0.33), (0.30, 0.60), (0.15, 0.06)];
    let (wx, wy) = (0.3127, 0.3290);
    let white = [wx / wy, 1.0, (1.0 - wx - wy) / wy];
    // columns = XYZ of each primary at Y = 1
    let mut p = [[0.0; 3]; 3];
    for (j, &(x, y)) in prim.iter().enumerate() {
        p[0][j] = x / y;
        p[1][j] = 1.0;
        p[2][j] = (1.0 - x - y) / y;
    }
    let s = solve3(p, white);
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = p[r][c] * s[c];
        }
    }
    let lin = rgb.map(|c| {
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    });
    let xyz: Vec<f64> = (0..3)
        .map(|r| (0..3).map(|k| m[r][k] * lin[k]).sum())
        .collect();
    let eps = 216.0 / 24389.0;
    let kappa = 24389.0 / 27.0;
    let f = |t: f64| {
        if t > eps {
            t.cbrt()
        } else {
            (kappa * t + 16.0) / 116.0
        }
    };
    let (fx, fy, fz) = (
        f(xyz[0] / white[0]),
        f(xyz[1] / white[1]),
        f(xyz[2] / white[2]),
    );
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][col] = b[r];
        }
        *o = det(m) / d;
    }
    out
}

pub fn population_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mu = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n).sqrt()
}

// ---------------------------------------------------------------------------
// Straight-line patch selection
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOutcome {
    pub accepted: bool,
    /// 1-based attempt that was accepted, or the number of attempts made.
    pub attempt: usize,
    /// 0 native, 1 large tier, 2 small tier, 3 direct resize.
    pub tier: usize,
    pub rect: Option<(usize, usize, usize, usize)>,
    pub sharpness: f64,
    pub colorfulness: f64,
}

/// Full-frame bilinear resize, pixel-centre aligned, written out per pixel.
pub fn reference_resize(img: &ImageBuf, nw: usize, nh: usize) -> Vec<f32> {
    let (w, h) = (img.width(), img.height());
    if (w, h) == (nw, nh) {
        return img.data().to_vec();
    }
    let mut out = vec![0.0f32; nw * nh * 3];
    for y in 0..nh {
        let sy = ((y as f64 + 0.5) * (h as f64 / nh as f64) - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f64;
        for x in 0..nw {
            let sx = ((x as f64 + 0.5) * (w as f64 / nw as f64) - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = sx - x0 as f64;
            for c in 0..3 {
                let p = |xx: usize, yy: usize| img.get(xx, yy, c) as f64;
                let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
                let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
                out[(y * nw + x) * 3 + c] = (top * (1.0 - fy) + bottom * fy) as f32;
            }
        }
    }
    out
}

fn reference_scores(patch: &[f32], w: usize, h: usize) -> (f64, f64) {
    let mut gray = vec![0.0f64; w * h];
    let mut a = Vec::with_capacity(w * h);
    let mut b = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let rgb = [
            patch[i * 3] as f64,
            patch[i * 3 + 1] as f64,
            patch[i * 3 + 2] as f64,
        ];
        gray[i] = (0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]) * 255.0;
        let lab = reference_lab(rgb);
        a.push(lab[1]);
        b.push(lab[2]);
    }
    let at = |x: i64, y: i64| {
        let xx = x.clamp(0, w as i64 - 1) as usize;
        let yy = y.clamp(0, h as i64 - 1) as usize;
        gray[yy * w + xx]
    };
    let mut lap = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            lap.push(at(x, y - 1) + at(x, y + 1) + at(x - 1, y) + at(x + 1, y) - 4.0 * at(x, y));
        }
    }
    let sa = population_std(&a);
    let sb = population_std(&b);
    (population_std(&lap), (sa * sa + sb * sb).sqrt())
}

/// Multi-scale cropping plus threshold test, as a plain loop. Draw order per
/// attempt: two branch probabilities, then crop x, then crop y.
pub fn reference_select(
    frame: &ImageBuf,
    cfg: &SelectionConfig,
    rng: &mut impl Rng,
) -> ReferenceOutcome {
    let (pw, ph) = (cfg.patch_width, cfg.patch_height);
    let mut last = None;
    for attempt in 1..=cfg.attempts {
        let p1: f64 = rng.random();
        let p2: f64 = rng.random();
        let (tier, source, sw, sh) = if p1 <= cfg.native_crop_prob {
            (0, frame.data().to_vec(), frame.width(), frame.height())
        } else if p2 <= cfg.tier_split[0] {
            let [w, h] = cfg.tiers[0];
            (1, reference_resize(frame, w, h), w, h)
        } else if p2 <= cfg.tier_split[1] {
            let [w, h] = cfg.tiers[1];
            (2, reference_resize(frame, w, h), w, h)
        } else {
            (3, reference_resize(frame, pw, ph), pw, ph)
        };
        let (patch, rect) = if tier == 3 {
            (source, None)
        } else {
            let x = rng.random_range(0..=sw - pw);
            let y = rng.random_range(0..=sh - ph);
            let mut patch = Vec::with_capacity(pw * ph * 3);
            for yy in y..y + ph {
                patch.extend_from_slice(&source[(yy * sw + x) * 3..(yy * sw + x + pw) * 3]);
            }
            (patch, Some((x, y, pw, ph)))
        };
        let (s, c) = reference_scores(&patch, pw, ph);
        let outcome = ReferenceOutcome {
            accepted: s >= cfg.sharpness_threshold && c >= cfg.colorfulness_threshold,
            attempt,
            tier,
            rect,
            sharpness: s,
            colorfulness: c,
        };
        if outcome.accepted {
            return outcome;
        }
        last = Some(outcome);
    }
    last.expect("at least one attempt")
}

// ---------------------------------------------------------------------------
// Reference SSIM
// ---------------------------------------------------------------------------

/// Mean SSIM over all 11x11 windows, each window's weighted moments
/// accumulated directly from the 2-D Gaussian.
pub fn reference_ssim(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
    let mut kernel = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in kernel.iter_mut().enumerate() {
        for (j, k) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *k = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *k;
        }
    }
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..=h - 11 {
        for x in 0..=w - 11 {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let k = kernel[i][j] / total;
                    ma += k * a[(y + i) * w + x + j];
                    mb += k * b[(y + i) * w + x + j];
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let k = kernel[i][j] / total;
                    let da = a[(y + i) * w + x + j] - ma;
                    let db = b[(y + i) * w + x + j] - mb;
                    va += k * da * da;
                    vb += k * db * db;
                    cov += k * da * db;
                }
            }
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    sum / count as f64
}
