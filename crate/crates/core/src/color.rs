//! Color-space conversions on display-referred sRGB rasters.

use crate::{Error, ImageBuf, Result};

/// ITU-R BT.601 luma weights.
pub const GRAY_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Default guard added to every channel before taking log ratios.
pub const LOG_CHROMA_EPS: f64 = 1e-6;

// linear sRGB -> XYZ, D65
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// BT.601 luma of a 3-channel image as an `f64` plane.
pub fn gray_plane(img: &ImageBuf) -> Result<Vec<f64>> {
    match img.channels() {
        1 => Err(Error::AlreadyGrayscale),
        _ => Ok(img
            .pixels()
            .map(|p| {
                GRAY_WEIGHTS[0] * p[0] as f64
                    + GRAY_WEIGHTS[1] * p[1] as f64
                    + GRAY_WEIGHTS[2] * p[2] as f64
            })
            .collect()),
    }
}

pub fn to_grayscale(img: &ImageBuf) -> Result<ImageBuf> {
    let plane = gray_plane(img)?;
    ImageBuf::new(
        img.width(),
        img.height(),
        1,
        plane.into_iter().map(|v| v as f32).collect(),
    )
}

/// Per-pixel Euclidean norm of the RGB triple.
pub fn luminance_norm(img: &ImageBuf) -> Result<ImageBuf> {
    img.require_channels(3)?;
    let data = img
        .pixels()
        .map(|p| {
            let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
            (r * r + g * g + b * b).sqrt() as f32
        })
        .collect();
    ImageBuf::new(img.width(), img.height(), 1, data)
}

/// CIE L*a*b* planes of an image, row-major.
#[derive(Clone, Debug)]
pub struct LabPlanes {
    pub width: usize,
    pub height: usize,
    pub l: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB triple in `[0, 1]` to `(L, a, b)`.
///
/// The reference white is the image of RGB `(1, 1, 1)` under the conversion
/// matrix, so white has `L = 100` and neutral inputs land on the achromatic
/// axis up to rounding.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let xyz = RGB_TO_XYZ.map(|row| row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]);
    let white = RGB_TO_XYZ.map(|row| row[0] + row[1] + row[2]);
    let fx = lab_f(xyz[0] / white[0]);
    let fy = lab_f(xyz[1] / white[1]);
    let fz = lab_f(xyz[2] / white[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn rgb_to_lab(img: &ImageBuf) -> Result<LabPlanes> {
    img.require_channels(3)?;
    let n = img.pixel_count();
    let mut planes = LabPlanes {
        width: img.width(),
        height: img.height(),
        l: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
    };
    for p in img.pixels() {
        let [l, a, b] = srgb_to_lab([p[0] as f64, p[1] as f64, p[2] as f64]);
        planes.l.push(l);
        planes.a.push(a);
        planes.b.push(b);
    }
    Ok(planes)
}

/// Log-chrominance coordinates of every pixel, one `(u, v)` pair per color
/// channel: red is taken relative to green and blue, green relative to red
/// and blue, blue relative to red and green.
#[derive(Clone, Debug)]
pub struct LogChroma {
    pub ur: Vec<f64>,
    pub vr: Vec<f64>,
    pub ug: Vec<f64>,
    pub vg: Vec<f64>,
    pub ub: Vec<f64>,
    pub vb: Vec<f64>,
}

/// `(u, v)` for each channel of one pixel, in channel order r, g, b.
#[inline]
pub fn pixel_log_chroma(rgb: [f64; 3], eps: f64) -> [(f64, f64); 3] {
    let [r, g, b] = rgb.map(|c| (c + eps).ln());
    [(r - g, r - b), (g - r, g - b), (b - r, b - g)]
}

pub fn log_chrominance(img: &ImageBuf, eps: f64) -> Result<LogChroma> {
    img.require_channels(3)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "log-chrominance eps must be positive, got {eps}"
        )));
    }
    let n = img.pixel_count();
    let mut out = LogChroma {
        ur: Vec::with_capacity(n),
        vr: Vec::with_capacity(n),
        ug: Vec::with_capacity(n),
        vg: Vec::with_capacity(n),
        ub: Vec::with_capacity(n),
        vb: Vec::with_capacity(n),
    };
    for p in img.pixels() {
        let [(ur, vr), (ug, vg), (ub, vb)] =
            pixel_log_chroma([p[0] as f64, p[1] as f64, p[2] as f64], eps);
        out.ur.push(ur);
        out.vr.push(vr);
        out.ug.push(ug);
        out.vg.push(vg);
        out.ub.push(ub);
        out.vb.push(vb);
    }
    Ok(out)
}
