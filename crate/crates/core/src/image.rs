//! Dense float rasters and the geometric operations on them.
//!
//! Samples are `f32`, row-major and channel-interleaved, nominally in `[0, 1]`
//! display-referred sRGB. Every operation here is a pure function of its
//! inputs and returns a fresh buffer.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuf {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        check_geometry(width, height, channels)?;
        if data.len() != width * height * channels {
            return Err(Error::BufferLength {
                width,
                height,
                channels,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        check_geometry(width, height, channels)?;
        Ok(Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        })
    }

    /// Builds an image by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        check_geometry(width, height, channels)?;
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn pixels(&self) -> std::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.channels)
    }

    pub fn map(&self, mut f: impl FnMut(f32) -> f32) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    /// Returns a copy with every sample clamped to `[0, 1]`.
    pub fn clamped(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    pub fn mean(&self) -> f64 {
        crate::stats::mean(self.data.iter().map(|&v| v as f64))
    }

    pub fn same_dims(&self, other: &ImageBuf) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    pub fn require_channels(&self, expected: usize) -> Result<()> {
        if self.channels != expected {
            return Err(Error::Channels {
                expected,
                actual: self.channels,
            });
        }
        Ok(())
    }

    pub fn require_min_size(&self, min_width: usize, min_height: usize) -> Result<()> {
        if self.width < min_width || self.height < min_height {
            return Err(Error::TooSmall {
                width: self.width,
                height: self.height,
                min_width,
                min_height,
            });
        }
        Ok(())
    }

    /// Combines two same-shaped images sample by sample.
    pub fn zip_map(&self, other: &ImageBuf, mut f: impl FnMut(f32, f32) -> f32) -> Result<Self> {
        self.same_dims(other)?;
        Ok(Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..*self
        })
    }

    pub fn flip_horizontal(&self) -> Self {
        self.remap(|x, y| (self.width - 1 - x, y))
    }

    pub fn flip_vertical(&self) -> Self {
        self.remap(|x, y| (x, self.height - 1 - y))
    }

    pub fn rotate_180(&self) -> Self {
        self.remap(|x, y| (self.width - 1 - x, self.height - 1 - y))
    }

    fn remap(&self, src: impl Fn(usize, usize) -> (usize, usize)) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in 0..self.width {
                let (sx, sy) = src(x, y);
                data.extend_from_slice(self.pixel(sx, sy));
            }
        }
        Self { data, ..*self }
    }
}

fn check_geometry(width: usize, height: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 || !(channels == 1 || channels == 3) {
        return Err(Error::Geometry {
            width,
            height,
            channels,
        });
    }
    Ok(())
}

/// An axis-aligned pixel window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl CropRect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn full(img: &ImageBuf) -> Self {
        Self::new(0, 0, img.width(), img.height())
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height)
    }

    /// Expresses `inner`, given relative to this window, in this window's
    /// parent coordinates.
    pub fn compose(&self, inner: CropRect) -> CropRect {
        CropRect::new(self.x + inner.x, self.y + inner.y, inner.w, inner.h)
    }
}

/// Copies the window `rect` out of `img`.
pub fn crop(img: &ImageBuf, rect: CropRect) -> Result<ImageBuf> {
    if !rect.fits(img.width(), img.height()) {
        return Err(Error::CropOutOfBounds {
            rect,
            width: img.width(),
            height: img.height(),
        });
    }
    let ch = img.channels();
    let row_len = rect.w * ch;
    let mut data = Vec::with_capacity(row_len * rect.h);
    for y in rect.y..rect.y + rect.h {
        let start = (y * img.width() + rect.x) * ch;
        data.extend_from_slice(&img.data()[start..start + row_len]);
    }
    ImageBuf::new(rect.w, rect.h, ch, data)
}

/// Bilinear resize with pixel-center alignment and edge clamping.
///
/// Resizing to the current dimensions returns an exact copy.
pub fn resize(img: &ImageBuf, new_w: usize, new_h: usize) -> Result<ImageBuf> {
    if new_w == img.width() && new_h == img.height() {
        return Ok(img.clone());
    }
    resize_window(img, new_w, new_h, CropRect::new(0, 0, new_w, new_h))
}

/// Computes only the window `rect` of `resize(img, new_w, new_h)`.
///
/// Every output sample depends on its position in the resized grid alone, so
/// the result equals `crop(resize(img, new_w, new_h), rect)` bit for bit
/// without materializing the full resized frame.
pub fn resize_window(
    img: &ImageBuf,
    new_w: usize,
    new_h: usize,
    rect: CropRect,
) -> Result<ImageBuf> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::Geometry {
            width: new_w,
            height: new_h,
            channels: img.channels(),
        });
    }
    if !rect.fits(new_w, new_h) {
        return Err(Error::CropOutOfBounds {
            rect,
            width: new_w,
            height: new_h,
        });
    }
    if new_w == img.width() && new_h == img.height() {
        return crop(img, rect);
    }

    let ch = img.channels();
    let xs: Vec<Tap> = (rect.x..rect.x + rect.w)
        .map(|x| Tap::new(x, img.width(), new_w))
        .collect();
    let mut data = Vec::with_capacity(rect.w * rect.h * ch);
    for y in rect.y..rect.y + rect.h {
        let ty = Tap::new(y, img.height(), new_h);
        let row0 = ty.i0 * img.width();
        let row1 = ty.i1 * img.width();
        for tx in &xs {
            for c in 0..ch {
                let p00 = img.data()[(row0 + tx.i0) * ch + c] as f64;
                let p01 = img.data()[(row0 + tx.i1) * ch + c] as f64;
                let p10 = img.data()[(row1 + tx.i0) * ch + c] as f64;
                let p11 = img.data()[(row1 + tx.i1) * ch + c] as f64;
                let top = p00 * (1.0 - tx.frac) + p01 * tx.frac;
                let bottom = p10 * (1.0 - tx.frac) + p11 * tx.frac;
                data.push((top * (1.0 - ty.frac) + bottom * ty.frac) as f32);
            }
        }
    }
    ImageBuf::new(rect.w, rect.h, ch, data)
}

/// Source taps for one destination coordinate.
struct Tap {
    i0: usize,
    i1: usize,
    frac: f64,
}

impl Tap {
    fn new(dst: usize, src_len: usize, dst_len: usize) -> Self {
        let scale = src_len as f64 / dst_len as f64;
        let pos = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
        let i0 = pos.floor() as usize;
        Self {
            i0,
            i1: (i0 + 1).min(src_len - 1),
            frac: pos - i0 as f64,
        }
    }
}
