//! PNG/JPEG decoding and encoding.
//!
//! 8-bit samples map to `[0, 1]` by division by 255; encoding rounds
//! `clamp(v) * 255` to the nearest integer.

use std::path::{Path, PathBuf};

use ::image::{DynamicImage, GrayImage, RgbImage};

use crate::{Error, ImageBuf, Result};

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg"];

/// Decodes any supported file to a 3-channel image. Gray inputs are expanded
/// to neutral RGB and alpha is dropped.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    let decoded = ::image::open(path).map_err(|e| Error::from(e).in_file(path))?;
    Ok(from_dynamic(&decoded))
}

pub fn from_dynamic(img: &DynamicImage) -> ImageBuf {
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb
        .into_raw()
        .into_iter()
        .map(|v| v as f32 / 255.0)
        .collect();
    ImageBuf::new(w as usize, h as usize, 3, data).expect("decoder produced consistent buffer")
}

pub fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn to_dynamic(img: &ImageBuf) -> DynamicImage {
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let (w, h) = (img.width() as u32, img.height() as u32);
    match img.channels() {
        1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).expect("sized buffer")),
        _ => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).expect("sized buffer")),
    }
}

/// Encodes as PNG or JPEG depending on the extension of `path`.
pub fn save(path: impl AsRef<Path>, img: &ImageBuf) -> Result<()> {
    let path = path.as_ref();
    to_dynamic(img)
        .save(path)
        .map_err(|e| Error::from(e).in_file(path))
}

pub fn is_image_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Image files directly inside `dir`, sorted by path.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && is_image_path(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_exact_on_8bit_values() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageBuf::from_fn(5, 3, 3, |x, y, c| {
            ((x * 40 + y * 20 + c * 3) % 256) as f32 / 255.0
        })
        .unwrap();
        let path = dir.path().join("a.png");
        save(&path, &img).unwrap();
        assert_eq!(load_rgb(&path).unwrap(), img);
    }

    #[test]
    fn quantization_rounds_and_clamps() {
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.7), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(0.498), 127);
    }

    #[test]
    fn listing_filters_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageBuf::filled(2, 2, 3, 0.5).unwrap();
        for name in ["b.png", "a.PNG", "c.jpg"] {
            save(dir.path().join(name), &img).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let names: Vec<_> = list_images(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["a.PNG", "b.png", "c.jpg"]);
    }
}
