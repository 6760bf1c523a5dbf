//! Discrete Laplacian filtering.

use crate::{Error, ImageBuf, Result};

/// 4-neighbour Laplacian over a single-channel plane with replicated borders.
///
/// Output has the input's dimensions.
pub fn laplacian_plane(plane: &[f64], width: usize, height: usize) -> Result<Vec<f64>> {
    if width < 3 || height < 3 {
        return Err(Error::TooSmall {
            width,
            height,
            min_width: 3,
            min_height: 3,
        });
    }
    debug_assert_eq!(plane.len(), width * height);
    let mut out = Vec::with_capacity(plane.len());
    for y in 0..height {
        let up = y.saturating_sub(1) * width;
        let row = y * width;
        let down = (y + 1).min(height - 1) * width;
        for x in 0..width {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(width - 1);
            let centre = plane[row + x];
            out.push(
                plane[up + x] + plane[down + x] + plane[row + left] + plane[row + right]
                    - 4.0 * centre,
            );
        }
    }
    Ok(out)
}

pub fn convolve_laplacian(gray: &ImageBuf) -> Result<ImageBuf> {
    gray.require_channels(1)?;
    let plane: Vec<f64> = gray.data().iter().map(|&v| v as f64).collect();
    let out = laplacian_plane(&plane, gray.width(), gray.height())?;
    ImageBuf::new(
        gray.width(),
        gray.height(),
        1,
        out.into_iter().map(|v| v as f32).collect(),
    )
}
