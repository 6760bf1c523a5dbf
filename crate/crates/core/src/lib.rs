//! Building blocks for synthesizing moiré-contaminated training images.
//!
//! The crate is split along the stages of the data pipeline:
//!
//! * [`image`], [`color`] and [`filter`]: a small float raster type and the
//!   color-space / convolution primitives everything else is built on.
//! * [`corpus`]: multi-scale cropping of raw pattern frames and the
//!   sharpness/colorfulness acceptance test.
//! * [`blend`]: multiply and grain-merge layer modes, alpha compositing and the
//!   weighted two-branch blend that produces the initial moiré image.
//! * [`tone`]: per-channel feature statistics mixing and tone-matrix
//!   application.
//! * [`metrics`]: RGB-uv histograms, Hellinger color distance, total
//!   variation, composite loss, PSNR and SSIM.
//! * [`pipeline`]: configuration, seeded parallel batch synthesis, manifests
//!   and reports.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blend;
pub mod color;
pub mod corpus;
mod error;
pub mod filter;
pub mod image;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod stats;
pub mod tone;

pub use crate::error::{Error, Result};
pub use crate::image::{CropRect, ImageBuf};
