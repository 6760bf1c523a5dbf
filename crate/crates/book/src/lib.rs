//! Runs the Rust listings of the guide in `book/` as doc-tests.
//!
//! mdbook cannot link listings against workspace crates, so each chapter is
//! pulled in as the doc comment of an empty module and rustdoc tests it.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/images.md")]
pub mod images {}

#[doc = include_str!("../../../book/src/pattern-selection.md")]
pub mod pattern_selection {}

#[doc = include_str!("../../../book/src/blending.md")]
pub mod blending {}

#[doc = include_str!("../../../book/src/tone-fusion.md")]
pub mod tone_fusion {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
