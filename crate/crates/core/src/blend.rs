//! Layer blending of a moiré pattern (foreground) over a clean image
//! (background).
//!
//! Two blend modes are composited separately against the background and then
//! mixed:
//!
//! ```text
//! M     = pattern * clean
//! G     = clamp(pattern + clean - 0.5)
//! r_x   = op_x / (op_x + (1 - op_x) * op_n)
//! C_M   = r_m * M + (1 - r_m) * clean
//! C_G   = r_g * G + (1 - r_g) * clean
//! out   = clamp(w_m * C_M + w_g * C_G),   w_g = 1 - w_m
//! ```
//!
//! With `w_m = 1` and `op_m = 1` the result is the plain multiply of the two
//! layers. Size mismatches are errors here; callers resize the pattern first.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, ImageBuf, Result};

fn require_blendable(pattern: &ImageBuf, clean: &ImageBuf) -> Result<()> {
    pattern.require_channels(3)?;
    pattern.same_dims(clean)
}

/// Element-wise product of the two layers.
pub fn multiply(pattern: &ImageBuf, clean: &ImageBuf) -> Result<ImageBuf> {
    require_blendable(pattern, clean)?;
    pattern.zip_map(clean, |p, n| p * n)
}

/// `pattern + clean - 0.5`, clamped to `[0, 1]`.
pub fn grain_merge(pattern: &ImageBuf, clean: &ImageBuf) -> Result<ImageBuf> {
    require_blendable(pattern, clean)?;
    // (p - 0.5) + n keeps the p = 0.5 case exact.
    pattern.zip_map(clean, |p, n| ((p - 0.5) + n).clamp(0.0, 1.0))
}

/// Effective foreground weight of a layer with opacity `op_x` over a
/// background of opacity `op_n`.
pub fn composition_ratio(op_x: f64, op_n: f64) -> Result<f64> {
    check_unit("op_x", op_x)?;
    check_unit("op_n", op_n)?;
    let denom = op_x + (1.0 - op_x) * op_n;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(op_x / denom)
}

/// `r * fore + (1 - r) * back`.
pub fn alpha_composite(fore: &ImageBuf, back: &ImageBuf, r: f64) -> Result<ImageBuf> {
    check_unit("r", r)?;
    let r = r as f32;
    let q = 1.0 - r;
    fore.zip_map(back, |f, b| r * f + q * b)
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// One fully resolved parameter set for [`blend_mib`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendParams {
    pub omega_m: f64,
    pub omega_g: f64,
    pub op_m: f64,
    pub op_g: f64,
    pub op_n: f64,
    pub r_m: f64,
    pub r_g: f64,
}

impl BlendParams {
    /// Derives `omega_g` and both composition ratios.
    pub fn new(omega_m: f64, op_m: f64, op_g: f64, op_n: f64) -> Result<Self> {
        check_unit("omega_m", omega_m)?;
        Ok(Self {
            omega_m,
            omega_g: 1.0 - omega_m,
            op_m,
            op_g,
            op_n,
            r_m: composition_ratio(op_m, op_n)?,
            r_g: composition_ratio(op_g, op_n)?,
        })
    }

    /// Plain multiply of pattern and clean image.
    pub fn multiply_only() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0).expect("constant parameters are valid")
    }

    /// Checks the weight and ratio invariants of a (possibly deserialized)
    /// parameter set.
    pub fn validate(&self) -> Result<()> {
        let fresh = Self::new(self.omega_m, self.op_m, self.op_g, self.op_n)?;
        if fresh != *self {
            return Err(Error::InvalidParameter(format!(
                "inconsistent blend parameters {self:?}, expected {fresh:?}"
            )));
        }
        Ok(())
    }
}

/// Ranges from which per-image blend parameters are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlendConfig {
    pub omega_m_range: [f64; 2],
    pub op_m: f64,
    pub op_g: f64,
    pub op_n: f64,
}

impl Default for BlendConfig {
    fn default() -> Self {
        Self {
            omega_m_range: [0.65, 0.75],
            op_m: 1.0,
            op_g: 0.8,
            op_n: 1.0,
        }
    }
}

impl BlendConfig {
    pub fn multiply_only() -> Self {
        Self {
            omega_m_range: [1.0, 1.0],
            op_m: 1.0,
            ..Self::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let [lo, hi] = self.omega_m_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            out.push(format!(
                "blend.omega_m_range must satisfy 0 <= lo <= hi <= 1, got [{lo}, {hi}]"
            ));
        }
        for (name, v) in [
            ("op_m", self.op_m),
            ("op_g", self.op_g),
            ("op_n", self.op_n),
        ] {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("blend.{name} must be in [0, 1], got {v}"));
            }
        }
        if self.op_n == 0.0 && (self.op_m == 0.0 || self.op_g == 0.0) {
            out.push("blend: op_n = 0 with a zero layer opacity leaves a ratio undefined".into());
        }
        out
    }
}

/// Draws `omega_m` uniformly from the configured range; opacities are fixed.
pub fn sample_blend_params<R: Rng + ?Sized>(rng: &mut R, cfg: &BlendConfig) -> Result<BlendParams> {
    let [lo, hi] = cfg.omega_m_range;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "omega_m range [{lo}, {hi}] is not a sub-interval of [0, 1]"
        )));
    }
    let omega_m = rng.random_range(lo..=hi);
    BlendParams::new(omega_m, cfg.op_m, cfg.op_g, cfg.op_n)
}

/// Blends `pattern` over `clean` with both modes and mixes the composites.
pub fn blend_mib(pattern: &ImageBuf, clean: &ImageBuf, params: &BlendParams) -> Result<ImageBuf> {
    require_blendable(pattern, clean)?;
    check_unit("omega_m", params.omega_m)?;
    let comp_m = alpha_composite(&multiply(pattern, clean)?, clean, params.r_m)?;
    let comp_g = alpha_composite(&grain_merge(pattern, clean)?, clean, params.r_g)?;
    let wm = params.omega_m as f32;
    let wg = params.omega_g as f32;
    comp_m.zip_map(&comp_g, |m, g| (wm * m + wg * g).clamp(0.0, 1.0))
}
