//! JSON-lines manifests: one self-contained record per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::blend::BlendParams;
use crate::corpus::{PatchOrigin, ScaleTier};
use crate::{Error, Result};

/// One synthesized image and everything needed to rebuild it from its input
/// files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisRecord {
    pub index: u64,
    /// Global seed; the item's random stream is `(seed, stream)`.
    pub seed: u64,
    pub stream: u64,
    pub clean_path: String,
    pub clean_origin: PatchOrigin,
    pub pattern_path: String,
    /// 1-based index of the pattern draw that produced an accepted patch.
    pub pattern_draw: usize,
    /// 1-based crop attempt within that draw.
    pub pattern_attempt: usize,
    pub pattern_tier: ScaleTier,
    pub pattern_origin: PatchOrigin,
    pub pattern_sharpness: f64,
    pub pattern_colorfulness: f64,
    pub blend: BlendParams,
    pub tone_matrix: Option<String>,
    /// Relative to the output directory.
    pub output_path: String,
    pub metrics: RecordMetrics,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordMetrics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_brightness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_distance: Option<f64>,
    /// `"inf"` in JSON when the output equals the clean crop.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "psnr_value")]
    pub psnr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssim: Option<f64>,
}

/// Serializes an infinite PSNR as the string `"inf"`.
pub mod psnr_value {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Marker(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() && *x > 0.0 => s.serialize_str("inf"),
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Finite(x)) => Ok(Some(x)),
            Some(Repr::Marker(m)) if m == "inf" => Ok(Some(f64::INFINITY)),
            Some(Repr::Marker(m)) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {m:?}"
            ))),
        }
    }
}

/// Formats a PSNR value for CSV output, using the same `inf` marker.
pub fn format_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_owned()
    } else {
        v.to_string()
    }
}

pub fn write_jsonl<T: Serialize>(records: &[T], mut out: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Parsed records plus the `(line, error)` pairs of lines that did not
/// parse. Blank lines are ignored. Line numbers are 1-based.
pub struct ParsedManifest<T> {
    pub records: Vec<T>,
    pub malformed: Vec<Error>,
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(input: impl BufRead) -> Result<ParsedManifest<T>> {
    let mut parsed = ParsedManifest {
        records: Vec::new(),
        malformed: Vec::new(),
    };
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => parsed.records.push(r),
            Err(e) => parsed.malformed.push(Error::Manifest {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok(parsed)
}
