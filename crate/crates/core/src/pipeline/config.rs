use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::blend::BlendConfig;
use crate::corpus::SelectionConfig;
use crate::metrics::HistogramConfig;
use crate::{Error, Result};

/// Prefix of environment variables that override configuration keys.
///
/// Nested keys are joined with a double underscore, so
/// `MOIRE_SELECTION__SHARPNESS_THRESHOLD=20` sets `selection.sharpness_threshold`.
/// Values are parsed as JSON when possible and taken as strings otherwise.
pub const ENV_PREFIX: &str = "MOIRE_";

/// How a drawn pattern image becomes the pattern layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternPolicy {
    /// Multi-scale crop and sharpness/colorfulness acceptance per draw.
    #[default]
    Select,
    /// Use the whole pattern image as-is; for corpora that are already
    /// filtered patches.
    ResizeOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Mean sample value of the output.
    Brightness,
    Tv,
    /// Hellinger distance to the pooled histogram of `reference_dir`.
    ColorDistance,
    /// Against the clean crop.
    Psnr,
    /// Against the clean crop.
    Ssim,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub pattern_dir: Option<PathBuf>,
    pub clean_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Real moiré images whose pooled color histogram is the target of the
    /// `color_distance` metric.
    pub reference_dir: Option<PathBuf>,
    /// Externally produced per-sample gain, same size as the clean crop.
    pub tone_matrix: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    /// Synthesized images per clean image.
    pub samples_per_clean: usize,
    /// `[width, height]` of the random crop taken from each clean image.
    pub clean_crop: [usize; 2],
    pub pattern_policy: PatternPolicy,
    /// Pattern images drawn per item before the item is given up.
    pub max_pattern_draws: usize,
    pub selection: SelectionConfig,
    pub blend: BlendConfig,
    pub histogram: HistogramConfig,
    pub metrics: Vec<MetricKind>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            pattern_dir: None,
            clean_dir: None,
            output_dir: None,
            reference_dir: None,
            tone_matrix: None,
            seed: 0,
            workers: 0,
            samples_per_clean: 1,
            clean_crop: [384, 384],
            pattern_policy: PatternPolicy::Select,
            max_pattern_draws: 8,
            selection: SelectionConfig::default(),
            blend: BlendConfig::default(),
            histogram: HistogramConfig::default(),
            metrics: vec![
                MetricKind::Brightness,
                MetricKind::Tv,
                MetricKind::Psnr,
                MetricKind::Ssim,
            ],
        }
    }
}

impl PipelineConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, dir) in [
            ("pattern_dir", &self.pattern_dir),
            ("clean_dir", &self.clean_dir),
            ("reference_dir", &self.reference_dir),
        ] {
            if let Some(dir) = dir {
                if !dir.is_dir() {
                    out.push(format!("{name} {} is not a directory", dir.display()));
                }
            }
        }
        if let Some(path) = &self.tone_matrix {
            if !path.is_file() {
                out.push(format!("tone_matrix {} is not a file", path.display()));
            }
        }
        if self.samples_per_clean == 0 {
            out.push("samples_per_clean must be >= 1".into());
        }
        if self.clean_crop[0] == 0 || self.clean_crop[1] == 0 {
            out.push(format!(
                "clean_crop must be positive, got {:?}",
                self.clean_crop
            ));
        }
        if self.metrics.contains(&MetricKind::Ssim)
            && (self.clean_crop[0] < 11 || self.clean_crop[1] < 11)
        {
            out.push("ssim needs clean_crop of at least 11x11".into());
        }
        if self.max_pattern_draws == 0 {
            out.push("max_pattern_draws must be >= 1".into());
        }
        if self.metrics.contains(&MetricKind::ColorDistance) && self.reference_dir.is_none() {
            out.push("metric color_distance requires reference_dir".into());
        }
        out.extend(self.selection.violations());
        out.extend(self.blend.violations());
        out.extend(self.histogram.violations());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn wants(&self, metric: MetricKind) -> bool {
        self.metrics.contains(&metric)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Reads and validates a JSON config; omitted keys take their defaults.
pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    load_config_with_env(Some(path.as_ref()), std::iter::empty())
}

/// Like [`load_config`], then applies `MOIRE_*` overrides from `vars`. With no
/// path, starts from the defaults.
pub fn load_config_with_env(
    path: Option<&Path>,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<PipelineConfig> {
    let mut value = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
            serde_json::from_str::<Value>(&text).map_err(|e| Error::from(e).in_file(path))?
        }
        None => Value::Object(Map::new()),
    };
    if !value.is_object() {
        return Err(Error::Config(vec![
            "config root must be a JSON object".into()
        ]));
    }
    apply_env_overrides(&mut value, vars)?;
    let cfg: PipelineConfig =
        serde_json::from_value(value).map_err(|e| Error::Config(vec![e.to_string()]))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_config(cfg: &PipelineConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, cfg.to_json() + "\n").map_err(|e| Error::from(e).in_file(path))
}

fn apply_env_overrides(
    root: &mut Value,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<()> {
    let mut overrides: Vec<(String, String)> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    overrides.sort();
    for (key, raw) in overrides {
        let path: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(str::to_ascii_lowercase)
            .collect();
        if path.iter().any(String::is_empty) {
            return Err(Error::Config(vec![format!(
                "malformed override variable {key}"
            )]));
        }
        let parsed = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        let mut node = &mut *root;
        for (depth, part) in path.iter().enumerate() {
            let obj = node.as_object_mut().ok_or_else(|| {
                Error::Config(vec![format!(
                    "{key}: {} is not an object",
                    path[..depth].join(".")
                )])
            })?;
            if depth + 1 == path.len() {
                obj.insert(part.clone(), parsed);
                break;
            }
            node = obj
                .entry(part.clone())
                .or_insert_with(|| Value::Object(Map::new()));
        }
    }
    Ok(())
}
