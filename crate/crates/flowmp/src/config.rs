//! Run configuration: one JSON document describing the dataset, the velocity
//! fields standing in for the model, the sampler, diagnostics toggles, and
//! output destinations. Every defaulted field is echoed back into the output
//! metadata so a run can be reproduced from its own summary.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldHandle, Perturbation};
use crate::sampler::SamplerConfig;
use crate::world::{generators, CloudSpec, LabeledPointCloud};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum DatasetSpec {
    Generator(GeneratorSpec),
    Inline(CloudSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "name", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    TwoClusters {
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_points_per_cluster")]
        points_per_cluster: usize,
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default = "default_spread")]
        spread: f64,
    },
    TwoMoons {
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_points_per_moon")]
        points_per_moon: usize,
        #[serde(default = "default_noise")]
        noise: f64,
    },
    Ring {
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_ring_count")]
        count: usize,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_noise")]
        noise: f64,
    },
}

fn default_seed() -> u64 {
    7
}
fn default_points_per_cluster() -> usize {
    8
}
fn default_separation() -> f64 {
    2.0
}
fn default_spread() -> f64 {
    0.35
}
fn default_points_per_moon() -> usize {
    12
}
fn default_noise() -> f64 {
    0.08
}
fn default_ring_count() -> usize {
    16
}
fn default_radius() -> f64 {
    1.5
}

impl GeneratorSpec {
    pub fn build(&self) -> LabeledPointCloud {
        match *self {
            GeneratorSpec::TwoClusters {
                seed,
                points_per_cluster,
                separation,
                spread,
            } => generators::two_clusters(seed, points_per_cluster, separation, spread),
            GeneratorSpec::TwoMoons {
                seed,
                points_per_moon,
                noise,
            } => generators::two_moons(seed, points_per_moon, noise),
            GeneratorSpec::Ring {
                seed,
                count,
                radius,
                noise,
            } => generators::ring(seed, count, radius, noise),
        }
    }
}

/// A model stand-in: the exact analytic field or a perturbed copy of it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    AnalyticIdeal,
    Perturbed { epsilon: f64, seed: u64 },
}

impl FieldSpec {
    pub fn build(&self, world: &Arc<LabeledPointCloud>) -> FieldHandle {
        let base = FieldHandle::analytic(world.clone());
        match *self {
            FieldSpec::AnalyticIdeal => base,
            FieldSpec::Perturbed { epsilon, seed } => FieldHandle::perturbed(
                base,
                Perturbation::from_seed(seed, epsilon, world.dimension()),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsSpec {
    pub cond: FieldSpec,
    pub uncond: FieldSpec,
}

impl Default for FieldsSpec {
    fn default() -> Self {
        Self {
            cond: FieldSpec::AnalyticIdeal,
            uncond: FieldSpec::AnalyticIdeal,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsToggles {
    /// Energy distance and mean-min-distance of the final samples.
    pub sample_quality: bool,
    /// Per-step gap statistics (requires full-trajectory recording).
    pub gap_profile: bool,
}

impl Default for DiagnosticsToggles {
    fn default() -> Self {
        Self {
            sample_quality: true,
            gap_profile: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format `{other}` (csv|json|both)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: OutputFormat,
    /// Emit a 2-D trajectory plot (requires full-trajectory recording).
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Both,
            svg: false,
        }
    }
}

/// Top-level document for `simulate` and `trajectory`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub label: String,
    #[serde(default)]
    pub fields: FieldsSpec,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsToggles,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Full validation before any computation.
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        let world = self.build_world()?;
        if !world.label_names().any(|name| name == self.label.as_str()) {
            return Err(Error::config(
                "label",
                format!(
                    "label `{}` not present in dataset (known: {})",
                    self.label,
                    world.label_names().collect::<Vec<_>>().join(", ")
                ),
            ));
        }
        if let FieldSpec::Perturbed { epsilon, .. } = self.fields.cond {
            if !epsilon.is_finite() {
                return Err(Error::config("fields.cond.epsilon", "must be finite"));
            }
        }
        if let FieldSpec::Perturbed { epsilon, .. } = self.fields.uncond {
            if !epsilon.is_finite() {
                return Err(Error::config("fields.uncond.epsilon", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn build_world(&self) -> Result<Arc<LabeledPointCloud>> {
        let world = match &self.dataset {
            DatasetSpec::Generator(spec) => spec.build(),
            DatasetSpec::Inline(spec) => LabeledPointCloud::from_spec(spec)?,
        };
        Ok(Arc::new(world))
    }

    pub fn build_fields(&self, world: &Arc<LabeledPointCloud>) -> (FieldHandle, FieldHandle) {
        (
            self.fields.cond.build(world),
            self.fields.uncond.build(world),
        )
    }
}

/// Document for `compare`: several sampler settings over one world.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub dataset: DatasetSpec,
    pub label: String,
    #[serde(default)]
    pub fields: FieldsSpec,
    pub runs: Vec<SamplerConfig>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl CompareConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: CompareConfig =
            serde_json::from_str(&text).map_err(|e| Error::config("<document>", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(Error::config(
                "runs",
                "at least one sampler config required",
            ));
        }
        for (i, run) in self.runs.iter().enumerate() {
            run.validate()
                .map_err(|e| Error::config(format!("runs[{i}]"), e.to_string()))?;
        }
        let probe = RunConfig {
            dataset: self.dataset.clone(),
            label: self.label.clone(),
            fields: self.fields,
            sampler: self.runs[0],
            diagnostics: DiagnosticsToggles::default(),
            output: self.output.clone(),
        };
        probe.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dataset": {"generator": {"name": "two-clusters", "seed": 7}},
        "label": "A"
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let config = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(config.sampler.steps, 32);
        assert_eq!(config.output.format, OutputFormat::Both);
        let world = config.build_world().unwrap();
        assert_eq!(world.len(), 16);
    }

    #[test]
    fn effective_config_round_trips() {
        let config = RunConfig::from_json(MINIMAL).unwrap();
        let echoed = serde_json::to_string_pretty(&config).unwrap();
        let reloaded = RunConfig::from_json(&echoed).unwrap();
        assert_eq!(config, reloaded);
        assert_eq!(echoed, serde_json::to_string_pretty(&reloaded).unwrap());
    }

    #[test]
    fn unknown_label_is_rejected_with_path() {
        let text = MINIMAL.replace("\"A\"", "\"Z\"");
        let err = RunConfig::from_json(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("label"), "{msg}");
        assert!(msg.contains("Z"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{
            "dataset": {"generator": {"name": "two-clusters"}},
            "label": "A",
            "sampler": {"stepz": 8}
        }"#;
        assert!(RunConfig::from_json(text).is_err());
    }

    #[test]
    fn inline_dataset_builds() {
        let text = r#"{
            "dataset": {"inline": {
                "dimension": 1,
                "points": [[0.0], [2.0]],
                "weights": [1.0, 3.0],
                "labels": ["A", "B"]
            }},
            "label": "B"
        }"#;
        let config = RunConfig::from_json(text).unwrap();
        let world = config.build_world().unwrap();
        assert_eq!(world.dimension(), 1);
        assert!((world.weights()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cfg_with_projection_is_rejected_at_parse() {
        let text = r#"{
            "dataset": {"generator": {"name": "two-clusters"}},
            "label": "A",
            "sampler": {"method": "cfg", "projection_iters": 3}
        }"#;
        let err = RunConfig::from_json(text).unwrap_err();
        assert!(err.to_string().contains("projection_iters"));
    }
}
