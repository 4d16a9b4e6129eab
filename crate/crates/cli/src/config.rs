//! Run configuration: compiled-in defaults, an optional flat key=value
//! config file, the `CXRKIT_SEED` environment variable, and CLI-flag
//! overrides, applied in that order.

use crate::PipelineError;
use cxrkit_core::{BcetTargets, ClaheParams, GammaParams, Technique};
use cxrkit_core::enhance::EnhanceParams;
use cxrkit_core::preprocess::{AugmentSpec, ResizeSpec};
use std::fmt::Write as _;
use std::path::Path;

/// Environment variable holding the default seed.
pub const SEED_ENV_VAR: &str = "CXRKIT_SEED";

/// Every tunable of a run, with the defaults printable via
/// `--print-config`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub technique: Technique,
    pub seed: u64,
    pub resize_w: u32,
    pub resize_h: u32,
    pub clahe_tiles_x: u32,
    pub clahe_tiles_y: u32,
    pub clahe_clip: f64,
    pub gamma_weight: f64,
    pub bcet_min: f64,
    pub bcet_max: f64,
    pub bcet_mean: f64,
    pub copies_per_image: u32,
    pub max_abs_angle: f64,
    /// Classes eligible for rotation augmentation; empty means none.
    pub augment_classes: Vec<String>,
    /// Declared class set for manifests; empty means derive from the file.
    pub classes: Vec<String>,
    /// Worker threads for batch commands; 0 picks the rayon default.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            technique: Technique::Original,
            seed: 0,
            resize_w: 256,
            resize_h: 256,
            clahe_tiles_x: 8,
            clahe_tiles_y: 8,
            clahe_clip: 2.0,
            gamma_weight: 0.5,
            bcet_min: 0.0,
            bcet_max: 255.0,
            bcet_mean: 110.0,
            copies_per_image: 1,
            max_abs_angle: 10.0,
            augment_classes: Vec::new(),
            classes: Vec::new(),
            threads: 0,
        }
    }
}

impl RunConfig {
    /// Defaults, then the seed environment variable if present.
    pub fn from_env() -> Result<RunConfig, PipelineError> {
        let mut cfg = RunConfig::default();
        if let Ok(v) = std::env::var(SEED_ENV_VAR) {
            cfg.seed = v
                .parse()
                .map_err(|_| PipelineError::Config(format!("{SEED_ENV_VAR}='{v}' is not a u64")))?;
        }
        Ok(cfg)
    }

    /// Applies a flat key=value config file on top of this config.
    /// Lines may be blank or start with `#`.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), PipelineError> {
        let text = std::fs::read_to_string(path)?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PipelineError::Config(format!("line {}: expected key=value, got '{line}'", i + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| PipelineError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Sets one key from its text form. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value '{value}' for {key}"))
        }
        match key {
            "technique" => {
                self.technique = Technique::from_id(value)
                    .ok_or_else(|| format!("unknown technique '{value}'"))?;
            }
            "seed" => self.seed = parse(key, value)?,
            "resize_w" => self.resize_w = parse(key, value)?,
            "resize_h" => self.resize_h = parse(key, value)?,
            "clahe_tiles_x" => self.clahe_tiles_x = parse(key, value)?,
            "clahe_tiles_y" => self.clahe_tiles_y = parse(key, value)?,
            "clahe_clip" => self.clahe_clip = parse(key, value)?,
            "gamma_weight" => self.gamma_weight = parse(key, value)?,
            "bcet_min" => self.bcet_min = parse(key, value)?,
            "bcet_max" => self.bcet_max = parse(key, value)?,
            "bcet_mean" => self.bcet_mean = parse(key, value)?,
            "copies_per_image" => self.copies_per_image = parse(key, value)?,
            "max_abs_angle" => self.max_abs_angle = parse(key, value)?,
            "augment_classes" => self.augment_classes = split_list(value),
            "classes" => self.classes = split_list(value),
            "threads" => self.threads = parse(key, value)?,
            _ => return Err(format!("unknown config key '{key}'")),
        }
        Ok(())
    }

    /// Renders the config in the same key=value form the file parser reads.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "technique={}", self.technique.id());
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "resize_w={}", self.resize_w);
        let _ = writeln!(out, "resize_h={}", self.resize_h);
        let _ = writeln!(out, "clahe_tiles_x={}", self.clahe_tiles_x);
        let _ = writeln!(out, "clahe_tiles_y={}", self.clahe_tiles_y);
        let _ = writeln!(out, "clahe_clip={}", self.clahe_clip);
        let _ = writeln!(out, "gamma_weight={}", self.gamma_weight);
        let _ = writeln!(out, "bcet_min={}", self.bcet_min);
        let _ = writeln!(out, "bcet_max={}", self.bcet_max);
        let _ = writeln!(out, "bcet_mean={}", self.bcet_mean);
        let _ = writeln!(out, "copies_per_image={}", self.copies_per_image);
        let _ = writeln!(out, "max_abs_angle={}", self.max_abs_angle);
        let _ = writeln!(out, "augment_classes={}", self.augment_classes.join(","));
        let _ = writeln!(out, "classes={}", self.classes.join(","));
        let _ = writeln!(out, "threads={}", self.threads);
        out
    }

    /// Validated enhancement parameters for the configured technique set.
    pub fn enhance_params(&self) -> Result<EnhanceParams, PipelineError> {
        Ok(EnhanceParams {
            clahe: ClaheParams::new(self.clahe_tiles_x, self.clahe_tiles_y, self.clahe_clip)?,
            gamma: GammaParams::new(self.gamma_weight)?,
            bcet: BcetTargets::new(self.bcet_min, self.bcet_max, self.bcet_mean)?,
        })
    }

    pub fn resize_spec(&self) -> Result<ResizeSpec, PipelineError> {
        Ok(ResizeSpec::new(self.resize_w, self.resize_h)?)
    }

    pub fn augment_spec(&self) -> Result<AugmentSpec, PipelineError> {
        Ok(AugmentSpec::new(
            self.copies_per_image,
            self.max_abs_angle,
            self.seed,
        )?)
    }

    pub fn declared_classes(&self) -> Option<&[String]> {
        if self.classes.is_empty() {
            None
        } else {
            Some(&self.classes)
        }
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_round_trip_through_render() {
        let cfg = RunConfig::default();
        // perturb, then restore from render
        let mut rebuilt = RunConfig {
            technique: Technique::Bcet,
            ..RunConfig::default()
        };
        for line in cfg.render().lines() {
            let (k, v) = line.split_once('=').unwrap();
            rebuilt.set(k, v).unwrap();
        }
        assert_eq!(rebuilt, cfg);
    }

    #[test]
    fn file_overrides_and_rejects_unknown_keys() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\ntechnique=gamma\ngamma_weight=0.25\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(f.path()).unwrap();
        assert_eq!(cfg.technique, Technique::Gamma);
        assert_eq!(cfg.gamma_weight, 0.25);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "tiles=9").unwrap();
        assert!(cfg.apply_file(bad.path()).is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("technique", "sharpen").is_err());
        assert!(cfg.set("seed", "abc").is_err());
        assert!(cfg.set("augment_classes", "covid, viral").is_ok());
        assert_eq!(cfg.augment_classes, vec!["covid", "viral"]);
    }
}
