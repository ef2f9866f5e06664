use super::AugmentConfig;
use crate::blending::BlendConfig;
use crate::geometry::RegionId;
use crate::placement::GenerationStrategy;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Used when neither flag, config nor environment supplies a seed.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedStrategy {
    pub strategy: GenerationStrategy,
    pub weight: f64,
}

fn default_strategies() -> Vec<WeightedStrategy> {
    let mut mix = vec![WeightedStrategy {
        strategy: GenerationStrategy::Coverage { lo: 0.05, hi: 0.25 },
        weight: 4.0,
    }];
    for r in [
        RegionId::Forehead,
        RegionId::LeftUpperCheek,
        RegionId::RightUpperCheek,
        RegionId::Chin,
    ] {
        mix.push(WeightedStrategy {
            strategy: GenerationStrategy::Region(vec![r]),
            weight: 1.0,
        });
    }
    mix
}

fn one() -> u32 {
    1
}

/// Everything a `generate` run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub input_dir: PathBuf,
    /// `<subject>.json` per input image.
    pub landmark_dir: PathBuf,
    /// `<subject>.png` raw depth maps; faces without one use the landmark fallback.
    #[serde(default)]
    pub depth_dir: Option<PathBuf>,
    /// Template PNGs with optional sidecars; the built-in pack when absent.
    #[serde(default)]
    pub template_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<WeightedStrategy>,
    #[serde(default = "one")]
    pub tattooed_per_bona_fide: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub augmentation: AugmentConfig,
    #[serde(default)]
    pub blend: BlendConfig,
}

impl DatasetConfig {
    /// Defaults for everything but the directories.
    pub fn new(
        input_dir: impl Into<PathBuf>,
        landmark_dir: impl Into<PathBuf>,
        output_dir: impl Into<PathBuf>,
    ) -> Self {
        DatasetConfig {
            input_dir: input_dir.into(),
            landmark_dir: landmark_dir.into(),
            depth_dir: None,
            template_dir: None,
            output_dir: output_dir.into(),
            strategies: default_strategies(),
            tattooed_per_bona_fide: 1,
            seed: None,
            augmentation: AugmentConfig::default(),
            blend: BlendConfig::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let dir = |name: &str, p: &Path| {
            if p.is_dir() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} {} is not a directory", p.display())))
            }
        };
        dir("input_dir", &self.input_dir)?;
        dir("landmark_dir", &self.landmark_dir)?;
        if let Some(d) = &self.depth_dir {
            dir("depth_dir", d)?;
        }
        if let Some(d) = &self.template_dir {
            if d.as_os_str() != super::BUILTIN_TEMPLATES {
                dir("template_dir", d)?;
            }
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategies must not be empty".into()));
        }
        if let Some(w) = self.strategies.iter().find(|s| !(s.weight > 0.0 && s.weight.is_finite())) {
            return Err(Error::Config(format!("strategy {} has weight {}", w.strategy, w.weight)));
        }
        if self.tattooed_per_bona_fide == 0 {
            return Err(Error::Config("tattooed_per_bona_fide must be at least 1".into()));
        }
        self.augmentation.validate()?;
        self.blend.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Hex SHA-256 of the config's JSON form.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let digest = Sha256::digest(serde_json::to_vec(cfg)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
