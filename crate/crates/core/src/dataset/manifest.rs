use crate::blending::BlendConfig;
use crate::imaging::write_bytes;
use crate::placement::{GenerationStrategy, Placement};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const SKIPS_FILE: &str = "skips.jsonl";

/// One bona fide / tattooed pair. Output paths are relative to the manifest's
/// directory; input paths are as configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub subject: String,
    pub bona_fide: String,
    pub tattooed: String,
    pub strategy: GenerationStrategy,
    pub seed: u64,
    pub coverage: f64,
    /// `"jpeg"` or `"blur"`.
    pub augmentation: String,
    /// JPEG quality or blur sigma.
    pub aug_param: f64,
    pub tool_version: String,
    pub jpeg_encoder: String,
    pub variant: u32,
    pub target_coverage: Option<f64>,
    pub best_effort: bool,
    pub placements: Vec<Placement>,
    pub source_image: String,
    pub landmarks: String,
    /// Raw depth map, or `None` for the landmark fallback.
    pub depth: Option<String>,
    pub templates: String,
    pub blend: BlendConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SkipRecord {
    pub subject: String,
    pub variant: Option<u32>,
    pub reason: String,
}

/// Records sorted by (subject, variant); skips sorted likewise.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
    pub skips: Vec<SkipRecord>,
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it)?);
        s.push('\n');
    }
    Ok(s)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::InvalidInput(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

impl DatasetManifest {
    pub fn new(mut records: Vec<ManifestRecord>, mut skips: Vec<SkipRecord>) -> Self {
        records.sort_by(|a, b| (&a.subject, a.variant).cmp(&(&b.subject, b.variant)));
        skips.sort();
        DatasetManifest { records, skips }
    }

    pub fn tattooed_count(&self) -> usize {
        self.records.len()
    }

    /// Distinct subjects with at least one record.
    pub fn bona_fide_count(&self) -> usize {
        let mut s: Vec<&str> = self.records.iter().map(|r| r.subject.as_str()).collect();
        s.dedup();
        s.len()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_bytes(dir.join(MANIFEST_FILE), jsonl(&self.records)?.as_bytes())?;
        write_bytes(dir.join(SKIPS_FILE), jsonl(&self.skips)?.as_bytes())
    }

    /// Reads `manifest.jsonl` and, if present next to it, `skips.jsonl`.
    pub fn load(manifest: impl AsRef<Path>) -> Result<Self> {
        let path = manifest.as_ref();
        let records = read_jsonl(path)?;
        let skips_path = path.with_file_name(SKIPS_FILE);
        let skips = if skips_path.exists() {
            read_jsonl(&skips_path)?
        } else {
            Vec::new()
        };
        Ok(DatasetManifest::new(records, skips))
    }
}
