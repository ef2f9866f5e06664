//! Paired bona fide / tattooed dataset generation with a reproducible manifest.
//!
//! Every output record is keyed by `derive(global seed, subject, variant)`;
//! strategy choice, placement, ink drift and augmentation each draw from
//! their own stream of that key, so the run is independent of worker count
//! and processing order.

mod augment;
mod config;
mod manifest;

pub use augment::{augment_pair, draw_augmentation, AugmentConfig, Augmentation};
pub use config::{config_hash, DatasetConfig, WeightedStrategy, DEFAULT_SEED};
pub use manifest::{DatasetManifest, ManifestRecord, SkipRecord, MANIFEST_FILE, SKIPS_FILE};

use crate::blending::{compose_with, landmark_depth_fallback, transform_depth, BlendConfig, DepthMap};
use crate::exec::{self, Mode};
use crate::geometry::{build_regions, canonical_triangulation, extend_forehead, Landmarks68, RegionSet};
use crate::imaging::{load_image, write_bytes, Image, JPEG_ENCODER};
use crate::placement::{load_catalog, plan_placements, GenerationStrategy, PlacementPlan, TattooTemplate};
use crate::rng::{derive, label, stream, PURPOSE_STRATEGY};
use crate::{synthetic, Error, Result, VERSION};
use rand::Rng;
use std::path::{Path, PathBuf};

/// Marker stored in place of a template directory when the built-in pack is used.
pub const BUILTIN_TEMPLATES: &str = "builtin";

/// A face with everything derived from its landmarks.
pub struct FaceContext {
    pub face: Image,
    pub landmarks: Landmarks68,
    pub regions: RegionSet,
    /// Displacement-ready depth (transformed, or the landmark fallback).
    pub depth: DepthMap,
}

impl FaceContext {
    /// `raw_depth` is estimator output and goes through [`transform_depth`];
    /// without it the landmark fallback is used as is.
    pub fn new(face: Image, landmarks: Landmarks68, raw_depth: Option<&DepthMap>, blend: &BlendConfig) -> Result<Self> {
        let (w, h) = (face.width(), face.height());
        if landmarks.width() != w || landmarks.height() != h {
            return Err(Error::landmarks(format!(
                "landmarks are for a {}x{} image, face is {w}x{h}",
                landmarks.width(),
                landmarks.height()
            )));
        }
        let ext = extend_forehead(&landmarks)?;
        let regions = build_regions(&ext, w, h)?;
        let depth = match raw_depth {
            Some(d) if d.width() != w || d.height() != h => {
                return Err(Error::InvalidInput(format!(
                    "depth map is {}x{}, face is {w}x{h}",
                    d.width(),
                    d.height()
                )))
            }
            Some(d) => transform_depth(d, blend),
            None => landmark_depth_fallback(&ext, w, h),
        };
        Ok(FaceContext {
            face: face.to_rgb(),
            landmarks,
            regions,
            depth,
        })
    }
}

/// One generated pair before augmentation.
#[derive(Debug, Clone)]
pub struct GeneratedPair {
    pub bona_fide: Image,
    pub tattooed: Image,
    pub plan: PlacementPlan,
}

/// Plans and composes one tattooed variant of a prepared face.
pub fn generate_pair_in(
    ctx: &FaceContext,
    strategy: &GenerationStrategy,
    seed: u64,
    catalog: &[TattooTemplate],
    blend: &BlendConfig,
    mode: Mode,
) -> Result<GeneratedPair> {
    let plan = plan_placements(strategy, &ctx.regions, catalog, seed)?;
    let tattooed = compose_with(&ctx.face, &plan, catalog, &ctx.regions, &ctx.depth, blend, seed, mode)?;
    Ok(GeneratedPair {
        bona_fide: ctx.face.clone(),
        tattooed,
        plan,
    })
}

/// Generates one bona fide / tattooed pair from raw inputs.
pub fn generate_pair(
    face: &Image,
    landmarks: &Landmarks68,
    raw_depth: Option<&DepthMap>,
    strategy: &GenerationStrategy,
    seed: u64,
    catalog: &[TattooTemplate],
    blend: &BlendConfig,
) -> Result<GeneratedPair> {
    let ctx = FaceContext::new(face.clone(), landmarks.clone(), raw_depth, blend)?;
    generate_pair_in(&ctx, strategy, seed, catalog, blend, Mode::default())
}

/// Seed of one output record.
pub fn record_seed(global: u64, subject: &str, variant: u32) -> u64 {
    derive(global, &[label(subject), variant as u64])
}

/// Weighted draw from the strategy mix.
pub fn draw_strategy(seed: u64, mix: &[WeightedStrategy]) -> GenerationStrategy {
    let total: f64 = mix.iter().map(|m| m.weight).sum();
    let mut u = stream(seed, &[PURPOSE_STRATEGY]).gen_range(0.0..total);
    for m in mix {
        if u < m.weight {
            return m.strategy.clone();
        }
        u -= m.weight;
    }
    mix[mix.len() - 1].strategy.clone()
}

/// Loads the template directory, or the built-in pack when none is configured.
pub fn load_templates(dir: Option<&Path>) -> Result<Vec<TattooTemplate>> {
    match dir {
        Some(d) if d.as_os_str() != BUILTIN_TEMPLATES => load_catalog(d),
        _ => Ok(synthetic::template_pack()),
    }
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|x| x.to_str())
                .is_some_and(|x| matches!(x.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        })
        .collect();
    out.sort();
    Ok(out)
}

fn path_text(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Summary of a finished run.
#[derive(Debug, Clone)]
pub struct DatasetRun {
    pub manifest: DatasetManifest,
    pub config_hash: String,
    pub seed: u64,
}

struct FaceJob {
    subject: String,
    image: PathBuf,
}

fn skip_all(subject: &str, count: u32, reason: String) -> Vec<std::result::Result<ManifestRecord, SkipRecord>> {
    log::warn!("{subject}: {reason}");
    (0..count)
        .map(|v| {
            Err(SkipRecord {
                subject: subject.to_string(),
                variant: Some(v),
                reason: reason.clone(),
            })
        })
        .collect()
}

fn run_face(
    job: &FaceJob,
    cfg: &DatasetConfig,
    seed: u64,
    catalog: &[TattooTemplate],
    mode: Mode,
) -> Result<Vec<std::result::Result<ManifestRecord, SkipRecord>>> {
    let count = cfg.tattooed_per_bona_fide;
    let lm_path = cfg.landmark_dir.join(format!("{}.json", job.subject));
    let depth_path = cfg
        .depth_dir
        .as_ref()
        .map(|d| d.join(format!("{}.png", job.subject)))
        .filter(|p| p.exists());
    let prepared = (|| {
        let face = load_image(&job.image)?;
        let lm = Landmarks68::load(&lm_path)?;
        let depth = depth_path.as_ref().map(DepthMap::load).transpose()?;
        FaceContext::new(face, lm, depth.as_ref(), &cfg.blend)
    })();
    let ctx = match prepared {
        Ok(c) => c,
        Err(e) => return Ok(skip_all(&job.subject, count, e.to_string())),
    };
    if cfg.depth_dir.is_some() && depth_path.is_none() {
        log::info!("{}: no depth map, using the landmark fallback", job.subject);
    }
    let templates = cfg
        .template_dir
        .as_deref()
        .map_or_else(|| BUILTIN_TEMPLATES.to_string(), path_text);

    let mut out = Vec::with_capacity(count as usize);
    for variant in 0..count {
        let rseed = record_seed(seed, &job.subject, variant);
        let strategy = draw_strategy(rseed, &cfg.strategies);
        let pair = match generate_pair_in(&ctx, &strategy, rseed, catalog, &cfg.blend, mode) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("{} #{variant}: {e}", job.subject);
                out.push(Err(SkipRecord {
                    subject: job.subject.clone(),
                    variant: Some(variant),
                    reason: e.to_string(),
                }));
                continue;
            }
        };
        let aug = draw_augmentation(rseed, &cfg.augmentation);
        let name = format!("{}_{variant}.{}", job.subject, aug.extension());
        let (bf_rel, tat_rel) = (format!("bonafide/{name}"), format!("tattooed/{name}"));
        write_bytes(cfg.output_dir.join(&bf_rel), &aug.encode(&pair.bona_fide)?)?;
        write_bytes(cfg.output_dir.join(&tat_rel), &aug.encode(&pair.tattooed)?)?;
        out.push(Ok(ManifestRecord {
            subject: job.subject.clone(),
            bona_fide: bf_rel,
            tattooed: tat_rel,
            strategy: strategy.clone(),
            seed: rseed,
            coverage: pair.plan.achieved_coverage,
            augmentation: aug.kind().to_string(),
            aug_param: aug.param(),
            tool_version: VERSION.to_string(),
            jpeg_encoder: JPEG_ENCODER.to_string(),
            variant,
            target_coverage: pair.plan.target,
            best_effort: pair.plan.best_effort,
            placements: pair.plan.placements,
            source_image: path_text(&job.image),
            landmarks: path_text(&lm_path),
            depth: depth_path.as_deref().map(path_text),
            templates: templates.clone(),
            blend: cfg.blend.clone(),
        }));
    }
    Ok(out)
}

/// Walks the input directory and writes the dataset under `cfg.output_dir`.
///
/// Writes `bonafide/`, `tattooed/`, `manifest.jsonl`, `skips.jsonl`,
/// `config.json`, `triangulation.json` and `run.json`. Per-face failures are
/// recorded as skips; only configuration and output errors abort.
pub fn generate_dataset(cfg: &DatasetConfig, mode: Mode) -> Result<DatasetRun> {
    cfg.validate()?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let catalog = load_templates(cfg.template_dir.as_deref())?;

    let mut jobs: Vec<FaceJob> = Vec::new();
    let mut skips = Vec::new();
    for image in image_files(&cfg.input_dir)? {
        let subject = image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if jobs.iter().any(|j| j.subject == subject) {
            skips.push(SkipRecord {
                subject,
                variant: None,
                reason: format!("duplicate subject id from {}", image.display()),
            });
            continue;
        }
        jobs.push(FaceJob { subject, image });
    }

    let results = exec::map(mode, &jobs, |job| run_face(job, cfg, seed, &catalog, mode));
    let mut records = Vec::new();
    for r in results {
        for item in r? {
            match item {
                Ok(rec) => records.push(rec),
                Err(skip) => skips.push(skip),
            }
        }
    }
    let manifest = DatasetManifest::new(records, skips);

    let out = &cfg.output_dir;
    let mut resolved = cfg.clone();
    resolved.seed = Some(seed);
    let hash = config_hash(&resolved)?;
    manifest.write(out)?;
    write_bytes(out.join("config.json"), serde_json::to_string_pretty(&resolved)?.as_bytes())?;
    write_bytes(out.join("triangulation.json"), canonical_triangulation().to_json()?.as_bytes())?;
    let run = serde_json::json!({
        "tool_version": VERSION,
        "seed": seed,
        "config_hash": hash,
        "jpeg_encoder": JPEG_ENCODER,
        "faces": jobs.len(),
        "records": manifest.records.len(),
        "skips": manifest.skips.len(),
    });
    write_bytes(out.join("run.json"), serde_json::to_string_pretty(&run)?.as_bytes())?;
    Ok(DatasetRun {
        manifest,
        config_hash: hash,
        seed,
    })
}

/// Outcome of re-deriving one manifest record.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegenCheck {
    pub subject: String,
    pub variant: u32,
    pub bona_fide_identical: bool,
    pub tattooed_identical: bool,
    pub plan_identical: bool,
}

impl RegenCheck {
    pub fn ok(&self) -> bool {
        self.bona_fide_identical && self.tattooed_identical && self.plan_identical
    }
}

/// Re-derives a record from its own fields and compares the encoded bytes
/// with the files under `root` (the manifest's directory).
pub fn regenerate_record(rec: &ManifestRecord, root: &Path) -> Result<RegenCheck> {
    let face = load_image(&rec.source_image)?;
    let lm = Landmarks68::load(&rec.landmarks)?;
    let depth = rec.depth.as_ref().map(DepthMap::load).transpose()?;
    let catalog = load_templates(Some(Path::new(&rec.templates)))?;
    let ctx = FaceContext::new(face, lm, depth.as_ref(), &rec.blend)?;
    let pair = generate_pair_in(&ctx, &rec.strategy, rec.seed, &catalog, &rec.blend, Mode::default())?;
    let aug = Augmentation::from_parts(&rec.augmentation, rec.aug_param)?;
    let same = |rel: &str, img: &Image| -> Result<bool> {
        let path = root.join(rel);
        let on_disk = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        Ok(on_disk == aug.encode(img)?)
    };
    Ok(RegenCheck {
        subject: rec.subject.clone(),
        variant: rec.variant,
        bona_fide_identical: same(&rec.bona_fide, &pair.bona_fide)?,
        tattooed_identical: same(&rec.tattooed, &pair.tattooed)?,
        plan_identical: pair.plan.placements == rec.placements
            && pair.plan.achieved_coverage == rec.coverage
            && pair.plan.best_effort == rec.best_effort,
    })
}

#[cfg(test)]
mod tests;
