use super::metrics::{mssim, psnr, vif_p, SsimConfig};
use crate::exec::{self, Mode};
use crate::geometry::Landmarks68;
use crate::imaging::{crop_inner, load_image, Image};
use crate::nonfinite;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

/// The three metrics on one crop of one image pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropMetrics {
    pub mssim: f64,
    /// dB; `inf` for identical crops.
    #[serde(with = "nonfinite")]
    pub psnr: f64,
    /// Clamped to [0, 1].
    pub vif: f64,
    pub vif_raw: f64,
}

impl CropMetrics {
    pub fn compute(truth: &Image, candidate: &Image, cfg: &SsimConfig) -> Result<Self> {
        let vif = vif_p(truth, candidate)?;
        Ok(CropMetrics {
            mssim: mssim(truth, candidate, cfg)?,
            psnr: psnr(truth, candidate)?,
            vif: vif.value,
            vif_raw: vif.raw,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairQuality {
    pub file: String,
    pub portrait: CropMetrics,
    pub inner: CropMetrics,
}

/// Mean and population standard deviation over the finite values of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    #[serde(with = "nonfinite")]
    pub mean: f64,
    #[serde(with = "nonfinite")]
    pub std: f64,
    /// Finite values aggregated.
    pub count: usize,
    /// Infinite values, excluded from mean and std.
    pub infinite: usize,
}

impl Aggregate {
    /// With no finite values the mean is `+∞` if any infinities were seen and
    /// NaN otherwise.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut finite, mut infinite) = (Vec::new(), 0);
        for v in values {
            if v.is_finite() {
                finite.push(v);
            } else if v.is_infinite() {
                infinite += 1;
            }
        }
        if finite.is_empty() {
            let mean = if infinite > 0 { f64::INFINITY } else { f64::NAN };
            let std = if infinite > 0 { 0.0 } else { f64::NAN };
            return Aggregate { mean, std, count: 0, infinite };
        }
        let n = finite.len() as f64;
        let mean = finite.iter().sum::<f64>() / n;
        let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Aggregate {
            mean,
            std: var.sqrt(),
            count: finite.len(),
            infinite,
        }
    }

    /// `"0.967 (±0.034)"`.
    pub fn cell(&self, decimals: usize) -> String {
        format!(
            "{} (±{})",
            nonfinite::text(self.mean, decimals),
            nonfinite::text(self.std, decimals)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropAggregate {
    pub mssim: Aggregate,
    pub psnr: Aggregate,
    pub vif: Aggregate,
}

impl CropAggregate {
    pub fn of(metrics: &[CropMetrics]) -> Self {
        CropAggregate {
            mssim: Aggregate::of(metrics.iter().map(|m| m.mssim)),
            psnr: Aggregate::of(metrics.iter().map(|m| m.psnr)),
            vif: Aggregate::of(metrics.iter().map(|m| m.vif)),
        }
    }

    fn cells(&self) -> [String; 3] {
        [self.mssim.cell(3), self.psnr.cell(2), self.vif.cell(3)]
    }
}

/// A pair that was found in both directories but could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedPair {
    pub file: String,
    pub reason: String,
}

/// Removal quality over a directory of ground-truth / candidate pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Row label, e.g. the removal method's name.
    pub scenario: String,
    pub ssim: SsimConfig,
    pub pairs: Vec<PairQuality>,
    /// Present in only one of the two directories.
    pub unmatched: Vec<String>,
    pub failed: Vec<FailedPair>,
    pub portrait: CropAggregate,
    pub inner: CropAggregate,
}

pub const TABLE_COLUMNS: [&str; 7] = [
    "Scenario",
    "Portrait MSSIM",
    "Portrait PSNR",
    "Portrait VIF",
    "Inner MSSIM",
    "Inner PSNR",
    "Inner VIF",
];

impl QualityReport {
    pub fn from_pairs(
        scenario: impl Into<String>,
        ssim: SsimConfig,
        pairs: Vec<PairQuality>,
        unmatched: Vec<String>,
        failed: Vec<FailedPair>,
    ) -> Self {
        let portrait: Vec<_> = pairs.iter().map(|p| p.portrait).collect();
        let inner: Vec<_> = pairs.iter().map(|p| p.inner).collect();
        QualityReport {
            scenario: scenario.into(),
            ssim,
            portrait: CropAggregate::of(&portrait),
            inner: CropAggregate::of(&inner),
            pairs,
            unmatched,
            failed,
        }
    }

    pub fn table_header() -> String {
        TABLE_COLUMNS.join(" | ")
    }

    /// `TRNet | 0.967 (±0.034) | 36.22 (±6.00) | 0.883 (±0.079) | …`
    pub fn table_row(&self) -> String {
        let mut cells = vec![self.scenario.clone()];
        cells.extend(self.portrait.cells());
        cells.extend(self.inner.cells());
        cells.join(" | ")
    }

    /// Per-pair rows followed by `mean` and `std` rows, in table column order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "file",
            "portrait_mssim",
            "portrait_psnr",
            "portrait_vif",
            "inner_mssim",
            "inner_psnr",
            "inner_vif",
        ])?;
        let num = |v: f64| nonfinite::text(v, 6);
        for p in &self.pairs {
            let (a, b) = (&p.portrait, &p.inner);
            w.write_record([
                p.file.clone(),
                num(a.mssim),
                num(a.psnr),
                num(a.vif),
                num(b.mssim),
                num(b.psnr),
                num(b.vif),
            ])?;
        }
        for (name, pick) in [
            ("mean", (|a: &Aggregate| a.mean) as fn(&Aggregate) -> f64),
            ("std", |a: &Aggregate| a.std),
        ] {
            let (a, b) = (&self.portrait, &self.inner);
            let mut row = vec![name.to_string()];
            row.extend(
                [&a.mssim, &a.psnr, &a.vif, &b.mssim, &b.psnr, &b.vif]
                    .into_iter()
                    .map(|g| num(pick(g))),
            );
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn image_names(dir: &Path) -> Result<BTreeSet<String>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = BTreeSet::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                names.insert(name.to_string());
            }
        }
    }
    Ok(names)
}

fn score_pair(
    file: &str,
    truth_dir: &Path,
    candidate_dir: &Path,
    landmark_dir: &Path,
    cfg: &SsimConfig,
) -> Result<PairQuality> {
    let truth = load_image(truth_dir.join(file))?;
    let candidate = load_image(candidate_dir.join(file))?;
    if !truth.same_shape(&candidate) {
        return Err(Error::InvalidPair(format!(
            "{}x{}x{} vs {}x{}x{}",
            truth.width(),
            truth.height(),
            truth.channels(),
            candidate.width(),
            candidate.height(),
            candidate.channels()
        )));
    }
    let stem = Path::new(file).file_stem().and_then(|s| s.to_str()).unwrap_or(file);
    let lm = Landmarks68::load(landmark_dir.join(format!("{stem}.json")))?;
    Ok(PairQuality {
        file: file.to_string(),
        portrait: CropMetrics::compute(&truth, &candidate, cfg)?,
        inner: CropMetrics::compute(&crop_inner(&truth, &lm)?, &crop_inner(&candidate, &lm)?, cfg)?,
    })
}

/// Scores every image present under the same name in both directories.
///
/// The inner crop comes from the ground truth's landmarks
/// (`landmark_dir/<stem>.json`) and is applied to both images. Files present on
/// one side only are listed as unmatched; pairs that fail to load or score are
/// listed with the reason. Both are left out of the aggregates.
pub fn evaluate_removal(
    truth_dir: impl AsRef<Path>,
    candidate_dir: impl AsRef<Path>,
    landmark_dir: impl AsRef<Path>,
    cfg: &SsimConfig,
    mode: Mode,
) -> Result<QualityReport> {
    let (truth_dir, candidate_dir, landmark_dir) =
        (truth_dir.as_ref(), candidate_dir.as_ref(), landmark_dir.as_ref());
    cfg.validate()?;
    let truth = image_names(truth_dir)?;
    let candidate = image_names(candidate_dir)?;
    let matched: Vec<String> = truth.intersection(&candidate).cloned().collect();
    let unmatched: Vec<String> = truth.symmetric_difference(&candidate).cloned().collect();
    for name in &unmatched {
        log::warn!("{name}: present in only one directory; skipped");
    }

    let results = exec::map(mode, &matched, |f| {
        score_pair(f, truth_dir, candidate_dir, landmark_dir, cfg)
    });
    let (mut pairs, mut failed) = (Vec::new(), Vec::new());
    for (file, r) in matched.iter().zip(results) {
        match r {
            Ok(p) => pairs.push(p),
            Err(e) => {
                log::warn!("{file}: {e}");
                failed.push(FailedPair {
                    file: file.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    let scenario = candidate_dir
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("candidate")
        .to_string();
    Ok(QualityReport::from_pairs(scenario, cfg.clone(), pairs, unmatched, failed))
}
