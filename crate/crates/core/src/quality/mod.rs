//! Full-reference removal quality: PSNR, mean SSIM and pixel-domain VIF on
//! the whole portrait and on the eyebrows-to-chin crop.

mod metrics;
mod report;

pub use metrics::{mssim, psnr, vif_p, SsimConfig, Vif, VIF_MIN_SIDE};
pub use report::{
    evaluate_removal, Aggregate, CropAggregate, CropMetrics, FailedPair, PairQuality, QualityReport,
    TABLE_COLUMNS,
};
