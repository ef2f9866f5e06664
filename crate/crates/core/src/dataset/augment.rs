use crate::imaging::{encode_jpeg, encode_png, gaussian_blur, jpeg_roundtrip, Image};
use crate::rng::{stream, PURPOSE_AUGMENT};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Ranges for the single augmentation applied to every pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    /// Inclusive JPEG quality range.
    pub jpeg_quality: [u8; 2],
    pub blur_sigma: [f64; 2],
    /// Probability of the JPEG branch; blur otherwise.
    pub jpeg_probability: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            jpeg_quality: [30, 95],
            blur_sigma: [0.5, 2.0],
            jpeg_probability: 0.5,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let [qlo, qhi] = self.jpeg_quality;
        if !(1 <= qlo && qlo <= qhi && qhi <= 100) {
            return Err(Error::Config(format!("jpeg_quality {qlo}..{qhi} must lie within 1..=100")));
        }
        let [slo, shi] = self.blur_sigma;
        if !(slo > 0.0 && slo <= shi && shi.is_finite()) {
            return Err(Error::Config(format!("blur_sigma {slo}..{shi} must be positive and ordered")));
        }
        if !(0.0..=1.0).contains(&self.jpeg_probability) {
            return Err(Error::Config("jpeg_probability must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// The augmentation applied identically to both images of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Augmentation {
    Jpeg { quality: u8 },
    Blur { sigma: f64 },
}

impl Augmentation {
    pub fn kind(&self) -> &'static str {
        match self {
            Augmentation::Jpeg { .. } => "jpeg",
            Augmentation::Blur { .. } => "blur",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Augmentation::Jpeg { quality } => quality as f64,
            Augmentation::Blur { sigma } => sigma,
        }
    }

    /// Inverse of `(kind(), param())`.
    pub fn from_parts(kind: &str, param: f64) -> Result<Self> {
        match kind {
            "jpeg" if param.fract() == 0.0 && (1.0..=100.0).contains(&param) => {
                Ok(Augmentation::Jpeg { quality: param as u8 })
            }
            "blur" if param > 0.0 && param.is_finite() => Ok(Augmentation::Blur { sigma: param }),
            _ => Err(Error::InvalidInput(format!("bad augmentation {kind}({param})"))),
        }
    }

    /// File extension of the encoded output.
    pub fn extension(&self) -> &'static str {
        match self {
            Augmentation::Jpeg { .. } => "jpg",
            Augmentation::Blur { .. } => "png",
        }
    }

    /// The augmented image as it is decoded from disk.
    pub fn apply(&self, img: &Image) -> Result<Image> {
        match *self {
            Augmentation::Jpeg { quality } => jpeg_roundtrip(img, quality),
            Augmentation::Blur { sigma } => gaussian_blur(img, sigma),
        }
    }

    /// The augmented image's file bytes: the JPEG stream itself, or a PNG of
    /// the blurred image.
    pub fn encode(&self, img: &Image) -> Result<Vec<u8>> {
        match *self {
            Augmentation::Jpeg { quality } => encode_jpeg(img, quality),
            Augmentation::Blur { sigma } => encode_png(&gaussian_blur(img, sigma)?),
        }
    }
}

/// Draws one augmentation from the record's seed.
pub fn draw_augmentation(seed: u64, cfg: &AugmentConfig) -> Augmentation {
    let mut rng = stream(seed, &[PURPOSE_AUGMENT]);
    if rng.gen_bool(cfg.jpeg_probability) {
        Augmentation::Jpeg {
            quality: rng.gen_range(cfg.jpeg_quality[0]..=cfg.jpeg_quality[1]),
        }
    } else {
        Augmentation::Blur {
            sigma: rng.gen_range(cfg.blur_sigma[0]..=cfg.blur_sigma[1]),
        }
    }
}

/// Applies one shared draw to both images.
pub fn augment_pair(
    bona_fide: &Image,
    tattooed: &Image,
    seed: u64,
    cfg: &AugmentConfig,
) -> Result<(Image, Image, Augmentation)> {
    let aug = draw_augmentation(seed, cfg);
    Ok((aug.apply(bona_fide)?, aug.apply(tattooed)?, aug))
}
