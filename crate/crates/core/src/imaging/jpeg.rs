use super::Image;
use crate::{Error, Result};
use jpeg_encoder::{ColorType, Encoder, SamplingFactor};

/// Encoder identity recorded in dataset manifests.
pub const JPEG_ENCODER: &str = "jpeg-encoder 0.7 baseline; 4:2:0 below q90, 4:4:4 at q90+";

fn check_quality(quality: u8) -> Result<()> {
    if !(1..=100).contains(&quality) {
        return Err(Error::param(format!("jpeg quality must be 1-100, got {quality}")));
    }
    Ok(())
}

/// Baseline JPEG bytes for a 3-channel image.
pub fn encode_jpeg(img: &Image, quality: u8) -> Result<Vec<u8>> {
    check_quality(quality)?;
    if img.channels() != 3 {
        return Err(Error::param(format!(
            "jpeg expects an RGB image, got {} channels",
            img.channels()
        )));
    }
    let (w, h) = (
        u16::try_from(img.width()).map_err(|_| Error::param("image too wide for jpeg"))?,
        u16::try_from(img.height()).map_err(|_| Error::param("image too tall for jpeg"))?,
    );
    let mut out = Vec::new();
    let mut enc = Encoder::new(&mut out, quality);
    enc.set_progressive(false);
    enc.set_sampling_factor(if quality < 90 {
        SamplingFactor::R_4_2_0
    } else {
        SamplingFactor::R_4_4_4
    });
    enc.encode(img.data(), w, h, ColorType::Rgb)
        .map_err(|e| Error::Codec(e.to_string()))?;
    Ok(out)
}

pub fn decode_jpeg(bytes: &[u8]) -> Result<Image> {
    let dynamic = image::load_from_memory_with_format(bytes, image::ImageFormat::Jpeg)
        .map_err(|e| Error::Codec(e.to_string()))?;
    let rgb = dynamic.to_rgb8();
    Image::new(rgb.width(), rgb.height(), 3, rgb.into_raw())
}

/// Encode at `quality`, decode back.
pub fn jpeg_roundtrip(img: &Image, quality: u8) -> Result<Image> {
    decode_jpeg(&encode_jpeg(img, quality)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: u32, h: u32) -> Image {
        Image::from_fn(w, h, 3, |x, y, c| {
            let fx = x as f64 / w as f64;
            let fy = y as f64 / h as f64;
            let v = 128.0
                + 60.0 * (fx * 9.0 + c as f64).sin()
                + 40.0 * (fy * 7.0).cos()
                + 10.0 * ((x * y) as f64 * 0.05).sin();
            v.clamp(0.0, 255.0) as u8
        })
        .unwrap()
    }

    fn mse(a: &Image, b: &Image) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
            .sum::<f64>()
            / a.data().len() as f64
    }

    #[test]
    fn preserves_shape() {
        let img = textured(37, 21);
        let out = jpeg_roundtrip(&img, 75).unwrap();
        assert!(out.same_shape(&img));
    }

    #[test]
    fn higher_quality_is_closer() {
        let img = textured(64, 64);
        let q100 = mse(&img, &jpeg_roundtrip(&img, 100).unwrap());
        let q30 = mse(&img, &jpeg_roundtrip(&img, 30).unwrap());
        assert!(q100 < q30, "{q100} vs {q30}");
    }

    #[test]
    fn rejects_bad_quality_and_channels() {
        let img = textured(8, 8);
        assert!(matches!(jpeg_roundtrip(&img, 0), Err(Error::InvalidParameter(_))));
        assert!(jpeg_roundtrip(&img, 101).is_err());
        assert!(jpeg_roundtrip(&img.to_rgba(), 90).is_err());
    }

    #[test]
    fn deterministic_bytes() {
        let img = textured(32, 32);
        assert_eq!(encode_jpeg(&img, 62).unwrap(), encode_jpeg(&img, 62).unwrap());
    }
}
