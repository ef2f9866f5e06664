use super::Image;
use crate::{Error, Result};
use image::{DynamicImage, ImageEncoder};
use std::path::Path;

/// Reads a PNG or JPEG as gray, RGB or RGBA (8-bit).
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let dynamic = image::load_from_memory(&bytes)
        .map_err(|e| Error::Codec(format!("{}: {e}", path.display())))?;
    match dynamic {
        DynamicImage::ImageLuma8(b) => Image::new(b.width(), b.height(), 1, b.into_raw()),
        DynamicImage::ImageRgb8(b) => Image::new(b.width(), b.height(), 3, b.into_raw()),
        DynamicImage::ImageRgba8(b) => Image::new(b.width(), b.height(), 4, b.into_raw()),
        DynamicImage::ImageLumaA8(_) => {
            let b = dynamic.to_rgba8();
            Image::new(b.width(), b.height(), 4, b.into_raw())
        }
        other if other.color().has_alpha() => {
            let b = other.to_rgba8();
            Image::new(b.width(), b.height(), 4, b.into_raw())
        }
        other => {
            let b = other.to_rgb8();
            Image::new(b.width(), b.height(), 3, b.into_raw())
        }
    }
}

pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let color = match img.channels() {
        1 => image::ExtendedColorType::L8,
        3 => image::ExtendedColorType::Rgb8,
        _ => image::ExtendedColorType::Rgba8,
    };
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(img.data(), img.width(), img.height(), color)
        .map_err(|e| Error::Codec(e.to_string()))?;
    Ok(out)
}

pub fn save_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path, &encode_png(img)?)
}

/// Writes `bytes`, creating parent directories.
pub fn write_bytes(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_roundtrip_all_channel_counts() {
        let dir = tempfile::tempdir().unwrap();
        for c in [1u8, 3, 4] {
            let img = Image::from_fn(5, 4, c, |x, y, ch| (x * 40 + y * 9 + ch as u32) as u8).unwrap();
            let p = dir.path().join(format!("c{c}.png"));
            save_png(&img, &p).unwrap();
            assert_eq!(load_image(&p).unwrap(), img);
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_image("/nonexistent/x.png"), Err(Error::Io { .. })));
    }
}
