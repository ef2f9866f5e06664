//! Pixel containers and the raster primitives shared by the pipeline.

mod blur;
mod crop;
mod io;
mod jpeg;
mod mask;

pub use blur::{gaussian_blur, gaussian_blur_float, gaussian_blur_float_with, gaussian_kernel};
pub use crop::{crop_inner, inner_rect};
pub use io::{encode_png, load_image, save_png, write_bytes};
pub use jpeg::{decode_jpeg, encode_jpeg, jpeg_roundtrip, JPEG_ENCODER};
pub use mask::Mask;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Axis-aligned pixel rectangle, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    /// One past the last column.
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    /// One past the last row.
    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.w >= 1 && self.h >= 1 && self.right() <= width && self.bottom() <= height
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }
}

fn check_channels(channels: u8) -> Result<()> {
    match channels {
        1 | 3 | 4 => Ok(()),
        c => Err(Error::param(format!("unsupported channel count {c}"))),
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::param(format!("empty image {width}x{height}")));
    }
    Ok(())
}

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB, 4 = RGBA).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        check_channels(channels)?;
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::param(format!(
                "pixel buffer has {} bytes, expected {expected}",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image where every pixel equals `pixel` (whose length sets the channel count).
    pub fn filled(width: u32, height: u32, pixel: &[u8]) -> Result<Self> {
        let channels = pixel.len() as u8;
        let data = pixel
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * pixel.len())
            .collect();
        Image::new(width, height, channels, data)
    }

    pub fn from_fn<F>(width: u32, height: u32, channels: u8, mut f: F) -> Result<Self>
    where
        F: FnMut(u32, u32, usize) -> u8,
    {
        check_dims(width, height)?;
        check_channels(channels)?;
        let mut data = Vec::with_capacity(width as usize * height as usize * channels as usize);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels as usize {
                    data.push(f(x, y, c));
                }
            }
        }
        Image::new(width, height, channels, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels as usize]
    }

    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [u8] {
        let o = self.offset(x, y);
        let c = self.channels as usize;
        &mut self.data[o..o + c]
    }

    pub fn to_float(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn crop(&self, r: Rect) -> Result<Image> {
        if !r.fits_in(self.width, self.height) {
            return Err(Error::param(format!(
                "crop {r:?} outside {}x{} image",
                self.width, self.height
            )));
        }
        let c = self.channels as usize;
        let mut data = Vec::with_capacity(r.area() as usize * c);
        for y in r.y..r.bottom() {
            let start = self.offset(r.x, y);
            data.extend_from_slice(&self.data[start..start + r.w as usize * c]);
        }
        Image::new(r.w, r.h, self.channels, data)
    }

    /// Drops an alpha channel or expands gray so the result is RGB.
    pub fn to_rgb(&self) -> Image {
        match self.channels {
            3 => self.clone(),
            1 => Image {
                width: self.width,
                height: self.height,
                channels: 3,
                data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            },
            _ => Image {
                width: self.width,
                height: self.height,
                channels: 3,
                data: self
                    .data
                    .chunks_exact(4)
                    .flat_map(|p| [p[0], p[1], p[2]])
                    .collect(),
            },
        }
    }

    /// Adds an opaque alpha channel (or keeps the existing one).
    pub fn to_rgba(&self) -> Image {
        match self.channels {
            4 => self.clone(),
            3 => Image {
                width: self.width,
                height: self.height,
                channels: 4,
                data: self
                    .data
                    .chunks_exact(3)
                    .flat_map(|p| [p[0], p[1], p[2], 255])
                    .collect(),
            },
            _ => Image {
                width: self.width,
                height: self.height,
                channels: 4,
                data: self.data.iter().flat_map(|&v| [v, v, v, 255]).collect(),
            },
        }
    }
}

/// Working representation used while compositing: same layout as [`Image`]
/// but with `f32` samples on the 0.0–255.0 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<f32>,
}

impl FloatImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if !(1..=4).contains(&channels) {
            return Err(Error::param(format!("unsupported channel count {channels}")));
        }
        if data.len() != width as usize * height as usize * channels as usize {
            return Err(Error::param("float buffer length does not match dimensions"));
        }
        Ok(FloatImage {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn zeros(width: u32, height: u32, channels: u8) -> Result<Self> {
        FloatImage::new(
            width,
            height,
            channels,
            vec![0.0; width as usize * height as usize * channels as usize],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[f32] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels as usize]
    }

    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [f32] {
        let o = self.offset(x, y);
        let c = self.channels as usize;
        &mut self.data[o..o + c]
    }

    /// Single quantization step back to 8 bits.
    pub fn quantize(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| quantize(v)).collect(),
        }
    }
}

/// Float → 8-bit: round half away from zero, then clamp to 0–255.
pub fn quantize(v: f32) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}

/// Rec.601 luma of an image as `f64` samples, row-major.
pub fn luma_f64(img: &Image) -> Vec<f64> {
    match img.channels() {
        1 => img.data().iter().map(|&v| v as f64).collect(),
        c => img
            .data()
            .chunks_exact(c as usize)
            .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(Image::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(Image::new(0, 2, 3, vec![]).is_err());
        assert!(Image::new(2, 2, 2, vec![0; 8]).is_err());
    }

    #[test]
    fn quantize_rounds_half_away_from_zero() {
        assert_eq!(quantize(0.5), 1);
        assert_eq!(quantize(1.49), 1);
        assert_eq!(quantize(2.5), 3);
        assert_eq!(quantize(254.5), 255);
        assert_eq!(quantize(-3.0), 0);
        assert_eq!(quantize(300.0), 255);
    }

    #[test]
    fn crop_extracts_rows() {
        let img = Image::from_fn(4, 3, 1, |x, y, _| (y * 4 + x) as u8).unwrap();
        let c = img.crop(Rect::new(1, 1, 2, 2)).unwrap();
        assert_eq!(c.data(), &[5, 6, 9, 10]);
        assert!(img.crop(Rect::new(3, 0, 2, 1)).is_err());
    }

    proptest! {
        #[test]
        fn float_roundtrip_is_exact(data in proptest::collection::vec(any::<u8>(), 12)) {
            let img = Image::new(2, 2, 3, data).unwrap();
            prop_assert_eq!(img.to_float().quantize(), img.clone());
            // idempotent
            prop_assert_eq!(img.to_float().quantize().to_float().quantize(), img);
        }
    }
}
