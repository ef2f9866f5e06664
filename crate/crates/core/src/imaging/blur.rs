use super::{FloatImage, Image};
use crate::exec::{self, Mode};
use crate::{Error, Result};

/// Normalized 1-D Gaussian taps with radius `ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f32>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("blur sigma must be > 0, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| (v / sum) as f32).collect())
}

/// Separable Gaussian blur with clamp-to-edge borders; dims and channels are
/// preserved and the result is quantized once.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    Ok(gaussian_blur_float(&img.to_float(), sigma)?.quantize())
}

pub fn gaussian_blur_float(img: &FloatImage, sigma: f64) -> Result<FloatImage> {
    gaussian_blur_float_with(img, sigma, Mode::default())
}

pub fn gaussian_blur_float_with(img: &FloatImage, sigma: f64, mode: Mode) -> Result<FloatImage> {
    let kernel = gaussian_kernel(sigma)?;
    let r = (kernel.len() / 2) as i64;
    let (w, h, c) = (
        img.width() as usize,
        img.height() as usize,
        img.channels() as usize,
    );
    let src = img.data();
    let row_len = w * c;

    let mut horiz = vec![0f32; src.len()];
    exec::for_each_row(mode, &mut horiz, row_len, |y, out| {
        let row = &src[y * row_len..(y + 1) * row_len];
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0f32;
                for (i, k) in kernel.iter().enumerate() {
                    let sx = (x as i64 + i as i64 - r).clamp(0, w as i64 - 1) as usize;
                    acc += k * row[sx * c + ch];
                }
                out[x * c + ch] = acc;
            }
        }
    });

    let mut out = vec![0f32; src.len()];
    exec::for_each_row(mode, &mut out, row_len, |y, dst| {
        for (i, k) in kernel.iter().enumerate() {
            let sy = (y as i64 + i as i64 - r).clamp(0, h as i64 - 1) as usize;
            let row = &horiz[sy * row_len..(sy + 1) * row_len];
            for (d, s) in dst.iter_mut().zip(row) {
                *d += k * s;
            }
        }
    });
    FloatImage::new(img.width(), img.height(), img.channels(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_fixed_point() {
        let img = Image::filled(16, 16, &[90, 140, 200]).unwrap();
        assert_eq!(gaussian_blur(&img, 1.5).unwrap(), img);
    }

    #[test]
    fn rejects_non_positive_sigma() {
        let img = Image::filled(4, 4, &[1]).unwrap();
        assert!(matches!(gaussian_blur(&img, 0.0), Err(Error::InvalidParameter(_))));
        assert!(gaussian_blur(&img, -1.0).is_err());
        assert!(gaussian_blur(&img, f64::NAN).is_err());
    }

    #[test]
    fn kernel_radius_and_normalization() {
        let k = gaussian_kernel(1.0).unwrap();
        assert_eq!(k.len(), 7);
        let s: f32 = k.iter().sum();
        assert!((s - 1.0).abs() < 1e-6);
        assert_eq!(gaussian_kernel(0.6).unwrap().len(), 5);
    }

    /// Dense 2-D convolution with clamp-to-edge, computed in f64 directly from
    /// the Gaussian formula.
    fn dense_blur(img: &Image, sigma: f64) -> Vec<f64> {
        let r = (3.0 * sigma).ceil() as i64;
        let mut weights = Vec::new();
        let mut total = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let g = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                weights.push((dx, dy, g));
                total += g;
            }
        }
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for &(dx, dy, g) in &weights {
                    let sx = (x + dx).clamp(0, w - 1) as u32;
                    let sy = (y + dy).clamp(0, h - 1) as u32;
                    acc += g / total * img.pixel(sx, sy)[0] as f64;
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn impulse_matches_dense_oracle() {
        let mut img = Image::filled(33, 33, &[0]).unwrap();
        img.pixel_mut(16, 16)[0] = 255;
        let blurred = gaussian_blur_float(&img.to_float(), 1.0).unwrap();
        let oracle = dense_blur(&img, 1.0);
        for (a, b) in blurred.data().iter().zip(&oracle) {
            assert!((*a as f64 - b).abs() <= 0.5 / 255.0, "{a} vs {b}");
        }
        // quantized output is within half a level of the exact value
        let q = gaussian_blur(&img, 1.0).unwrap();
        for (a, b) in q.data().iter().zip(&oracle) {
            assert!((*a as f64 - b).abs() <= 0.5 + 1e-6);
        }
        // centre value: 255 * g(0)^2 with normalized 1-D taps
        let k = gaussian_kernel(1.0).unwrap();
        let centre = blurred.pixel(16, 16)[0];
        assert!((centre - 255.0 * k[3] * k[3]).abs() < 1e-3);
    }

    #[test]
    fn preserves_mean_on_interior_content() {
        let img = Image::from_fn(48, 48, 1, |x, y, _| {
            if (12..36).contains(&x) && (12..36).contains(&y) {
                ((x * 7 + y * 13) % 200) as u8
            } else {
                0
            }
        })
        .unwrap();
        let out = gaussian_blur_float(&img.to_float(), 1.5).unwrap();
        let mean_in: f64 = img.data().iter().map(|&v| v as f64).sum::<f64>() / img.data().len() as f64;
        let mean_out: f64 = out.data().iter().map(|&v| v as f64).sum::<f64>() / out.data().len() as f64;
        assert!((mean_in - mean_out).abs() <= 0.5 / 255.0);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let img = Image::from_fn(40, 30, 3, |x, y, c| ((x * 31 + y * 17 + c as u32 * 5) % 256) as u8)
            .unwrap()
            .to_float();
        let a = gaussian_blur_float_with(&img, 2.0, Mode::Sequential).unwrap();
        let b = gaussian_blur_float_with(&img, 2.0, Mode::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.width(), a.height(), a.channels()), (40, 30, 3));
    }
}
