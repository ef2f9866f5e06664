use crate::imaging::{luma_f64, Image};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// SSIM stabilising constants and window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimConfig {
    pub c1: f64,
    pub c2: f64,
    /// Odd window side.
    pub window: usize,
    pub sigma: f64,
}

impl Default for SsimConfig {
    /// `C1 = (0.01·255)²`, `C2 = (0.03·255)²`, 11×11 Gaussian, σ = 1.5.
    fn default() -> Self {
        SsimConfig {
            c1: 6.5025,
            c2: 58.5225,
            window: 11,
            sigma: 1.5,
        }
    }
}

impl SsimConfig {
    /// The rounded constants quoted alongside the original evaluation.
    pub fn rounded_constants() -> Self {
        SsimConfig {
            c1: 6.55,
            c2: 58.98,
            ..SsimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::param("SSIM constants must be > 0"));
        }
        if self.window % 2 == 0 || self.window == 0 || !(self.sigma > 0.0) {
            return Err(Error::param("SSIM window must be odd with sigma > 0"));
        }
        Ok(())
    }
}

fn check_pair(x: &Image, y: &Image) -> Result<()> {
    if !x.same_shape(y) {
        return Err(Error::InvalidPair(format!(
            "{}x{}x{} vs {}x{}x{}",
            x.width(),
            x.height(),
            x.channels(),
            y.width(),
            y.height(),
            y.channels()
        )));
    }
    Ok(())
}

/// `20·log10(255 / √MSE)` over all channels jointly; `+∞` for identical images.
pub fn psnr(x: &Image, y: &Image) -> Result<f64> {
    check_pair(x, y)?;
    let sum: f64 = x
        .data()
        .iter()
        .zip(y.data())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    let mse = sum / x.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (255.0 / mse.sqrt()).log10())
}

/// Normalised 1-D Gaussian of odd length `n`.
pub(crate) fn gaussian_1d(n: usize, sigma: f64) -> Vec<f64> {
    let r = (n / 2) as f64;
    let k: Vec<f64> = (0..n)
        .map(|i| {
            let d = i as f64 - r;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// A plain f64 plane.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub w: usize,
    pub h: usize,
    pub v: Vec<f64>,
}

impl Plane {
    fn map2(&self, o: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            v: self.v.iter().zip(&o.v).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Separable 'valid' correlation with a symmetric kernel.
    fn filter_valid(&self, k: &[f64]) -> Plane {
        let n = k.len();
        let (w2, h2) = (self.w + 1 - n, self.h + 1 - n);
        let mut tmp = vec![0.0; w2 * self.h];
        for y in 0..self.h {
            let row = &self.v[y * self.w..(y + 1) * self.w];
            for x in 0..w2 {
                tmp[y * w2 + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
            }
        }
        let mut out = vec![0.0; w2 * h2];
        for y in 0..h2 {
            for x in 0..w2 {
                out[y * w2 + x] = k.iter().enumerate().map(|(i, a)| a * tmp[(y + i) * w2 + x]).sum();
            }
        }
        Plane { w: w2, h: h2, v: out }
    }

    fn downsample(&self) -> Plane {
        let (w2, h2) = (self.w.div_ceil(2), self.h.div_ceil(2));
        let mut v = Vec::with_capacity(w2 * h2);
        for y in (0..self.h).step_by(2) {
            for x in (0..self.w).step_by(2) {
                v.push(self.v[y * self.w + x]);
            }
        }
        Plane { w: w2, h: h2, v }
    }
}

pub(crate) fn gray_plane(img: &Image) -> Plane {
    Plane {
        w: img.width() as usize,
        h: img.height() as usize,
        v: luma_f64(img),
    }
}

/// Local Gaussian-weighted moments: (μx, μy, σx², σy², σxy), 'valid' windows.
fn moments(x: &Plane, y: &Plane, k: &[f64]) -> [Plane; 5] {
    let mx = x.filter_valid(k);
    let my = y.filter_valid(k);
    let sxx = x.map2(x, |a, b| a * b).filter_valid(k).map2(&mx, |e, m| e - m * m);
    let syy = y.map2(y, |a, b| a * b).filter_valid(k).map2(&my, |e, m| e - m * m);
    let exy = x.map2(y, |a, b| a * b).filter_valid(k);
    let sxy = Plane {
        w: exy.w,
        h: exy.h,
        v: exy
            .v
            .iter()
            .zip(mx.v.iter().zip(&my.v))
            .map(|(&e, (&a, &b))| e - a * b)
            .collect(),
    };
    [mx, my, sxx, syy, sxy]
}

/// Mean SSIM over every fully-contained window of the Rec.601 luma planes.
pub fn mssim(x: &Image, y: &Image, cfg: &SsimConfig) -> Result<f64> {
    check_pair(x, y)?;
    cfg.validate()?;
    if (x.width() as usize) < cfg.window || (x.height() as usize) < cfg.window {
        return Err(Error::InvalidPair(format!(
            "{}x{} is smaller than the {}x{} SSIM window",
            x.width(),
            x.height(),
            cfg.window,
            cfg.window
        )));
    }
    let k = gaussian_1d(cfg.window, cfg.sigma);
    let [mx, my, sxx, syy, sxy] = moments(&gray_plane(x), &gray_plane(y), &k);
    let (c1, c2) = (cfg.c1, cfg.c2);
    let total: f64 = (0..mx.v.len())
        .map(|i| {
            let (a, b) = (mx.v[i], my.v[i]);
            ((2.0 * a * b + c1) * (2.0 * sxy.v[i] + c2))
                / ((a * a + b * b + c1) * (sxx.v[i] + syy.v[i] + c2))
        })
        .sum();
    Ok(total / mx.v.len() as f64)
}

/// Pixel-domain VIF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vif {
    /// Unclamped ratio; can exceed 1 for contrast-enhanced candidates.
    pub raw: f64,
    /// `raw` clamped to [0, 1].
    pub value: f64,
}

/// Side length below which the fourth VIF scale has no valid window.
pub const VIF_MIN_SIDE: u32 = 41;
const VIF_NOISE_VAR: f64 = 2.0;
const VIF_EPS: f64 = 1e-10;

/// Four-scale pixel-domain VIF with σn² = 2 on Rec.601 luma.
///
/// Scale `s` uses a Gaussian window of side `2^(5−s)+1` and σ = side/5; from
/// the second scale on, both images are filtered with that window ('valid')
/// and subsampled by two before the local statistics are taken.
pub fn vif_p(x: &Image, y: &Image) -> Result<Vif> {
    check_pair(x, y)?;
    if x.width() < VIF_MIN_SIDE || x.height() < VIF_MIN_SIDE {
        return Err(Error::InvalidPair(format!(
            "{}x{} is too small for four VIF scales (need {VIF_MIN_SIDE} px per side)",
            x.width(),
            x.height()
        )));
    }
    let (mut gt, mut dist) = (gray_plane(x), gray_plane(y));
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for scale in 1..=4u32 {
        let n = (1usize << (5 - scale)) + 1;
        let k = gaussian_1d(n, n as f64 / 5.0);
        if scale > 1 {
            gt = gt.filter_valid(&k).downsample();
            dist = dist.filter_valid(&k).downsample();
        }
        let [_, _, s_gt, s_d, s_gd] = moments(&gt, &dist, &k);
        for i in 0..s_gt.v.len() {
            let mut sg = s_gt.v[i].max(0.0);
            let sd = s_d.v[i].max(0.0);
            let cov = s_gd.v[i];
            let mut g = cov / (sg + VIF_EPS);
            let mut sv = sd - g * cov;
            if sg < VIF_EPS {
                g = 0.0;
                sv = sd;
                sg = 0.0;
            }
            if sd < VIF_EPS {
                g = 0.0;
                sv = 0.0;
            }
            if g < 0.0 {
                sv = sd;
                g = 0.0;
            }
            if sv <= VIF_EPS {
                sv = VIF_EPS;
            }
            num += (1.0 + g * g * sg / (sv + VIF_NOISE_VAR)).log10();
            den += (1.0 + sg / VIF_NOISE_VAR).log10();
        }
    }
    if !(den > 0.0) {
        return Err(Error::InvalidPair("reference image has no local variance".into()));
    }
    let raw = num / den;
    Ok(Vif {
        raw,
        value: raw.clamp(0.0, 1.0),
    })
}
