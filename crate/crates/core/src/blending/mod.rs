//! Tattoo compositing: black-ink drift, depth displacement, cut-out, layer
//! blur and multiply blending with opacity.
//!
//! The tattoo layer is kept in float RGBA (straight alpha, 0–255) until the
//! blur, which runs on premultiplied values so transparent texels never bleed
//! colour. The face is quantized once at the very end.

mod fallback;

pub use fallback::landmark_depth_fallback;

use crate::exec::{self, Mode};
use crate::geometry::RegionSet;
use crate::imaging::{gaussian_blur_float_with, load_image, luma_f64, save_png, FloatImage, Image};
use crate::placement::{PlacementPlan, TattooTemplate};
use crate::rng::{stream, StreamRng, PURPOSE_INK};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Per-pixel depth, 0–255, where 127.5 means "no displacement".
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width as usize * height as usize {
            return Err(Error::InvalidInput(format!(
                "depth map {width}x{height} needs {} values, got {}",
                width as usize * height as usize,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("depth value {v} outside [0, 255]")));
        }
        Ok(DepthMap {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: u32, height: u32, value: f32) -> Result<Self> {
        DepthMap::new(width, height, vec![value; width as usize * height as usize])
    }

    /// Gray images are read directly; colour images through Rec.601 luma.
    pub fn from_image(img: &Image) -> Result<Self> {
        let values = if img.channels() == 1 {
            img.data().iter().map(|&v| v as f32).collect()
        } else {
            luma_f64(img).into_iter().map(|v| v as f32).collect()
        };
        DepthMap::new(img.width(), img.height(), values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        DepthMap::from_image(&load_image(path)?)
    }

    pub fn to_image(&self) -> Image {
        let data = self.values.iter().map(|&v| crate::imaging::quantize(v)).collect();
        Image::new(self.width, self.height, 1, data).expect("dimensions match")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_png(&self.to_image(), path)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.values[y as usize * self.width as usize + x as usize]
    }
}

/// Black-ink drift colours; each entry scales the drawn intensity per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TintPalette {
    pub grey: [f32; 3],
    pub green: [f32; 3],
    pub blue: [f32; 3],
}

impl Default for TintPalette {
    fn default() -> Self {
        TintPalette {
            grey: [1.0, 1.0, 1.0],
            green: [1.0 / 3.0, 1.0, 1.0 / 3.0],
            blue: [1.0 / 3.0, 1.0 / 3.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tint {
    Grey,
    Green,
    Blue,
}

/// The colour drift drawn for one tattoo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InkDrift {
    pub tint: Tint,
    pub delta: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlendConfig {
    /// Displacement coefficient `c`, pixels.
    pub c: f64,
    /// Depth contrast `α`.
    pub depth_contrast: f64,
    /// Depth brightness offset `β`.
    pub depth_brightness: f64,
    /// Tattoo-layer blur; 0 disables it.
    pub blur_sigma: f64,
    pub opacity: f64,
    /// Pixels with `max(R, G, B)` at or below this count as black ink.
    pub black_threshold: u8,
    /// Range of the per-tattoo drift intensity `δ`.
    pub ink_delta: [f32; 2],
    pub tint_palette: TintPalette,
}

impl Default for BlendConfig {
    fn default() -> Self {
        BlendConfig {
            c: 12.0,
            depth_contrast: 2.0,
            depth_brightness: -40.0,
            blur_sigma: 0.6,
            opacity: 0.9,
            black_threshold: 40,
            ink_delta: [10.0, 45.0],
            tint_palette: TintPalette::default(),
        }
    }
}

impl BlendConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::param(m.to_string()));
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return bad("c must be finite and >= 0");
        }
        if !(self.opacity > 0.0 && self.opacity <= 1.0) {
            return bad("opacity must lie in (0, 1]");
        }
        if !(self.depth_contrast > 0.0 && self.depth_contrast.is_finite()) {
            return bad("depth_contrast must be > 0");
        }
        if !self.depth_brightness.is_finite() {
            return bad("depth_brightness must be finite");
        }
        if !(self.blur_sigma >= 0.0 && self.blur_sigma.is_finite()) {
            return bad("blur_sigma must be >= 0 (0 disables the blur)");
        }
        let [lo, hi] = self.ink_delta;
        if !(lo >= 0.0 && lo <= hi && hi <= 255.0) {
            return bad("ink_delta must satisfy 0 <= lo <= hi <= 255");
        }
        Ok(())
    }
}

/// `M' = clamp(α·(M − 127.5) + 127.5 + β, 0, 255)`.
pub fn transform_depth(raw: &DepthMap, cfg: &BlendConfig) -> DepthMap {
    let (a, b) = (cfg.depth_contrast, cfg.depth_brightness);
    DepthMap {
        width: raw.width,
        height: raw.height,
        values: raw
            .values
            .iter()
            .map(|&m| (a * (m as f64 - 127.5) + 127.5 + b).clamp(0.0, 255.0) as f32)
            .collect(),
    }
}

/// `D(x, y) = c·(M(x, y) − 127.5) / 127.5`, applied to both axes.
pub fn displacement(depth: &DepthMap, c: f64, x: u32, y: u32) -> Result<f64> {
    if x >= depth.width || y >= depth.height {
        return Err(Error::param(format!(
            "({x}, {y}) outside the {}x{} depth map",
            depth.width, depth.height
        )));
    }
    Ok(displacement_value(depth.get(x, y), c))
}

fn displacement_value(m: f32, c: f64) -> f64 {
    c * (m as f64 - 127.5) / 127.5
}

/// Bilinear sample of a straight-alpha RGBA float layer; interpolation is
/// done on premultiplied values. Positions outside the layer are transparent.
fn sample_rgba(layer: &FloatImage, sx: f64, sy: f64) -> [f32; 4] {
    let (w, h) = (layer.width() as f64, layer.height() as f64);
    if !(sx >= 0.0 && sy >= 0.0 && sx <= w - 1.0 && sy <= h - 1.0) {
        return [0.0; 4];
    }
    let (x0, y0) = (sx.floor(), sy.floor());
    let (fx, fy) = (sx - x0, sy - y0);
    let (x0, y0) = (x0 as u32, y0 as u32);
    if fx == 0.0 && fy == 0.0 {
        let p = layer.pixel(x0, y0);
        return [p[0], p[1], p[2], p[3]];
    }
    let x1 = (x0 + 1).min(layer.width() - 1);
    let y1 = (y0 + 1).min(layer.height() - 1);
    let mut acc = [0.0f64; 4];
    for (x, y, wgt) in [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x1, y0, fx * (1.0 - fy)),
        (x0, y1, (1.0 - fx) * fy),
        (x1, y1, fx * fy),
    ] {
        if wgt == 0.0 {
            continue;
        }
        let p = layer.pixel(x, y);
        let a = p[3] as f64;
        for c in 0..3 {
            acc[c] += wgt * p[c] as f64 * a;
        }
        acc[3] += wgt * a;
    }
    if acc[3] <= 0.0 {
        return [0.0; 4];
    }
    [
        (acc[0] / acc[3]) as f32,
        (acc[1] / acc[3]) as f32,
        (acc[2] / acc[3]) as f32,
        acc[3] as f32,
    ]
}

fn displace_float(layer: &FloatImage, depth: &DepthMap, c: f64, mode: Mode) -> Result<FloatImage> {
    if layer.width() != depth.width || layer.height() != depth.height || layer.channels() != 4 {
        return Err(Error::InvalidInput(
            "layer must be RGBA with the depth map's dimensions".into(),
        ));
    }
    let w = layer.width();
    let mut out = FloatImage::zeros(w, layer.height(), 4)?;
    exec::for_each_row(mode, out.data_mut(), w as usize * 4, |y, row| {
        for x in 0..w {
            let d = displacement_value(depth.get(x, y as u32), c);
            let px = sample_rgba(layer, x as f64 + d, y as f64 + d);
            row[x as usize * 4..x as usize * 4 + 4].copy_from_slice(&px);
        }
    });
    Ok(out)
}

/// Inverse-mapped displacement: `out(x, y) = layer(x + D, y + D)`, bilinear.
pub fn displace_layer(layer: &Image, depth: &DepthMap, c: f64) -> Result<Image> {
    if layer.channels() != 4 {
        return Err(Error::InvalidInput("displace_layer expects an RGBA layer".into()));
    }
    Ok(displace_float(&layer.to_float(), depth, c, Mode::default())?.quantize())
}

fn cutout_float(layer: &mut FloatImage, rs: &RegionSet) {
    let w = layer.width();
    for (i, px) in layer.data_mut().chunks_exact_mut(4).enumerate() {
        let (x, y) = (i as u32 % w, i as u32 / w);
        if !rs.face_hull().get(x, y) || rs.exclusion().get(x, y) {
            px[3] = 0.0;
        }
    }
}

/// Clears alpha outside the face hull and inside the exclusion mask.
pub fn apply_cutout(layer: &Image, rs: &RegionSet) -> Result<Image> {
    if layer.channels() != 4 || layer.width() != rs.width() || layer.height() != rs.height() {
        return Err(Error::InvalidInput(
            "cut-out needs an RGBA layer matching the region set".into(),
        ));
    }
    let mut f = layer.to_float();
    cutout_float(&mut f, rs);
    Ok(f.quantize())
}

/// Draws one tattoo's drift: tint uniform over the palette, `δ` uniform in range.
pub fn draw_ink_drift(rng: &mut StreamRng, cfg: &BlendConfig) -> InkDrift {
    let tint = [Tint::Grey, Tint::Green, Tint::Blue][rng.gen_range(0..3)];
    let [lo, hi] = cfg.ink_delta;
    let delta = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    InkDrift { tint, delta }
}

fn drift_offsets(drift: InkDrift, cfg: &BlendConfig) -> [f32; 3] {
    let k = match drift.tint {
        Tint::Grey => cfg.tint_palette.grey,
        Tint::Green => cfg.tint_palette.green,
        Tint::Blue => cfg.tint_palette.blue,
    };
    k.map(|v| v * drift.delta)
}

/// Lifts near-black pixels by the drift colour; other pixels are untouched.
pub fn apply_ink_drift(layer: &Image, drift: InkDrift, cfg: &BlendConfig) -> Image {
    let offs = drift_offsets(drift, cfg);
    let ch = layer.channels() as usize;
    let mut out = layer.clone();
    let color = ch.min(3);
    for y in 0..layer.height() {
        for x in 0..layer.width() {
            let p = out.pixel_mut(x, y);
            if p[..color].iter().copied().max().unwrap_or(0) <= cfg.black_threshold {
                for c in 0..color {
                    p[c] = crate::imaging::quantize((p[c] as f32 + offs[c]).clamp(0.0, 255.0));
                }
            }
        }
    }
    out
}

/// Draws a drift from `rng` and applies it.
pub fn adjust_black_ink(layer: &Image, rng: &mut StreamRng, cfg: &BlendConfig) -> (Image, InkDrift) {
    let drift = draw_ink_drift(rng, cfg);
    (apply_ink_drift(layer, drift, cfg), drift)
}

/// The per-tattoo drift used by [`compose`] for placement `ordinal`.
pub fn ink_drift_for(seed: u64, ordinal: usize, cfg: &BlendConfig) -> InkDrift {
    draw_ink_drift(&mut stream(seed, &[PURPOSE_INK, ordinal as u64]), cfg)
}

fn find_template<'a>(catalog: &'a [TattooTemplate], id: &str) -> Result<&'a TattooTemplate> {
    catalog
        .iter()
        .find(|t| t.id() == id)
        .ok_or_else(|| Error::param(format!("plan references unknown template {id:?}")))
}

/// The tattoo layer before blur: scaled templates with ink drift, displaced
/// and cut out. Straight alpha, float 0–255.
pub fn render_layer(
    plan: &PlacementPlan,
    catalog: &[TattooTemplate],
    rs: &RegionSet,
    depth: &DepthMap,
    cfg: &BlendConfig,
    seed: u64,
    mode: Mode,
) -> Result<FloatImage> {
    let (w, h) = (rs.width(), rs.height());
    if depth.width != w || depth.height != h {
        return Err(Error::InvalidInput(format!(
            "depth map is {}x{}, face is {w}x{h}",
            depth.width, depth.height
        )));
    }
    let mut layer = FloatImage::zeros(w, h, 4)?;
    for (ordinal, pl) in plan.placements.iter().enumerate() {
        let t = find_template(catalog, &pl.template)?;
        let scaled = t.resized(pl.rect.w, pl.rect.h);
        let inked = apply_ink_drift(&scaled, ink_drift_for(seed, ordinal, cfg), cfg);
        for y in 0..pl.rect.h {
            for x in 0..pl.rect.w {
                let (cx, cy) = (pl.rect.x + x, pl.rect.y + y);
                let src = inked.pixel(x, y);
                if src[3] == 0 || cx >= w || cy >= h {
                    continue;
                }
                let dst = layer.pixel_mut(cx, cy);
                for c in 0..4 {
                    dst[c] = src[c] as f32;
                }
            }
        }
    }
    let mut layer = if cfg.c != 0.0 {
        displace_float(&layer, depth, cfg.c, mode)?
    } else {
        layer
    };
    cutout_float(&mut layer, rs);
    Ok(layer)
}

/// Multiply-blends a pre-blur layer onto the face.
///
/// `out = face · (1 − opacity · (A − P))` with `A` the blurred alpha and `P`
/// the blurred premultiplied colour, both normalised to 0–1. For an unblurred
/// layer this is `face · (1 − a·opacity·(1 − rgb/255))`.
pub fn blend_layer(face: &Image, layer: &FloatImage, cfg: &BlendConfig, mode: Mode) -> Result<Image> {
    let face = face.to_rgb();
    if layer.width() != face.width() || layer.height() != face.height() || layer.channels() != 4 {
        return Err(Error::InvalidInput("layer and face differ in size".into()));
    }
    let mut premul = layer.clone();
    for px in premul.data_mut().chunks_exact_mut(4) {
        let a = px[3] / 255.0;
        for c in &mut px[..3] {
            *c *= a;
        }
    }
    let premul = if cfg.blur_sigma > 0.0 {
        gaussian_blur_float_with(&premul, cfg.blur_sigma, mode)?
    } else {
        premul
    };
    let w = face.width() as usize;
    let op = cfg.opacity as f32;
    let mut out = face.to_float();
    exec::for_each_row(mode, out.data_mut(), w * 3, |y, row| {
        for x in 0..w {
            let p = premul.pixel(x as u32, y as u32);
            let a = p[3] / 255.0;
            if a <= 0.0 {
                continue;
            }
            for c in 0..3 {
                let k = (a - p[c] / 255.0).max(0.0);
                row[x * 3 + c] *= 1.0 - op * k;
            }
        }
    });
    Ok(out.quantize())
}

/// Full chain: layer → drift → displacement → cut-out → blur → multiply.
/// `depth` is expected already transformed (see [`transform_depth`]).
pub fn compose(
    face: &Image,
    plan: &PlacementPlan,
    catalog: &[TattooTemplate],
    rs: &RegionSet,
    depth: &DepthMap,
    cfg: &BlendConfig,
    seed: u64,
) -> Result<Image> {
    compose_with(face, plan, catalog, rs, depth, cfg, seed, Mode::default())
}

#[allow(clippy::too_many_arguments)]
pub fn compose_with(
    face: &Image,
    plan: &PlacementPlan,
    catalog: &[TattooTemplate],
    rs: &RegionSet,
    depth: &DepthMap,
    cfg: &BlendConfig,
    seed: u64,
    mode: Mode,
) -> Result<Image> {
    cfg.validate()?;
    if face.width() != rs.width() || face.height() != rs.height() {
        return Err(Error::InvalidInput("face and region set differ in size".into()));
    }
    if plan.placements.is_empty() {
        return Ok(face.to_rgb());
    }
    let layer = render_layer(plan, catalog, rs, depth, cfg, seed, mode)?;
    blend_layer(face, &layer, cfg, mode)
}
