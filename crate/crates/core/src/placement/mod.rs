//! Tattoo templates, free-space search, aspect-preserving fitting, coverage
//! accounting and the generation strategies.

mod plan;
mod rect;

pub use plan::{coverage, plan_placements, GenerationStrategy, Placement, PlacementPlan};
pub use rect::{fit_tattoo, largest_empty_rect, Fit, MIN_SIDE};

use crate::imaging::{load_image, save_png, write_bytes, Image, Mask, Rect};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// An RGBA design; the alpha channel is the ink shape.
#[derive(Debug, Clone, PartialEq)]
pub struct TattooTemplate {
    id: String,
    image: Image,
    tags: Vec<String>,
    ink_pixels: u64,
}

/// Optional sidecar next to `<name>.png` in a catalog directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TemplateMeta {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl TattooTemplate {
    pub fn new(id: impl Into<String>, image: Image, tags: Vec<String>) -> Result<Self> {
        let id = id.into();
        let image = image.to_rgba();
        let ink_pixels = image.data().chunks_exact(4).filter(|p| p[3] > 0).count() as u64;
        if ink_pixels == 0 {
            return Err(Error::InvalidInput(format!("template {id:?} is fully transparent")));
        }
        Ok(TattooTemplate {
            id,
            image,
            tags,
            ink_pixels,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    pub fn ink_pixels(&self) -> u64 {
        self.ink_pixels
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    pub fn aspect(&self) -> f64 {
        self.width() as f64 / self.height() as f64
    }

    /// Nearest-neighbour resize; source pixel is `floor((x + 0.5) · tw / w)`.
    pub fn resized(&self, w: u32, h: u32) -> Image {
        let (tw, th) = (self.width(), self.height());
        let src_x: Vec<u32> = (0..w).map(|x| nearest(x, tw, w)).collect();
        Image::from_fn(w, h, 4, |x, y, c| {
            self.image.pixel(src_x[x as usize], nearest(y, th, h))[c]
        })
        .expect("non-empty size")
    }

    /// Ink mask of the template scaled to `rect`, in a `width × height` canvas.
    pub fn ink_mask(&self, rect: Rect, width: u32, height: u32) -> Mask {
        let (tw, th) = (self.width(), self.height());
        let mut m = Mask::new(width, height);
        for y in 0..rect.h {
            let sy = nearest(y, th, rect.h);
            for x in 0..rect.w {
                let (cx, cy) = (rect.x + x, rect.y + y);
                if cx < width && cy < height && self.image.pixel(nearest(x, tw, rect.w), sy)[3] > 0 {
                    m.set(cx, cy, true);
                }
            }
        }
        m
    }
}

fn nearest(dst: u32, src_len: u32, dst_len: u32) -> u32 {
    let v = ((dst as u64 * 2 + 1) * src_len as u64) / (dst_len as u64 * 2);
    (v as u32).min(src_len - 1)
}

/// Loads every `*.png` in `dir` (sorted by file name) with optional JSON sidecars.
pub fn load_catalog(dir: impl AsRef<Path>) -> Result<Vec<TattooTemplate>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut pngs: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    pngs.sort();
    let mut out = Vec::with_capacity(pngs.len());
    for png in pngs {
        let stem = png
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let sidecar = png.with_extension("json");
        let meta: TemplateMeta = if sidecar.exists() {
            let text = std::fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", sidecar.display())))?
        } else {
            TemplateMeta::default()
        };
        let image = load_image(&png)?;
        out.push(TattooTemplate::new(meta.id.unwrap_or(stem), image, meta.tags)?);
    }
    if out.is_empty() {
        return Err(Error::Config(format!("no PNG templates in {}", dir.display())));
    }
    Ok(out)
}

/// Writes templates as `<id>.png` plus `<id>.json` sidecars.
pub fn save_catalog(templates: &[TattooTemplate], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    for t in templates {
        save_png(t.image(), dir.join(format!("{}.png", t.id())))?;
        let meta = TemplateMeta {
            id: Some(t.id().to_string()),
            tags: t.tags().to_vec(),
        };
        write_bytes(
            dir.join(format!("{}.json", t.id())),
            serde_json::to_string_pretty(&meta)?.as_bytes(),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transparent_template_is_rejected() {
        let img = Image::filled(4, 4, &[0, 0, 0, 0]).unwrap();
        assert!(TattooTemplate::new("blank", img, vec![]).is_err());
    }

    #[test]
    fn rgb_template_is_fully_inked() {
        let img = Image::filled(3, 2, &[5, 5, 5]).unwrap();
        let t = TattooTemplate::new("solid", img, vec![]).unwrap();
        assert_eq!(t.ink_pixels(), 6);
        assert_eq!(t.image().channels(), 4);
    }

    #[test]
    fn nearest_resize_maps_centres() {
        let img = Image::from_fn(4, 1, 4, |x, _, c| if c == 3 { 255 } else { x as u8 * 10 }).unwrap();
        let t = TattooTemplate::new("ramp", img, vec![]).unwrap();
        let up = t.resized(8, 1);
        let xs: Vec<u8> = (0..8).map(|x| up.pixel(x, 0)[0]).collect();
        assert_eq!(xs, [0, 0, 10, 10, 20, 20, 30, 30]);
        let down = t.resized(2, 1);
        assert_eq!((down.pixel(0, 0)[0], down.pixel(1, 0)[0]), (10, 30));
    }

    #[test]
    fn ink_mask_matches_resized_alpha() {
        let pack = crate::synthetic::template_pack();
        let t = &pack[0];
        let rect = Rect::new(5, 7, 33, 21);
        let m = t.ink_mask(rect, 60, 40);
        let r = t.resized(33, 21);
        for y in 0..40 {
            for x in 0..60 {
                let expect = rect.contains(x, y) && r.pixel(x - rect.x, y - rect.y)[3] > 0;
                assert_eq!(m.get(x, y), expect);
            }
        }
    }

    #[test]
    fn catalog_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let pack = crate::synthetic::template_pack();
        save_catalog(&pack, dir.path()).unwrap();
        let mut loaded = load_catalog(dir.path()).unwrap();
        let mut expect = pack.clone();
        loaded.sort_by(|a, b| a.id().cmp(b.id()));
        expect.sort_by(|a, b| a.id().cmp(b.id()));
        assert_eq!(loaded, expect);
    }

    #[test]
    fn empty_catalog_dir_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_catalog(dir.path()), Err(Error::Config(_))));
    }
}
