//! Procedural fixtures: a frontal face layout, rendered synthetic portraits,
//! and a small tattoo template pack.
//!
//! These stand in for real corpora in tests, benches and demos. Everything is
//! a pure function of its arguments.

use crate::geometry::{convex_hull, polygon_mask, polygon_mask_dilated, Landmarks68, Point};
use crate::imaging::Image;
use crate::placement::TattooTemplate;
use rand::Rng;

/// 68 points laid out on a 256×256 canvas (iBUG ordering).
const LAYOUT_256: [(f64, f64); 68] = [
    // jaw 0-16 filled in by `frontal_landmarks`
    (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
    (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
    (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
    // brows 17-26
    (72.0, 98.0), (82.0, 92.0), (94.0, 90.0), (106.0, 91.0), (116.0, 95.0),
    (140.0, 95.0), (150.0, 91.0), (162.0, 90.0), (174.0, 92.0), (184.0, 98.0),
    // nose 27-35
    (128.0, 108.0), (128.0, 120.0), (128.0, 132.0), (128.0, 144.0),
    (114.0, 152.0), (121.0, 155.0), (128.0, 157.0), (135.0, 155.0), (142.0, 152.0),
    // eyes 36-47
    (82.0, 114.0), (90.0, 109.0), (100.0, 109.0), (108.0, 115.0), (100.0, 119.0), (90.0, 119.0),
    (148.0, 115.0), (156.0, 109.0), (166.0, 109.0), (174.0, 114.0), (166.0, 119.0), (156.0, 119.0),
    // outer lips 48-59
    (104.0, 182.0), (112.0, 176.0), (121.0, 173.0), (128.0, 175.0), (135.0, 173.0), (144.0, 176.0),
    (152.0, 182.0), (144.0, 189.0), (136.0, 192.0), (128.0, 193.0), (120.0, 192.0), (112.0, 189.0),
    // inner lips 60-67
    (108.0, 182.0), (120.0, 179.0), (128.0, 180.0), (136.0, 179.0),
    (148.0, 182.0), (136.0, 185.0), (128.0, 186.0), (120.0, 185.0),
];

/// An upright, centred, symmetric face scaled to `width × height`.
pub fn frontal_landmarks(width: u32, height: u32) -> Landmarks68 {
    let (sx, sy) = (width as f64 / 256.0, height as f64 / 256.0);
    let pts: Vec<Point> = LAYOUT_256
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            if i <= 16 {
                let theta = std::f64::consts::PI * (1.0 - i as f64 / 16.0);
                Point::new((128.0 + 72.0 * theta.cos()) * sx, (120.0 + 100.0 * theta.sin()) * sy)
            } else {
                Point::new(x * sx, y * sy)
            }
        })
        .collect();
    Landmarks68::new(&pts, width, height)
        .expect("layout is valid")
        .with_image_name("synthetic_frontal")
}

/// The frontal layout moved by a random similarity transform plus small
/// per-point noise, as a stand-in for a detector run on a real portrait.
pub fn jittered_landmarks(width: u32, height: u32, seed: u64) -> Landmarks68 {
    let mut rng = crate::rng::stream(seed, &[0x6a69_7474]);
    let base = frontal_landmarks(width, height);
    let angle: f64 = rng.gen_range(-0.12..0.12);
    let scale: f64 = rng.gen_range(0.92..1.04);
    let (tx, ty): (f64, f64) = (
        rng.gen_range(-0.03..0.03) * width as f64,
        rng.gen_range(-0.02..0.02) * height as f64,
    );
    let centre = Point::new(width as f64 / 2.0, height as f64 / 2.0);
    let (s, c) = angle.sin_cos();
    let noise: Vec<(f64, f64)> = (0..68)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let unit = width as f64 / 256.0;
    let pts: Vec<Point> = base
        .points()
        .iter()
        .zip(&noise)
        .map(|(&p, &(nx, ny))| {
            let d = (p - centre) * scale;
            Point::new(
                centre.x + c * d.x - s * d.y + tx + nx * unit,
                centre.y + s * d.x + c * d.y + ty + ny * unit,
            )
        })
        .collect();
    Landmarks68::new(&pts, width, height)
        .expect("jitter keeps the layout valid")
        .with_image_name(format!("synthetic_{seed}"))
}

fn smooth_noise(x: u32, y: u32, seed: u64) -> f64 {
    let h = crate::rng::derive(seed, &[x as u64, y as u64]);
    (h >> 40) as f64 / (1u64 << 24) as f64 - 0.5
}

/// Renders a portrait consistent with `lm`: background, skin, hair, brows,
/// eyes, nose shading and lips, with mild pixel noise for texture.
pub fn render_face(lm: &Landmarks68, seed: u64) -> Image {
    let (w, h) = (lm.width(), lm.height());
    let p = lm.points();
    let ext = crate::geometry::extend_forehead(lm).expect("valid landmarks");
    let hull = convex_hull(ext.points());
    let skin_mask = polygon_mask_dilated(&hull, 0.04 * w as f64, w, h);
    let hair_poly: Vec<Point> = {
        let up = ext.up_axis();
        let mut top: Vec<Point> = ext.forehead().to_vec();
        top.extend(ext.forehead().iter().rev().map(|&q| q + up * (0.09 * w as f64)));
        top
    };
    let hair = polygon_mask_dilated(&hair_poly, 0.03 * w as f64, w, h);
    let brow_l = polygon_mask_dilated(&p[17..=21], 0.012 * w as f64, w, h);
    let brow_r = polygon_mask_dilated(&p[22..=26], 0.012 * w as f64, w, h);
    let eye_l = polygon_mask(&p[36..=41], w, h);
    let eye_r = polygon_mask(&p[42..=47], w, h);
    let lips = polygon_mask(&p[48..=59], w, h);
    let mouth_gap = polygon_mask(&p[60..=67], w, h);
    let nose_shadow = polygon_mask_dilated(&p[31..=35], 0.01 * w as f64, w, h);
    let iris_l = crate::geometry::centroid(&p[36..=41]);
    let iris_r = crate::geometry::centroid(&p[42..=47]);
    let iris_r_px = 0.018 * w as f64;
    let face_c = crate::geometry::centroid(&p[..]);
    let face_r = p[0].distance(p[16]) * 0.6;

    Image::from_fn(w, h, 3, |x, y, c| {
        let pc = Point::new(x as f64 + 0.5, y as f64 + 0.5);
        let n = smooth_noise(x, y, seed) * 8.0;
        let base: [f64; 3] = if mouth_gap.get(x, y) {
            [70.0, 30.0, 35.0]
        } else if lips.get(x, y) {
            [170.0, 85.0, 90.0]
        } else if eye_l.get(x, y) || eye_r.get(x, y) {
            if pc.distance(iris_l) < iris_r_px || pc.distance(iris_r) < iris_r_px {
                [60.0, 45.0, 35.0]
            } else {
                [235.0, 232.0, 228.0]
            }
        } else if brow_l.get(x, y) || brow_r.get(x, y) {
            [75.0, 55.0, 40.0]
        } else if hair.get(x, y) && !skin_mask.get(x, y) || (hair.get(x, y) && pc.y < ext.forehead()[5].y) {
            [55.0, 40.0, 30.0]
        } else if skin_mask.get(x, y) {
            let shade = 1.0 - 0.18 * (pc.distance(face_c) / face_r).powi(2);
            let nose = if nose_shadow.get(x, y) { 0.85 } else { 1.0 };
            [224.0 * shade * nose, 182.0 * shade * nose, 150.0 * shade * nose]
        } else {
            let t = y as f64 / h as f64;
            [120.0 + 40.0 * t, 140.0 + 30.0 * t, 165.0 + 20.0 * t]
        };
        (base[c] + n).round().clamp(0.0, 255.0) as u8
    })
    .expect("non-empty canvas")
}

/// A rendered frontal face and its landmarks.
pub fn frontal_face(width: u32, height: u32) -> (Image, Landmarks68) {
    let lm = frontal_landmarks(width, height);
    (render_face(&lm, 1), lm)
}

/// A jittered face (landmarks and matching render) keyed by `seed`.
pub fn face(width: u32, height: u32, seed: u64) -> (Image, Landmarks68) {
    let lm = jittered_landmarks(width, height, seed);
    (render_face(&lm, seed), lm)
}

fn rgba_from_fn(w: u32, h: u32, f: impl Fn(f64, f64) -> Option<[u8; 3]>) -> Image {
    let mut data = Vec::with_capacity((w * h * 4) as usize);
    for y in 0..h {
        for x in 0..w {
            // normalized coordinates in [-1, 1]
            let u = (x as f64 + 0.5) / w as f64 * 2.0 - 1.0;
            let v = (y as f64 + 0.5) / h as f64 * 2.0 - 1.0;
            match f(u, v) {
                Some([r, g, b]) => data.extend_from_slice(&[r, g, b, 255]),
                None => data.extend_from_slice(&[0, 0, 0, 0]),
            }
        }
    }
    Image::new(w, h, 4, data).expect("dimensions match")
}

const INK: [u8; 3] = [12, 12, 14];

fn star(u: f64, v: f64, points: usize, inner: f64) -> bool {
    let r = u.hypot(v);
    let a = v.atan2(u) + std::f64::consts::FRAC_PI_2;
    let sector = std::f64::consts::TAU / points as f64;
    let t = (a.rem_euclid(sector) / sector - 0.5).abs() * 2.0;
    r <= inner + (1.0 - inner) * t.powf(1.5) * 0.95
}

/// The bundled template pack: procedural black-work, colour and portrait designs.
pub fn template_pack() -> Vec<TattooTemplate> {
    let mut out = Vec::new();
    let mut push = |id: &str, tags: &[&str], img: Image| {
        out.push(
            TattooTemplate::new(id, img, tags.iter().map(|s| s.to_string()).collect())
                .expect("procedural templates have ink"),
        );
    };
    push(
        "ring",
        &["blackwork"],
        rgba_from_fn(96, 96, |u, v| {
            let r = u.hypot(v);
            (0.62..0.95).contains(&r).then_some(INK)
        }),
    );
    push(
        "star",
        &["blackwork"],
        rgba_from_fn(96, 96, |u, v| (star(u, v, 5, 0.38)).then_some(INK)),
    );
    push(
        "tribal-band",
        &["blackwork"],
        rgba_from_fn(160, 56, |u, v| {
            let centre = 0.45 * (u * 7.0).sin();
            let thick = 0.28 + 0.18 * (u * 3.0).cos().abs();
            ((v - centre).abs() < thick && u.abs() < 0.97).then_some(INK)
        }),
    );
    push(
        "script",
        &["blackwork", "lettering"],
        rgba_from_fn(150, 44, |u, v| {
            let glyph = ((u + 1.0) * 7.0).floor() as i64;
            let local = ((u + 1.0) * 7.0).fract();
            let stroke = local < 0.22 || (glyph % 3 == 0 && v.abs() < 0.18) || (glyph % 2 == 1 && local > 0.78);
            (stroke && v.abs() < 0.8 && glyph < 14).then_some(INK)
        }),
    );
    push(
        "dots",
        &["blackwork"],
        rgba_from_fn(72, 72, |u, v| {
            let gx = (u * 3.0).round() / 3.0;
            let gy = (v * 3.0).round() / 3.0;
            ((u - gx).hypot(v - gy) < 0.12).then_some(INK)
        }),
    );
    push(
        "teardrop",
        &["blackwork"],
        rgba_from_fn(40, 64, |u, v| {
            let r = if v > 0.0 { 1.0 - v * 0.1 } else { 1.0 + v };
            (u.abs() < 0.85 * r.max(0.0) && v.abs() < 0.95).then_some(INK)
        }),
    );
    push(
        "heart",
        &["color"],
        rgba_from_fn(80, 72, |u, v| {
            let (x, y) = (u * 1.25, -v * 1.25 + 0.25);
            let f = (x * x + y * y - 1.0).powi(3) - x * x * y.powi(3);
            (f <= 0.0).then_some([178, 24, 40])
        }),
    );
    push(
        "diamond",
        &["color"],
        rgba_from_fn(64, 96, |u, v| {
            let d = u.abs() + v.abs();
            if d < 0.55 {
                Some([30, 90, 160])
            } else if d < 0.95 {
                Some(INK)
            } else {
                None
            }
        }),
    );
    push(
        "leaf-vine",
        &["blackwork"],
        rgba_from_fn(56, 150, |u, v| {
            let stem = (u - 0.2 * (v * 6.0).sin()).abs() < 0.08;
            let leaf_y = (v * 4.0).round() / 4.0;
            let side = if (leaf_y * 4.0) as i64 % 2 == 0 { 0.45 } else { -0.45 };
            let leaf = ((u - side) / 0.4).powi(2) + ((v - leaf_y) / 0.1).powi(2) < 1.0;
            (stem || leaf).then_some([20, 40, 22])
        }),
    );
    push(
        "sun",
        &["blackwork"],
        rgba_from_fn(100, 100, |u, v| {
            let r = u.hypot(v);
            (r < 0.4 || (r < 0.95 && star(u, v, 12, 0.0) && r > 0.5)).then_some(INK)
        }),
    );
    push(
        "portrait-oval",
        &["portrait"],
        rgba_from_fn(84, 110, |u, v| {
            let r = u.hypot(v * 0.95);
            if !(r < 0.97) {
                return None;
            }
            let eyes = (u.abs() - 0.3).hypot(v + 0.2) < 0.09;
            let mouth = u.abs() < 0.3 && (v - 0.4).abs() < 0.05;
            let outline = r > 0.86;
            if eyes || mouth || outline {
                Some(INK)
            } else {
                // soft grey shading, brighter toward the centre
                let g = (150.0 + 90.0 * (1.0 - r)) as u8;
                Some([g, g, g])
            }
        }),
    );
    push(
        "portrait-skull",
        &["portrait", "blackwork"],
        rgba_from_fn(90, 104, |u, v| {
            let cranium = u.hypot(v + 0.15) < 0.8;
            let jaw = u.abs() < 0.45 && (0.3..0.9).contains(&v);
            if !(cranium || jaw) {
                return None;
            }
            let sockets = (u.abs() - 0.32).hypot(v + 0.05) < 0.2;
            let nose = u.abs() < 0.08 && (0.18..0.38).contains(&v);
            let teeth = (0.55..0.85).contains(&v) && ((u + 1.0) * 8.0).fract() < 0.25;
            if sockets || nose || teeth {
                Some(INK)
            } else {
                Some([235, 235, 230])
            }
        }),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frontal_layout_is_valid_and_symmetric() {
        let lm = frontal_landmarks(256, 256);
        assert!(lm.in_bounds());
        let p = lm.points();
        assert!((p[36].x + p[45].x - 256.0).abs() < 1e-9);
        assert!((p[8].x - 128.0).abs() < 1e-9);
    }

    #[test]
    fn jitter_is_deterministic_and_in_bounds() {
        for seed in 0..20 {
            let a = jittered_landmarks(256, 256, seed);
            assert_eq!(a, jittered_landmarks(256, 256, seed));
            assert!(a.in_bounds());
            assert!(crate::geometry::extend_forehead(&a).unwrap().forehead().iter().all(|q| q.y > 0.0));
        }
        assert_ne!(jittered_landmarks(256, 256, 1), jittered_landmarks(256, 256, 2));
    }

    #[test]
    fn templates_have_ink_and_tags() {
        let pack = template_pack();
        assert!(pack.len() >= 10);
        assert!(pack.iter().any(|t| t.has_tag("portrait")));
        for t in &pack {
            assert!(t.ink_pixels() > 0, "{}", t.id());
            assert!(t.ink_pixels() < t.width() as u64 * t.height() as u64, "{}", t.id());
        }
    }

    #[test]
    fn render_is_deterministic() {
        let (a, lm) = face(128, 128, 5);
        let (b, _) = face(128, 128, 5);
        assert_eq!(a, b);
        assert_eq!((a.width(), a.height(), a.channels()), (128, 128, 3));
        assert!(lm.in_bounds());
    }
}
