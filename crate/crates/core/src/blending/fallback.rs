use super::DepthMap;
use crate::geometry::{centroid, convex_hull, point_in_polygon, ExtendedLandmarks, Point};
use crate::imaging::{gaussian_blur_float, FloatImage};

const BASE: f64 = 127.5;
const RIM: f64 = 60.0;
const NOSE_RISE: f64 = 80.0;
const DOME_RISE: f64 = 30.0;

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    p.distance(a + ab * t)
}

fn polyline_distance(p: Point, line: &[Point]) -> f64 {
    line.windows(2)
        .map(|w| segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// A smooth stand-in depth map built from landmarks alone.
///
/// Inside the face hull: 127.5, easing down to 60 at the hull boundary, plus a
/// ridge of up to +80 along the nose and a +30 dome over the brows and
/// forehead. Smoothed with σ = 2% of the face width; exactly 127.5 outside
/// the hull. Values are already in displacement units (127.5 = no shift).
pub fn landmark_depth_fallback(ext: &ExtendedLandmarks, width: u32, height: u32) -> DepthMap {
    let p = ext.points();
    let hull = convex_hull(p);
    let face_width = p[0].distance(p[16]).max(1.0);
    let rim_band = 0.15 * face_width;

    let ridge = [p[27], p[28], p[29], p[30], p[33]];
    let nose_halfwidth = (p[31].distance(p[35]) / 2.0).max(1.0);
    let nose_top = p[27];
    let nose_len = p[27].distance(p[33]).max(1.0);

    let dome_centre = centroid(ext.forehead()).lerp(centroid(&p[17..=26]), 0.5);
    let dome_rx = p[17].distance(p[26]) / 2.0 + 0.1 * face_width;
    let dome_ry = ext.nose_length().max(1.0);
    let (right, up) = (ext.right_axis(), ext.up_axis());

    let raw = FloatImage::new(
        width,
        height,
        1,
        (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| {
                let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                if !point_in_polygon(c, &hull) {
                    return BASE as f32;
                }
                let edge = polyline_distance(c, &[hull.as_slice(), &hull[..1]].concat());
                let t = (edge / rim_band).min(1.0);
                let ease = t * t * (3.0 - 2.0 * t);
                let mut v = RIM + (BASE - RIM) * ease;

                let d = polyline_distance(c, &ridge);
                if d < nose_halfwidth {
                    // higher towards the tip
                    let along = ((c - nose_top).dot(p[33] - nose_top) / (nose_len * nose_len)).clamp(0.0, 1.0);
                    let profile = 1.0 - (d / nose_halfwidth).powi(2);
                    v += NOSE_RISE * profile * (0.5 + 0.5 * along);
                }

                let rel = c - dome_centre;
                let (u, w) = (rel.dot(right) / dome_rx, rel.dot(up) / dome_ry);
                let r2 = u * u + w * w;
                if r2 < 1.0 {
                    v += DOME_RISE * (1.0 - r2);
                }
                v.clamp(0.0, 255.0) as f32
            })
            .collect(),
    )
    .expect("dimensions match");

    let sigma = 0.02 * face_width;
    let smooth = if sigma > 0.0 {
        gaussian_blur_float(&raw, sigma).expect("sigma > 0")
    } else {
        raw
    };
    let values = smooth
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (x, y) = (i as u32 % width, i as u32 / width);
            let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
            if point_in_polygon(c, &hull) {
                v.clamp(0.0, 255.0)
            } else {
                BASE as f32
            }
        })
        .collect();
    DepthMap::new(width, height, values).expect("values clamped to range")
}
