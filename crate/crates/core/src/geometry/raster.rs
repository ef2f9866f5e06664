use super::Point;
use crate::imaging::Mask;

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn bounds(poly: &[Point], pad: f64, width: u32, height: u32) -> (u32, u32, u32, u32) {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in poly {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let clamp_lo = |v: f64, max: u32| (v - pad - 1.0).floor().clamp(0.0, max as f64) as u32;
    let clamp_hi = |v: f64, max: u32| (v + pad + 1.0).ceil().clamp(0.0, max as f64) as u32;
    (
        clamp_lo(x0, width),
        clamp_lo(y0, height),
        clamp_hi(x1, width),
        clamp_hi(y1, height),
    )
}

/// Rasterizes a polygon; pixel `(x, y)` is sampled at its centre `(x + 0.5, y + 0.5)`.
pub fn polygon_mask(poly: &[Point], width: u32, height: u32) -> Mask {
    polygon_mask_dilated(poly, 0.0, width, height)
}

/// Pixels inside the polygon or within `radius` of its boundary.
pub fn polygon_mask_dilated(poly: &[Point], radius: f64, width: u32, height: u32) -> Mask {
    let mut mask = Mask::new(width, height);
    if poly.len() < 3 {
        return mask;
    }
    let (x0, y0, x1, y1) = bounds(poly, radius.max(0.0), width, height);
    for y in y0..y1 {
        for x in x0..x1 {
            let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
            let hit = point_in_polygon(c, poly)
                || (radius > 0.0
                    && (0..poly.len())
                        .any(|i| segment_distance(c, poly[i], poly[(i + 1) % poly.len()]) <= radius));
            if hit {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

/// Convex hull (Andrew's monotone chain), counter-clockwise in the
/// `cross > 0` sense, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
