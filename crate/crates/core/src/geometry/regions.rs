//! Macro-regions, micro-region triangles, exclusions and the face hull.
//!
//! Pixels below the brows are classified in the face's own frame: `s` along
//! the right axis, `t` along the chin → nose-bridge axis. "Left" and "right"
//! always mean image-left and image-right.

use super::{
    centroid, convex_hull, extend_forehead, fixed_triangulation, point_in_polygon, polygon_mask,
    polygon_mask_dilated, ExtendedLandmarks, LandmarkFile, Landmarks68, Point, TriangleSet,
    LEFT_EYE, MOUTH_LEFT, MOUTH_OUTER, MOUTH_RIGHT, RIGHT_EYE,
};
use crate::imaging::Mask;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Eye polygons grow by this fraction of the inter-eye distance.
pub const EYE_DILATION: f64 = 0.15;
/// Mouth and nose exclusions grow by this fraction of the inter-eye distance (at least 2 px).
pub const FEATURE_DILATION: f64 = 0.05;

const CHIN_POLYGON: [usize; 9] = [MOUTH_LEFT, MOUTH_RIGHT, 11, 10, 9, 8, 7, 6, 5];
const NOSE_POINTS: [usize; 6] = [27, 31, 32, 33, 34, 35];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionId {
    Forehead,
    LeftUpperCheek,
    RightUpperCheek,
    LeftLowerCheek,
    RightLowerCheek,
    Chin,
}

impl RegionId {
    pub const ALL: [RegionId; 6] = [
        RegionId::Forehead,
        RegionId::LeftUpperCheek,
        RegionId::RightUpperCheek,
        RegionId::LeftLowerCheek,
        RegionId::RightLowerCheek,
        RegionId::Chin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionId::Forehead => "forehead",
            RegionId::LeftUpperCheek => "left-upper-cheek",
            RegionId::RightUpperCheek => "right-upper-cheek",
            RegionId::LeftLowerCheek => "left-lower-cheek",
            RegionId::RightLowerCheek => "right-lower-cheek",
            RegionId::Chin => "chin",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Regions sharing a border, used when combining a region with a neighbour.
    pub fn neighbors(self) -> &'static [RegionId] {
        use RegionId::*;
        match self {
            Forehead => &[LeftUpperCheek, RightUpperCheek],
            LeftUpperCheek => &[Forehead, LeftLowerCheek],
            RightUpperCheek => &[Forehead, RightLowerCheek],
            LeftLowerCheek => &[LeftUpperCheek, Chin],
            RightLowerCheek => &[RightUpperCheek, Chin],
            Chin => &[LeftLowerCheek, RightLowerCheek],
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegionId::ALL
            .into_iter()
            .find(|r| r.as_str() == s.trim())
            .ok_or_else(|| Error::param(format!("unknown region id {s:?}")))
    }
}

/// Placement geometry of one face.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    width: u32,
    height: u32,
    regions: [Mask; 6],
    hull: Mask,
    exclusion: Mask,
    placeable: Mask,
    micro: Vec<[Point; 3]>,
    total_placeable_area: u64,
}

impl RegionSet {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn region(&self, id: RegionId) -> &Mask {
        &self.regions[id.index()]
    }

    pub fn face_hull(&self) -> &Mask {
        &self.hull
    }

    /// Eyes, mouth, nose ridge and nostrils.
    pub fn exclusion(&self) -> &Mask {
        &self.exclusion
    }

    /// Union of the six macro-regions.
    pub fn placeable(&self) -> &Mask {
        &self.placeable
    }

    pub fn total_placeable_area(&self) -> u64 {
        self.total_placeable_area
    }

    /// Triangle micro-regions (the fixed triangulation applied to this face).
    pub fn micro_regions(&self) -> &[[Point; 3]] {
        &self.micro
    }

    pub fn micro_mask(&self, i: usize) -> Mask {
        polygon_mask(&self.micro[i], self.width, self.height)
    }

    /// The region containing pixel `(x, y)`, if any.
    pub fn region_at(&self, x: u32, y: u32) -> Option<RegionId> {
        RegionId::ALL.into_iter().find(|&r| self.region(r).get(x, y))
    }

    /// Regions with at least one placeable pixel.
    pub fn non_empty_regions(&self) -> Vec<RegionId> {
        RegionId::ALL
            .into_iter()
            .filter(|&r| !self.region(r).is_empty())
            .collect()
    }

    /// Drops vetoed regions (e.g. a beard or glasses flagged in metadata).
    pub fn with_vetoes(mut self, vetoed: &[RegionId]) -> Self {
        for &r in vetoed {
            self.regions[r.index()] = Mask::new(self.width, self.height);
        }
        self.refresh_totals();
        self
    }

    fn refresh_totals(&mut self) {
        let mut placeable = Mask::new(self.width, self.height);
        for m in &self.regions {
            placeable.union_in_place(m);
        }
        self.total_placeable_area = self.regions.iter().map(Mask::area).sum();
        self.placeable = placeable;
    }
}

/// Union of the named macro-regions.
pub fn combine_regions(rs: &RegionSet, ids: &[RegionId]) -> Result<Mask> {
    if ids.is_empty() {
        return Err(Error::param("region list is empty"));
    }
    let mut out = Mask::new(rs.width, rs.height);
    for &id in ids {
        out.union_in_place(rs.region(id));
    }
    Ok(out)
}

/// The shipped canonical (mean frontal) landmark configuration.
pub fn canonical_landmarks() -> Landmarks68 {
    static CANONICAL: OnceLock<Landmarks68> = OnceLock::new();
    CANONICAL
        .get_or_init(|| {
            let file: LandmarkFile =
                serde_json::from_str(include_str!("../../assets/canonical_landmarks.json"))
                    .expect("shipped canonical landmarks parse");
            Landmarks68::from_file(&file).expect("shipped canonical landmarks are valid")
        })
        .clone()
}

/// Triangulation of the shipped canonical configuration, computed once.
pub fn canonical_triangulation() -> &'static TriangleSet {
    static TRI: OnceLock<TriangleSet> = OnceLock::new();
    TRI.get_or_init(|| {
        let ext = extend_forehead(&canonical_landmarks()).expect("canonical face is valid");
        fixed_triangulation(ext.points()).expect("canonical face triangulates")
    })
}

/// Builds the region set using the canonical triangulation for micro-regions.
pub fn build_regions(ext: &ExtendedLandmarks, width: u32, height: u32) -> Result<RegionSet> {
    build_regions_with(ext, width, height, canonical_triangulation())
}

struct Frame {
    origin: Point,
    right: Point,
    up: Point,
}

impl Frame {
    fn s(&self, p: Point) -> f64 {
        (p - self.origin).dot(self.right)
    }

    fn t(&self, p: Point) -> f64 {
        (p - self.origin).dot(self.up)
    }
}

/// Piecewise-linear brow height `t(s)`, ends held constant.
fn brow_height(brows: &[(f64, f64)], s: f64) -> f64 {
    let first = brows[0];
    let last = brows[brows.len() - 1];
    if s <= first.0 {
        return first.1;
    }
    if s >= last.0 {
        return last.1;
    }
    for w in brows.windows(2) {
        let ((s0, t0), (s1, t1)) = (w[0], w[1]);
        if s >= s0 && s <= s1 {
            return if s1 > s0 { t0 + (t1 - t0) * (s - s0) / (s1 - s0) } else { t0.max(t1) };
        }
    }
    last.1
}

/// Builds the region set with an explicit triangle connectivity.
pub fn build_regions_with(
    ext: &ExtendedLandmarks,
    width: u32,
    height: u32,
    triangles: &TriangleSet,
) -> Result<RegionSet> {
    let p = ext.points();
    if let Some(i) = ext.base().iter().position(|q| {
        !(q.x >= 0.0 && q.y >= 0.0 && q.x < width as f64 && q.y < height as f64)
    }) {
        return Err(Error::landmarks(format!(
            "point {i} ({:.1}, {:.1}) lies outside the {width}x{height} image",
            p[i].x, p[i].y
        )));
    }
    if let Some(t) = triangles.triangles().iter().find(|t| t[2] >= p.len()) {
        return Err(Error::param(format!("triangle {t:?} indexes past the landmark list")));
    }

    let hull_poly = convex_hull(p);
    let hull = polygon_mask(&hull_poly, width, height);

    let eye_l = centroid(&p[LEFT_EYE]);
    let eye_r = centroid(&p[RIGHT_EYE]);
    let ied = eye_l.distance(eye_r);
    let feature_pad = (FEATURE_DILATION * ied).max(2.0);
    let nose_hull = convex_hull(&NOSE_POINTS.map(|i| p[i]));
    let mut exclusion = polygon_mask_dilated(&p[LEFT_EYE], EYE_DILATION * ied, width, height);
    exclusion.union_in_place(&polygon_mask_dilated(&p[RIGHT_EYE], EYE_DILATION * ied, width, height));
    exclusion.union_in_place(&polygon_mask_dilated(&p[MOUTH_OUTER], feature_pad, width, height));
    exclusion.union_in_place(&polygon_mask_dilated(&nose_hull, feature_pad, width, height));

    let frame = Frame {
        origin: p[8],
        right: ext.right_axis(),
        up: ext.up_axis(),
    };
    let mut brows: Vec<(f64, f64)> = (17..=26).map(|i| (frame.s(p[i]), frame.t(p[i]))).collect();
    brows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mouth_t = frame.t(p[MOUTH_LEFT].lerp(p[MOUTH_RIGHT], 0.5));
    let nostril_l = frame.s(p[31]).min(frame.s(p[35]));
    let nostril_r = frame.s(p[31]).max(frame.s(p[35]));
    let nose_s = frame.s(p[27].lerp(p[33], 0.5));
    let chin_poly: Vec<Point> = CHIN_POLYGON.iter().map(|&i| p[i]).collect();

    let classify = |x: u32, y: u32| -> Option<RegionId> {
        if !hull.get(x, y) || exclusion.get(x, y) {
            return None;
        }
        let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
        let (s, t) = (frame.s(c), frame.t(c));
        if t > brow_height(&brows, s) {
            return Some(RegionId::Forehead);
        }
        if point_in_polygon(c, &chin_poly) {
            return Some(RegionId::Chin);
        }
        if t >= mouth_t {
            if s < nostril_l {
                Some(RegionId::LeftUpperCheek)
            } else if s > nostril_r {
                Some(RegionId::RightUpperCheek)
            } else {
                None
            }
        } else if s < nose_s {
            Some(RegionId::LeftLowerCheek)
        } else {
            Some(RegionId::RightLowerCheek)
        }
    };

    let mut regions: [Mask; 6] = std::array::from_fn(|_| Mask::new(width, height));
    for y in 0..height {
        for x in 0..width {
            if let Some(r) = classify(x, y) {
                regions[r.index()].set(x, y, true);
            }
        }
    }

    let mut rs = RegionSet {
        width,
        height,
        regions,
        hull,
        exclusion,
        placeable: Mask::new(width, height),
        micro: triangles.corners(p),
        total_placeable_area: 0,
    };
    rs.refresh_totals();
    Ok(rs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn frontal() -> (Landmarks68, RegionSet) {
        let lm = synthetic::frontal_landmarks(256, 256);
        let rs = build_regions(&extend_forehead(&lm).unwrap(), 256, 256).unwrap();
        (lm, rs)
    }

    #[test]
    fn shipped_canonical_matches_synthetic_layout() {
        let a = canonical_landmarks();
        let b = synthetic::frontal_landmarks(256, 256);
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!(p.distance(*q) < 1e-9);
        }
    }

    #[test]
    fn canonical_triangulation_count() {
        let ext = extend_forehead(&canonical_landmarks()).unwrap();
        let h = convex_hull(&super::super::general_position(ext.points())).len();
        assert_eq!(canonical_triangulation().len(), 2 * 78 - 2 - h);
    }

    #[test]
    fn cheeks_sit_either_side_of_the_nose() {
        let (lm, rs) = frontal();
        let nose_x = lm.point(33).x;
        for (l, r) in [
            (RegionId::LeftUpperCheek, RegionId::RightUpperCheek),
            (RegionId::LeftLowerCheek, RegionId::RightLowerCheek),
        ] {
            let (lx, _) = rs.region(l).centroid().unwrap();
            let (rx, _) = rs.region(r).centroid().unwrap();
            assert!(lx < nose_x && rx > nose_x, "{l} {lx} / {r} {rx}");
        }
        // point-in-polygon oracle: the left upper cheek centroid lies inside the face hull
        let ext = extend_forehead(&lm).unwrap();
        let (cx, cy) = rs.region(RegionId::LeftUpperCheek).centroid().unwrap();
        assert!(point_in_polygon(Point::new(cx + 0.5, cy + 0.5), &convex_hull(ext.points())));
    }

    #[test]
    fn nose_tip_and_corner_are_not_placeable() {
        let (lm, rs) = frontal();
        let tip = lm.point(33);
        let (x, y) = (tip.x as u32, tip.y as u32);
        assert!(rs.exclusion().get(x, y));
        assert_eq!(rs.region_at(x, y), None);
        assert!(!rs.face_hull().get(0, 0));
        assert_eq!(rs.region_at(0, 0), None);
    }

    #[test]
    fn regions_partition_the_placeable_area() {
        for seed in 0..8 {
            let lm = synthetic::jittered_landmarks(200, 220, seed);
            let rs = build_regions(&extend_forehead(&lm).unwrap(), 200, 220).unwrap();
            for (i, a) in RegionId::ALL.iter().enumerate() {
                let m = rs.region(*a);
                assert!(!m.is_empty(), "{a} empty for seed {seed}");
                assert!(m.is_subset_of(rs.face_hull()));
                assert!(m.is_disjoint(rs.exclusion()));
                for b in &RegionId::ALL[i + 1..] {
                    assert!(m.is_disjoint(rs.region(*b)), "{a} overlaps {b}");
                }
            }
            let all = combine_regions(&rs, &RegionId::ALL).unwrap();
            assert_eq!(all.area(), rs.total_placeable_area());
            assert_eq!(&all, rs.placeable());
        }
    }

    #[test]
    fn combine_rules() {
        let (_, rs) = frontal();
        let single = combine_regions(&rs, &[RegionId::LeftUpperCheek]).unwrap();
        assert_eq!(&single, rs.region(RegionId::LeftUpperCheek));
        assert!(matches!(combine_regions(&rs, &[]), Err(Error::InvalidParameter(_))));
        assert!(matches!("scalp".parse::<RegionId>(), Err(Error::InvalidParameter(_))));
        assert_eq!("right-lower-cheek".parse::<RegionId>().unwrap(), RegionId::RightLowerCheek);
    }

    #[test]
    fn out_of_bounds_landmarks_are_rejected() {
        let lm = synthetic::frontal_landmarks(256, 256);
        let ext = extend_forehead(&lm).unwrap();
        assert!(matches!(build_regions(&ext, 100, 100), Err(Error::InvalidLandmarks(_))));
    }

    #[test]
    fn deterministic_and_vetoable() {
        let (lm, rs) = frontal();
        let again = build_regions(&extend_forehead(&lm).unwrap(), 256, 256).unwrap();
        assert_eq!(rs, again);
        let before = rs.total_placeable_area();
        let chin = rs.region(RegionId::Chin).area();
        let vetoed = rs.with_vetoes(&[RegionId::Chin]);
        assert!(vetoed.region(RegionId::Chin).is_empty());
        assert_eq!(vetoed.total_placeable_area(), before - chin);
    }

    #[test]
    fn micro_regions_cover_the_hull_interior() {
        let (_, rs) = frontal();
        assert_eq!(rs.micro_regions().len(), canonical_triangulation().len());
        let mut union = Mask::new(256, 256);
        for i in 0..rs.micro_regions().len() {
            union.union_in_place(&rs.micro_mask(i));
        }
        // triangles tile the hull up to boundary pixels
        let diff = rs.face_hull().subtract(&union).area();
        assert!(diff * 50 < rs.face_hull().area(), "{diff}");
    }
}
