use super::Point;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const LANDMARK_COUNT: usize = 68;
pub const FOREHEAD_COUNT: usize = 10;
pub const EXTENDED_COUNT: usize = LANDMARK_COUNT + FOREHEAD_COUNT;

// iBUG 68-point indices (0-based).
pub const JAW: std::ops::RangeInclusive<usize> = 0..=16;
pub const CHIN: usize = 8;
pub const BROWS: std::ops::RangeInclusive<usize> = 17..=26;
pub const NOSE_BRIDGE_TOP: usize = 27;
pub const NOSE_TIP: usize = 33;
pub const NOSTRILS: std::ops::RangeInclusive<usize> = 31..=35;
pub const LEFT_EYE: std::ops::RangeInclusive<usize> = 36..=41;
pub const RIGHT_EYE: std::ops::RangeInclusive<usize> = 42..=47;
pub const MOUTH_OUTER: std::ops::RangeInclusive<usize> = 48..=59;
pub const MOUTH_LEFT: usize = 48;
pub const MOUTH_RIGHT: usize = 54;
pub const INNER_FACE: std::ops::RangeInclusive<usize> = 17..=67;
/// First forehead point in [`ExtendedLandmarks`]; forehead point `i` comes from brow point `17 + i`.
pub const FOREHEAD_START: usize = LANDMARK_COUNT;

/// Landmark interchange file: `{"image", "width", "height", "points": [[x, y] × 68]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkFile {
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub points: Vec<[f64; 2]>,
}

/// The 68-point annotation of one face plus the size of the image it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmarks68 {
    points: [Point; LANDMARK_COUNT],
    width: u32,
    height: u32,
    image: String,
}

impl Landmarks68 {
    pub fn new(points: &[Point], width: u32, height: u32) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::landmarks(format!(
                "expected {LANDMARK_COUNT} points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::landmarks(format!("point {i} is not finite")));
        }
        // Jaw order is checked in the face's own frame so in-plane rotations
        // stay valid; for an upright face this is x0 < x16.
        let up = points[NOSE_BRIDGE_TOP] - points[CHIN];
        let right = if up.norm() > 0.0 {
            Point::new(-up.y, up.x)
        } else {
            Point::new(1.0, 0.0)
        };
        if (points[16] - points[0]).dot(right) <= 0.0 {
            return Err(Error::landmarks(
                "jaw points must run left to right (x0 < x16 on an upright face)",
            ));
        }
        Ok(Landmarks68 {
            points: points.try_into().expect("length checked"),
            width,
            height,
            image: String::new(),
        })
    }

    pub fn with_image_name(mut self, name: impl Into<String>) -> Self {
        self.image = name.into();
        self
    }

    pub fn points(&self) -> &[Point; LANDMARK_COUNT] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn image_name(&self) -> &str {
        &self.image
    }

    pub fn from_file(file: &LandmarkFile) -> Result<Self> {
        let pts: Vec<Point> = file.points.iter().map(|&[x, y]| Point::new(x, y)).collect();
        Ok(Landmarks68::new(&pts, file.width, file.height)?.with_image_name(file.image.clone()))
    }

    pub fn to_file(&self) -> LandmarkFile {
        LandmarkFile {
            image: self.image.clone(),
            width: self.width,
            height: self.height,
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: LandmarkFile = serde_json::from_str(&text)
            .map_err(|e| Error::landmarks(format!("{}: {e}", path.display())))?;
        Self::from_file(&file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_file())?;
        crate::imaging::write_bytes(path, json.as_bytes())
    }

    /// Every point lies inside `[0, width) × [0, height)`.
    pub fn in_bounds(&self) -> bool {
        self.points.iter().all(|p| {
            p.x >= 0.0 && p.y >= 0.0 && p.x < self.width as f64 && p.y < self.height as f64
        })
    }

    /// Applies `f` to every point (used for rigid-motion checks and jitter).
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Self> {
        let pts: Vec<Point> = self.points.iter().map(|&p| f(p)).collect();
        Ok(Landmarks68::new(&pts, self.width, self.height)?.with_image_name(self.image.clone()))
    }

    /// Point-wise mean of several landmark sets (the canonical face).
    pub fn mean(sets: &[Landmarks68]) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidInput("mean of zero landmark sets".into()))?;
        let n = sets.len() as f64;
        let pts: Vec<Point> = (0..LANDMARK_COUNT)
            .map(|i| {
                let (sx, sy) = sets
                    .iter()
                    .fold((0.0, 0.0), |(sx, sy), s| (sx + s.points[i].x, sy + s.points[i].y));
                Point::new(sx / n, sy / n)
            })
            .collect();
        Landmarks68::new(&pts, first.width, first.height)
    }
}

/// The 68 base points followed by 10 synthesized forehead points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedLandmarks {
    points: Vec<Point>,
    nose_length: f64,
    up: Point,
}

impl ExtendedLandmarks {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn forehead(&self) -> &[Point] {
        &self.points[FOREHEAD_START..]
    }

    pub fn nose_length(&self) -> f64 {
        self.nose_length
    }

    /// Unit vector from the chin towards the top of the nose bridge.
    pub fn up_axis(&self) -> Point {
        self.up
    }

    /// Unit vector pointing to image-right for an upright face.
    pub fn right_axis(&self) -> Point {
        Point::new(-self.up.y, self.up.x)
    }

    pub fn base(&self) -> &[Point] {
        &self.points[..LANDMARK_COUNT]
    }
}

/// Adds forehead points: each brow point moved by the nose length along the
/// chin → nose-bridge axis.
pub fn extend_forehead(lm: &Landmarks68) -> Result<ExtendedLandmarks> {
    let top = lm.point(NOSE_BRIDGE_TOP);
    let nose_length = top.distance(lm.point(NOSE_TIP));
    if !(nose_length > 0.0) {
        return Err(Error::landmarks("nose length is zero"));
    }
    let axis = top - lm.point(CHIN);
    let norm = axis.norm();
    if !(norm > 0.0) {
        return Err(Error::landmarks("chin coincides with nose bridge"));
    }
    let up = axis * (1.0 / norm);
    let mut points = lm.points().to_vec();
    points.extend(BROWS.map(|i| lm.point(i) + up * nose_length));
    Ok(ExtendedLandmarks {
        points,
        nose_length,
        up,
    })
}
