//! Landmark-driven face geometry: forehead extension, the fixed triangulation,
//! the six placement regions and the exclusion (cut-out) masks.

mod delaunay;
mod landmarks;
mod raster;
mod regions;

pub use delaunay::{fixed_triangulation, general_position, in_circumcircle, orient, TriangleSet};
pub use landmarks::*;
pub use raster::{convex_hull, point_in_polygon, polygon_mask, polygon_mask_dilated};
pub use regions::{
    build_regions, build_regions_with, canonical_landmarks, canonical_triangulation,
    combine_regions, RegionId, RegionSet,
};

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A 2-D point in pixel coordinates (origin top-left, y down).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Centroid of a point list.
pub fn centroid(points: &[Point]) -> Point {
    let n = points.len().max(1) as f64;
    let s = points.iter().fold(Point::default(), |a, &p| a + p);
    s * (1.0 / n)
}
