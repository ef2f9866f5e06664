//! Delaunay triangulation by x-sorted sweep insertion with Lawson edge flips.
//!
//! Points are first nudged into general position by a deterministic offset of
//! at most 1e-3 px per axis, so ties (cocircular quads on symmetric faces,
//! collinear triples, duplicates) resolve the same way on every run.

use super::Point;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Maximum per-axis offset applied by [`general_position`].
pub const PERTURBATION: f64 = 1e-3;

/// Fixed triangle connectivity as index triples (each sorted ascending, list sorted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TriangleSet {
    triangles: Vec<[usize; 3]>,
}

impl TriangleSet {
    pub fn from_triangles(mut triangles: Vec<[usize; 3]>) -> Self {
        triangles.iter_mut().for_each(|t| t.sort_unstable());
        triangles.sort_unstable();
        TriangleSet { triangles }
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Applies the connectivity to a concrete point list.
    pub fn corners(&self, points: &[Point]) -> Vec<[Point; 3]> {
        self.triangles
            .iter()
            .map(|t| [points[t[0]], points[t[1]], points[t[2]]])
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: TriangleSet = serde_json::from_str(text)?;
        Ok(TriangleSet::from_triangles(set.triangles))
    }
}

/// `> 0` when `a, b, c` turn counter-clockwise (y-up convention).
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// `> 0` when `d` lies strictly inside the circumcircle of the
/// counter-clockwise triangle `a, b, c`.
pub fn in_circumcircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (ax, ay) = (a.x - d.x, a.y - d.y);
    let (bx, by) = (b.x - d.x, b.y - d.y);
    let (cx, cy) = (c.x - d.x, c.y - d.y);
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

fn unit_jitter(i: usize, axis: u64) -> f64 {
    let h = crate::rng::derive(0x6465_6c61_756e_6179, &[i as u64, axis]);
    // 53 random bits → [-1, 1)
    (h >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// The deterministic general-position coordinates the triangulation runs on.
pub fn general_position(points: &[Point]) -> Vec<Point> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Point::new(
                p.x + PERTURBATION * unit_jitter(i, 0),
                p.y + PERTURBATION * unit_jitter(i, 1),
            )
        })
        .collect()
}

fn all_collinear(points: &[Point]) -> bool {
    let scale = points
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(1.0f64, f64::max);
    let tol = 1e-9 * scale * scale;
    let a = points[0];
    let Some(&b) = points.iter().find(|p| p.distance(a) > 1e-9 * scale) else {
        return true;
    };
    points.iter().all(|&c| orient(a, b, c).abs() <= tol)
}

struct Mesh<'a> {
    pts: &'a [Point],
    tris: Vec<Option<[usize; 3]>>,
    edges: HashMap<(usize, usize), usize>,
}

impl Mesh<'_> {
    fn add(&mut self, t: [usize; 3]) {
        debug_assert!(orient(self.pts[t[0]], self.pts[t[1]], self.pts[t[2]]) > 0.0);
        let id = self.tris.len();
        self.tris.push(Some(t));
        for k in 0..3 {
            self.edges.insert((t[k], t[(k + 1) % 3]), id);
        }
    }

    fn remove(&mut self, id: usize) {
        if let Some(t) = self.tris[id].take() {
            for k in 0..3 {
                self.edges.remove(&(t[k], t[(k + 1) % 3]));
            }
        }
    }

    /// Restores the Delaunay property across edge `u → v` of the ccw
    /// triangle `(u, v, p)`.
    fn legalize(&mut self, u: usize, v: usize, p: usize) {
        let mut stack = vec![(u, v, p)];
        while let Some((u, v, p)) = stack.pop() {
            let Some(&mine) = self.edges.get(&(u, v)) else {
                continue;
            };
            if !self.tris[mine].is_some_and(|t| t.contains(&p)) {
                continue;
            }
            let Some(&other) = self.edges.get(&(v, u)) else {
                continue; // hull edge
            };
            let t = self.tris[other].expect("edge map points at a live triangle");
            let q = t.into_iter().find(|&w| w != u && w != v).expect("triangle has a third vertex");
            let (pu, pv, pp, pq) = (self.pts[u], self.pts[v], self.pts[p], self.pts[q]);
            if in_circumcircle(pu, pv, pp, pq) > 0.0 {
                self.remove(mine);
                self.remove(other);
                self.add([u, q, p]);
                self.add([q, v, p]);
                stack.push((u, q, p));
                stack.push((q, v, p));
            }
        }
    }
}

/// Delaunay triangulation of `points` returned as reusable index triples.
pub fn fixed_triangulation(points: &[Point]) -> Result<TriangleSet> {
    if points.len() < 3 || all_collinear(points) {
        return Err(Error::InvalidInput(
            "triangulation needs at least 3 non-collinear points".into(),
        ));
    }
    let pts = general_position(points);
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(pts[a].y.total_cmp(&pts[b].y)));

    let mut mesh = Mesh {
        pts: &pts,
        tris: Vec::new(),
        edges: HashMap::new(),
    };

    // Seed with the first triangle that is not degenerate.
    let (a, b) = (order[0], order[1]);
    let Some(k) = (2..order.len()).find(|&k| orient(pts[a], pts[b], pts[order[k]]) != 0.0) else {
        return Err(Error::InvalidInput("points are collinear".into()));
    };
    if k != 2 {
        // Exactly collinear leading points survive perturbation only with
        // adversarial input; move the first non-collinear point forward.
        let moved = order.remove(k);
        order.insert(2, moved);
    }
    let c = order[2];
    let mut hull = if orient(pts[a], pts[b], pts[c]) > 0.0 {
        vec![a, b, c]
    } else {
        vec![a, c, b]
    };
    mesh.add([hull[0], hull[1], hull[2]]);

    for &p in &order[3..] {
        let n = hull.len();
        let visible: Vec<bool> = (0..n)
            .map(|i| orient(pts[hull[i]], pts[hull[(i + 1) % n]], pts[p]) < 0.0)
            .collect();
        if !visible.iter().any(|&v| v) {
            return Err(Error::InvalidInput("sweep point not outside hull".into()));
        }
        // Start of the contiguous visible chain.
        let start = (0..n)
            .find(|&i| visible[i] && !visible[(i + n - 1) % n])
            .unwrap_or(0);
        let mut count = 0;
        while count < n && visible[(start + count) % n] {
            let (u, v) = (hull[(start + count) % n], hull[(start + count + 1) % n]);
            mesh.add([v, u, p]);
            mesh.legalize(v, u, p);
            count += 1;
        }
        // hull[start] .. hull[start + count] become hull[start], p, hull[start + count].
        let mut next = Vec::with_capacity(n + 1);
        for j in 0..=(n - count) {
            let idx = (start + count + j) % n;
            next.push(hull[idx]);
        }
        next.push(p);
        hull = next;
    }

    Ok(TriangleSet::from_triangles(
        mesh.tris.into_iter().flatten().collect(),
    ))
}
