//! Convex polygon primitives shared by the treemap and the font fitter.
//!
//! Polygons are value types with positive signed area (counter-clockwise in a
//! y-up frame). Layout coordinates are SVG user units, so on screen the same
//! vertex order appears clockwise; nothing in this module cares.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Global geometric tolerance in layout units.
pub const EPS: f64 = 1e-9;

/// Clipping results with an area below this are treated as empty.
pub const MIN_CLIP_AREA: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not convex")]
    NotConvex,
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("all points are collinear")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// z-component of (b - a) x (c - a).
#[inline]
pub fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pts = Vec::<Point>::deserialize(d)?;
        Polygon::new(pts).map_err(serde::de::Error::custom)
    }
}

impl Polygon {
    /// Validates and normalizes a convex polygon. Clockwise input is reversed;
    /// consecutive duplicates and collinear vertices are dropped.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut pts = dedup_ring(vertices);
        if pts.len() < 3 {
            return Err(GeometryError::TooFewVertices(pts.len()));
        }
        let area = shoelace(&pts);
        if area.abs() <= MIN_CLIP_AREA {
            return Err(GeometryError::ZeroArea);
        }
        if area < 0.0 {
            pts.reverse();
        }
        let pts = drop_collinear(pts);
        if pts.len() < 3 {
            return Err(GeometryError::TooFewVertices(pts.len()));
        }
        let poly = Polygon { vertices: pts };
        if !poly.is_convex() {
            return Err(GeometryError::NotConvex);
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle with corners `min` and `max`.
    pub fn rect(min: Point, max: Point) -> Result<Self, GeometryError> {
        Polygon::new(vec![
            min,
            Point::new(max.x, min.y),
            max,
            Point::new(min.x, max.y),
        ])
    }

    pub fn regular(sides: usize, center: Point, radius: f64) -> Result<Self, GeometryError> {
        let pts = (0..sides)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / sides as f64;
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        Polygon::new(pts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterator over directed edges `(a, b)`.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        // Shift to the first vertex to keep the products small.
        let o = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for (p, q) in self.edges() {
            let (px, py) = (p.x - o.x, p.y - o.y);
            let (qx, qy) = (q.x - o.x, q.y - o.y);
            let c = px * qy - qx * py;
            a2 += c;
            cx += (px + qx) * c;
            cy += (py + qy) * c;
        }
        Point::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2))
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    pub fn is_convex(&self) -> bool {
        let (min, max) = self.bbox();
        let scale = (max.x - min.x).max(max.y - min.y).max(1.0);
        let tol = -EPS * scale * scale;
        let n = self.vertices.len();
        (0..n).all(|i| {
            cross(
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.vertices[(i + 2) % n],
            ) >= tol
        })
    }

    /// Intersection with the half-plane `a*x + b*y <= c`; `None` when the
    /// remainder has (near) zero area.
    pub fn clip_halfplane(&self, a: f64, b: f64, c: f64) -> Option<Polygon> {
        let side = |p: Point| a * p.x + b * p.y - c;
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        let mut all_inside = true;
        for i in 0..n {
            let s = self.vertices[i];
            let e = self.vertices[(i + 1) % n];
            let (ds, de) = (side(s), side(e));
            let (s_in, e_in) = (ds <= 0.0, de <= 0.0);
            all_inside &= s_in;
            match (s_in, e_in) {
                (true, true) => out.push(e),
                (true, false) => out.push(lerp_at_zero(s, e, ds, de)),
                (false, true) => {
                    out.push(lerp_at_zero(s, e, ds, de));
                    out.push(e);
                }
                (false, false) => {}
            }
        }
        if all_inside {
            return Some(self.clone());
        }
        let pts = dedup_ring(out);
        if pts.len() < 3 || shoelace(&pts) < MIN_CLIP_AREA {
            return None;
        }
        Some(Polygon {
            vertices: drop_collinear(pts),
        })
        .filter(|p| p.vertices.len() >= 3)
    }

    /// Intersection of two convex polygons.
    pub fn intersection(&self, other: &Polygon) -> Option<Polygon> {
        let mut cur = self.clone();
        for (p, q) in other.edges() {
            let (a, b, c) = edge_halfplane(p, q);
            cur = cur.clip_halfplane(a, b, c)?;
        }
        Some(cur)
    }

    /// Signed distance from `q` to the nearest edge line; positive inside.
    pub fn inner_distance(&self, q: Point) -> f64 {
        self.edges()
            .map(|(a, b)| cross(a, b, q) / a.dist(b))
            .fold(f64::INFINITY, f64::min)
    }

    /// True iff `q` is on the inner side of every edge within `tol`.
    pub fn contains(&self, q: Point, tol: f64) -> bool {
        self.edges().all(|(a, b)| cross(a, b, q) / a.dist(b) >= -tol)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Polygon {
        Polygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }

    pub fn scale_about(&self, factor: f64, pivot: Point) -> Polygon {
        assert!(factor > 0.0, "scale factor must be positive");
        Polygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| {
                    Point::new(
                        pivot.x + factor * (p.x - pivot.x),
                        pivot.y + factor * (p.y - pivot.y),
                    )
                })
                .collect(),
        }
    }

    /// Rigid rotation; orientation and convexity are preserved.
    pub fn rotate(&self, theta: f64, pivot: Point) -> Polygon {
        Polygon {
            vertices: rotate(&self.vertices, theta, pivot),
        }
    }
}

/// Half-plane `a*x + b*y <= c` holding the interior side of the directed edge
/// `p -> q` of a positively oriented polygon.
pub fn edge_halfplane(p: Point, q: Point) -> (f64, f64, f64) {
    let a = q.y - p.y;
    let b = -(q.x - p.x);
    (a, b, a * p.x + b * p.y)
}

pub fn signed_area(p: &Polygon) -> f64 {
    p.signed_area()
}

pub fn centroid(p: &Polygon) -> Point {
    p.centroid()
}

pub fn clip_halfplane(p: &Polygon, a: f64, b: f64, c: f64) -> Option<Polygon> {
    p.clip_halfplane(a, b, c)
}

pub fn contains(p: &Polygon, q: Point, tol: f64) -> bool {
    p.contains(q, tol)
}

pub fn rotate(points: &[Point], theta: f64, pivot: Point) -> Vec<Point> {
    let (s, c) = theta.sin_cos();
    points
        .iter()
        .map(|p| {
            let (dx, dy) = (p.x - pivot.x, p.y - pivot.y);
            Point::new(pivot.x + c * dx - s * dy, pivot.y + s * dx + c * dy)
        })
        .collect()
}

/// Andrew's monotone chain. Collinear boundary points are removed.
pub fn convex_hull(points: &[Point]) -> Result<Polygon, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate);
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 || shoelace(&hull) <= MIN_CLIP_AREA {
        return Err(GeometryError::Degenerate);
    }
    Ok(Polygon { vertices: hull })
}

fn shoelace(pts: &[Point]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let o = pts[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        let (a, b) = (pts[i], pts[i + 1]);
        s += (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
    }
    0.5 * s
}

fn lerp_at_zero(s: Point, e: Point, ds: f64, de: f64) -> Point {
    let t = ds / (ds - de);
    Point::new(s.x + (e.x - s.x) * t, s.y + (e.y - s.y) * t)
}

fn dedup_ring(pts: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|q| q.dist(p) > EPS) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= EPS {
        out.pop();
    }
    out
}

fn drop_collinear(pts: Vec<Point>) -> Vec<Point> {
    let n = pts.len();
    if n <= 3 {
        return pts;
    }
    let keep: Vec<bool> = (0..n)
        .map(|i| {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            // distance of b from line ac
            let len = a.dist(c);
            len <= EPS || cross(a, b, c).abs() / len > EPS
        })
        .collect();
    let out: Vec<Point> = pts
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    out
}
