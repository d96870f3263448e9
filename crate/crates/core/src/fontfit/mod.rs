//! Word placement: the largest axis-preserving copy of a word's hull that
//! fits in its cell, swept over rotations and hyphenation patterns.

pub mod hyphenate;
pub mod metrics;
pub mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{convex_hull, GeometryError, Point, Polygon};
pub use hyphenate::{priority_breaks, split_lines, syllable_breaks, DEFAULT_MAX_BREAKS};
pub use metrics::{FontInfo, FontMetricsTable, MetricsError};
use simplex::{EqualityLp, LpError};

pub const DEFAULT_ROTATION_STEP: f64 = 3.0;
const TIE_REL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("word is empty")]
    EmptyWord,
    #[error("break {0} is out of range or out of order")]
    InvalidBreak(usize),
    #[error("cell is degenerate")]
    DegenerateCell,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Hull of the word's rendered extent at size 1, baseline of the first line at y = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WordShape {
    pub hull: Polygon,
    pub breaks: Vec<usize>,
    pub lines: Vec<String>,
    /// Characters absent from the metrics table (measured with the average advance).
    pub missing: Vec<char>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A reference-size point `o` lands at `scale * R(theta) * o + (dx, dy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub scale: f64,
    pub dx: f64,
    pub dy: f64,
    pub theta: f64,
    pub lines: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breaks: Vec<usize>,
    /// Scale was raised to the minimum and the word may spill out of its cell.
    #[serde(default, skip_serializing_if = "is_false")]
    pub overflow: bool,
    /// Row i holds the convex weights of hull vertex i over the cell vertices.
    #[serde(skip)]
    pub lambda: Vec<Vec<f64>>,
}

impl Placement {
    pub fn apply(&self, o: Point) -> Point {
        let (s, c) = self.theta.sin_cos();
        Point::new(
            self.scale * (c * o.x - s * o.y) + self.dx,
            self.scale * (s * o.x + c * o.y) + self.dy,
        )
    }

    pub fn hyphens(&self) -> usize {
        self.lines.len().saturating_sub(1)
    }

    /// Hull points as reconstructed from `lambda` and the cell vertices.
    pub fn lp_points(&self, cell: &Polygon) -> Vec<Point> {
        self.lambda
            .iter()
            .map(|row| {
                row.iter().zip(cell.vertices()).fold(Point::new(0.0, 0.0), |acc, (&l, p)| {
                    Point::new(acc.x + l * p.x, acc.y + l * p.y)
                })
            })
            .collect()
    }
}

/// Hull of stacked, left-aligned line rectangles.
pub fn hull_from_lines(lines: &[String], metrics: &FontMetricsTable) -> Result<(Polygon, Vec<char>), FitError> {
    let mut missing = Vec::new();
    let mut corners = Vec::with_capacity(lines.len() * 4);
    for (k, line) in lines.iter().enumerate() {
        let width: f64 = line
            .chars()
            .map(|c| {
                metrics.advance(c).unwrap_or_else(|| {
                    if !missing.contains(&c) {
                        missing.push(c);
                    }
                    metrics.average_advance()
                })
            })
            .sum();
        if width <= 0.0 {
            return Err(FitError::EmptyWord);
        }
        let base = k as f64 * metrics.line_pitch();
        let (top, bottom) = (base - metrics.ascent, base - metrics.descent);
        corners.extend([
            Point::new(0.0, top),
            Point::new(width, top),
            Point::new(width, bottom),
            Point::new(0.0, bottom),
        ]);
    }
    Ok((convex_hull(&corners)?, missing))
}

pub fn word_hull(word: &str, breaks: &[usize], metrics: &FontMetricsTable) -> Result<WordShape, FitError> {
    let len = word.chars().count();
    if len == 0 {
        return Err(FitError::EmptyWord);
    }
    let mut prev = 0;
    for &b in breaks {
        if b <= prev || b >= len {
            return Err(FitError::InvalidBreak(b));
        }
        prev = b;
    }
    let lines = split_lines(word, breaks);
    let (hull, missing) = hull_from_lines(&lines, metrics)?;
    for c in &missing {
        log::warn!("character {c:?} in {word:?} is missing from font {}", metrics.name);
    }
    Ok(WordShape {
        hull,
        breaks: breaks.to_vec(),
        lines,
        missing,
    })
}

/// Result of the containment LP: `q_i = scale * o_i + d` for every inner vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFit {
    pub scale: f64,
    pub d: Point,
    /// Row per inner vertex (in the caller's order), column per outer vertex.
    pub lambda: Vec<Vec<f64>>,
    pub q: Vec<Point>,
}

/// Largest `S` and a translation `d` with `S*O + d` inside `P`, as a linear
/// program over convex weights expressing each image vertex in `P`.
pub fn solve_fit_lp(inner: &Polygon, outer: &Polygon) -> Result<LpFit, FitError> {
    if outer.area() <= 1e-12 * outer.diameter().max(1.0).powi(2) {
        return Err(FitError::DegenerateCell);
    }
    let o = inner.vertices();
    let (m, n) = (o.len(), outer.len());

    // reference pair: widest x-spread, ordered left to right
    let (mut r1, mut r2, mut spread) = (0, 1, -1.0);
    for a in 0..m {
        for b in a + 1..m {
            let dx = (o[b].x - o[a].x).abs();
            if dx > spread {
                spread = dx;
                (r1, r2) = if o[a].x <= o[b].x { (a, b) } else { (b, a) };
            }
        }
    }
    if spread <= 0.0 {
        return Err(GeometryError::Degenerate.into());
    }

    // both polygons normalized to unit size around their centroids
    let (oc, os) = (inner.centroid(), inner.diameter());
    let (pc, ps) = (outer.centroid(), outer.diameter());
    let on: Vec<Point> = o.iter().map(|p| Point::new((p.x - oc.x) / os, (p.y - oc.y) / os)).collect();
    let pn: Vec<Point> = outer
        .vertices()
        .iter()
        .map(|p| Point::new((p.x - pc.x) / ps, (p.y - pc.y) / ps))
        .collect();

    let var = |i: usize, j: usize| i * n + j;
    let mut objective = vec![0.0; m * n];
    for j in 0..n {
        objective[var(r2, j)] += pn[j].x;
        objective[var(r1, j)] -= pn[j].x;
    }
    let mut lp = EqualityLp::new(objective);
    for i in 0..m {
        let mut row = vec![0.0; m * n];
        for j in 0..n {
            row[var(i, j)] = 1.0;
        }
        lp.add_row(row, 1.0);
    }
    let a = on[r2].x - on[r1].x;
    for i in 0..m {
        if i == r1 {
            continue;
        }
        // A (yq_i - yq_1) = (yo_i - yo_1)(xq_2 - xq_1)
        let c = on[i].y - on[r1].y;
        let mut row = vec![0.0; m * n];
        for j in 0..n {
            row[var(i, j)] += a * pn[j].y;
            row[var(r1, j)] += -a * pn[j].y + c * pn[j].x;
            row[var(r2, j)] -= c * pn[j].x;
        }
        lp.add_row(row, 0.0);
        if i == r2 {
            continue;
        }
        // A (xq_i - xq_1) = (xo_i - xo_1)(xq_2 - xq_1)
        let b = on[i].x - on[r1].x;
        let mut row = vec![0.0; m * n];
        for j in 0..n {
            row[var(i, j)] += a * pn[j].x;
            row[var(r1, j)] += (b - a) * pn[j].x;
            row[var(r2, j)] -= b * pn[j].x;
        }
        lp.add_row(row, 0.0);
    }
    let sol = lp.solve()?;

    let lambda: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let row = &sol.x[i * n..(i + 1) * n];
            let total: f64 = row.iter().sum();
            row.iter().map(|v| v / total).collect()
        })
        .collect();
    let q: Vec<Point> = lambda
        .iter()
        .map(|row| {
            row.iter().zip(outer.vertices()).fold(Point::new(0.0, 0.0), |acc, (&l, p)| {
                Point::new(acc.x + l * p.x, acc.y + l * p.y)
            })
        })
        .collect();
    let scale = (q[r2].x - q[r1].x) / (o[r2].x - o[r1].x);
    let d = Point::new(q[r1].x - scale * o[r1].x, q[r1].y - scale * o[r1].y);
    Ok(LpFit { scale, d, lambda, q })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Degrees; 0 disables rotation.
    pub rotation_step: f64,
    /// Degrees, inclusive; clamped to [-90, 90].
    pub rotation_range: (f64, f64),
    pub hyphenate: bool,
    pub max_breaks: usize,
    /// Placements below this scale are raised to it and flagged as overflow.
    pub min_scale: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            rotation_step: DEFAULT_ROTATION_STEP,
            rotation_range: (-90.0, 90.0),
            hyphenate: true,
            max_breaks: DEFAULT_MAX_BREAKS,
            min_scale: 1.0,
        }
    }
}

/// Candidate angles in radians: 0, +step, -step, +2 step, ...
pub fn candidate_angles(opts: &FitOptions) -> Vec<f64> {
    let lo = opts.rotation_range.0.max(-90.0);
    let hi = opts.rotation_range.1.min(90.0);
    let mut out = vec![0.0];
    if opts.rotation_step > 0.0 {
        let mut k = 1;
        loop {
            let a = k as f64 * opts.rotation_step;
            if a > hi + 1e-9 && -a < lo - 1e-9 {
                break;
            }
            for deg in [a, -a] {
                if deg >= lo - 1e-9 && deg <= hi + 1e-9 {
                    out.push(deg.clamp(-90.0, 90.0).to_radians());
                }
            }
            k += 1;
        }
    }
    out
}

/// Hyphenation patterns ordered by hyphen count, then by mask.
fn patterns(word: &str, opts: &FitOptions) -> Vec<Vec<usize>> {
    if !opts.hyphenate || opts.max_breaks == 0 {
        return vec![Vec::new()];
    }
    let cands = priority_breaks(word, opts.max_breaks);
    let mut masks: Vec<u32> = (0..1u32 << cands.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
        .into_iter()
        .map(|mask| {
            cands
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &b)| b)
                .collect()
        })
        .collect()
}

struct Candidate {
    shape_idx: usize,
    theta: f64,
    fit: LpFit,
    pivot: Point,
}

/// Best placement of `word` in `cell` over all candidate angles and patterns:
/// largest scale, then smallest |theta|, then fewest hyphens.
pub fn fit_word(
    word: &str,
    cell: &Polygon,
    metrics: &FontMetricsTable,
    opts: &FitOptions,
) -> Result<Placement, FitError> {
    let shapes: Vec<WordShape> = patterns(word, opts)
        .iter()
        .map(|b| word_hull(word, b, metrics))
        .collect::<Result<_, _>>()?;
    let angles = candidate_angles(opts);
    let mut cands = Vec::with_capacity(shapes.len() * angles.len());
    for (si, shape) in shapes.iter().enumerate() {
        let pivot = shape.hull.centroid();
        for &theta in &angles {
            let rotated = shape.hull.rotate(theta, pivot);
            let fit = solve_fit_lp(&rotated, cell)?;
            cands.push(Candidate {
                shape_idx: si,
                theta,
                fit,
                pivot,
            });
        }
    }
    let best_s = cands.iter().map(|c| c.fit.scale).fold(f64::NEG_INFINITY, f64::max);
    let chosen = cands
        .iter()
        .filter(|c| c.fit.scale >= best_s - TIE_REL * best_s.abs())
        .min_by(|a, b| {
            a.theta
                .abs()
                .total_cmp(&b.theta.abs())
                .then(shapes[a.shape_idx].breaks.len().cmp(&shapes[b.shape_idx].breaks.len()))
        })
        .expect("at least one candidate");

    let shape = &shapes[chosen.shape_idx];
    let (s, c) = chosen.theta.sin_cos();
    let (f, pv) = (&chosen.fit, chosen.pivot);
    // q = S (R (o - c) + c) + d  =>  t = d + S (c - R c)
    let rc = Point::new(c * pv.x - s * pv.y, s * pv.x + c * pv.y);
    let mut placement = Placement {
        scale: f.scale,
        dx: f.d.x + f.scale * (pv.x - rc.x),
        dy: f.d.y + f.scale * (pv.y - rc.y),
        theta: chosen.theta,
        lines: shape.lines.clone(),
        breaks: shape.breaks.clone(),
        overflow: false,
        lambda: f.lambda.clone(),
    };
    clamp_scale(&mut placement, pv, opts.min_scale);
    Ok(placement)
}

/// Raises the scale to `min_scale` keeping the image of `anchor` fixed.
fn clamp_scale(p: &mut Placement, anchor: Point, min_scale: f64) {
    if p.scale >= min_scale {
        return;
    }
    let at = p.apply(anchor);
    p.scale = min_scale;
    let moved = p.apply(anchor);
    p.dx += at.x - moved.x;
    p.dy += at.y - moved.y;
    p.overflow = true;
    p.lambda.clear();
}

/// Circle-inscription fit: the word's bounding box, unrotated and
/// unhyphenated, centred on the cell centroid with its diagonal equal to
/// the diameter of the largest centroid-centred circle in the cell.
pub fn fit_word_baseline(word: &str, cell: &Polygon, metrics: &FontMetricsTable) -> Result<Placement, FitError> {
    let shape = word_hull(word, &[], metrics)?;
    let (lo, hi) = shape.hull.bbox();
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let g = cell.centroid();
    let r = cell.inner_distance(g).max(0.0);
    let scale = 2.0 * r / w.hypot(h);
    let center = Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
    Ok(Placement {
        scale,
        dx: g.x - scale * center.x,
        dy: g.y - scale * center.y,
        theta: 0.0,
        lines: shape.lines,
        breaks: Vec::new(),
        overflow: false,
        lambda: Vec::new(),
    })
}

/// Baseline fit with the same minimum-scale clamp as [`fit_word`].
pub fn fit_word_baseline_clamped(
    word: &str,
    cell: &Polygon,
    metrics: &FontMetricsTable,
    min_scale: f64,
) -> Result<Placement, FitError> {
    let mut p = fit_word_baseline(word, cell, metrics)?;
    let anchor = word_hull(word, &[], metrics)?.hull.centroid();
    clamp_scale(&mut p, anchor, min_scale);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn toy_metrics() -> FontMetricsTable {
        let mut advances = BTreeMap::new();
        for c in 'a'..='z' {
            advances.insert(c, 0.5);
        }
        advances.insert('b', 0.55);
        advances.insert('-', 0.3);
        FontMetricsTable {
            name: "toy".into(),
            family: "toy".into(),
            units_per_em: 1.0,
            ascent: 0.8,
            descent: -0.2,
            line_gap: 0.1,
            advances,
        }
    }

    fn rect(w: f64, h: f64) -> Polygon {
        Polygon::rect(Point::new(0.0, 0.0), Point::new(w, h)).unwrap()
    }

    fn opts_plain() -> FitOptions {
        FitOptions {
            rotation_step: 0.0,
            hyphenate: false,
            min_scale: 0.0,
            ..FitOptions::default()
        }
    }

    /// Largest feasible scale by bisection; feasibility scans `res` rows of
    /// translations and solves each row's x-interval in closed form.
    fn oracle_scale(inner: &Polygon, outer: &Polygon, res: usize) -> f64 {
        let planes: Vec<(f64, f64, f64)> = outer
            .edges()
            .map(|(p, q)| {
                let (a, b) = (q.y - p.y, -(q.x - p.x));
                (a, b, a * p.x + b * p.y)
            })
            .collect();
        let (plo, phi) = outer.bbox();
        let feasible = |s: f64| {
            // a.(s o + d) <= c for all o  <=>  a.d <= c - s max_o a.o
            let lim: Vec<(f64, f64, f64)> = planes
                .iter()
                .map(|&(a, b, c)| {
                    let mx = inner
                        .vertices()
                        .iter()
                        .map(|o| a * o.x + b * o.y)
                        .fold(f64::NEG_INFINITY, f64::max);
                    (a, b, c - s * mx)
                })
                .collect();
            let span = phi.y - plo.y;
            (0..=res).any(|k| {
                let dy = plo.y - span + 3.0 * span * k as f64 / res as f64;
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for &(a, b, c) in &lim {
                    let rhs = c - b * dy;
                    if a.abs() < 1e-15 {
                        if rhs < 0.0 {
                            return false;
                        }
                    } else if a > 0.0 {
                        hi = hi.min(rhs / a);
                    } else {
                        lo = lo.max(rhs / a);
                    }
                }
                lo <= hi
            })
        };
        let (mut lo, mut hi) = (0.0, outer.diameter() / inner.diameter() * 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn random_convex(rng: &mut ChaCha8Rng, n: usize) -> Polygon {
        loop {
            let mut angles: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
            angles.sort_by(f64::total_cmp);
            let pts: Vec<Point> = angles
                .iter()
                .map(|a| {
                    let r = 50.0 + 50.0 * rng.random::<f64>();
                    Point::new(100.0 + r * a.cos(), 100.0 + r * a.sin())
                })
                .collect();
            if let Ok(p) = convex_hull(&pts) {
                if p.area() > 100.0 {
                    return p;
                }
            }
        }
    }

    #[test]
    fn two_letter_hull() {
        let s = word_hull("ab", &[], &toy_metrics()).unwrap();
        let (lo, hi) = s.hull.bbox();
        assert!((hi.x - lo.x - 1.05).abs() < 1e-12);
        assert!((hi.y - lo.y - 1.0).abs() < 1e-12);
        assert!((lo.y + 0.8).abs() < 1e-12);
        assert_eq!(s.hull.len(), 4);
        assert_eq!(word_hull("x", &[], &toy_metrics()).unwrap().hull.len(), 4);
    }

    #[test]
    fn hyphenated_hull() {
        let m = toy_metrics();
        let s = word_hull("visualization", &[6], &m).unwrap();
        assert_eq!(s.lines, vec!["visual-", "ization"]);
        assert!(s.hull.len() <= 8);
        // every line rectangle corner lies inside the hull
        let pitch = m.line_pitch();
        for (k, w) in [(0, 6.0 * 0.5 + 0.3), (1, 3.5)] {
            let base = k as f64 * pitch;
            for p in [
                Point::new(0.0, base - 0.8),
                Point::new(w, base - 0.8),
                Point::new(w, base + 0.2),
                Point::new(0.0, base + 0.2),
            ] {
                assert!(s.hull.contains(p, 1e-12));
            }
        }
        assert!(matches!(word_hull("abc", &[3], &m), Err(FitError::InvalidBreak(3))));
        assert!(matches!(word_hull("", &[], &m), Err(FitError::EmptyWord)));
    }

    #[test]
    fn unknown_characters_fall_back() {
        let m = toy_metrics();
        let s = word_hull("a\u{e9}", &[], &m).unwrap();
        assert_eq!(s.missing, vec!['\u{e9}']);
        let (lo, hi) = s.hull.bbox();
        assert!((hi.x - lo.x - (0.5 + m.average_advance())).abs() < 1e-12);
    }

    #[test]
    fn identity_and_similarity() {
        let sq = rect(1.0, 1.0);
        let f = solve_fit_lp(&sq, &sq).unwrap();
        assert!((f.scale - 1.0).abs() < 1e-9);
        assert!(f.d.x.abs() < 1e-9 && f.d.y.abs() < 1e-9);
        let big = rect(2.0, 2.0);
        assert!((solve_fit_lp(&sq, &big).unwrap().scale - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rectangle_in_triangle() {
        let o = rect(2.0, 1.0);
        let p = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(0.0, 4.0)]).unwrap();
        let f = solve_fit_lp(&o, &p).unwrap();
        let oracle = oracle_scale(&o, &p, 2000);
        assert!((f.scale - oracle).abs() <= 0.01 * oracle, "{} vs {oracle}", f.scale);
        // closed form: the corner (2S, S) touches x + y = 4
        assert!((f.scale - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn random_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let w = 0.5 + 3.0 * rng.random::<f64>();
            let o = rect(w, 1.0);
            let n = rng.random_range(4..=10);
            let p = random_convex(&mut rng, n);
            let f = solve_fit_lp(&o, &p).unwrap();
            let oracle = oracle_scale(&o, &p, 400);
            assert!(f.scale >= oracle * 0.99 && f.scale <= oracle * 1.01, "{} vs {oracle}", f.scale);
            for (v, q) in o.vertices().iter().zip(&f.q) {
                let img = Point::new(f.scale * v.x + f.d.x, f.scale * v.y + f.d.y);
                assert!(img.dist(*q) < 1e-6);
                assert!(p.contains(img, 1e-6));
            }
        }
    }

    #[test]
    fn degenerate_cell() {
        let sliver = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1e6, 0.0), Point::new(5e5, 1e-6)]).unwrap();
        assert!(matches!(
            solve_fit_lp(&rect(1.0, 1.0), &sliver),
            Err(FitError::DegenerateCell)
        ));
    }

    #[test]
    fn square_word_prefers_no_rotation() {
        let mut m = toy_metrics();
        m.advances.insert('o', 1.0);
        m.ascent = 1.0;
        m.descent = 0.0;
        let cell = rect(10.0, 10.0);
        let opts = FitOptions {
            min_scale: 0.0,
            ..FitOptions::default()
        };
        let p = fit_word("o", &cell, &m, &opts).unwrap();
        assert_eq!(p.theta, 0.0);
        assert!((p.scale - 10.0).abs() < 1e-9);
    }

    #[test]
    fn wide_word_rotates_into_tall_cell() {
        let mut m = toy_metrics();
        m.ascent = 1.0;
        m.descent = 0.0;
        // 8 letters * 0.5: a 4 x 1 hull
        let word = "aacdefgh";
        let cell = rect(1.0, 4.0);
        let rotated = fit_word(word, &cell, &m, &FitOptions { hyphenate: false, min_scale: 0.0, ..FitOptions::default() }).unwrap();
        let flat = fit_word(word, &cell, &m, &opts_plain()).unwrap();
        assert!((rotated.theta.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let hull = word_hull(word, &[], &m).unwrap().hull;
        let at90 = solve_fit_lp(&hull.rotate(std::f64::consts::FRAC_PI_2, hull.centroid()), &cell).unwrap();
        assert!((rotated.scale - at90.scale).abs() < 1e-9);
        assert!((rotated.scale / flat.scale - 4.0).abs() < 1e-6);
    }

    #[test]
    fn hyphenation_never_hurts() {
        let m = FontMetricsTable::helvetica();
        let cell = rect(100.0, 100.0);
        let on = fit_word("visualization", &cell, &m, &FitOptions { rotation_step: 0.0, min_scale: 0.0, ..FitOptions::default() }).unwrap();
        let off = fit_word("visualization", &cell, &m, &opts_plain()).unwrap();
        assert!(on.scale >= off.scale);
        assert!(on.hyphens() > 0);
    }

    #[test]
    fn baseline_closed_form() {
        let mut m = toy_metrics();
        m.ascent = 0.5;
        m.descent = -0.5;
        m.advances.insert('o', 1.0);
        let cell = rect(1.0, 1.0);
        let b = fit_word_baseline("o", &cell, &m).unwrap();
        assert!((b.scale - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let f = fit_word("o", &cell, &m, &FitOptions { min_scale: 0.0, ..FitOptions::default() }).unwrap();
        assert!(f.scale >= b.scale);
    }

    #[test]
    fn baseline_thin_cell() {
        let m = FontMetricsTable::helvetica();
        let cell = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(50.0, 1.0), Point::new(0.0, 3.0)]).unwrap();
        let b = fit_word_baseline("storm", &cell, &m).unwrap();
        assert!(b.scale > 0.0);
        let hull = word_hull("storm", &[], &m).unwrap().hull;
        let (lo, hi) = hull.bbox();
        for (x, y) in [(lo.x, lo.y), (hi.x, lo.y), (hi.x, hi.y), (lo.x, hi.y)] {
            assert!(cell.contains(b.apply(Point::new(x, y)), 1e-9));
        }
    }

    #[test]
    fn sliver_clamp_flags_overflow() {
        let m = FontMetricsTable::helvetica();
        let cell = rect(2.0, 0.5);
        let p = fit_word("thunderstorm", &cell, &m, &FitOptions::default()).unwrap();
        assert_eq!(p.scale, 1.0);
        assert!(p.overflow && p.lambda.is_empty());
    }

    #[test]
    fn placement_json_shape() {
        let m = FontMetricsTable::helvetica();
        let p = fit_word("beer", &rect(100.0, 60.0), &m, &FitOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        for k in ["scale", "dx", "dy", "theta", "lines"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!(v.get("lambda").is_none());
    }

    #[test]
    fn angle_grid() {
        let a = candidate_angles(&FitOptions::default());
        assert_eq!(a.len(), 61);
        assert_eq!(a[0], 0.0);
        assert!(a.iter().all(|t| t.abs() <= std::f64::consts::FRAC_PI_2 + 1e-12));
        let b = candidate_angles(&FitOptions { rotation_step: 7.0, ..FitOptions::default() });
        assert_eq!(b.len(), 1 + 2 * 12);
        assert_eq!(candidate_angles(&opts_plain()), vec![0.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn placements_are_contained_and_shape_preserving(seed in 0u64..1000, word in "[a-z]{1,12}") {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(3..=9);
            let cell = random_convex(&mut rng, n);
            let m = FontMetricsTable::helvetica();
            let opts = FitOptions { rotation_step: 15.0, min_scale: 0.0, ..FitOptions::default() };
            let p = fit_word(&word, &cell, &m, &opts).unwrap();
            let hull = hull_from_lines(&p.lines, &m).unwrap().0;
            let q = p.lp_points(&cell);
            prop_assert_eq!(q.len(), hull.len());
            for (o, qi) in hull.vertices().iter().zip(&q) {
                let img = p.apply(*o);
                prop_assert!(cell.contains(img, 1e-6));
                prop_assert!(img.dist(*qi) < 1e-6);
            }
            for row in &p.lambda {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|l| (-1e-12..=1.0 + 1e-12).contains(l)));
            }
            let plain = fit_word(&word, &cell, &m, &FitOptions { rotation_step: 0.0, hyphenate: false, ..opts.clone() }).unwrap();
            prop_assert!(p.scale >= plain.scale * (1.0 - 1e-9));
        }
    }
}
