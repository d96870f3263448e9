//! Weighted centroidal Voronoi treemap over power diagrams.
//!
//! Each hierarchy level is laid out by iterating three steps until cell areas
//! match their targets: build the power diagram of the generators inside the
//! parent cell, adapt the generator weights by the area ratio, and move every
//! generator to the centroid of its cell.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterNode;
use crate::fontfit::{FontInfo, Placement};
use crate::geometry::{Point, Polygon};

pub const DEFAULT_DIAMETER: f64 = 1000.0;
pub const CIRCLE_SIDES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorState {
    pub site: Point,
    /// Additive power weight: the power distance is `|x - site|^2 - weight`.
    pub weight: f64,
    pub target_area: f64,
}

/// Regular 64-gon of diameter 1000 centred at (500, 500).
pub fn circle_container() -> Polygon {
    let r = DEFAULT_DIAMETER / 2.0;
    Polygon::regular(CIRCLE_SIDES, Point::new(r, r), r).expect("valid circle")
}

pub fn square_container() -> Polygon {
    Polygon::rect(
        Point::new(0.0, 0.0),
        Point::new(DEFAULT_DIAMETER, DEFAULT_DIAMETER),
    )
    .expect("valid square")
}

/// Scales and translates an arbitrary convex polygon so that its diameter is
/// 1000 units and its bounding box starts at the origin.
pub fn normalize_container(p: &Polygon) -> Polygon {
    let s = DEFAULT_DIAMETER / p.diameter();
    let (min, _) = p.bbox();
    p.translate(-min.x, -min.y).scale_about(s, Point::new(0.0, 0.0))
}

/// `cell_i = container ∩ { x : |x - s_i|^2 - w_i <= |x - s_j|^2 - w_j  for all j }`.
/// Dominated generators get `None`.
pub fn power_diagram(container: &Polygon, gens: &[GeneratorState]) -> Vec<Option<Polygon>> {
    let origin = container.centroid();
    let rel: Vec<(f64, f64, f64)> = gens
        .iter()
        .map(|g| {
            let (x, y) = (g.site.x - origin.x, g.site.y - origin.y);
            (x, y, x * x + y * y - g.weight)
        })
        .collect();
    (0..gens.len())
        .map(|i| {
            let (xi, yi, pi) = rel[i];
            // clip by the nearest generators first; the cell shrinks fastest
            let mut others: Vec<usize> = (0..gens.len()).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| {
                let da = (rel[a].0 - xi).powi(2) + (rel[a].1 - yi).powi(2);
                let db = (rel[b].0 - xi).powi(2) + (rel[b].1 - yi).powi(2);
                da.total_cmp(&db).then(a.cmp(&b))
            });
            let mut cell = container.clone();
            for j in others {
                let (xj, yj, pj) = rel[j];
                let a = 2.0 * (xj - xi);
                let b = 2.0 * (yj - yi);
                let c = pj - pi;
                if a == 0.0 && b == 0.0 {
                    // coincident sites: the heavier one (then the lower index) wins
                    if c < 0.0 || (c == 0.0 && j < i) {
                        return None;
                    }
                    continue;
                }
                cell = cell.clip_halfplane(a, b, c + a * origin.x + b * origin.y)?;
            }
            Some(cell)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvtOptions {
    pub max_iter: usize,
    pub area_tol: f64,
    pub move_damping: f64,
}

impl Default for CvtOptions {
    fn default() -> Self {
        CvtOptions {
            max_iter: 300,
            area_tol: 0.02,
            move_damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvtStats {
    pub iterations: usize,
    pub max_area_error: f64,
    pub converged: bool,
}

const WEIGHT_FLOOR: f64 = 1e-9;
const MIN_FACTOR: f64 = 0.5;
const MAX_FACTOR: f64 = 2.0;
const STALL_ITERS: usize = 40;
const MAX_NEWTON_STEPS: usize = 100;

/// Lays out `targets.len()` cells inside `container` with areas proportional
/// to `targets`. Cells come back in input order.
pub fn cvt_layout(
    container: &Polygon,
    targets: &[f64],
    seed: u64,
    opts: &CvtOptions,
) -> (Vec<Polygon>, CvtStats) {
    assert!(!targets.is_empty(), "at least one target");
    assert!(
        targets.iter().all(|t| t.is_finite() && *t > 0.0),
        "targets must be positive"
    );
    let area = container.area();
    let total: f64 = targets.iter().sum();
    let targets: Vec<f64> = targets.iter().map(|t| t * area / total).collect();
    let n = targets.len();
    if n == 1 {
        return (
            vec![container.clone()],
            CvtStats {
                iterations: 0,
                max_area_error: 0.0,
                converged: true,
            },
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_sep = 1e-6 * container.diameter();
    let mut gens: Vec<GeneratorState> = Vec::with_capacity(n);
    for &t in &targets {
        let site = loop {
            let p = sample_inside(container, &mut rng);
            if gens.iter().all(|g| g.site.dist(p) > min_sep) {
                break p;
            }
        };
        gens.push(GeneratorState {
            site,
            weight: t,
            target_area: t,
        });
    }
    limit_weights(&mut gens);

    let mut iterations = 0;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    loop {
        let cells = power_diagram(container, &gens);
        let error = max_area_error(&cells, &targets);
        if error <= opts.area_tol {
            return finish(cells, iterations, error, opts);
        }
        if error < best * (1.0 - 1e-3) {
            best = error;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if iterations >= opts.max_iter || since_best >= STALL_ITERS {
            break;
        }
        iterations += 1;
        adapt(container, &mut gens, &cells, opts, &mut rng);
    }
    // the multiplicative loop stalled: match areas with sites held fixed
    let (cells, steps) = refine_weights(container, &mut gens, &targets, 0.5 * opts.area_tol);
    let error = max_area_error(&cells, &targets);
    finish(cells, iterations + steps, error, opts)
}

fn finish(cells: Vec<Option<Polygon>>, iterations: usize, error: f64, opts: &CvtOptions) -> (Vec<Polygon>, CvtStats) {
    (
        cells.into_iter().map(|c| c.expect("every generator owns a cell")).collect(),
        CvtStats {
            iterations,
            max_area_error: error,
            converged: error <= opts.area_tol,
        },
    )
}

/// Damped Newton iteration on the weights alone. With sites fixed, cell areas
/// are the gradient of a concave function of the weights, whose Hessian is
/// the graph Laplacian with entries `len(edge_ij) / (2 |s_i - s_j|)`.
fn refine_weights(
    container: &Polygon,
    gens: &mut [GeneratorState],
    targets: &[f64],
    tol: f64,
) -> (Vec<Option<Polygon>>, usize) {
    let n = gens.len();
    let mut cells = power_diagram(container, gens);
    if cells.iter().any(Option::is_none) {
        // plain Voronoi: every distinct site owns a cell
        for g in gens.iter_mut() {
            g.weight = 0.0;
        }
        cells = power_diagram(container, gens);
    }
    let areas = |cells: &[Option<Polygon>]| -> Option<Vec<f64>> {
        cells.iter().map(|c| c.as_ref().map(Polygon::area)).collect()
    };
    let residual = |a: &[f64]| -> f64 { a.iter().zip(targets).map(|(a, t)| (t - a) * (t - a)).sum::<f64>().sqrt() };
    let Some(mut area) = areas(&cells) else {
        return (cells, 0);
    };
    let floor = 0.5 * targets.iter().chain(&area).copied().fold(f64::INFINITY, f64::min);
    let mut steps = 0;
    while steps < MAX_NEWTON_STEPS && max_area_error(&cells, targets) > tol {
        steps += 1;
        let lap = power_laplacian(&cells, gens);
        let mut h = DMatrix::<f64>::zeros(n - 1, n - 1);
        let mut rhs = DVector::<f64>::zeros(n - 1);
        for i in 1..n {
            rhs[i - 1] = targets[i] - area[i];
            for j in 1..n {
                h[(i - 1, j - 1)] = lap[i * n + j];
            }
        }
        let scale = (0..n - 1).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
        for i in 0..n - 1 {
            h[(i, i)] += 1e-12 * scale;
        }
        let Some(delta) = h.cholesky().map(|c| c.solve(&rhs)) else {
            break;
        };
        let r0 = residual(&area);
        let base: Vec<f64> = gens.iter().map(|g| g.weight).collect();
        let mut tau = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            for i in 1..n {
                gens[i].weight = base[i] + tau * delta[i - 1];
            }
            let trial = power_diagram(container, gens);
            if let Some(a) = areas(&trial) {
                if a.iter().all(|&x| x >= floor) && residual(&a) <= (1.0 - tau / 2.0) * r0 {
                    cells = trial;
                    area = a;
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
        }
        if !accepted {
            for (g, w) in gens.iter_mut().zip(&base) {
                g.weight = *w;
            }
            break;
        }
    }
    (cells, steps)
}

/// Row-major `n x n` matrix of `d area_i / d w_j`.
fn power_laplacian(cells: &[Option<Polygon>], gens: &[GeneratorState]) -> Vec<f64> {
    let n = gens.len();
    let mut lap = vec![0.0; n * n];
    let power = |j: usize, p: Point| p.dist_sq(gens[j].site) - gens[j].weight;
    for (i, cell) in cells.iter().enumerate() {
        let Some(cell) = cell else { continue };
        for (a, b) in cell.edges() {
            let mid = Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
            let own = power(i, mid);
            let scale = cell.diameter().powi(2).max(1.0);
            let nearest = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, (power(j, mid) - own).abs()))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            if let Some((j, gap)) = nearest {
                if gap <= 1e-7 * scale {
                    let d = gens[i].site.dist(gens[j].site);
                    if d > 0.0 {
                        // each shared edge is seen from both sides
                        let c = 0.5 * a.dist(b) / (2.0 * d);
                        lap[i * n + j] -= c;
                        lap[j * n + i] -= c;
                        lap[i * n + i] += c;
                        lap[j * n + j] += c;
                    }
                }
            }
        }
    }
    lap
}

fn max_area_error(cells: &[Option<Polygon>], targets: &[f64]) -> f64 {
    cells
        .iter()
        .zip(targets)
        .map(|(c, t)| match c {
            Some(p) => (p.area() - t).abs() / t,
            None => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

fn adapt(
    container: &Polygon,
    gens: &mut [GeneratorState],
    cells: &[Option<Polygon>],
    opts: &CvtOptions,
    rng: &mut ChaCha8Rng,
) {
    let largest = cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.as_ref().map(|p| (i, p.area())))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i);

    for (i, cell) in cells.iter().enumerate() {
        match cell {
            Some(p) => {
                let factor = (gens[i].target_area / p.area()).clamp(MIN_FACTOR, MAX_FACTOR);
                gens[i].weight = (gens[i].weight * factor).max(WEIGHT_FLOOR);
                let c = p.centroid();
                let s = gens[i].site;
                gens[i].site = Point::new(
                    s.x + opts.move_damping * (c.x - s.x),
                    s.y + opts.move_damping * (c.y - s.y),
                );
            }
            None => {
                gens[i].weight = WEIGHT_FLOOR;
                let host = largest
                    .and_then(|l| cells[l].as_ref())
                    .unwrap_or(container);
                let c = host.centroid();
                let q = sample_inside(host, rng);
                gens[i].site = Point::new(c.x + 0.25 * (q.x - c.x), c.y + 0.25 * (q.y - c.y));
            }
        }
    }
    limit_weights(gens);
}

/// Enforces `w_i - w_j <= |s_i - s_j|^2` for every pair, which keeps every
/// site inside its own power cell (and so every cell non-empty).
fn limit_weights(gens: &mut [GeneratorState]) {
    let n = gens.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d2 = gens[i].site.dist_sq(gens[j].site);
            let excess = gens[i].weight - gens[j].weight - d2;
            if excess > 0.0 {
                gens[i].weight = (gens[j].weight + 0.999 * d2).max(WEIGHT_FLOOR);
            }
        }
    }
}

fn sample_inside(p: &Polygon, rng: &mut ChaCha8Rng) -> Point {
    let (min, max) = p.bbox();
    loop {
        let q = Point::new(
            min.x + rng.random::<f64>() * (max.x - min.x),
            min.y + rng.random::<f64>() * (max.y - min.y),
        );
        if p.inner_distance(q) > 0.0 {
            return q;
        }
    }
}

/// Per-level summary over every `cvt_layout` run at that depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub depth: usize,
    pub runs: usize,
    pub converged_runs: usize,
    pub max_iterations: usize,
    pub max_area_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutStats {
    pub levels: Vec<LevelStats>,
    pub converged: bool,
    pub max_area_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordInfo {
    pub text: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellNode {
    pub polygon: Polygon,
    pub color: usize,
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub word: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub placement: Option<Placement>,
    /// Stats of the run that laid out `children` inside this cell.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub layout: Option<CvtStats>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub children: Vec<CellNode>,
}

impl CellNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaves(&self) -> Vec<&CellNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a CellNode>) {
        if self.is_leaf() {
            out.push(self);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    fn leaves_mut(&mut self) -> Vec<&mut CellNode> {
        if self.is_leaf() {
            return vec![self];
        }
        self.children.iter_mut().flat_map(CellNode::leaves_mut).collect()
    }
}

/// The solved treemap: nested cells, colours, word placements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub container: Polygon,
    #[serde(default)]
    pub words: Vec<WordInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font: Option<FontInfo>,
    /// Root-level stats; per-node stats live on the cells.
    pub root: CvtStats,
    pub cells: Vec<CellNode>,
    pub stats: LayoutStats,
}

impl LayoutDocument {
    pub fn leaves(&self) -> Vec<&CellNode> {
        self.cells.iter().flat_map(CellNode::leaves).collect()
    }

    pub fn leaves_mut(&mut self) -> Vec<&mut CellNode> {
        self.cells.iter_mut().flat_map(CellNode::leaves_mut).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn child_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 step
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Recursively lays out `tree` inside `container`.
pub fn layout_tree(
    tree: &ClusterNode,
    container: &Polygon,
    seed: u64,
    opts: &CvtOptions,
) -> LayoutDocument {
    let (cells, root) = layout_children(tree, container, seed, opts, None);
    let mut levels: Vec<LevelStats> = Vec::new();
    record(&mut levels, 0, &root);
    for c in &cells {
        collect_stats(c, 1, &mut levels);
    }
    let converged = levels.iter().all(|l| l.converged_runs == l.runs);
    let max_area_error = levels.iter().map(|l| l.max_area_error).fold(0.0, f64::max);
    LayoutDocument {
        container: container.clone(),
        words: Vec::new(),
        font: None,
        root,
        cells,
        stats: LayoutStats {
            levels,
            converged,
            max_area_error,
        },
    }
}

fn layout_children(
    node: &ClusterNode,
    region: &Polygon,
    seed: u64,
    opts: &CvtOptions,
    inherited_color: Option<usize>,
) -> (Vec<CellNode>, CvtStats) {
    let targets: Vec<f64> = node.children.iter().map(|c| c.weight).collect();
    let (polys, stats) = cvt_layout(region, &targets, seed, opts);
    let cells = node
        .children
        .par_iter()
        .zip(polys.into_par_iter())
        .enumerate()
        .map(|(i, (child, poly))| {
            let color = child.color.or(inherited_color).unwrap_or(i);
            if child.is_leaf() {
                CellNode {
                    polygon: poly,
                    color,
                    weight: child.weight,
                    word: child.word,
                    placement: None,
                    layout: None,
                    children: Vec::new(),
                }
            } else {
                let (children, st) =
                    layout_children(child, &poly, child_seed(seed, i), opts, Some(color));
                CellNode {
                    polygon: poly,
                    color,
                    weight: child.weight,
                    word: child.word,
                    placement: None,
                    layout: Some(st),
                    children,
                }
            }
        })
        .collect();
    (cells, stats)
}

fn record(levels: &mut Vec<LevelStats>, depth: usize, s: &CvtStats) {
    if levels.len() <= depth {
        levels.push(LevelStats {
            depth,
            runs: 0,
            converged_runs: 0,
            max_iterations: 0,
            max_area_error: 0.0,
        });
    }
    let l = &mut levels[depth];
    l.runs += 1;
    l.converged_runs += s.converged as usize;
    l.max_iterations = l.max_iterations.max(s.iterations);
    l.max_area_error = l.max_area_error.max(s.max_area_error);
}

fn collect_stats(cell: &CellNode, depth: usize, levels: &mut Vec<LevelStats>) {
    if let Some(s) = &cell.layout {
        record(levels, depth, s);
    }
    for c in &cell.children {
        collect_stats(c, depth + 1, levels);
    }
}
