//! Dense two-phase simplex for small equality-form programs:
//! maximize `c·x` subject to `A x = b`, `x >= 0`.
//!
//! Sized for the placement problems (a few dozen rows, a few hundred
//! columns); no sparsity, no LU updates.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex hit the iteration limit")]
    IterationLimit,
    #[error("constraint matrix shape does not match ({0})")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct EqualityLp {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl EqualityLp {
    pub fn new(objective: Vec<f64>) -> Self {
        EqualityLp {
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let n = self.objective.len();
        if let Some(bad) = self.rows.iter().find(|r| r.len() != n) {
            return Err(LpError::Shape(format!("row has {} columns, expected {n}", bad.len())));
        }
        Tableau::new(self).run()
    }
}

/// Rows `0..m` hold constraints, row `m` the phase objective. Columns
/// `0..n` are structural, `n..n+m` artificial, last column is the rhs.
struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
}

impl Tableau {
    fn new(lp: &EqualityLp) -> Self {
        let m = lp.rows.len();
        let n = lp.objective.len();
        let width = n + m + 1;
        let mut t = vec![0.0; (m + 1) * width];
        for (i, (row, &b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            for (j, &a) in row.iter().enumerate() {
                t[i * width + j] = sign * a;
            }
            t[i * width + n + i] = 1.0;
            t[i * width + width - 1] = sign * b;
        }
        Tableau {
            m,
            n,
            width,
            t,
            basis: (n..n + m).collect(),
            cost: lp.objective.clone(),
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Writes reduced costs for maximizing `obj` (over columns `0..cols`) into
    /// the objective row: entry j = -(c_j - c_B B^-1 A_j).
    fn load_objective(&mut self, obj: &[f64]) {
        let (m, w) = (self.m, self.width);
        for j in 0..w {
            self.t[m * w + j] = 0.0;
        }
        for (j, &c) in obj.iter().enumerate() {
            self.t[m * w + j] = -c;
        }
        for r in 0..m {
            let cb = obj.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    let v = self.at(r, j);
                    self.t[m * w + j] += cb * v;
                }
            }
        }
    }

    /// Maximizes the loaded objective using columns `< cols`.
    fn optimize(&mut self, cols: usize) -> Result<(), LpError> {
        let m = self.m;
        let max_iter = 50 * (m + cols) + 1000;
        let mut stall = 0usize;
        let mut last_obj = self.at(m, self.width - 1);
        for _ in 0..max_iter {
            // Dantzig pricing, Bland's rule once progress stalls
            let bland = stall > 2 * m + 10;
            let mut enter = None;
            let mut best = -PIVOT_TOL;
            for j in 0..cols {
                let d = self.at(m, j);
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.at(r, c);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, self.width - 1) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, c);
            let obj = self.at(m, self.width - 1);
            if obj > last_obj + 1e-12 {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        }
        Err(LpError::IterationLimit)
    }

    fn run(mut self) -> Result<LpSolution, LpError> {
        let (m, n) = (self.m, self.n);
        // phase 1: maximize -(sum of artificials)
        let mut phase1 = vec![0.0; n + m];
        for v in &mut phase1[n..] {
            *v = -1.0;
        }
        self.load_objective(&phase1);
        self.optimize(n + m)?;
        let infeas = -self.at(m, self.width - 1);
        let scale = 1.0 + (0..m).map(|r| self.at(r, self.width - 1).abs()).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Err(LpError::Infeasible);
        }
        // drive remaining (zero-level) artificials out of the basis
        for r in 0..m {
            if self.basis[r] >= n {
                if let Some(c) = (0..n).max_by(|&a, &b| {
                    self.at(r, a).abs().total_cmp(&self.at(r, b).abs())
                }) {
                    if self.at(r, c).abs() > 1e-9 {
                        self.pivot(r, c);
                    }
                    // otherwise the row is redundant; its artificial stays basic at 0
                }
            }
        }
        let cost = std::mem::take(&mut self.cost);
        self.load_objective(&cost);
        self.optimize(n)?;

        let mut x = vec![0.0; n];
        for r in 0..m {
            if self.basis[r] < n {
                x[self.basis[r]] = self.at(r, self.width - 1).max(0.0);
            }
        }
        let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x + s1 = 4, 2y + s2 = 12, 3x + 2y + s3 = 18
        let mut lp = EqualityLp::new(vec![3.0, 5.0, 0.0, 0.0, 0.0]);
        lp.add_row(vec![1.0, 0.0, 1.0, 0.0, 0.0], 4.0);
        lp.add_row(vec![0.0, 2.0, 0.0, 1.0, 0.0], 12.0);
        lp.add_row(vec![3.0, 2.0, 0.0, 0.0, 1.0], 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible() {
        let mut lp = EqualityLp::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], 1.0);
        lp.add_row(vec![1.0, 1.0], 2.0);
        assert_eq!(lp.solve(), Err(LpError::Infeasible));
    }

    #[test]
    fn unbounded() {
        let mut lp = EqualityLp::new(vec![1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], 1.0);
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let mut lp = EqualityLp::new(vec![1.0, 2.0, 0.0]);
        lp.add_row(vec![1.0, 1.0, 1.0], 1.0);
        lp.add_row(vec![2.0, 2.0, 2.0], 2.0);
        lp.add_row(vec![-1.0, 0.0, 0.0], -0.25);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 0.25).abs() < 1e-12);
        assert!((s.objective - 1.75).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under naive Dantzig pricing.
        let mut lp = EqualityLp::new(vec![0.75, -150.0, 0.02, -6.0, 0.0, 0.0, 0.0]);
        lp.add_row(vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0], 0.0);
        lp.add_row(vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0], 0.0);
        lp.add_row(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.05).abs() < 1e-9);
    }

    #[test]
    fn shape_error() {
        let mut lp = EqualityLp::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0], 1.0);
        assert!(matches!(lp.solve(), Err(LpError::Shape(_))));
    }
}
