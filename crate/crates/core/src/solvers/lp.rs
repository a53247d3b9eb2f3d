//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `max/min c'x  s.t.  A x = b, x >= 0`. The tableau keeps the
//! artificial columns through phase two so the final basis inverse, and with
//! it a dual certificate, can be read off directly.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Equality constraint rows.
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub sense: Sense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value in the program's own sense; NaN unless optimal.
    pub value: f64,
    pub point: Vec<f64>,
    /// Multipliers of the equality rows, in the program's own sense.
    pub dual: Vec<f64>,
    /// Sum of artificials at the end of phase one.
    pub phase_one_residual: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `|c'x - b'y|` for the primal/dual pair.
    pub fn duality_gap(&self, prog: &LinearProgram) -> f64 {
        let primal: f64 = prog.objective.iter().zip(&self.point).map(|(c, x)| c * x).sum();
        let dual: f64 = prog.b_eq.iter().zip(&self.dual).map(|(b, y)| b * y).sum();
        (primal - dual).abs()
    }

    /// Most negative reduced cost (min-form). Nonnegative up to tolerance
    /// means the dual is feasible.
    pub fn min_reduced_cost(&self, prog: &LinearProgram) -> f64 {
        let sign = match prog.sense {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        };
        (0..prog.objective.len())
            .map(|j| {
                let aty: f64 = prog.a_eq.iter().zip(&self.dual).map(|(row, y)| row[j] * y).sum();
                sign * (prog.objective[j] - aty)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

const PIVOT_TOL: f64 = 1e-9;

struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    n: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.rows[0].len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule iterations on columns `< allowed`. Returns false when
    /// the program is unbounded in the entering direction.
    fn iterate(&mut self, allowed: usize, opt_tol: f64, max_iter: usize) -> Result<bool> {
        let rhs = self.rhs();
        for _ in 0..max_iter {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -opt_tol) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[rhs].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, enter);
        }
        Err(Error::SolverStalled { iterations: max_iter, residual: f64::NAN })
    }
}

/// Two-phase simplex. Infeasibility and unboundedness are statuses, not errors;
/// only exceeding the pivot budget is an error.
pub fn solve_lp(prog: &LinearProgram, feas_tol: f64, opt_tol: f64) -> Result<LpSolution> {
    let n = prog.objective.len();
    let m = prog.b_eq.len();
    if prog.a_eq.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: prog.a_eq.len() });
    }
    if let Some(row) = prog.a_eq.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
    }
    let width = n + m + 1;
    let mut flipped = vec![false; m];
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; width];
        let s = if prog.b_eq[i] < 0.0 {
            flipped[i] = true;
            -1.0
        } else {
            1.0
        };
        for j in 0..n {
            row[j] = s * prog.a_eq[i][j];
        }
        row[n + i] = 1.0;
        row[width - 1] = s * prog.b_eq[i];
        rows.push(row);
    }
    // phase one: minimize the sum of artificials
    let mut cost = vec![0.0; width];
    for row in &rows {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[width - 1] -= row[width - 1];
    }
    let mut tab = Tableau { rows, cost, basis: (n..n + m).collect(), n };
    let max_iter = 50 * (n + m) + 1000;
    tab.iterate(n, opt_tol, max_iter)?;
    let residual = -tab.cost[width - 1];
    let b_scale = 1.0 + prog.b_eq.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if residual > feas_tol * b_scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: f64::NAN,
            point: vec![0.0; n],
            dual: vec![0.0; m],
            phase_one_residual: residual,
        });
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| tab.rows[r][j].abs() > PIVOT_TOL) {
                tab.rows[r][width - 1] = 0.0;
                tab.pivot(r, c);
            }
        }
    }
    // phase two
    let sign = match prog.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let c_min: Vec<f64> = prog.objective.iter().map(|c| sign * c).collect();
    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&c_min);
    for (r, row) in tab.rows.iter().enumerate() {
        let cb = if tab.basis[r] < n { c_min[tab.basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for (v, a) in cost.iter_mut().zip(row) {
                *v -= cb * a;
            }
        }
    }
    tab.cost = cost;
    let bounded = tab.iterate(n, opt_tol, max_iter)?;
    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::NAN,
            point: vec![0.0; n],
            dual: vec![0.0; m],
            phase_one_residual: residual,
        });
    }
    let mut point = vec![0.0; n];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < tab.n {
            point[bv] = tab.rows[r][width - 1].max(0.0);
        }
    }
    // y' = c_B' B^{-1}; B^{-1} sits in the artificial block
    let mut dual = vec![0.0; m];
    for (i, d) in dual.iter_mut().enumerate() {
        let mut y = 0.0;
        for (r, &bv) in tab.basis.iter().enumerate() {
            if bv < n {
                y += c_min[bv] * tab.rows[r][n + i];
            }
        }
        if flipped[i] {
            y = -y;
        }
        *d = sign * y;
    }
    let value = prog.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    Ok(LpSolution { status: LpStatus::Optimal, value, point, dual, phase_one_residual: residual })
}
