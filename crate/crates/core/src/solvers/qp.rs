//! Convex QP over a product of unit simplices.
//!
//! Each block minimizes
//!
//! ```text
//!     sum_j w_j (p_j - sum_m pi_m L_jm)^2 + lambda * sum_m pi_m^2
//!     s.t. pi >= 0, sum_m pi_m = 1
//! ```
//!
//! The blocks share nothing, so they are solved independently with a
//! primal active-set method in least-squares form: the free-set subproblem
//! is `min |[sqrt(w) L; sqrt(lambda) I] pi - [sqrt(w) p; 0]|` with the sum
//! constraint eliminated, solved by pivoted QR. Working with the stacked
//! matrix squares the conditioning of the normal equations away, which
//! matters because `lambda` is many orders of magnitude below `w`.

use alloc::vec;
use alloc::vec::Vec;

use super::linalg::lstsq;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct QpBlock {
    /// One column per support point, each of length J.
    pub columns: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimplexQp {
    pub blocks: Vec<QpBlock>,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct QpBlockSolution {
    pub weights: Vec<f64>,
    pub value: f64,
    /// Scaled KKT violation of the returned point.
    pub kkt_residual: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 500;

impl QpBlock {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    fn residual(&self, pi: &[f64]) -> Vec<f64> {
        let mut r = self.target.clone();
        for (col, &w) in self.columns.iter().zip(pi) {
            if w != 0.0 {
                for (ri, c) in r.iter_mut().zip(col) {
                    *ri -= w * c;
                }
            }
        }
        r
    }

    pub fn objective(&self, pi: &[f64], lambda: f64) -> f64 {
        let r = self.residual(pi);
        let data: f64 = r.iter().zip(&self.weights).map(|(ri, w)| w * ri * ri).sum();
        data + lambda * pi.iter().map(|p| p * p).sum::<f64>()
    }

    fn gradient(&self, pi: &[f64], lambda: f64) -> Vec<f64> {
        let r = self.residual(pi);
        let wr: Vec<f64> = r.iter().zip(&self.weights).map(|(ri, w)| w * ri).collect();
        self.columns
            .iter()
            .zip(pi)
            .map(|(col, &p)| -2.0 * col.iter().zip(&wr).map(|(c, v)| c * v).sum::<f64>() + 2.0 * lambda * p)
            .collect()
    }

    fn grad_scale(&self, lambda: f64) -> f64 {
        1.0 + 2.0 * self.weights.iter().fold(0.0f64, |a, &w| a.max(w)) + 2.0 * lambda
    }

    /// KKT violation at a feasible `pi`, scaled by the gradient's Lipschitz size.
    pub fn kkt_residual(&self, pi: &[f64], lambda: f64) -> f64 {
        let g = self.gradient(pi, lambda);
        let free: Vec<usize> = (0..pi.len()).filter(|&m| pi[m] > 0.0).collect();
        if free.is_empty() {
            return f64::INFINITY;
        }
        let nu = free.iter().map(|&m| g[m]).sum::<f64>() / free.len() as f64;
        let mut worst = 0.0f64;
        for m in 0..pi.len() {
            let v = if pi[m] > 0.0 { (g[m] - nu).abs() } else { (nu - g[m]).max(0.0) };
            worst = worst.max(v);
        }
        worst / self.grad_scale(lambda)
    }

    /// Minimizer of the block on the free set `free` subject to the sum
    /// constraint only.
    fn solve_free(&self, free: &[usize], lambda: f64) -> Vec<f64> {
        let m_total = self.len();
        let mut z = vec![0.0; m_total];
        if free.len() == 1 {
            z[free[0]] = 1.0;
            return z;
        }
        let j = self.target.len();
        let nf = free.len();
        let sw: Vec<f64> = self.weights.iter().map(|w| libm::sqrt(*w)).collect();
        let sl = libm::sqrt(lambda);
        let r = free[nf - 1];
        let rows = j + nf;
        let mut a = vec![0.0; rows * (nf - 1)];
        for (idx, (&m, c)) in free[..nf - 1].iter().zip(a.chunks_exact_mut(rows)).enumerate() {
            for i in 0..j {
                c[i] = sw[i] * (self.columns[m][i] - self.columns[r][i]);
            }
            c[j + idx] = sl;
            c[j + nf - 1] = -sl;
        }
        let mut rhs = vec![0.0; rows];
        for i in 0..j {
            rhs[i] = sw[i] * (self.target[i] - self.columns[r][i]);
        }
        rhs[j + nf - 1] = -sl;
        let y = lstsq(&mut a, &mut rhs, 1e-13);
        let mut last = 1.0;
        for (idx, &m) in free[..nf - 1].iter().enumerate() {
            z[m] = y[idx];
            last -= y[idx];
        }
        z[r] = last;
        z
    }

    /// Solve one block, optionally warm-started from a feasible point.
    pub fn solve(&self, lambda: f64, tol: f64, warm: Option<&[f64]>) -> Result<QpBlockSolution> {
        let m_total = self.len();
        if m_total == 0 {
            return Err(Error::InvalidConfig("empty QP block".into()));
        }
        if self.weights.len() != self.target.len() {
            return Err(Error::DimensionMismatch { expected: self.target.len(), got: self.weights.len() });
        }
        let mut pi = vec![0.0; m_total];
        let mut free: Vec<usize> = match warm {
            Some(w) if w.len() == m_total && w.iter().any(|&v| v > 0.0) => {
                let s: f64 = w.iter().map(|v| v.max(0.0)).sum();
                for m in 0..m_total {
                    pi[m] = w[m].max(0.0) / s;
                }
                (0..m_total).filter(|&m| pi[m] > 0.0).collect()
            }
            _ => {
                let mut best = 0;
                let mut best_val = f64::INFINITY;
                let mut e = vec![0.0; m_total];
                for m in 0..m_total {
                    e[m] = 1.0;
                    let v = self.objective(&e, lambda);
                    e[m] = 0.0;
                    if v < best_val {
                        best_val = v;
                        best = m;
                    }
                }
                pi[best] = 1.0;
                vec![best]
            }
        };
        let scale = self.grad_scale(lambda);
        let mut just_added: Option<usize> = None;
        for iter in 0..MAX_ITER {
            let z = self.solve_free(&free, lambda);
            let infeasible: Vec<usize> = free.iter().copied().filter(|&m| z[m] <= 0.0).collect();
            if infeasible.is_empty() {
                pi = z;
                let g = self.gradient(&pi, lambda);
                let nu = free.iter().map(|&m| g[m]).sum::<f64>() / free.len() as f64;
                let mut enter: Option<(usize, f64)> = None;
                for m in 0..m_total {
                    if pi[m] == 0.0 && !free.contains(&m) {
                        let viol = nu - g[m];
                        if viol > tol * scale && enter.is_none_or(|(_, v)| viol > v) {
                            enter = Some((m, viol));
                        }
                    }
                }
                match enter {
                    None => {
                        return Ok(QpBlockSolution {
                            value: self.objective(&pi, lambda),
                            kkt_residual: self.kkt_residual(&pi, lambda),
                            weights: pi,
                            iterations: iter + 1,
                        });
                    }
                    Some((m, _)) => {
                        free.push(m);
                        free.sort_unstable();
                        just_added = Some(m);
                    }
                }
            } else {
                if let Some(m) = just_added {
                    if infeasible.contains(&m) && infeasible.len() == 1 && pi[m] == 0.0 {
                        // numerically no descent along the new direction
                        free.retain(|&f| f != m);
                        return Ok(QpBlockSolution {
                            value: self.objective(&pi, lambda),
                            kkt_residual: self.kkt_residual(&pi, lambda),
                            weights: pi,
                            iterations: iter + 1,
                        });
                    }
                }
                let mut step = 1.0f64;
                for &m in &infeasible {
                    let denom = pi[m] - z[m];
                    if denom > 0.0 {
                        step = step.min(pi[m] / denom);
                    }
                }
                for &m in &free {
                    pi[m] += step * (z[m] - pi[m]);
                }
                let mut kept = Vec::with_capacity(free.len());
                for &m in &free {
                    if pi[m] <= 1e-15 || infeasible.contains(&m) && (pi[m] - 0.0).abs() <= 1e-13 {
                        pi[m] = 0.0;
                    } else {
                        kept.push(m);
                    }
                }
                if kept.is_empty() {
                    let best = free
                        .iter()
                        .copied()
                        .max_by(|&a, &b| z[a].partial_cmp(&z[b]).unwrap_or(core::cmp::Ordering::Equal))
                        .unwrap();
                    pi.iter_mut().for_each(|p| *p = 0.0);
                    pi[best] = 1.0;
                    kept.push(best);
                }
                let s: f64 = kept.iter().map(|&m| pi[m]).sum();
                for &m in &kept {
                    pi[m] /= s;
                }
                free = kept;
                just_added = None;
            }
        }
        let residual = self.kkt_residual(&pi, lambda);
        if residual <= tol * 10.0 {
            return Ok(QpBlockSolution {
                value: self.objective(&pi, lambda),
                kkt_residual: residual,
                weights: pi,
                iterations: MAX_ITER,
            });
        }
        Err(Error::SolverStalled { iterations: MAX_ITER, residual })
    }
}

/// Solve every block of `qp` independently.
pub fn solve_simplex_qp(qp: &SimplexQp, tol: f64) -> Result<Vec<QpBlockSolution>> {
    if qp.lambda < 0.0 {
        return Err(Error::InvalidConfig("negative ridge penalty".into()));
    }
    qp.blocks.iter().map(|b| b.solve(qp.lambda, tol, None)).collect()
}
