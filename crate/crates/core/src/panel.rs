//! Balanced discrete panels, support enumeration and empirical cell tables.
//!
//! Regressor and outcome values are integer codes. A regressor history is
//! stored flattened period by period (`T * p` codes), so the natural `Vec`
//! ordering is lexicographic with the earliest period most significant.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    n: usize,
    periods: usize,
    dim: usize,
    /// `n * T` outcome codes, unit-major.
    y: Vec<i64>,
    /// `n * T * p` regressor codes, unit-major then period-major.
    x: Vec<i64>,
}

impl PanelDataset {
    pub fn new(n: usize, periods: usize, dim: usize, y: Vec<i64>, x: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPanel("panel has no units".into()));
        }
        if periods < 2 {
            return Err(Error::InvalidPanel(format!("need at least 2 periods, got {periods}")));
        }
        if dim == 0 {
            return Err(Error::InvalidPanel("regressor dimension must be positive".into()));
        }
        if y.len() != n * periods {
            return Err(Error::DimensionMismatch { expected: n * periods, got: y.len() });
        }
        if x.len() != n * periods * dim {
            return Err(Error::DimensionMismatch { expected: n * periods * dim, got: x.len() });
        }
        Ok(Self { n, periods, dim, y, x })
    }

    /// Build from per-unit outcome rows and per-unit flattened regressor rows.
    pub fn from_units(periods: usize, dim: usize, units: &[(Vec<i64>, Vec<i64>)]) -> Result<Self> {
        let mut y = Vec::with_capacity(units.len() * periods);
        let mut x = Vec::with_capacity(units.len() * periods * dim);
        for (i, (yi, xi)) in units.iter().enumerate() {
            if yi.len() != periods || xi.len() != periods * dim {
                return Err(Error::InvalidPanel(format!("unit {i} is not balanced")));
            }
            y.extend_from_slice(yi);
            x.extend_from_slice(xi);
        }
        Self::new(units.len(), periods, dim, y, x)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self, i: usize) -> &[i64] {
        &self.y[i * self.periods..(i + 1) * self.periods]
    }

    pub fn history(&self, i: usize) -> &[i64] {
        let w = self.periods * self.dim;
        &self.x[i * w..(i + 1) * w]
    }

    pub fn regressor(&self, i: usize, t: usize) -> &[i64] {
        let h = self.history(i);
        &h[t * self.dim..(t + 1) * self.dim]
    }

    pub fn has_binary_outcomes(&self) -> bool {
        self.y.iter().all(|&v| v == 0 || v == 1)
    }

    /// Keep the units listed in `rows` (with repetition), in that order.
    pub fn resample(&self, rows: &[usize]) -> Result<Self> {
        let mut y = Vec::with_capacity(rows.len() * self.periods);
        let mut x = Vec::with_capacity(rows.len() * self.periods * self.dim);
        for &i in rows {
            if i >= self.n {
                return Err(Error::IndexOutOfRange { index: i, len: self.n });
            }
            y.extend_from_slice(self.outcomes(i));
            x.extend_from_slice(self.history(i));
        }
        Self::new(rows.len(), self.periods, self.dim, y, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportIndex {
    periods: usize,
    dim: usize,
    histories: Vec<Vec<i64>>,
    outcomes: Vec<Vec<i64>>,
}

impl SupportIndex {
    /// Sorts and validates user-supplied lists; duplicates are rejected.
    pub fn new(periods: usize, dim: usize, mut histories: Vec<Vec<i64>>, mut outcomes: Vec<Vec<i64>>) -> Result<Self> {
        if histories.iter().any(|h| h.len() != periods * dim) {
            return Err(Error::InvalidPanel("history length does not match T * p".into()));
        }
        if outcomes.iter().any(|o| o.len() != periods) {
            return Err(Error::InvalidPanel("outcome pattern length does not match T".into()));
        }
        histories.sort();
        outcomes.sort();
        if histories.windows(2).any(|w| w[0] == w[1]) || outcomes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPanel("support lists contain duplicates".into()));
        }
        Ok(Self { periods, dim, histories, outcomes })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.histories.len()
    }

    pub fn j(&self) -> usize {
        self.outcomes.len()
    }

    pub fn histories(&self) -> &[Vec<i64>] {
        &self.histories
    }

    pub fn outcomes(&self) -> &[Vec<i64>] {
        &self.outcomes
    }

    pub fn history(&self, k: usize) -> &[i64] {
        &self.histories[k]
    }

    pub fn outcome(&self, j: usize) -> &[i64] {
        &self.outcomes[j]
    }

    /// Regressor vector of history `k` in period `t`.
    pub fn regressor(&self, k: usize, t: usize) -> &[i64] {
        &self.histories[k][t * self.dim..(t + 1) * self.dim]
    }

    pub fn find_history(&self, h: &[i64]) -> Option<usize> {
        self.histories.binary_search_by(|v| v.as_slice().cmp(h)).ok()
    }

    pub fn find_outcome(&self, y: &[i64]) -> Option<usize> {
        self.outcomes.binary_search_by(|v| v.as_slice().cmp(y)).ok()
    }

    /// Periods at which history `k` takes the value `x`.
    pub fn periods_with(&self, k: usize, x: &[i64]) -> Vec<usize> {
        (0..self.periods).filter(|&t| self.regressor(k, t) == x).collect()
    }

    pub fn has_binary_outcomes(&self) -> bool {
        self.outcomes.iter().flatten().all(|&v| v == 0 || v == 1)
    }
}

/// All `2^T` binary patterns in lexicographic order.
pub fn full_binary_outcomes(periods: usize) -> Vec<Vec<i64>> {
    (0..1usize << periods)
        .map(|code| (0..periods).map(|t| ((code >> (periods - 1 - t)) & 1) as i64).collect())
        .collect()
}

/// Support with every binary scalar history and every binary outcome pattern.
pub fn full_binary_support(periods: usize) -> SupportIndex {
    let all = full_binary_outcomes(periods);
    SupportIndex { periods, dim: 1, histories: all.clone(), outcomes: all }
}

pub fn enumerate_support(data: &PanelDataset, full_outcomes: bool) -> Result<SupportIndex> {
    let mut histories: Vec<Vec<i64>> = (0..data.n()).map(|i| data.history(i).to_vec()).collect();
    histories.sort();
    histories.dedup();
    let outcomes = if full_outcomes {
        if !data.has_binary_outcomes() {
            return Err(Error::UnsupportedOutcomeAlphabet);
        }
        full_binary_outcomes(data.periods())
    } else {
        let mut o: Vec<Vec<i64>> = (0..data.n()).map(|i| data.outcomes(i).to_vec()).collect();
        o.sort();
        o.dedup();
        o
    };
    Ok(SupportIndex { periods: data.periods(), dim: data.dim(), histories, outcomes })
}

/// History masses and conditional outcome distributions.
///
/// Rows of histories with no observations are all zero and flagged absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProbabilities {
    pub p_x: Vec<f64>,
    /// `K x J`, row `k` is the distribution of outcome patterns given history `k`.
    pub p_y: Vec<Vec<f64>>,
    /// Units per history; empty for population objects.
    pub counts: Vec<u64>,
    pub present: Vec<bool>,
    /// Sample size behind the table, 0 for population cells.
    pub n_eff: u64,
}

impl CellProbabilities {
    /// Population cells. Rows of zero-mass histories are marked absent.
    pub fn population(p_x: Vec<f64>, p_y: Vec<Vec<f64>>) -> Result<Self> {
        if p_x.len() != p_y.len() {
            return Err(Error::DimensionMismatch { expected: p_x.len(), got: p_y.len() });
        }
        let present = p_x.iter().map(|&p| p > 0.0).collect();
        let cells = Self { p_x, p_y, counts: Vec::new(), present, n_eff: 0 };
        cells.validate(1e-10)?;
        Ok(cells)
    }

    pub fn k(&self) -> usize {
        self.p_x.len()
    }

    pub fn j(&self) -> usize {
        self.p_y.first().map_or(0, |r| r.len())
    }

    pub fn is_population(&self) -> bool {
        self.n_eff == 0
    }

    /// Check simplex membership of `p_x` and of every present row.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let j = self.j();
        if self.p_y.iter().any(|r| r.len() != j) {
            return Err(Error::InvalidPanel("ragged outcome table".into()));
        }
        let bad = |v: &f64| !(v.is_finite() && *v >= 0.0);
        if self.p_x.iter().any(bad) || self.p_y.iter().flatten().any(bad) {
            return Err(Error::InvalidPanel("cell probabilities must be finite and nonnegative".into()));
        }
        let sx: f64 = self.p_x.iter().sum();
        if (sx - 1.0).abs() > tol {
            return Err(Error::InvalidPanel(format!("history masses sum to {sx}")));
        }
        for (k, row) in self.p_y.iter().enumerate() {
            if self.present[k] {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > tol {
                    return Err(Error::InvalidPanel(format!("row {k} sums to {s}")));
                }
            }
        }
        Ok(())
    }

    /// Sample size to plug into rate-dependent tuning constants.
    pub fn effective_n(&self, population_n: f64) -> f64 {
        if self.n_eff == 0 {
            population_n
        } else {
            self.n_eff as f64
        }
    }
}

fn history_indices(data: &PanelDataset, index: &SupportIndex) -> Result<Vec<usize>> {
    (0..data.n()).map(|i| index.find_history(data.history(i)).ok_or(Error::UnknownHistory { unit: i })).collect()
}

pub fn cell_frequencies(data: &PanelDataset, index: &SupportIndex) -> Result<CellProbabilities> {
    let (k, j) = (index.k(), index.j());
    let mut counts = vec![0u64; k];
    let mut joint = vec![vec![0u64; j]; k];
    let hk = history_indices(data, index)?;
    for (i, &kk) in hk.iter().enumerate() {
        let jj = index.find_outcome(data.outcomes(i)).ok_or(Error::UnknownOutcome { unit: i })?;
        counts[kk] += 1;
        joint[kk][jj] += 1;
    }
    let n = data.n() as f64;
    let p_x = counts.iter().map(|&c| c as f64 / n).collect();
    let p_y = joint
        .iter()
        .zip(&counts)
        .map(|(row, &c)| if c == 0 { vec![0.0; j] } else { row.iter().map(|&v| v as f64 / c as f64).collect() })
        .collect();
    let present = counts.iter().map(|&c| c > 0).collect();
    Ok(CellProbabilities { p_x, p_y, counts, present, n_eff: data.n() as u64 })
}

/// Two regressor values and the distance between them.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectQuery {
    pub x_tilde: Vec<i64>,
    pub x_bar: Vec<i64>,
    pub distance: f64,
}

impl EffectQuery {
    pub fn new(x_tilde: Vec<i64>, x_bar: Vec<i64>, distance: f64) -> Result<Self> {
        if x_tilde.len() != x_bar.len() {
            return Err(Error::DimensionMismatch { expected: x_tilde.len(), got: x_bar.len() });
        }
        if x_tilde == x_bar {
            return Err(Error::InvalidQuery("the two regressor values coincide".into()));
        }
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::InvalidQuery(format!("distance must be positive, got {distance}")));
        }
        Ok(Self { x_tilde, x_bar, distance })
    }

    /// The binary scalar query `x~ = 1, x_ = 0, D = 1`.
    pub fn binary() -> Self {
        Self { x_tilde: vec![1], x_bar: vec![0], distance: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.x_tilde.len()
    }
}

/// `K x T` table of `E[Y_t | X = X^k] / D`; absent histories have empty rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMeans {
    pub m: Vec<Vec<f64>>,
    pub present: Vec<bool>,
}

impl CellMeans {
    /// Conditional means implied by a cell table over numeric outcome patterns.
    pub fn from_cells(index: &SupportIndex, cells: &CellProbabilities, distance: f64) -> Self {
        let t = index.periods();
        let m = (0..index.k())
            .map(|k| {
                if !cells.present[k] {
                    return Vec::new();
                }
                (0..t)
                    .map(|s| {
                        let e: f64 = cells.p_y[k].iter().zip(index.outcomes()).map(|(p, y)| p * y[s] as f64).sum();
                        e / distance
                    })
                    .collect()
            })
            .collect();
        Self { m, present: cells.present.clone() }
    }

    /// Mean of the row-`k` entries over the listed periods.
    pub fn average(&self, k: usize, periods: &[usize]) -> f64 {
        periods.iter().map(|&t| self.m[k][t]).sum::<f64>() / periods.len() as f64
    }
}

pub fn cell_means(data: &PanelDataset, index: &SupportIndex, query: &EffectQuery) -> Result<CellMeans> {
    let t = data.periods();
    let hk = history_indices(data, index)?;
    let mut sums = vec![vec![0.0; t]; index.k()];
    let mut counts = vec![0usize; index.k()];
    for (i, &k) in hk.iter().enumerate() {
        counts[k] += 1;
        for (s, &y) in data.outcomes(i).iter().enumerate() {
            sums[k][s] += y as f64;
        }
    }
    let m = sums
        .into_iter()
        .zip(&counts)
        .map(
            |(row, &c)| {
                if c == 0 {
                    Vec::new()
                } else {
                    row.into_iter().map(|v| v / c as f64 / query.distance).collect()
                }
            },
        )
        .collect();
    Ok(CellMeans { m, present: counts.iter().map(|&c| c > 0).collect() })
}
