//! Linear fixed-effects slopes and their population limits.

use alloc::vec::Vec;

use crate::panel::{CellProbabilities, EffectQuery, PanelDataset, SupportIndex};
use crate::{Error, Result};

fn require_binary_scalar(data: &PanelDataset) -> Result<()> {
    if data.dim() != 1 {
        return Err(Error::InvalidPanel("within estimator needs a scalar regressor".into()));
    }
    for i in 0..data.n() {
        if data.history(i).iter().any(|&v| v != 0 && v != 1) {
            return Err(Error::InvalidPanel("within estimator needs a binary regressor".into()));
        }
    }
    Ok(())
}

/// Within (linear fixed-effects) slope for a binary scalar regressor.
pub fn within_estimator(data: &PanelDataset) -> Result<f64> {
    require_binary_scalar(data)?;
    let t = data.periods() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..data.n() {
        let x = data.history(i);
        let mean = x.iter().sum::<i64>() as f64 / t;
        for (s, &y) in data.outcomes(i).iter().enumerate() {
            let d = x[s] as f64 - mean;
            num += d * y as f64;
            den += d * d;
        }
    }
    if den <= 0.0 {
        return Err(Error::DegenerateDesign);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithinDecomposition {
    /// Share of periods with `x = 1` in each history.
    pub share: Vec<f64>,
    pub variance: Vec<f64>,
    pub weights: Vec<f64>,
    pub plim: f64,
}

/// Probability limit of the within estimator given per-history effects.
pub fn within_plim(index: &SupportIndex, cells: &CellProbabilities, effects: &[f64]) -> Result<WithinDecomposition> {
    if effects.len() != index.k() {
        return Err(Error::DimensionMismatch { expected: index.k(), got: effects.len() });
    }
    if index.dim() != 1 {
        return Err(Error::InvalidPanel("within estimator needs a scalar regressor".into()));
    }
    let t = index.periods() as f64;
    let share: Vec<f64> = index.histories().iter().map(|h| h.iter().filter(|&&v| v == 1).count() as f64 / t).collect();
    let variance: Vec<f64> = share.iter().map(|r| r * (1.0 - r)).collect();
    let raw: Vec<f64> = cells.p_x.iter().zip(&variance).map(|(p, v)| p * v).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let plim = weights.iter().zip(effects).filter(|(w, _)| **w > 0.0).map(|(w, m)| w * m).sum();
    Ok(WithinDecomposition { share, variance, weights, plim })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageSlope {
    pub estimate: f64,
    pub identified_units: usize,
    pub identified_share: f64,
}

/// Per-unit slope `mean(Y | x~ periods) - mean(Y | x_ periods)` over units
/// whose history contains both values, averaged and divided by `D`.
pub fn chamberlain_estimator(data: &PanelDataset, query: &EffectQuery) -> Result<AverageSlope> {
    if query.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: query.dim() });
    }
    let mut total = 0.0;
    let mut n_star = 0usize;
    for i in 0..data.n() {
        let y = data.outcomes(i);
        let (mut s_hi, mut c_hi, mut s_lo, mut c_lo) = (0.0, 0usize, 0.0, 0usize);
        for (t, &yt) in y.iter().enumerate() {
            let x = data.regressor(i, t);
            if x == query.x_tilde.as_slice() {
                s_hi += yt as f64;
                c_hi += 1;
            } else if x == query.x_bar.as_slice() {
                s_lo += yt as f64;
                c_lo += 1;
            }
        }
        if c_hi > 0 && c_lo > 0 {
            n_star += 1;
            total += s_hi / c_hi as f64 - s_lo / c_lo as f64;
        }
    }
    if n_star == 0 {
        return Err(Error::NoIdentifiedUnits);
    }
    Ok(AverageSlope {
        estimate: total / n_star as f64 / query.distance,
        identified_units: n_star,
        identified_share: n_star as f64 / data.n() as f64,
    })
}

/// Classification of histories by which query values they contain.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPartition {
    /// Both values appear.
    pub both: Vec<usize>,
    /// Only `x~` appears.
    pub only_tilde: Vec<usize>,
    /// Only `x_` appears.
    pub only_bar: Vec<usize>,
    /// Observed histories with neither value.
    pub neither: Vec<usize>,
    /// Mass of histories with neither value, including unobserved mass.
    pub p0: f64,
}

impl SupportPartition {
    pub fn mass(&self, cells: &CellProbabilities, group: &[usize]) -> f64 {
        group.iter().map(|&k| cells.p_x[k]).sum()
    }
}

pub fn partition_support(index: &SupportIndex, cells: &CellProbabilities, query: &EffectQuery) -> SupportPartition {
    let mut part = SupportPartition {
        both: Vec::new(),
        only_tilde: Vec::new(),
        only_bar: Vec::new(),
        neither: Vec::new(),
        p0: 0.0,
    };
    for k in 0..index.k() {
        let has_tilde = !index.periods_with(k, &query.x_tilde).is_empty();
        let has_bar = !index.periods_with(k, &query.x_bar).is_empty();
        match (has_tilde, has_bar) {
            (true, true) => part.both.push(k),
            (true, false) => part.only_tilde.push(k),
            (false, true) => part.only_bar.push(k),
            (false, false) => part.neither.push(k),
        }
    }
    let covered = part.mass(cells, &part.both) + part.mass(cells, &part.only_tilde) + part.mass(cells, &part.only_bar);
    part.p0 = (1.0 - covered).max(0.0);
    part
}

/// Population limit of [`chamberlain_estimator`]: the mass-weighted mean of
/// the identified per-history effects over histories with both values.
pub fn chamberlain_plim(index: &SupportIndex, cells: &CellProbabilities, query: &EffectQuery) -> Result<f64> {
    let means = crate::panel::CellMeans::from_cells(index, cells, query.distance);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..index.k() {
        if !cells.present[k] {
            continue;
        }
        let hi = index.periods_with(k, &query.x_tilde);
        let lo = index.periods_with(k, &query.x_bar);
        if hi.is_empty() || lo.is_empty() {
            continue;
        }
        num += cells.p_x[k] * (means.average(k, &hi) - means.average(k, &lo));
        den += cells.p_x[k];
    }
    if den <= 0.0 {
        return Err(Error::NoIdentifiedUnits);
    }
    Ok(num / den)
}
